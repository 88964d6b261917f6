#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace cvp {

struct ScoreEntry {
  std::string id;
  double score = 0.0;

  bool operator==(const ScoreEntry&) const = default;
};

// Per-sentence continuous scores from one scorer, in a meaningful order
// (input order for projections, file order for ingested scores).
struct ScoreSet {
  std::string scorer_name;
  std::vector<ScoreEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  std::vector<double> scores() const;

  // id -> position in entries
  std::unordered_map<std::string, std::size_t> index() const;

  // Throws DuplicateId / NonFinite.
  void validate() const;
};

}  // namespace cvp
