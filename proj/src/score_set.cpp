#include "cvp/score_set.hpp"

#include <cmath>

#include "cvp/error.hpp"

namespace cvp {

std::vector<double> ScoreSet::scores() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.score);
  return out;
}

std::unordered_map<std::string, std::size_t> ScoreSet::index() const {
  std::unordered_map<std::string, std::size_t> out;
  out.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) out.emplace(entries[i].id, i);
  return out;
}

void ScoreSet::validate() const {
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (!seen.emplace(e.id, i).second) {
      throw Error(ErrorKind::DuplicateId, "score set '" + scorer_name + "' repeats id '" + e.id + "'");
    }
    if (!std::isfinite(e.score)) {
      throw Error(ErrorKind::NonFinite, "score set '" + scorer_name + "' has non-finite score for '" + e.id + "'");
    }
  }
}

}  // namespace cvp
