#pragma once

// Baseline scorers to compare projections against: a small lexicon scorer,
// the conversion of categorical classifier output into signed intensities,
// and ingestion of score files produced by external models.

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cvp/score_set.hpp"

namespace cvp {

enum class Polarity { Positive, Neutral, Negative };

// Case-insensitive "positive" / "neutral" / "negative"; throws UnknownLabel.
Polarity parse_polarity(std::string_view label);

struct ClassifierOutput {
  std::string id;
  Polarity label = Polarity::Neutral;
  double confidence = 0.0;  // softmax probability of the predicted class, in [0, 1]
};

// +p for positive, -p for negative, exactly 0 for neutral.
double convert_confidence(const ClassifierOutput& output);

// Lowercased UTF-8 word tokens, split on Unicode word boundaries; punctuation
// and whitespace segments are dropped.
std::vector<std::string> tokenize_words(std::string_view text);

struct LexiconMatch {
  double sum = 0.0;  // signed, after negation
  std::size_t matched = 0;
};

// Token polarity table plus negators. A negator flips the sign of the next
// matched token at most three tokens after it.
class Lexicon {
 public:
  static constexpr std::size_t kNegationWindow = 3;

  // Throws DuplicateId on a repeated token, NonFinite on a bad score,
  // InvalidArgument when there are no scored entries.
  Lexicon(std::unordered_map<std::string, double> entries, std::unordered_set<std::string> negators = {});

  // One entry per line: token, whitespace or tab, then a number or the word
  // "negator". Blank lines and lines starting with '#' are ignored. Tokens
  // are lowercased.
  static Lexicon load(std::istream& in);
  static Lexicon load(const std::filesystem::path& path);

  const std::unordered_map<std::string, double>& entries() const { return entries_; }
  const std::unordered_set<std::string>& negators() const { return negators_; }

  // Unnormalized signed sum over matches; additive across texts with no
  // negation crossing the boundary.
  LexiconMatch match(std::string_view text) const;
  LexiconMatch match_tokens(const std::vector<std::string>& tokens) const;

 private:
  std::unordered_map<std::string, double> entries_;
  std::unordered_set<std::string> negators_;
};

// match.sum / sqrt(match.matched), or 0 when nothing matched.
double lexicon_score(std::string_view text, const Lexicon& lexicon);

// Score file with a header row (delimited) or JSON lines. Each row carries an
// id and either `score`, or `label` plus `confidence` (converted to a signed
// intensity). Throws Malformed (with row number), UnknownLabel, EmptyFile,
// MissingColumn, DuplicateId.
ScoreSet ingest_external_scores(std::istream& in, std::string scorer_name, char delimiter = '\t');
ScoreSet ingest_external_scores(const std::filesystem::path& path, std::string scorer_name);

}  // namespace cvp
