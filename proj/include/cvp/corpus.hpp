#pragma once

// Annotated corpora: rating scales, ordinal labels, parsing and the
// concept/test split.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvp/score_set.hpp"

namespace cvp {

enum class Label { Positive, Negative, Neutral, Unknown };

std::string_view to_string(Label label);

// Bounds of a rating scale plus the closed thresholds used to derive labels:
// positive iff rating >= upper, negative iff rating <= lower. A scale without
// thresholds labels every rating Unknown (continuous gold only).
struct RatingScale {
  double min = 1.0;
  double max = 9.0;
  std::optional<double> lower = 3.0;
  std::optional<double> upper = 7.0;

  static RatingScale fiction4() { return {}; }

  // Throws InvalidArgument on inverted bounds or thresholds.
  void validate() const;
};

// Throws OutOfScale when the rating lies outside [scale.min, scale.max].
Label derive_label(double mean_rating, const RatingScale& scale);

struct LabeledSentence {
  std::string id;
  std::string text;
  std::vector<double> ratings;  // per annotator; empty when only a mean is known
  std::optional<double> mean_rating;
  Label label = Label::Unknown;
  std::string genre;
  std::string language;
  std::string source;

  // Value of "genre", "language" or "source"; throws InvalidArgument otherwise.
  const std::string& tag(std::string_view key) const;
};

bool is_known_tag(std::string_view key);

// --- parsing ---------------------------------------------------------------

enum class CorpusFormat { Delimited, JsonLines };

// Source field names for each LabeledSentence field.
struct ColumnMap {
  std::string id = "id";
  std::string text = "text";
  std::string rating = "rating";
  std::string ratings = "ratings";
  std::string genre = "genre";
  std::string language = "language";
  std::string source = "source";

  // JSON object overriding any subset of the keys above, e.g.
  // {"id": "sentence_id", "rating": "valence"}.
  static ColumnMap from_json(std::string_view json);
  static ColumnMap from_file(const std::filesystem::path& path);
};

struct CorpusFormatSpec {
  CorpusFormat format = CorpusFormat::Delimited;
  char delimiter = '\t';
  char ratings_separator = ';';  // inside a delimited `ratings` cell
  ColumnMap columns;
  RatingScale scale;

  // Format and delimiter implied by the file extension (.jsonl/.json, .csv,
  // anything else tab-separated).
  static CorpusFormatSpec for_path(const std::filesystem::path& path);
};

struct RowError {
  std::size_t row = 0;  // 1-based data row (header excluded)
  std::string message;
};

struct ParsedCorpus {
  std::vector<LabeledSentence> sentences;
  std::vector<RowError> errors;  // malformed rows, in row order
};

// Malformed rows are collected rather than dropped silently; rows parsed plus
// rows reported equals rows read. Throws EmptyFile (no header or no rows) and
// MissingColumn (no id, text or rating/ratings column).
ParsedCorpus parse_corpus(std::istream& in, const CorpusFormatSpec& spec);
ParsedCorpus read_corpus(const std::filesystem::path& path, const CorpusFormatSpec& spec);

// Mean ratings of rated sentences, in corpus order.
ScoreSet gold_scores(std::span<const LabeledSentence> corpus, std::string name = "gold");

// --- concept/test split ----------------------------------------------------

struct SplitSpec {
  double concept_fraction = 0.4;
  std::uint64_t seed = 0;
  std::vector<std::string> stratify_by;  // tag keys, e.g. {"genre"}

  void validate() const;
};

struct SplitResult {
  std::vector<LabeledSentence> concept_corpus;  // positive and negative only
  std::vector<LabeledSentence> test_set;        // everything else
  std::vector<std::string> warnings;            // e.g. an empty class
};

// Per class (and per stratum), round(concept_fraction * n) half away from
// zero of the positives and of the negatives go to the concept corpus; the
// choice is a seeded shuffle of the ids in sorted order, so membership depends
// only on (ids, labels, tags, seed). Neutral and unknown sentences always go to
// the test set. Both outputs are sorted by id. Throws EmptyInput,
// InvalidArgument, DuplicateId.
SplitResult split_concept_test(std::span<const LabeledSentence> sentences, const SplitSpec& spec);

// In-place Fisher-Yates shuffle driven by std::mt19937_64 with the bounded
// draw j = (u64 * (i + 1)) >> 64. Fixed so splits replicate across builds.
void seeded_shuffle(std::vector<std::string>& ids, std::mt19937_64& engine);

}  // namespace cvp
