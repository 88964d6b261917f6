#pragma once

// Scoring a scorer against human gold ratings, per corpus slice, and
// side-by-side comparison of several scorers.

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cvp/corpus.hpp"
#include "cvp/metrics.hpp"
#include "cvp/score_set.hpp"

namespace cvp {

struct EvaluationOptions {
  std::vector<std::string> slice_keys;  // "genre", "language", "source"
  DiagnosticsParams diagnostics;
  AlphaLevel alpha_level = AlphaLevel::Interval;
  // When set, only these ids are evaluated.
  std::optional<std::unordered_set<std::string>> restrict_to;
  // Ids used to fit the concept vector. Evaluating any of them is an error
  // unless allow_leakage is set, in which case the report is watermarked.
  std::unordered_set<std::string> concept_ids;
  bool allow_leakage = false;
};

struct IrrSummary {
  std::optional<double> alpha;
  std::optional<double> rho_mean_pairwise;
  std::size_t items = 0;
};

struct SliceResult {
  std::string key;    // "all" for the overall row
  std::string value;  // tag value, "all" for the overall row
  std::size_t n = 0;  // ids present in both the scores and the gold
  std::optional<double> spearman_rho;
  std::string note;  // why rho is missing, if it is
  std::optional<IrrSummary> irr;

  std::string column_name() const;
};

struct EvaluationReport {
  std::string scorer_name;
  std::string gold_name = "gold";
  std::string encoder;  // embedding encoder, when known
  std::vector<SliceResult> slices;  // overall first, then per key and value
  std::optional<IrrSummary> irr;    // overall agreement among annotators
  std::vector<std::pair<std::string, DistributionDiagnostics>> distribution;  // scorer, then gold
  std::size_t leaked_ids = 0;
  std::string watermark;  // non-empty when leakage was allowed
};

// Throws Leakage, plus ScoreSet validation errors.
EvaluationReport evaluate(std::span<const LabeledSentence> corpus, const ScoreSet& scores,
                          const EvaluationOptions& options);

struct ComparisonCell {
  std::optional<double> rho;
  std::size_t n = 0;
  std::optional<std::size_t> rank;  // 1 = best; equal rho, equal rank
};

struct ComparisonRow {
  std::string scorer_name;
  std::vector<ComparisonCell> cells;  // parallel to ComparisonTable::columns
};

struct ComparisonTable {
  std::vector<std::string> columns;  // "all", then "key=value"
  std::vector<ComparisonRow> rows;   // best overall first, ties by name
  std::vector<std::optional<IrrSummary>> irr;  // per column
  std::string watermark;
};

ComparisonTable compare_scorers(std::span<const LabeledSentence> corpus,
                                std::span<const ScoreSet> scorers, const EvaluationOptions& options);

nlohmann::json to_json(const DistributionDiagnostics& diag);
nlohmann::json to_json(const EvaluationReport& report);
nlohmann::json to_json(const ComparisonTable& table);

// Tab-separated, slices as columns: rows n, irr_rho, irr_alpha, <scorer>.
void write_report_tsv(std::ostream& out, const EvaluationReport& report);
// Rows are scorers; each slice has a rho column and a rank column.
void write_comparison_tsv(std::ostream& out, const ComparisonTable& table);
// bin_left, bin_right, count
void write_histogram_tsv(std::ostream& out, const DistributionDiagnostics& diag);

}  // namespace cvp
