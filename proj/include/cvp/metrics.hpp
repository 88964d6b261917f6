#pragma once

// Rank correlation, inter-rater agreement and distribution-shape diagnostics.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cvp/score_set.hpp"

namespace cvp {

// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of average ranks over paired values.
// Throws DimensionMismatch, TooFewPoints (n < 2), ZeroVariance.
double spearman_rho(std::span<const double> x, std::span<const double> y);

// Spearman over the ids the two sets share, paired in a's order.
double spearman_rho(const ScoreSet& a, const ScoreSet& b);

// Items x raters, with missing cells.
class RatingMatrix {
 public:
  RatingMatrix() = default;
  RatingMatrix(std::size_t items, std::size_t raters);
  // Ragged rows are padded with missing cells.
  static RatingMatrix from_rows(const std::vector<std::vector<std::optional<double>>>& rows);

  std::size_t items() const { return items_; }
  std::size_t raters() const { return raters_; }

  const std::optional<double>& at(std::size_t item, std::size_t rater) const {
    return cells_[item * raters_ + rater];
  }
  void set(std::size_t item, std::size_t rater, std::optional<double> value) {
    cells_[item * raters_ + rater] = value;
  }

 private:
  std::size_t items_ = 0;
  std::size_t raters_ = 0;
  std::vector<std::optional<double>> cells_;
};

enum class AlphaLevel { Interval, Ordinal };

// Krippendorff's alpha = 1 - D_o / D_e over pairable values (items with at
// least two ratings). Interval uses the squared difference; ordinal the
// squared difference of pooled mid-ranks. Returns 1 when every pairable value
// is identical (no expected disagreement). Throws InsufficientData when fewer
// than two items carry two or more ratings.
double krippendorff_alpha(const RatingMatrix& ratings, AlphaLevel level = AlphaLevel::Interval);

struct PairwiseRho {
  double mean = 0.0;
  std::size_t pairs_used = 0;
  std::size_t pairs_skipped = 0;  // fewer than two shared items, or a constant rater
};

// Mean Spearman rho over all rater pairs on the items both rated.
// Throws InsufficientOverlap when no pair yields a correlation.
PairwiseRho pairwise_irr(const RatingMatrix& ratings);
double pairwise_irr_rho(const RatingMatrix& ratings);

struct DiagnosticsParams {
  double zero_eps = 0.02;     // fraction of the score range
  double extreme_eps = 0.02;  // fraction of the score range
  std::size_t n_bins = 50;
};

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
};

struct DistributionDiagnostics {
  std::size_t n = 0;
  double min = 0.0;
  double max = 0.0;
  std::vector<HistogramBin> histogram;
  std::size_t n_distinct = 0;
  // |s| <= zero_eps * range
  double mass_at_zero = 0.0;
  // within extreme_eps * range of min or max, excluding the zero zone
  double mass_at_extremes = 0.0;
  // mass_at_zero + mass_at_extremes, the mass of the union of both zones
  double trimodality_index = 0.0;
};

// Equal-width bins over [min, max], each half-open except the last.
// Throws EmptyScoreSet, InvalidArgument on bad parameters.
DistributionDiagnostics distribution_diagnostics(std::span<const double> scores,
                                                 const DiagnosticsParams& params = {});
DistributionDiagnostics distribution_diagnostics(const ScoreSet& scores,
                                                 const DiagnosticsParams& params = {});

}  // namespace cvp
