#include "cvp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cvp/error.hpp"

namespace cvp {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::DimensionMismatch, "spearman_rho needs paired inputs of equal length");
  }
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorKind::TooFewPoints, "spearman_rho needs at least 2 points, got " + std::to_string(n));
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  // mean rank is (n + 1) / 2 with or without ties
  const double mean = (static_cast<double>(n) + 1.0) / 2.0;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorKind::ZeroVariance, "spearman_rho input is constant");
  }
  const double rho = sxy / std::sqrt(sxx * syy);
  return std::clamp(rho, -1.0, 1.0);
}

double spearman_rho(const ScoreSet& a, const ScoreSet& b) {
  const auto b_index = b.index();
  std::vector<double> x, y;
  for (const auto& e : a.entries) {
    auto it = b_index.find(e.id);
    if (it == b_index.end()) continue;
    x.push_back(e.score);
    y.push_back(b.entries[it->second].score);
  }
  return spearman_rho(x, y);
}

// --- agreement -------------------------------------------------------------

RatingMatrix::RatingMatrix(std::size_t items, std::size_t raters)
    : items_(items), raters_(raters), cells_(items * raters) {}

RatingMatrix RatingMatrix::from_rows(const std::vector<std::vector<std::optional<double>>>& rows) {
  std::size_t raters = 0;
  for (const auto& r : rows) raters = std::max(raters, r.size());
  RatingMatrix m(rows.size(), raters);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m.set(i, j, rows[i][j]);
  }
  return m;
}

namespace {

double sum_sq_dev(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss;
}

}  // namespace

double krippendorff_alpha(const RatingMatrix& ratings, AlphaLevel level) {
  // pairable values, grouped by item
  std::vector<std::vector<double>> units;
  for (std::size_t i = 0; i < ratings.items(); ++i) {
    std::vector<double> unit;
    for (std::size_t r = 0; r < ratings.raters(); ++r) {
      if (const auto& v = ratings.at(i, r)) {
        if (!std::isfinite(*v)) throw Error(ErrorKind::NonFinite, "non-finite rating in item " + std::to_string(i));
        unit.push_back(*v);
      }
    }
    if (unit.size() >= 2) units.push_back(std::move(unit));
  }
  if (units.size() < 2) {
    throw Error(ErrorKind::InsufficientData,
                "krippendorff_alpha needs at least 2 items with 2 or more ratings");
  }

  if (level == AlphaLevel::Ordinal) {
    // The ordinal metric is the interval metric on pooled mid-ranks.
    std::vector<double> pooled;
    for (const auto& u : units) pooled.insert(pooled.end(), u.begin(), u.end());
    std::sort(pooled.begin(), pooled.end());
    for (auto& u : units) {
      for (double& v : u) {
        const auto lo = std::lower_bound(pooled.begin(), pooled.end(), v) - pooled.begin();
        const auto hi = std::upper_bound(pooled.begin(), pooled.end(), v) - pooled.begin();
        v = (static_cast<double>(lo + 1) + static_cast<double>(hi)) / 2.0;
      }
    }
  }

  std::vector<double> all;
  double observed = 0.0;  // sum over units of sum_{i != j} delta / (m_u - 1)
  for (const auto& u : units) {
    const double m = static_cast<double>(u.size());
    observed += 2.0 * m * sum_sq_dev(u) / (m - 1.0);
    all.insert(all.end(), u.begin(), u.end());
  }
  const double n = static_cast<double>(all.size());
  const double d_observed = observed / n;
  const double d_expected = 2.0 * sum_sq_dev(all) / (n - 1.0);
  if (d_expected == 0.0) return 1.0;
  return 1.0 - d_observed / d_expected;
}

PairwiseRho pairwise_irr(const RatingMatrix& ratings) {
  PairwiseRho out;
  if (ratings.raters() < 2) {
    throw Error(ErrorKind::InsufficientOverlap, "pairwise agreement needs at least 2 raters");
  }
  double total = 0.0;
  for (std::size_t a = 0; a < ratings.raters(); ++a) {
    for (std::size_t b = a + 1; b < ratings.raters(); ++b) {
      std::vector<double> x, y;
      for (std::size_t i = 0; i < ratings.items(); ++i) {
        const auto& va = ratings.at(i, a);
        const auto& vb = ratings.at(i, b);
        if (va && vb) {
          x.push_back(*va);
          y.push_back(*vb);
        }
      }
      try {
        total += spearman_rho(x, y);
        ++out.pairs_used;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::TooFewPoints && e.kind() != ErrorKind::ZeroVariance) throw;
        ++out.pairs_skipped;
      }
    }
  }
  if (out.pairs_used == 0) {
    throw Error(ErrorKind::InsufficientOverlap, "no rater pair shares two or more varying items");
  }
  out.mean = total / static_cast<double>(out.pairs_used);
  return out;
}

double pairwise_irr_rho(const RatingMatrix& ratings) { return pairwise_irr(ratings).mean; }

// --- distribution ----------------------------------------------------------

DistributionDiagnostics distribution_diagnostics(std::span<const double> scores,
                                                 const DiagnosticsParams& params) {
  if (scores.empty()) throw Error(ErrorKind::EmptyScoreSet, "no scores to summarize");
  if (!(params.zero_eps >= 0.0) || !(params.extreme_eps >= 0.0) || params.n_bins == 0) {
    throw Error(ErrorKind::InvalidArgument, "diagnostics need eps >= 0 and at least one bin");
  }
  DistributionDiagnostics out;
  out.n = scores.size();
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  out.min = *lo;
  out.max = *hi;
  const double range = out.max - out.min;

  const double width = range / static_cast<double>(params.n_bins);
  out.histogram.resize(params.n_bins);
  for (std::size_t b = 0; b < params.n_bins; ++b) {
    out.histogram[b].left = out.min + width * static_cast<double>(b);
    out.histogram[b].right = b + 1 == params.n_bins ? out.max : out.min + width * static_cast<double>(b + 1);
  }

  const double zero_tol = params.zero_eps * range;
  const double extreme_tol = params.extreme_eps * range;
  std::size_t at_zero = 0, at_extremes = 0;
  for (double s : scores) {
    std::size_t bin = 0;
    if (range > 0.0) {
      bin = static_cast<std::size_t>(std::floor((s - out.min) / width));
      bin = std::min(bin, params.n_bins - 1);
    }
    ++out.histogram[bin].count;
    if (std::abs(s) <= zero_tol) {
      ++at_zero;
    } else if (s <= out.min + extreme_tol || s >= out.max - extreme_tol) {
      ++at_extremes;
    }
  }

  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  out.n_distinct = static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());

  const double n = static_cast<double>(out.n);
  out.mass_at_zero = static_cast<double>(at_zero) / n;
  out.mass_at_extremes = static_cast<double>(at_extremes) / n;
  out.trimodality_index = static_cast<double>(at_zero + at_extremes) / n;
  return out;
}

DistributionDiagnostics distribution_diagnostics(const ScoreSet& scores,
                                                 const DiagnosticsParams& params) {
  return distribution_diagnostics(scores.scores(), params);
}

}  // namespace cvp
