#pragma once

// Sentiment arcs over a document's sentence scores, and affine calibration of
// raw scores for presentation.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cvp/score_set.hpp"

namespace cvp {

enum class SmoothingMethod { MovingAverage, Gaussian };

std::string_view to_string(SmoothingMethod method);
SmoothingMethod parse_smoothing_method(std::string_view name);  // throws InvalidArgument

// Same length as the input. Windows shrink at the boundaries instead of
// padding.
//  MovingAverage: `window` is a positive integer w; output i averages indices
//    [i - (w-1)/2, i + w/2] clipped to the sequence.
//  Gaussian: `window` is the bandwidth sigma > 0; output i is the weighted
//    mean over [i - r, i + r], r = ceil(3 sigma), clipped, with weights
//    exp(-k^2 / (2 sigma^2)) renormalized over the clipped support.
// Both are computed as offsets from a reference element, so constant input is
// returned unchanged. Throws EmptyInput, BadWindow.
std::vector<double> smooth_arc(std::span<const double> scores, SmoothingMethod method, double window);

struct ArcPoint {
  std::size_t position = 0;
  std::string id;
  double raw = 0.0;
  double smoothed = 0.0;
};

struct SentimentArc {
  std::string document_id;
  SmoothingMethod method = SmoothingMethod::MovingAverage;
  double window = 1.0;
  std::vector<ArcPoint> points;  // positions strictly increasing
};

// Positions are 0..n-1 in the given order.
SentimentArc build_arc(std::string document_id, const ScoreSet& ordered_scores, SmoothingMethod method,
                       double window);

// Header: document_id, position, id, raw, smoothed.
void write_arc_tsv(std::ostream& out, std::span<const SentimentArc> arcs);

// --- calibration ---------------------------------------------------------

struct QuantileSpec {
  double low_q = 0.0;
  double high_q = 1.0;
  double target_low = -1.0;
  double target_high = 1.0;
};

struct AffineMap {
  double scale = 1.0;
  double offset = 0.0;

  double operator()(double x) const { return scale * x + offset; }
};

// Linear-interpolation sample quantile (the "type 7" definition); q in [0, 1].
double quantile(std::span<const double> values, double q);

// Sends the low/high quantiles of `source` onto the targets. Throws
// DegenerateReference when the targets are not increasing or the two source
// quantiles coincide, EmptyScoreSet on empty input.
AffineMap fit_calibration(std::span<const double> source, const QuantileSpec& spec);
// Targets are the same quantiles of `reference`.
AffineMap fit_calibration(std::span<const double> source, std::span<const double> reference, double low_q,
                          double high_q);

ScoreSet apply_calibration(const ScoreSet& scores, const AffineMap& map);

ScoreSet calibrate(const ScoreSet& scores, const QuantileSpec& spec);
ScoreSet calibrate(const ScoreSet& scores, const ScoreSet& reference, double low_q = 0.0, double high_q = 1.0);

// --- smoothing collapse ---------------------------------------------------

// A continuous series (a slow sinusoid plus Gaussian noise) and its
// three-valued counterpart, produced by ranking and cutting the series into
// {-1, 0, +1} with a neutral share in the middle. The continuous series is
// rescaled to the mean and standard deviation of the three-valued one so
// both are compared on equal footing, then both are smoothed with the same
// moving average.
struct CollapseParams {
  std::size_t length = 500;
  std::size_t window = 50;
  double neutral_share = 0.4;
  double cycles = 2.0;
  double amplitude = 0.5;
  double noise_sd = 0.5;
  std::uint64_t seed = 1;
};

struct CollapseResult {
  std::vector<double> continuous;  // after rescaling
  std::vector<double> ternary;
  double var_smoothed_continuous = 0.0;
  double var_smoothed_ternary = 0.0;
};

CollapseResult simulate_smoothing_collapse(const CollapseParams& params);

// Population variance.
double variance(std::span<const double> values);

}  // namespace cvp
