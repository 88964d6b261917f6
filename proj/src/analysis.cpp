#include "cvp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "cvp/error.hpp"
#include "cvp/random.hpp"
#include "cvp/text/dsv.hpp"
#include "cvp/text/format.hpp"

namespace cvp {

std::string_view to_string(SmoothingMethod method) {
  switch (method) {
    case SmoothingMethod::MovingAverage: return "moving_average";
    case SmoothingMethod::Gaussian: return "gaussian";
  }
  return "?";
}

SmoothingMethod parse_smoothing_method(std::string_view name) {
  const std::string lower = text::to_lower_ascii(text::trim(name));
  if (lower == "moving_average" || lower == "moving-average" || lower == "ma") return SmoothingMethod::MovingAverage;
  if (lower == "gaussian") return SmoothingMethod::Gaussian;
  throw Error(ErrorKind::InvalidArgument, "unknown smoothing method '" + std::string(name) + "'");
}

namespace {

std::vector<double> moving_average(std::span<const double> x, std::size_t w) {
  const std::size_t n = x.size();
  const std::size_t left = (w - 1) / 2;
  const std::size_t right = w / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= left ? i - left : 0;
    const std::size_t hi = std::min(n - 1, i + right);
    const double ref = x[i];
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += x[j] - ref;
    out[i] = ref + acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<double> gaussian(std::span<const double> x, double sigma) {
  const std::size_t n = x.size();
  const double reach = std::ceil(3.0 * sigma);
  const std::size_t r = reach >= static_cast<double>(n) ? n : static_cast<std::size_t>(reach);
  std::vector<double> kernel(r + 1);
  for (std::size_t k = 0; k <= r; ++k) {
    const double kk = static_cast<double>(k);
    kernel[k] = std::exp(-kk * kk / (2.0 * sigma * sigma));
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= r ? i - r : 0;
    const std::size_t hi = std::min(n - 1, i + r);
    const double ref = x[i];
    double acc = 0.0, weight = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) {
      const double k = kernel[j > i ? j - i : i - j];
      acc += k * (x[j] - ref);
      weight += k;
    }
    out[i] = ref + acc / weight;
  }
  return out;
}

}  // namespace

std::vector<double> smooth_arc(std::span<const double> scores, SmoothingMethod method, double window) {
  if (scores.empty()) throw Error(ErrorKind::EmptyInput, "cannot smooth an empty arc");
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error(ErrorKind::NonFinite, "arc contains a non-finite score");
  }
  if (method == SmoothingMethod::MovingAverage) {
    if (!(window >= 1.0) || !std::isfinite(window) || window != std::floor(window)) {
      throw Error(ErrorKind::BadWindow, "moving average window must be a positive integer, got " +
                                            text::format_double(window));
    }
    return moving_average(scores, static_cast<std::size_t>(window));
  }
  if (!(window > 0.0) || !std::isfinite(window)) {
    throw Error(ErrorKind::BadWindow, "gaussian bandwidth must be positive, got " + text::format_double(window));
  }
  return gaussian(scores, window);
}

SentimentArc build_arc(std::string document_id, const ScoreSet& ordered_scores, SmoothingMethod method,
                       double window) {
  const auto raw = ordered_scores.scores();
  const auto smoothed = smooth_arc(raw, method, window);
  SentimentArc arc;
  arc.document_id = std::move(document_id);
  arc.method = method;
  arc.window = window;
  arc.points.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    arc.points.push_back({i, ordered_scores.entries[i].id, raw[i], smoothed[i]});
  }
  return arc;
}

void write_arc_tsv(std::ostream& out, std::span<const SentimentArc> arcs) {
  text::write_row(out, {"document_id", "position", "id", "raw", "smoothed"}, '\t');
  for (const auto& arc : arcs) {
    for (const auto& p : arc.points) {
      text::write_row(out,
                      {arc.document_id, std::to_string(p.position), p.id, text::format_double(p.raw),
                       text::format_double(p.smoothed)},
                      '\t');
    }
  }
}

// --- calibration ---------------------------------------------------------

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::EmptyScoreSet, "quantile of no values");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::InvalidArgument, "quantile level outside [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

AffineMap affine_between(double src_low, double src_high, double dst_low, double dst_high) {
  if (!(dst_high > dst_low)) {
    throw Error(ErrorKind::DegenerateReference, "calibration targets must be increasing (" +
                                                    text::format_double(dst_low) + ", " +
                                                    text::format_double(dst_high) + ")");
  }
  if (!(src_high > src_low)) {
    throw Error(ErrorKind::DegenerateReference, "score quantiles coincide at " + text::format_double(src_low));
  }
  AffineMap map;
  map.scale = (dst_high - dst_low) / (src_high - src_low);
  map.offset = dst_low - map.scale * src_low;
  return map;
}

void check_levels(double low_q, double high_q) {
  if (!(low_q >= 0.0 && high_q <= 1.0 && low_q < high_q)) {
    throw Error(ErrorKind::InvalidArgument, "quantile levels must satisfy 0 <= low < high <= 1");
  }
}

}  // namespace

AffineMap fit_calibration(std::span<const double> source, const QuantileSpec& spec) {
  check_levels(spec.low_q, spec.high_q);
  return affine_between(quantile(source, spec.low_q), quantile(source, spec.high_q), spec.target_low,
                        spec.target_high);
}

AffineMap fit_calibration(std::span<const double> source, std::span<const double> reference, double low_q,
                          double high_q) {
  check_levels(low_q, high_q);
  return affine_between(quantile(source, low_q), quantile(source, high_q), quantile(reference, low_q),
                        quantile(reference, high_q));
}

ScoreSet apply_calibration(const ScoreSet& scores, const AffineMap& map) {
  ScoreSet out;
  out.scorer_name = scores.scorer_name;
  out.entries.reserve(scores.size());
  for (const auto& e : scores.entries) out.entries.push_back({e.id, map(e.score)});
  return out;
}

ScoreSet calibrate(const ScoreSet& scores, const QuantileSpec& spec) {
  return apply_calibration(scores, fit_calibration(scores.scores(), spec));
}

ScoreSet calibrate(const ScoreSet& scores, const ScoreSet& reference, double low_q, double high_q) {
  return apply_calibration(scores, fit_calibration(scores.scores(), reference.scores(), low_q, high_q));
}

// --- smoothing collapse ---------------------------------------------------

double variance(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "variance of no values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / n;
}

CollapseResult simulate_smoothing_collapse(const CollapseParams& p) {
  if (p.length < 2 || p.window < 1 || !(p.neutral_share >= 0.0 && p.neutral_share < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "collapse simulation needs length >= 2, window >= 1, share in [0, 1)");
  }
  const std::size_t n = p.length;
  NormalSource noise(p.seed);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = 2.0 * std::numbers::pi * p.cycles * static_cast<double>(i) / static_cast<double>(n);
    c[i] = p.amplitude * std::sin(phase) + noise.next(0.0, p.noise_sd);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c[a] < c[b]; });
  const auto tail = static_cast<std::size_t>(std::round((1.0 - p.neutral_share) / 2.0 * static_cast<double>(n)));
  CollapseResult out;
  out.ternary.assign(n, 0.0);
  for (std::size_t k = 0; k < tail; ++k) {
    out.ternary[order[k]] = -1.0;
    out.ternary[order[n - 1 - k]] = 1.0;
  }

  const double c_mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(n);
  const double c_sd = std::sqrt(variance(c));
  const double t_mean = std::accumulate(out.ternary.begin(), out.ternary.end(), 0.0) / static_cast<double>(n);
  const double t_sd = std::sqrt(variance(out.ternary));
  if (!(c_sd > 0.0) || !(t_sd > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "collapse simulation produced a constant series");
  }
  out.continuous.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.continuous[i] = t_mean + (c[i] - c_mean) / c_sd * t_sd;

  const double w = static_cast<double>(p.window);
  out.var_smoothed_continuous = variance(smooth_arc(out.continuous, SmoothingMethod::MovingAverage, w));
  out.var_smoothed_ternary = variance(smooth_arc(out.ternary, SmoothingMethod::MovingAverage, w));
  return out;
}

}  // namespace cvp
