#include "lrp/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lrp/error.hpp"
#include "lrp/rng.hpp"

namespace lrp {

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  double sum_sq = 0.0;
  s.min = values.front();
  s.max = values.front();
  for (const double v : values) {
    sum += v;
    sum_sq += v * v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  const auto n = static_cast<double>(values.size());
  s.mean = sum / n;
  s.second_moment = sum_sq / n;
  if (values.size() > 1) {
    double dev = 0.0;
    for (const double v : values) dev += (v - s.mean) * (v - s.mean);
    s.variance = dev / (n - 1.0);
    s.std_error = std::sqrt(s.variance / n);
  }
  return s;
}

double quantile(std::span<const double> values, double p) {
  if (values.empty()) fail(ErrorCode::invalid_data, "quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::invalid_argument, "quantile level outside [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void ReplicateAccumulator::add(std::uint64_t replicate, double value) {
  if (!values_.emplace(replicate, value).second) {
    fail(ErrorCode::invalid_argument, "replicate " + std::to_string(replicate) + " added twice");
  }
}

void ReplicateAccumulator::merge(const ReplicateAccumulator& other) {
  for (const auto& [replicate, value] : other.values_) add(replicate, value);
}

std::vector<double> ReplicateAccumulator::values() const {
  std::vector<double> out;
  out.reserve(values_.size());
  for (const auto& entry : values_) out.push_back(entry.second);
  return out;
}

Summary ReplicateAccumulator::summary() const {
  const auto v = values();
  return summarize(v);
}

Interval normal_ci95(double mean, double std_error) {
  constexpr double z = 1.959963984540054;
  return {mean - z * std_error, mean + z * std_error};
}

Interval bootstrap_ci(std::span<const std::vector<double>> groups, const GroupStatistic& statistic,
                      std::size_t resamples, std::uint64_t seed, double level) {
  if (resamples < 2) fail(ErrorCode::invalid_argument, "bootstrap needs at least two resamples");
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::invalid_argument, "confidence level outside (0, 1)");
  for (const auto& g : groups) {
    if (g.empty()) fail(ErrorCode::invalid_data, "bootstrap group is empty");
  }
  std::vector<double> stats;
  stats.reserve(resamples);
  std::vector<std::vector<double>> drawn(groups.size());
  for (std::size_t b = 0; b < resamples; ++b) {
    CounterRng rng(seed, stream_id(0xB007, b));
    for (std::size_t k = 0; k < groups.size(); ++k) {
      const auto& g = groups[k];
      drawn[k].resize(g.size());
      for (auto& x : drawn[k]) {
        const auto idx = std::min(g.size() - 1,
                                  static_cast<std::size_t>(rng.uniform() * static_cast<double>(g.size())));
        x = g[idx];
      }
    }
    stats.push_back(statistic(drawn));
  }
  const double tail = (1.0 - level) / 2.0;
  return {quantile(stats, tail), quantile(stats, 1.0 - tail)};
}

LinearFit weighted_fit(std::span<const double> x, std::span<const double> y,
                       std::span<const double> weights) {
  if (x.size() != y.size() || x.size() != weights.size()) {
    fail(ErrorCode::invalid_data, "regression inputs differ in length");
  }
  if (x.size() < 2) fail(ErrorCode::invalid_data, "regression needs at least two points");
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(weights[k] > 0.0) || !std::isfinite(weights[k])) {
      fail(ErrorCode::invalid_data, "regression weights must be positive and finite");
    }
    sw += weights[k];
    sx += weights[k] * x[k];
    sy += weights[k] * y[k];
  }
  const double xbar = sx / sw;
  const double ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - xbar;
    const double dy = y[k] - ybar;
    sxx += weights[k] * dx * dx;
    sxy += weights[k] * dx * dy;
    syy += weights[k] * dy * dy;
  }
  if (!(sxx > 0.0)) fail(ErrorCode::invalid_data, "regression needs at least two distinct x values");

  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double chi2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - (fit.intercept + fit.slope * x[k]);
    chi2 += weights[k] * r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - chi2 / syy : 1.0;
  const auto dof = static_cast<double>(x.size()) - 2.0;
  fit.reduced_chi_squared = dof > 0.0 ? chi2 / dof : 0.0;
  fit.slope_stderr = std::sqrt(1.0 / sxx) * std::max(1.0, std::sqrt(fit.reduced_chi_squared));
  return fit;
}

}  // namespace lrp
