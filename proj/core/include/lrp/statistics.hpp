#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

namespace lrp {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
};

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
  double second_moment = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Two-pass summary in the given order.
Summary summarize(std::span<const double> values);

/// Linear-interpolation quantile (type 7) of unsorted data.
double quantile(std::span<const double> values, double p);

/// Keeps one value per replicate index. Merging is a union of disjoint
/// replicate sets and every statistic is computed in index order, so any
/// partition into batches, merged in any order, reports the same digits.
class ReplicateAccumulator {
 public:
  void add(std::uint64_t replicate, double value);
  void merge(const ReplicateAccumulator& other);

  std::size_t size() const { return values_.size(); }
  std::vector<double> values() const;
  Summary summary() const;

  friend bool operator==(const ReplicateAccumulator&, const ReplicateAccumulator&) = default;

 private:
  std::map<std::uint64_t, double> values_;
};

Interval normal_ci95(double mean, double std_error);

/// Percentile bootstrap. Each group is resampled with replacement
/// independently; `statistic` sees the resampled groups.
using GroupStatistic = std::function<double(std::span<const std::vector<double>>)>;

Interval bootstrap_ci(std::span<const std::vector<double>> groups, const GroupStatistic& statistic,
                      std::size_t resamples, std::uint64_t seed, double level = 0.95);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  double reduced_chi_squared = 0.0;
};

/// Weighted least squares of y on x. The slope error is the formal
/// (Σ w (x − x̄)²)^{-1/2}, inflated by √χ²_red when the scatter exceeds the
/// weights.
LinearFit weighted_fit(std::span<const double> x, std::span<const double> y,
                       std::span<const double> weights);

}  // namespace lrp
