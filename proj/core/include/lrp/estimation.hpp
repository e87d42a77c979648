#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "lrp/model.hpp"
#include "lrp/solver.hpp"
#include "lrp/statistics.hpp"

namespace lrp {

enum class Quantity { lambda_pp, point_to_box, box_to_box_conditioned, hat_R };

std::string_view to_string(Quantity q);

struct CampaignOptions {
  std::size_t replicates = 200;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  // Explicit exterior sites reach truncation_factor · n.
  double truncation_factor = 8.0;
  SolverOptions solver;

  void validate() const;
  Site truncation(Site n) const;
};

/// One replicate of a quantity at scale n:
///   lambda_pp               R_{[0,n)}(0, n−1)
///   point_to_box            R(0, [−n,n]^c)
///   box_to_box_conditioned  R([−n,n], [−2n,2n]^c) given no edge joins the two
///   hat_R                   R̂([0,n), [2n,3n)) on the window [0, 3n)
/// The replicate's streams are keyed by (quantity, n, replicate) under the
/// campaign seed.
double replicate_value(Quantity q, double beta, Site n, const CampaignOptions& options,
                       std::uint64_t replicate);

/// Box-to-box resistance on the window [−2n, 2n] with or without the
/// conditioning; both variants share every random stream.
double box_to_box_value(double beta, Site n, const CampaignOptions& options,
                        std::uint64_t replicate, bool conditioned);

/// Replicates [first, first + count), spread over options.threads workers.
ReplicateAccumulator collect(Quantity q, double beta, Site n, const CampaignOptions& options,
                             std::uint64_t first, std::size_t count);

struct Estimate {
  Site n = 0;
  Quantity quantity = Quantity::lambda_pp;
  double mean = 0.0;
  double std_error = 0.0;
  Interval ci95;
  std::size_t replicates = 0;
  double second_moment = 0.0;
  std::map<double, double> quantiles;
};

Estimate finalize(Quantity q, Site n, const ReplicateAccumulator& acc);

Estimate estimate(Quantity q, double beta, Site n, const CampaignOptions& options);
Estimate estimate_lambda(double beta, Site n, const CampaignOptions& options);
Estimate estimate_point_to_box(double beta, Site n, const CampaignOptions& options);
Estimate estimate_box_to_box_conditioned(double beta, Site n, const CampaignOptions& options);

struct ExponentFit {
  double delta_hat = 0.0;
  double std_error = 0.0;
  double r_squared = 0.0;
  double intercept = 0.0;
  bool weighted = true;  // false when some scale had zero spread
};

/// Least squares of log(mean) on log(n), weighted by mean²/stderr². Needs
/// at least four scales.
ExponentFit fit_exponent(std::span<const Estimate> estimates);
/// The same regression on any number (≥ 2) of scales.
ExponentFit fit_power_law(std::span<const Estimate> estimates);

struct MultiplicativityRow {
  Site m = 0;
  Site n = 0;
  bool applicable = false;  // scale 1 carries no resistance
  double ratio = 0.0;       // Λ̂(mn) / (Λ̂(m) Λ̂(n))
  double std_error = 0.0;   // delta method
  Interval ci95;            // percentile bootstrap
};

/// Λ̂ replicates by scale, shared across reports.
using LambdaSamples = std::map<Site, std::vector<double>>;

const std::vector<double>& lambda_samples(LambdaSamples& cache, double beta, Site n,
                                          const CampaignOptions& options);

std::vector<MultiplicativityRow> multiplicativity_report(
    double beta, std::span<const std::pair<Site, Site>> pairs, const CampaignOptions& options,
    LambdaSamples* cache = nullptr);

struct RatioEstimate {
  double ratio = 0.0;
  Interval ci95;
  std::size_t replicates = 0;
};

/// mean(R²) / mean(R)² of R_{[0,n)}(0, n−1).
RatioEstimate second_moment_ratio(double beta, Site n, const CampaignOptions& options);
RatioEstimate second_moment_ratio(std::span<const double> values, std::size_t resamples,
                                  std::uint64_t seed);

struct TailCheck {
  Site n = 0;
  double eps = 0.0;
  double threshold = 0.0;  // eps · n^delta_hat
  double probability = 0.0;
  Interval ci95;           // Wilson score interval
  std::size_t replicates = 0;
};

/// Empirical P[R(0, [−n,n]^c) ≥ eps · n^delta_hat].
TailCheck lower_tail_check(double beta, Site n, double eps, double delta_hat,
                           const CampaignOptions& options);
TailCheck lower_tail_check(std::span<const double> values, Site n, double eps,
                           double delta_hat);

struct PositionFrequency {
  Site i = 0;
  std::size_t hits = 0;
  double frequency = 0.0;
  double sigma = 0.0;  // binomial standard deviation of the frequency
};

struct CutPointStats {
  double beta = 0.0;
  Site m = 0;
  std::size_t replicates = 0;
  std::vector<PositionFrequency> cut;         // i ∈ [1, m−2]
  std::vector<PositionFrequency> separation;  // odd i ∈ [1, m−2]
};

/// On [0, m): i is a cut point when no edge ⟨k,l⟩ has k < i < l; odd i is a
/// separation point when no edge ⟨k,l⟩ with l − k ≥ 2 has k ≤ i ≤ l.
CutPointStats cut_point_stats(double beta, Site m, const CampaignOptions& options);

/// Cut and separation flags of one sample on [sample.lo, sample.hi], indexed
/// by offset from sample.lo.
std::pair<std::vector<bool>, std::vector<bool>> cut_and_separation_points(const LrpSample& sample);

struct TypeRatioRow {
  Site n = 0;
  double lambda = 0.0;
  double point_to_box = 0.0;
  double box_to_box = 0.0;
  double point_to_box_ratio = 0.0;
  Interval point_to_box_ci;
  double box_to_box_ratio = 0.0;
  Interval box_to_box_ci;
};

struct TypeComparison {
  std::vector<TypeRatioRow> rows;
  double point_to_box_variation = 0.0;  // max / min ratio across scales
  double box_to_box_variation = 0.0;
};

TypeComparison type_comparison(double beta, std::span<const Site> scales,
                               const CampaignOptions& options);

/// Builds the table from estimates already at hand; the three series are
/// matched by scale.
TypeComparison type_comparison(std::span<const Estimate> lambda,
                               std::span<const Estimate> point_to_box,
                               std::span<const Estimate> box_to_box,
                               const std::map<Site, std::vector<double>>& lambda_values,
                               const std::map<Site, std::vector<double>>& point_to_box_values,
                               const std::map<Site, std::vector<double>>& box_to_box_values,
                               std::uint64_t seed);

struct ScalingConfig {
  double beta = 1.0;
  std::vector<Site> scales{16, 32, 64, 128, 256, 512, 1024};
  CampaignOptions options;
  bool point_to_box = true;
  // Conditioned box-to-box estimates for scales up to this bound (0: none).
  Site box_to_box_max_scale = 256;
  std::vector<std::pair<Site, Site>> multiplicativity_pairs{{4, 8}, {8, 8}, {8, 16}};

  void validate() const;
};

struct ScalingReport {
  ScalingConfig config;
  std::vector<Estimate> estimates;
  ExponentFit lambda_fit;
  std::optional<ExponentFit> point_to_box_fit;
  std::vector<MultiplicativityRow> multiplicativity;
  TypeComparison types;

  std::vector<Estimate> series(Quantity q) const;
};

ScalingReport run_scaling(const ScalingConfig& config);

}  // namespace lrp
