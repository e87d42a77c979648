#include "lrp/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <thread>

#include "lrp/error.hpp"
#include "lrp/network.hpp"
#include "lrp/rng.hpp"

namespace lrp {
namespace {

constexpr std::uint64_t kQuantityTag = 0x5100;
constexpr std::uint64_t kCutTag = 0x5200;
constexpr std::size_t kBootstrapResamples = 1000;
constexpr double kQuantileLevels[] = {0.05, 0.25, 0.5, 0.75, 0.95};

std::uint64_t replicate_key(Quantity q, Site n, std::uint64_t replicate) {
  return stream_id(kQuantityTag + static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(n),
                   replicate);
}

ModelParams model(double beta, const CampaignOptions& options) {
  ModelParams params;
  params.beta = beta;
  params.seed = options.seed;
  params.validate();
  return params;
}

double checked(const ResistanceResult& r) {
  if (!r.connected) fail(ErrorCode::numeric, "terminals disconnected in a sampled network");
  return r.value;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Interval wilson95(std::size_t hits, std::size_t total) {
  constexpr double z = 1.959963984540054;
  const auto n = static_cast<double>(total);
  const double p = static_cast<double>(hits) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

void check_scale(Site n, Site minimum) {
  if (n < minimum) {
    fail(ErrorCode::invalid_scale, "scale " + std::to_string(n) + " is below the minimum " +
                                       std::to_string(minimum));
  }
}

}  // namespace

std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::lambda_pp: return "lambda_pp";
    case Quantity::point_to_box: return "point_to_box";
    case Quantity::box_to_box_conditioned: return "box_to_box_conditioned";
    case Quantity::hat_R: return "hat_R";
  }
  return "unknown";
}

void CampaignOptions::validate() const {
  if (replicates < 2) fail(ErrorCode::invalid_argument, "at least two replicates are required");
  if (threads < 1) fail(ErrorCode::invalid_argument, "at least one thread is required");
  if (!(truncation_factor > 1.0) || !std::isfinite(truncation_factor)) {
    fail(ErrorCode::invalid_argument, "truncation factor must exceed 1");
  }
}

Site CampaignOptions::truncation(Site n) const {
  return std::max<Site>(n + 1, static_cast<Site>(std::ceil(truncation_factor * static_cast<double>(n))));
}

double replicate_value(Quantity q, double beta, Site n, const CampaignOptions& options,
                       std::uint64_t replicate) {
  const auto params = model(beta, options);
  const auto key = replicate_key(q, n, replicate);
  switch (q) {
    case Quantity::lambda_pp: {
      check_scale(n, 2);
      const auto sample = sample_window(params, 0, n - 1, {}, key);
      auto net = std::make_shared<const Network>(network_from_sample(sample));
      return checked(two_point_resistance(net, net->at(Site{0}), net->at(n - 1), options.solver));
    }
    case Quantity::point_to_box: {
      check_scale(n, 1);
      const auto sample =
          sample_with_contracted_complement(params, {0, 0}, n, options.truncation(n), {}, key);
      auto net = std::make_shared<const Network>(network_from_sample(sample));
      const VertexId from[] = {net->at(Site{0})};
      const VertexId to[] = {net->at(std::string(kExteriorLabel))};
      return checked(set_resistance(net, from, to, options.solver));
    }
    case Quantity::box_to_box_conditioned:
      return box_to_box_value(beta, n, options, replicate, true);
    case Quantity::hat_R: {
      check_scale(n, 1);
      const auto sample = sample_window(params, 0, 3 * n - 1, {}, key);
      return checked(hat_resistance(sample, {0, n - 1, 2 * n, 3 * n - 1}, options.solver));
    }
  }
  fail(ErrorCode::invalid_argument, "unknown quantity");
}

double box_to_box_value(double beta, Site n, const CampaignOptions& options,
                        std::uint64_t replicate, bool conditioned) {
  check_scale(n, 1);
  const auto params = model(beta, options);
  const auto key = replicate_key(Quantity::box_to_box_conditioned, n, replicate);
  const ForbiddenSet forbidden =
      conditioned ? ForbiddenSet::inner_to_outside({-n, n}, {-2 * n, 2 * n}) : ForbiddenSet{};
  const Site truncation = std::max(2 * n + 1, options.truncation(n));
  const auto sample =
      sample_with_contracted_complement(params, {-n, n}, 2 * n, truncation, forbidden, key);
  auto net = std::make_shared<const Network>(network_from_sample(sample));
  std::vector<VertexId> from;
  for (Site x = -n; x <= n; ++x) from.push_back(net->at(x));
  const VertexId to[] = {net->at(std::string(kExteriorLabel))};
  return checked(set_resistance(net, from, to, options.solver));
}

ReplicateAccumulator collect(Quantity q, double beta, Site n, const CampaignOptions& options,
                             std::uint64_t first, std::size_t count) {
  const auto workers = static_cast<std::size_t>(
      std::max<unsigned>(1, std::min<std::size_t>(options.threads, std::max<std::size_t>(count, 1))));
  std::vector<ReplicateAccumulator> parts(workers);
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](std::size_t w) {
    try {
      const std::size_t lo = count * w / workers;
      const std::size_t hi = count * (w + 1) / workers;
      for (std::size_t r = lo; r < hi; ++r) {
        parts[w].add(first + r, replicate_value(q, beta, n, options, first + r));
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  ReplicateAccumulator out;
  for (const auto& p : parts) out.merge(p);
  return out;
}

Estimate finalize(Quantity q, Site n, const ReplicateAccumulator& acc) {
  if (acc.size() < 2) fail(ErrorCode::invalid_data, "an estimate needs at least two replicates");
  const auto values = acc.values();
  const auto s = summarize(values);
  Estimate e;
  e.n = n;
  e.quantity = q;
  e.mean = s.mean;
  e.std_error = s.std_error;
  e.ci95 = normal_ci95(s.mean, s.std_error);
  e.replicates = s.count;
  e.second_moment = s.second_moment;
  for (const double p : kQuantileLevels) e.quantiles[p] = quantile(values, p);
  return e;
}

Estimate estimate(Quantity q, double beta, Site n, const CampaignOptions& options) {
  options.validate();
  return finalize(q, n, collect(q, beta, n, options, 0, options.replicates));
}

Estimate estimate_lambda(double beta, Site n, const CampaignOptions& options) {
  return estimate(Quantity::lambda_pp, beta, n, options);
}

Estimate estimate_point_to_box(double beta, Site n, const CampaignOptions& options) {
  return estimate(Quantity::point_to_box, beta, n, options);
}

Estimate estimate_box_to_box_conditioned(double beta, Site n, const CampaignOptions& options) {
  return estimate(Quantity::box_to_box_conditioned, beta, n, options);
}

ExponentFit fit_exponent(std::span<const Estimate> estimates) {
  if (estimates.size() < 4) {
    fail(ErrorCode::invalid_data, "exponent fit needs at least four scales, got " +
                                      std::to_string(estimates.size()));
  }
  return fit_power_law(estimates);
}

ExponentFit fit_power_law(std::span<const Estimate> estimates) {
  std::vector<double> x, y, w;
  bool weighted = true;
  for (const auto& e : estimates) {
    if (!(e.mean > 0.0) || !std::isfinite(e.mean)) {
      fail(ErrorCode::invalid_data, "nonpositive mean at scale " + std::to_string(e.n));
    }
    if (e.n < 1) fail(ErrorCode::invalid_data, "scales must be positive");
    x.push_back(std::log(static_cast<double>(e.n)));
    y.push_back(std::log(e.mean));
    if (!(e.std_error > 0.0)) weighted = false;
    w.push_back(weighted ? (e.mean * e.mean) / (e.std_error * e.std_error) : 1.0);
  }
  if (!weighted) std::fill(w.begin(), w.end(), 1.0);
  const auto fit = weighted_fit(x, y, w);
  ExponentFit out;
  out.delta_hat = fit.slope;
  out.std_error = fit.slope_stderr;
  out.r_squared = fit.r_squared;
  out.intercept = fit.intercept;
  out.weighted = weighted;
  return out;
}

const std::vector<double>& lambda_samples(LambdaSamples& cache, double beta, Site n,
                                          const CampaignOptions& options) {
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, collect(Quantity::lambda_pp, beta, n, options, 0, options.replicates)
                              .values())
             .first;
  }
  return it->second;
}

std::vector<MultiplicativityRow> multiplicativity_report(
    double beta, std::span<const std::pair<Site, Site>> pairs, const CampaignOptions& options,
    LambdaSamples* cache) {
  options.validate();
  LambdaSamples local;
  LambdaSamples& samples = cache ? *cache : local;
  std::vector<MultiplicativityRow> rows;
  for (const auto& [m, n] : pairs) {
    MultiplicativityRow row;
    row.m = m;
    row.n = n;
    if (m < 2 || n < 2) {
      rows.push_back(row);
      continue;
    }
    row.applicable = true;
    std::vector<std::vector<double>> groups{lambda_samples(samples, beta, m * n, options),
                                            lambda_samples(samples, beta, m, options)};
    if (n != m) groups.push_back(lambda_samples(samples, beta, n, options));
    const auto s_mn = summarize(groups[0]);
    const auto s_m = summarize(groups[1]);
    const auto s_n = m == n ? s_m : summarize(groups[2]);
    row.ratio = s_mn.mean / (s_m.mean * s_n.mean);
    const double rel_mn = s_mn.std_error / s_mn.mean;
    const double rel_m = s_m.std_error / s_m.mean;
    const double rel_n = s_n.std_error / s_n.mean;
    row.std_error = row.ratio * (m == n ? std::sqrt(rel_mn * rel_mn + 4.0 * rel_m * rel_m)
                                        : std::sqrt(rel_mn * rel_mn + rel_m * rel_m + rel_n * rel_n));
    const bool square = m == n;
    row.ci95 = bootstrap_ci(
        groups,
        [square](std::span<const std::vector<double>> g) {
          const double a = mean_of(g[0]);
          const double b = mean_of(g[1]);
          return a / (b * (square ? b : mean_of(g[2])));
        },
        kBootstrapResamples,
        stream_id(options.seed, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(n)));
    rows.push_back(row);
  }
  return rows;
}

RatioEstimate second_moment_ratio(std::span<const double> values, std::size_t resamples,
                                  std::uint64_t seed) {
  if (values.size() < 2) fail(ErrorCode::invalid_data, "ratio needs at least two replicates");
  auto ratio = [](const std::vector<double>& v) {
    double s = 0.0, s2 = 0.0;
    for (const double x : v) {
      s += x;
      s2 += x * x;
    }
    const auto n = static_cast<double>(v.size());
    return (s2 / n) / ((s / n) * (s / n));
  };
  const std::vector<std::vector<double>> groups{{values.begin(), values.end()}};
  RatioEstimate out;
  out.ratio = ratio(groups[0]);
  out.replicates = values.size();
  out.ci95 = bootstrap_ci(
      groups, [&](std::span<const std::vector<double>> g) { return ratio(g[0]); }, resamples,
      seed);
  return out;
}

RatioEstimate second_moment_ratio(double beta, Site n, const CampaignOptions& options) {
  options.validate();
  const auto values =
      collect(Quantity::lambda_pp, beta, n, options, 0, options.replicates).values();
  return second_moment_ratio(values, kBootstrapResamples,
                             stream_id(options.seed, static_cast<std::uint64_t>(n)));
}

TailCheck lower_tail_check(std::span<const double> values, Site n, double eps, double delta_hat) {
  if (values.empty()) fail(ErrorCode::invalid_data, "tail check needs replicates");
  if (!(eps > 0.0)) fail(ErrorCode::invalid_argument, "eps must be positive");
  TailCheck out;
  out.n = n;
  out.eps = eps;
  out.threshold = eps * std::pow(static_cast<double>(n), delta_hat);
  const auto hits = static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [&](double r) { return r >= out.threshold; }));
  out.replicates = values.size();
  out.probability = static_cast<double>(hits) / static_cast<double>(values.size());
  out.ci95 = wilson95(hits, values.size());
  return out;
}

TailCheck lower_tail_check(double beta, Site n, double eps, double delta_hat,
                           const CampaignOptions& options) {
  options.validate();
  const auto values =
      collect(Quantity::point_to_box, beta, n, options, 0, options.replicates).values();
  return lower_tail_check(values, n, eps, delta_hat);
}

std::pair<std::vector<bool>, std::vector<bool>> cut_and_separation_points(
    const LrpSample& sample) {
  const auto length = static_cast<std::size_t>(sample.hi - sample.lo + 1);
  std::vector<int> over_interior(length + 1, 0);
  std::vector<int> over_closed(length + 1, 0);
  for (const auto& e : sample.edges) {
    if (e.length() < 2) continue;
    const auto k = static_cast<std::size_t>(e.u - sample.lo);
    const auto l = static_cast<std::size_t>(e.v - sample.lo);
    ++over_interior[k + 1];
    --over_interior[l];
    ++over_closed[k];
    --over_closed[l + 1];
  }
  std::vector<bool> cut(length, false);
  std::vector<bool> separation(length, false);
  int a = 0, b = 0;
  for (std::size_t i = 0; i < length; ++i) {
    a += over_interior[i];
    b += over_closed[i];
    const bool inner = i >= 1 && i + 2 <= length;
    cut[i] = inner && a == 0;
    separation[i] = inner && i % 2 == 1 && b == 0;
  }
  return {cut, separation};
}

CutPointStats cut_point_stats(double beta, Site m, const CampaignOptions& options) {
  options.validate();
  check_scale(m, 4);
  const auto params = model(beta, options);
  CutPointStats out;
  out.beta = beta;
  out.m = m;
  out.replicates = options.replicates;
  const auto positions = static_cast<std::size_t>(m);
  std::vector<std::size_t> cut_hits(positions, 0), sep_hits(positions, 0);
  for (std::size_t r = 0; r < options.replicates; ++r) {
    const auto sample =
        sample_window(params, 0, m - 1, {}, stream_id(kCutTag, static_cast<std::uint64_t>(m), r));
    const auto [cut, separation] = cut_and_separation_points(sample);
    for (std::size_t i = 0; i < positions; ++i) {
      cut_hits[i] += cut[i];
      sep_hits[i] += separation[i];
    }
  }
  const auto total = static_cast<double>(options.replicates);
  auto entry = [&](std::size_t i, std::size_t hits) {
    PositionFrequency p;
    p.i = static_cast<Site>(i);
    p.hits = hits;
    p.frequency = static_cast<double>(hits) / total;
    p.sigma = std::sqrt(p.frequency * (1.0 - p.frequency) / total);
    return p;
  };
  for (std::size_t i = 1; i + 2 <= positions; ++i) {
    out.cut.push_back(entry(i, cut_hits[i]));
    if (i % 2 == 1) out.separation.push_back(entry(i, sep_hits[i]));
  }
  return out;
}

TypeComparison type_comparison(std::span<const Estimate> lambda,
                               std::span<const Estimate> point_to_box,
                               std::span<const Estimate> box_to_box,
                               const std::map<Site, std::vector<double>>& lambda_values,
                               const std::map<Site, std::vector<double>>& point_to_box_values,
                               const std::map<Site, std::vector<double>>& box_to_box_values,
                               std::uint64_t seed) {
  auto mean_at = [](std::span<const Estimate> series, Site n) -> std::optional<double> {
    for (const auto& e : series) {
      if (e.n == n) return e.mean;
    }
    return std::nullopt;
  };
  auto ratio_ci = [&](const std::vector<double>& num, const std::vector<double>& den, Site n,
                      std::uint64_t which) {
    const std::vector<std::vector<double>> groups{num, den};
    return bootstrap_ci(
        groups,
        [](std::span<const std::vector<double>> g) { return mean_of(g[0]) / mean_of(g[1]); },
        kBootstrapResamples, stream_id(seed, static_cast<std::uint64_t>(n), which));
  };

  TypeComparison out;
  constexpr double inf = std::numeric_limits<double>::infinity();
  double p_lo = inf, p_hi = 0.0, b_lo = inf, b_hi = 0.0;
  for (const auto& e : lambda) {
    const auto p = mean_at(point_to_box, e.n);
    const auto b = mean_at(box_to_box, e.n);
    if (!p || !b) continue;
    TypeRatioRow row;
    row.n = e.n;
    row.lambda = e.mean;
    row.point_to_box = *p;
    row.box_to_box = *b;
    row.point_to_box_ratio = *p / e.mean;
    row.box_to_box_ratio = *b / e.mean;
    row.point_to_box_ci = ratio_ci(point_to_box_values.at(e.n), lambda_values.at(e.n), e.n, 1);
    row.box_to_box_ci = ratio_ci(box_to_box_values.at(e.n), lambda_values.at(e.n), e.n, 2);
    p_lo = std::min(p_lo, row.point_to_box_ratio);
    p_hi = std::max(p_hi, row.point_to_box_ratio);
    b_lo = std::min(b_lo, row.box_to_box_ratio);
    b_hi = std::max(b_hi, row.box_to_box_ratio);
    out.rows.push_back(row);
  }
  if (!out.rows.empty()) {
    out.point_to_box_variation = p_hi / p_lo;
    out.box_to_box_variation = b_hi / b_lo;
  }
  return out;
}

TypeComparison type_comparison(double beta, std::span<const Site> scales,
                               const CampaignOptions& options) {
  options.validate();
  if (scales.size() < 3) fail(ErrorCode::invalid_argument, "type comparison needs three scales");
  std::vector<Estimate> lambda, p2b, b2b;
  std::map<Site, std::vector<double>> lv, pv, bv;
  for (const Site n : scales) {
    const auto a = collect(Quantity::lambda_pp, beta, n, options, 0, options.replicates);
    const auto p = collect(Quantity::point_to_box, beta, n, options, 0, options.replicates);
    const auto b =
        collect(Quantity::box_to_box_conditioned, beta, n, options, 0, options.replicates);
    lambda.push_back(finalize(Quantity::lambda_pp, n, a));
    p2b.push_back(finalize(Quantity::point_to_box, n, p));
    b2b.push_back(finalize(Quantity::box_to_box_conditioned, n, b));
    lv[n] = a.values();
    pv[n] = p.values();
    bv[n] = b.values();
  }
  return type_comparison(lambda, p2b, b2b, lv, pv, bv, options.seed);
}

void ScalingConfig::validate() const {
  options.validate();
  if (!(beta > 0.0) || !std::isfinite(beta)) fail(ErrorCode::invalid_argument, "beta must be positive");
  if (scales.size() < 4) fail(ErrorCode::invalid_argument, "scaling needs at least four scales");
  for (std::size_t k = 0; k < scales.size(); ++k) {
    if (scales[k] < 2) fail(ErrorCode::invalid_scale, "scales must be at least 2");
    if (k > 0 && scales[k] <= scales[k - 1]) {
      fail(ErrorCode::invalid_argument, "scales must be strictly increasing");
    }
  }
}

std::vector<Estimate> ScalingReport::series(Quantity q) const {
  std::vector<Estimate> out;
  for (const auto& e : estimates) {
    if (e.quantity == q) out.push_back(e);
  }
  return out;
}

ScalingReport run_scaling(const ScalingConfig& config) {
  config.validate();
  const auto& opts = config.options;
  ScalingReport report;
  report.config = config;

  LambdaSamples lambda_values;
  std::map<Site, std::vector<double>> p2b_values, b2b_values;
  std::vector<Estimate> lambda, p2b, b2b;
  for (const Site n : config.scales) {
    const auto a = collect(Quantity::lambda_pp, config.beta, n, opts, 0, opts.replicates);
    lambda.push_back(finalize(Quantity::lambda_pp, n, a));
    lambda_values[n] = a.values();
    if (config.point_to_box) {
      const auto p = collect(Quantity::point_to_box, config.beta, n, opts, 0, opts.replicates);
      p2b.push_back(finalize(Quantity::point_to_box, n, p));
      p2b_values[n] = p.values();
    }
    if (n <= config.box_to_box_max_scale) {
      const auto b =
          collect(Quantity::box_to_box_conditioned, config.beta, n, opts, 0, opts.replicates);
      b2b.push_back(finalize(Quantity::box_to_box_conditioned, n, b));
      b2b_values[n] = b.values();
    }
  }
  report.estimates = lambda;
  report.estimates.insert(report.estimates.end(), p2b.begin(), p2b.end());
  report.estimates.insert(report.estimates.end(), b2b.begin(), b2b.end());

  report.lambda_fit = fit_exponent(lambda);
  if (p2b.size() >= 4) report.point_to_box_fit = fit_exponent(p2b);
  report.multiplicativity = multiplicativity_report(config.beta, config.multiplicativity_pairs,
                                                    opts, &lambda_values);
  report.types = type_comparison(lambda, p2b, b2b, lambda_values, p2b_values, b2b_values,
                                 opts.seed);
  return report;
}

}  // namespace lrp
