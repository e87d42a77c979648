#include "lrp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lrp/error.hpp"
#include "lrp/rng.hpp"

namespace lrp {
namespace {

// Stream tags; each (replicate, tag, class) triple owns one counter stream.
constexpr std::uint64_t kTagInner = 1;
constexpr std::uint64_t kTagRight = 2;
constexpr std::uint64_t kTagLeft = 3;
constexpr std::uint64_t kTagFar = 4;
constexpr std::uint64_t kTagBernoulli = 5;

void check_window(Site lo, Site hi) {
  if (hi <= lo) {
    std::ostringstream os;
    os << "window [" << lo << ", " << hi << "] must contain at least one pair";
    fail(ErrorCode::empty_window, os.str());
  }
}

void check_nearest_neighbour(const ForbiddenSet& forbidden, Site i) {
  if (forbidden.contains(i, i + 1)) {
    std::ostringstream os;
    os << "nearest-neighbour pair {" << i << ", " << i + 1
       << "} cannot be forbidden";
    fail(ErrorCode::invalid_argument, os.str());
  }
}

// Visits the successes of independent Bernoulli(edge_probability(beta, k))
// trials at positions 0..count-1 using exponential gaps.
template <class Visit>
void skip_trials(CounterRng& rng, double beta, Site k, Site count,
                 Visit&& visit) {
  if (count <= 0) return;
  if (k == 1) {
    for (Site p = 0; p < count; ++p) visit(p);
    return;
  }
  const double rate = beta * coupling_exponent(k);
  double pos = -1.0;
  const auto limit = static_cast<double>(count);
  for (;;) {
    pos += 1.0 + std::floor(rng.exponential() / rate);
    if (pos >= limit) break;
    visit(static_cast<Site>(pos));
  }
}

void sample_inner_pairs(const ModelParams& params, Site lo, Site hi,
                        const ForbiddenSet& forbidden, std::uint64_t replicate,
                        std::vector<Edge>& edges) {
  for (Site i = lo; i < hi; ++i) {
    check_nearest_neighbour(forbidden, i);
    edges.push_back({i, i + 1});
  }
  const Site length = hi - lo;
  for (Site k = 2; k <= length; ++k) {
    CounterRng rng(params.seed,
                   stream_id(replicate, kTagInner, static_cast<std::uint64_t>(k)));
    skip_trials(rng, params.beta, k, length - k + 1, [&](Site p) {
      const Site u = lo + p;
      if (!forbidden.contains(u, u + k)) edges.push_back({u, u + k});
    });
  }
}

// Σ coupling over v in `region` (entirely on one side of u) excluding pairs
// forbidden for u.
double allowed_mass(Site u, Range region, const ForbiddenSet& forbidden) {
  if (region.empty()) return 0.0;
  const bool right = region.lo > u;
  auto mass = [&](Range r) {
    if (r.empty()) return 0.0;
    if (right) return distance_mass(r.lo - u, r.hi == kPlusInfinity ? kPlusInfinity : r.hi - u);
    return distance_mass(u - r.hi, r.lo == kMinusInfinity ? kPlusInfinity : u - r.lo);
  };
  std::vector<Range> blocked;
  for (const auto& cls : forbidden.classes) {
    auto add = [&](const Range& other) {
      const Range cut{std::max(other.lo, region.lo), std::min(other.hi, region.hi)};
      if (!cut.empty()) blocked.push_back(cut);
    };
    if (cls.a.contains(u)) add(cls.b);
    if (cls.b.contains(u)) add(cls.a);
  }
  std::sort(blocked.begin(), blocked.end());
  std::vector<Range> merged;
  for (const auto& r : blocked) {
    if (!merged.empty() &&
        (merged.back().hi == kPlusInfinity || r.lo <= merged.back().hi + 1)) {
      merged.back().hi = std::max(merged.back().hi, r.hi);
    } else {
      merged.push_back(r);
    }
  }
  double total = mass(region);
  for (const auto& r : merged) total -= mass(r);
  return std::max(total, 0.0);
}

}  // namespace

void ModelParams::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    fail(ErrorCode::invalid_argument, "beta must be a positive finite number");
  }
  if (tail_horizon < 2) {
    fail(ErrorCode::invalid_argument, "tail_horizon must be at least 2");
  }
}

bool ForbiddenSet::contains(Site i, Site j) const {
  return std::any_of(classes.begin(), classes.end(),
                     [&](const PairClass& c) { return c.contains(i, j); });
}

ForbiddenSet ForbiddenSet::single_pair(Site i, Site j) {
  return {{PairClass{{i, i}, {j, j}}}};
}

ForbiddenSet ForbiddenSet::inner_to_outside(Range inner, Range outer) {
  ForbiddenSet set;
  if (outer.lo != kMinusInfinity) {
    set.classes.push_back({inner, {kMinusInfinity, outer.lo - 1}});
  }
  if (outer.hi != kPlusInfinity) {
    set.classes.push_back({inner, {outer.hi + 1, kPlusInfinity}});
  }
  return set;
}

bool LrpSample::has_edge(Site i, Site j) const {
  const Edge e{std::min(i, j), std::max(i, j)};
  return std::binary_search(edges.begin(), edges.end(), e);
}

std::size_t LrpSample::long_edge_count() const {
  return static_cast<std::size_t>(std::count_if(
      edges.begin(), edges.end(), [](const Edge& e) { return e.length() > 1; }));
}

double coupling_exponent(Site k) {
  if (k < 2) fail(ErrorCode::invalid_distance, "coupling_exponent needs k >= 2");
  const double kk = static_cast<double>(k);
  return -std::log1p(-1.0 / (kk * kk));
}

double distance_mass(Site dmin, Site dmax) {
  if (dmin < 2 || dmax < dmin) {
    fail(ErrorCode::invalid_distance, "distance_mass needs 2 <= dmin <= dmax");
  }
  const double head = -std::log1p(-1.0 / static_cast<double>(dmin));
  if (dmax == kPlusInfinity) return head;
  return head - std::log1p(1.0 / static_cast<double>(dmax));
}

double edge_probability(double beta, Site k) {
  if (k <= 0) fail(ErrorCode::invalid_distance, "edge_probability needs k >= 1");
  if (k == 1) return 1.0;
  return -std::expm1(-beta * coupling_exponent(k));
}

double expected_degree(double beta) {
  if (!(beta > 0.0)) fail(ErrorCode::invalid_argument, "beta must be positive");
  // Explicit sum up to K, then the tail Σ_{k>K} (1 − e^{−βc_k}) with
  // Σ_{k>K} c_k = ln(1 + 1/K) and Σ_{k>K} c_k² ≈ 1/(3K³).
  const Site cutoff = std::max<Site>(10'000, static_cast<Site>(std::ceil(10.0 * beta)));
  double sum = 0.0;
  double compensation = 0.0;
  for (Site k = cutoff; k >= 2; --k) {
    const double term = edge_probability(beta, k);
    const double t = sum + term;
    compensation += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  const double kc = static_cast<double>(cutoff);
  const double tail = beta * std::log1p(1.0 / kc) - beta * beta / (6.0 * kc * kc * kc);
  return 2.0 + 2.0 * (sum + compensation + tail);
}

double far_edge_rate(double beta, Site u, Site truncation) {
  if (truncation <= std::abs(u)) {
    fail(ErrorCode::truncation, "truncation must exceed |u|");
  }
  return beta * (distance_mass(truncation + 1 - u, kPlusInfinity) +
                 distance_mass(truncation + 1 + u, kPlusInfinity));
}

LrpSample sample_window(const ModelParams& params, Site lo, Site hi,
                        const ForbiddenSet& forbidden, std::uint64_t replicate) {
  params.validate();
  check_window(lo, hi);
  LrpSample sample{params, replicate, lo, hi, {}, {}, forbidden};
  sample_inner_pairs(params, lo, hi, forbidden, replicate, sample.edges);
  std::sort(sample.edges.begin(), sample.edges.end());
  return sample;
}

LrpSample sample_window_bernoulli(const ModelParams& params, Site lo, Site hi,
                                  const ForbiddenSet& forbidden,
                                  std::uint64_t replicate) {
  params.validate();
  check_window(lo, hi);
  LrpSample sample{params, replicate, lo, hi, {}, {}, forbidden};
  CounterRng rng(params.seed, stream_id(replicate, kTagBernoulli));
  for (Site u = lo; u <= hi; ++u) {
    for (Site v = u + 1; v <= hi; ++v) {
      if (v == u + 1) {
        check_nearest_neighbour(forbidden, u);
        sample.edges.push_back({u, v});
        continue;
      }
      const bool present = rng.uniform() < edge_probability(params.beta, v - u);
      if (present && !forbidden.contains(u, v)) sample.edges.push_back({u, v});
    }
  }
  return sample;
}

LrpSample sample_with_contracted_complement(const ModelParams& params,
                                            Range core, Site radius,
                                            Site truncation,
                                            const ForbiddenSet& forbidden,
                                            std::uint64_t replicate) {
  params.validate();
  if (radius < 1) fail(ErrorCode::empty_window, "radius must be at least 1");
  if (truncation <= radius) {
    fail(ErrorCode::truncation, "truncation must exceed the boundary radius");
  }
  if (core.empty() || core.lo < -radius || core.hi > radius) {
    fail(ErrorCode::invalid_argument, "core must be a nonempty subrange of the window");
  }

  LrpSample sample{params, replicate, -radius, radius, {}, {}, forbidden};
  sample_inner_pairs(params, -radius, radius, forbidden, replicate, sample.edges);
  std::sort(sample.edges.begin(), sample.edges.end());

  Supernode ext;
  ext.label = kExteriorLabel;
  {
    std::ostringstream os;
    os << "|v| > " << radius << " (explicit to " << truncation << ")";
    ext.covers = os.str();
  }
  const Site horizon = params.tail_horizon;
  const Site max_k = std::min(horizon, truncation + radius);

  // Explicit pairs with radius < |v| ≤ truncation and |u − v| ≤ horizon.
  for (Site k = 1; k <= max_k; ++k) {
    // Right: v = u + k with radius < v ≤ truncation.
    {
      const Site first = std::max(-radius, radius + 1 - k);
      const Site last = std::min(radius, truncation - k);
      CounterRng rng(params.seed, stream_id(replicate, kTagRight, static_cast<std::uint64_t>(k)));
      skip_trials(rng, params.beta, k, last - first + 1, [&](Site p) {
        const Site u = first + p;
        if (k == 1) check_nearest_neighbour(forbidden, u);
        if (!forbidden.contains(u, u + k)) ++ext.counts[u];
      });
    }
    // Left: v = u − k with −truncation ≤ v < −radius.
    {
      const Site first = std::max(-radius, k - truncation);
      const Site last = std::min(radius, k - radius - 1);
      CounterRng rng(params.seed, stream_id(replicate, kTagLeft, static_cast<std::uint64_t>(k)));
      skip_trials(rng, params.beta, k, last - first + 1, [&](Site p) {
        const Site u = first + p;
        if (k == 1) check_nearest_neighbour(forbidden, u - 1);
        if (!forbidden.contains(u - k, u)) ++ext.counts[u];
      });
    }
  }

  // Everything further away: exact Poisson rate per window vertex.
  for (Site u = -radius; u <= radius; ++u) {
    const Site right_start = std::max(radius + 1, std::min(truncation, u + horizon) + 1);
    const Site left_end = std::min(-radius - 1, std::max(-truncation, u - horizon) - 1);
    const double rate =
        params.beta * (allowed_mass(u, {right_start, kPlusInfinity}, forbidden) +
                       allowed_mass(u, {kMinusInfinity, left_end}, forbidden));
    if (rate <= 0.0) continue;
    CounterRng rng(params.seed,
                   stream_id(replicate, kTagFar, static_cast<std::uint64_t>(u)));
    if (const auto extra = rng.poisson(rate); extra > 0) {
      ext.counts[u] += static_cast<std::uint32_t>(extra);
    }
  }
  sample.supernodes.push_back(std::move(ext));
  return sample;
}

}  // namespace lrp
