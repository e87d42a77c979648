#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lrp {

using Site = std::int64_t;

inline constexpr Site kMinusInfinity = std::numeric_limits<Site>::min();
inline constexpr Site kPlusInfinity = std::numeric_limits<Site>::max();

struct ModelParams {
  double beta = 1.0;
  std::uint64_t seed = 0;
  // Far-edge aggregation never looks further than this many sites explicitly.
  Site tail_horizon = 1'000'000;

  void validate() const;
};

/// Closed integer range [lo, hi]; either end may be infinite.
struct Range {
  Site lo = 0;
  Site hi = 0;

  bool contains(Site x) const { return lo <= x && x <= hi; }
  bool empty() const { return lo > hi; }
  friend auto operator<=>(const Range&, const Range&) = default;
};

/// All unordered pairs with one endpoint in `a` and the other in `b`.
struct PairClass {
  Range a;
  Range b;

  bool contains(Site i, Site j) const {
    return (a.contains(i) && b.contains(j)) || (a.contains(j) && b.contains(i));
  }
  friend auto operator<=>(const PairClass&, const PairClass&) = default;
};

/// Pairs that are deterministically absent. Because edges are independent,
/// conditioning on their absence is the same as never sampling them.
struct ForbiddenSet {
  std::vector<PairClass> classes;

  bool contains(Site i, Site j) const;
  bool empty() const { return classes.empty(); }

  static ForbiddenSet single_pair(Site i, Site j);
  /// Pairs joining `inner` to every site outside `outer` (outer ⊇ inner).
  static ForbiddenSet inner_to_outside(Range inner, Range outer);
};

struct Edge {
  Site u = 0;  // u < v
  Site v = 0;

  Site length() const { return v - u; }
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Contracted exterior region. `counts` holds, per window vertex, the number
/// of parallel unit edges from that vertex into the region (zeros omitted).
struct Supernode {
  std::string label;
  std::string covers;
  std::map<Site, std::uint32_t> counts;
};

struct LrpSample {
  ModelParams params;
  std::uint64_t replicate = 0;
  Site lo = 0;
  Site hi = 0;
  std::vector<Edge> edges;  // sorted, unique, nearest-neighbour pairs included
  std::vector<Supernode> supernodes;
  ForbiddenSet forbidden;

  Range window() const { return {lo, hi}; }
  bool has_edge(Site i, Site j) const;
  std::size_t long_edge_count() const;
};

/// ∫_i^{i+1}∫_j^{j+1} |u−v|^{-2} du dv for |i−j| = k, i.e. ln(k²/(k²−1)).
double coupling_exponent(Site k);

/// Σ_{d=dmin}^{dmax} coupling_exponent(d) for 2 ≤ dmin ≤ dmax (dmax may be
/// kPlusInfinity). The sum telescopes to ln(dmin/(dmin−1)) − ln((dmax+1)/dmax).
double distance_mass(Site dmin, Site dmax);

/// Connection probability of a pair at distance k.
double edge_probability(double beta, Site k);

/// Mean degree of a site on all of ℤ.
double expected_degree(double beta);

/// Poisson rate of edges from `u` to sites with |v| > truncation.
double far_edge_rate(double beta, Site u, Site truncation);

/// Samples every pair inside [lo, hi] independently. Long pairs are visited
/// per distance class with geometric gaps, so the cost is linear in the number
/// of edges plus the window length. Each distance class draws from its own
/// counter-based stream keyed by (seed, replicate, class).
LrpSample sample_window(const ModelParams& params, Site lo, Site hi,
                        const ForbiddenSet& forbidden = {},
                        std::uint64_t replicate = 0);

/// Reference sampler: one Bernoulli draw per pair, O(window²).
LrpSample sample_window_bernoulli(const ModelParams& params, Site lo, Site hi,
                                  const ForbiddenSet& forbidden = {},
                                  std::uint64_t replicate = 0);

/// Samples [−radius, radius] together with a supernode "ext" standing for
/// every site with |v| > radius. Pairs reaching radius < |v| ≤ truncation are
/// drawn explicitly; pairs beyond the truncation are aggregated per window
/// vertex into a Poisson count with the exact summed rate.
LrpSample sample_with_contracted_complement(const ModelParams& params,
                                            Range core, Site radius,
                                            Site truncation,
                                            const ForbiddenSet& forbidden = {},
                                            std::uint64_t replicate = 0);

inline constexpr const char* kExteriorLabel = "ext";

}  // namespace lrp
