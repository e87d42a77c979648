#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lrp/model.hpp"
#include "lrp/solver.hpp"

namespace lrp {

/// Edge between blocks i < j of the coarse graph together with every fine
/// edge joining the two blocks.
struct BlockEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  std::vector<Edge> fine;

  /// Shortest fine edge, ties broken by the smallest (u, v).
  const Edge& representative() const;
};

/// Coarse graph whose vertices are the blocks [origin + i·m, origin + (i+1)·m).
struct RenormGraph {
  Site origin = 0;
  Site m = 1;
  std::size_t blocks = 0;
  std::vector<BlockEdge> edges;  // sorted by (i, j)

  Range block_range(std::size_t i) const;
  /// Block containing `x`, if it lies in one.
  std::optional<std::size_t> block_of(Site x) const;
  const BlockEdge* find(std::size_t i, std::size_t j) const;
  bool adjacent(std::size_t i, std::size_t j) const { return find(i, j) != nullptr; }
  std::vector<std::size_t> degrees() const;
};

/// Blocks of length m tiled from sample.lo; sites past the last full block
/// are ignored.
RenormGraph renormalize(const LrpSample& sample, Site m);

/// Exact probability that blocks at distance d ≥ 1 are joined by at least
/// one fine edge, from the summed fine-pair couplings.
double block_edge_probability(double beta, Site m, Site d);

enum class ThresholdMode { power, lambda_hat };

struct ClassifyParams {
  Site m = 32;
  std::size_t max_boundary_points = 8;  // M
  double delta = 0.2;
  double alpha1 = 0.1;
  double alpha2 = 0.05;
  ThresholdMode mode = ThresholdMode::power;
  // Required in lambda_hat mode: estimate of E[R_{[0,m)}(0, m−1)].
  double lambda_hat = std::numeric_limits<double>::quiet_NaN();

  void validate() const;
  double threshold() const;
};

struct IntervalClassification {
  std::size_t block = 0;
  // Blocks without a neighbour on both sides cannot be classified.
  bool indeterminate = false;
  std::vector<Site> boundary_points;  // sites of the block with a far edge
  std::size_t xi = 0;
  std::size_t eta = 0;
  bool m_good = false;
  bool cond1 = false;
  bool cond2 = false;
  bool cond3 = false;
  bool very_good = false;
  double internal_energy = std::numeric_limits<double>::quiet_NaN();
  double interval_resistance = std::numeric_limits<double>::quiet_NaN();
};

std::vector<IntervalClassification> classify(const LrpSample& sample,
                                             const ClassifyParams& params);

/// min over θ ≥ 0, Σθ ≤ 1 of Σ θ_u² a_u + (1 − Σθ)² b, in closed form
/// (1/b + Σ 1/a_u)^{-1}. Infinite entries drop out; any zero gives 0.
double harmonic_energy(std::span<const double> a, double b);

/// Minimiser of the quadratic above: θ_u = (1 − s)·b / a_u with
/// s = bH / (1 + bH), H = Σ 1/a_u.
std::vector<double> optimal_split(std::span<const double> a, double b);

struct InternalEnergy {
  std::vector<Site> boundary_points;
  std::vector<double> point_resistances;  // a_u, +∞ when the block lies inside the ball
  double interval_resistance = 0.0;       // b
  double value = 0.0;
};

/// Internal energy of block i (blocks counted from sample.lo), 1 ≤ i.
InternalEnergy internal_energy(const LrpSample& sample, std::size_t block, Site m,
                               double alpha1);

struct RedComponents {
  std::vector<std::vector<std::size_t>> components;  // sorted block lists
  std::vector<std::size_t> sizes;                    // descending
  // survival[k] = fraction of components of size ≥ k, k = 0..max size.
  std::vector<double> survival;
};

/// Connected components of the coarse graph induced by the `red` blocks.
RedComponents red_components(const RenormGraph& rg, std::span<const bool> red);

/// Flow on fine edges, oriented from edge.u to edge.v.
using FineFlow = std::map<Edge, double>;
/// Flow on coarse edges (i < j), oriented from block i to block j.
using BlockFlow = std::map<std::pair<std::size_t, std::size_t>, double>;

/// Fine flow of a solved resistance query on a network labelled by sites.
FineFlow fine_flow(const ResistanceResult& result);

/// Net flow out of every fine site touched by `flow`.
std::map<Site, double> divergence(const FineFlow& flow);
std::vector<double> divergence(const BlockFlow& flow, std::size_t blocks);

/// Sums fine flow over all fine edges between each pair of blocks. The input
/// must conserve flow away from at most one source and one sink of equal
/// strength, and every edge it uses must lie inside the tiled blocks.
BlockFlow project_flow(const RenormGraph& rg, const FineFlow& flow, double tolerance = 1e-9);

struct LiftSplit {
  std::size_t block = 0;
  // Neighbouring block the mass arrives from / leaves to; nullopt marks the
  // external injection at a terminal block.
  std::optional<std::size_t> from;
  std::optional<std::size_t> to;
  double theta = 0.0;
};

struct LiftedFlow {
  FineFlow flow;
  Site source = 0;
  Site sink = 0;
  std::vector<LiftSplit> splits;
};

/// Routes each coarse edge's flow through its representative fine edge and,
/// inside every block, spreads the arriving mass to the departing
/// representatives with unit electric flows weighted by the product coupling
/// θ_{kl} = in_k · out_l / total. `g` must be a unit flow from block
/// `source_block` to `sink_block`; the fine terminals default to the first
/// site of each terminal block.
LiftedFlow lift_flow(const RenormGraph& rg, const LrpSample& sample, const BlockFlow& g,
                     std::size_t source_block, std::size_t sink_block,
                     std::optional<Site> source = std::nullopt,
                     std::optional<Site> sink = std::nullopt, double tolerance = 1e-9);

}  // namespace lrp
