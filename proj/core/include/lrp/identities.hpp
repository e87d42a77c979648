#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lrp/network.hpp"
#include "lrp/rng.hpp"
#include "lrp/solver.hpp"

namespace lrp {

/// Row-major dense matrix, enough for the small instances checked here.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b);

// --- Flow comparison -------------------------------------------------------

/// Raising the conductance of <w2, w> by delta_c, when the unit electric flow
/// from x to y enters w from both w1 and w2, cannot increase the flow w1 -> w.
struct ComparisonInstance {
  Network net;
  VertexId x = 0;
  VertexId y = 0;
  VertexId w = 0;
  VertexId w1 = 0;
  VertexId w2 = 0;
  double delta_c = 0.0;
};

struct ComparisonOutcome {
  bool applicable = false;  // g_{w1 w} > 0 and g_{w2 w} > 0 before the change
  double g_before = 0.0;    // g_{w1 w}
  double g_after = 0.0;     // g'_{w1 w}
  bool holds = true;
  double violation = 0.0;   // max(0, g_after − g_before)
};

ComparisonOutcome flow_comparison(const ComparisonInstance& inst, double tolerance = 1e-9);

// --- Rank-one inverse update -----------------------------------------------

struct RankOneUpdate {
  VertexId ground = 0;
  std::vector<VertexId> order;  // matrix row -> vertex
  DenseMatrix laplacian;        // C, grounded
  DenseMatrix inverse;          // Z = C^{-1}
  DenseMatrix updated_laplacian;  // C' = C + delta_c D Dᵀ
  DenseMatrix updated_inverse;    // Z' = Z − ĉ Z D Dᵀ Z
  double c_hat = 0.0;             // delta_c / (1 + delta_c Dᵀ Z D)
  bool grounded_variant = false;  // w is the grounded vertex, D = e_{w2}
  double identity_error = 0.0;    // ‖Z' C' − I‖_max
  double reinversion_error = 0.0; // ‖Z' − (C')^{-1}‖_max
};

/// Grounds `net.grounded` (or the highest-indexed vertex) and updates the
/// inverse of the grounded Laplacian for c_{w2 w} += delta_c.
RankOneUpdate rank_one_update(const Network& net, VertexId w2, VertexId w, double delta_c);

// --- Cutset certificates ---------------------------------------------------

/// A family of u–v cutsets with per-(edge, cutset) conductances c_{e,π}.
/// Feasible when Σ_π 1/c_{e,π} ≤ 1/c_e for every edge e.
struct CutsetCertificate {
  VertexId u = 0;
  VertexId v = 0;
  std::vector<std::vector<std::size_t>> cutsets;  // edge indices of the network
  std::vector<std::vector<double>> assignment;    // parallel to `cutsets`
};

/// Throws certificate_invalid naming the offending cutset or edge.
void validate_certificate(const CutsetCertificate& cert, const Network& net,
                          double relative_slack = 1e-12);

/// Σ_π 1 / Σ_{e∈π} c_{e,π}; never exceeds the u–v resistance.
double cutset_bound(const CutsetCertificate& cert, const Network& net);

bool separates(const Network& net, std::span<const std::size_t> edges, VertexId u, VertexId v);

inline constexpr std::size_t kCutsetEnumerationMaxEdges = 16;

/// Every minimal u–v edge cutset, by subset enumeration.
std::vector<std::vector<std::size_t>> enumerate_cutsets(const Network& net, VertexId u,
                                                        VertexId v);

/// Cutsets are the potential level sets of the unit electric flow; each edge
/// spreads its resistance over the levels it spans in proportion to their
/// width. The bound equals the resistance.
CutsetCertificate potential_level_certificate(const Network& net, VertexId u, VertexId v);

/// Random feasible certificate: a random nonempty subfamily of `cutsets`,
/// each edge's resistance split by random weights among the chosen cutsets
/// containing it.
CutsetCertificate random_certificate(const Network& net, VertexId u, VertexId v,
                                     const std::vector<std::vector<std::size_t>>& cutsets,
                                     CounterRng& rng);

// --- Randomized verification suites ---------------------------------------

struct RandomNetworkOptions {
  std::size_t min_vertices = 3;
  std::size_t max_vertices = 8;
  double extra_edge_probability = 0.35;
  double min_conductance = 0.2;
  double max_conductance = 5.0;
  bool unit_conductance = false;
};

/// Random spanning tree plus independent extra edges.
Network random_connected_network(CounterRng& rng, const RandomNetworkOptions& options = {});

/// Random two-terminal series-parallel network with its exact resistance
/// computed by the series and parallel laws during construction.
struct SeriesParallelNetwork {
  Network net;
  VertexId source = 0;
  VertexId sink = 0;
  double resistance = 0.0;
};

SeriesParallelNetwork random_series_parallel(CounterRng& rng, std::size_t operations);

enum class Suite { solver, flow_comparison, rank_one, cutset };

std::string_view to_string(Suite suite);
std::vector<Suite> all_suites();

struct SuiteReport {
  std::string suite;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double worst_violation = 0.0;
  std::size_t rejected = 0;  // random instances drawn but not applicable
};

SuiteReport run_suite(Suite suite, std::size_t trials, std::uint64_t seed);

}  // namespace lrp
