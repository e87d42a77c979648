#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "lrp/model.hpp"
#include "lrp/network.hpp"

namespace lrp {

enum class SolverMethod { automatic, dense_cholesky, sparse_cholesky, conjugate_gradient };

std::string_view to_string(SolverMethod method);

struct SolverOptions {
  SolverMethod method = SolverMethod::automatic;
  // `automatic` factors densely up to this many unknowns.
  std::size_t dense_limit = 64;
  // Method used by `automatic` above dense_limit.
  SolverMethod large_method = SolverMethod::sparse_cholesky;
  double tolerance = 1e-10;
};

struct SolverStats {
  SolverMethod method = SolverMethod::automatic;
  std::size_t iterations = 0;
  double residual = 0.0;  // ‖L·U − b‖ / ‖b‖ on the grounded system
};

/// Potentials and Ohm's-law flows for a zero-sum current injection. The
/// ground vertex sits at potential 0; vertices outside its component carry
/// no current and are reported at 0.
struct ElectricSolution {
  std::vector<double> potentials;
  std::vector<double> flow;  // per edge, oriented edge.u -> edge.v
  SolverStats stats;
};

ElectricSolution solve_injection(const Network& net, std::span<const double> injection,
                                 VertexId ground, const SolverOptions& options = {});

struct ResistanceResult {
  std::shared_ptr<const Network> network;
  // False when the terminals are in different components; the resistance is
  // then infinite and no other field is meaningful.
  bool connected = true;
  double value = 0.0;
  std::vector<double> potentials;  // indexed by VertexId of `network`
  std::vector<double> flow;        // indexed by edge of `network`, u -> v
  double energy = 0.0;             // Σ f²/c over edges
  SolverStats stats;

  /// Flow from `a` to `b` along their edge (antisymmetric, 0 off-edges).
  double flow_between(VertexId a, VertexId b) const;
  /// Net current leaving each vertex.
  std::vector<double> divergence() const;
};

ResistanceResult two_point_resistance(std::shared_ptr<const Network> net, VertexId a,
                                      VertexId b, const SolverOptions& options = {});
ResistanceResult two_point_resistance(const Network& net, VertexId a, VertexId b,
                                      const SolverOptions& options = {});

/// Resistance between two disjoint vertex sets, each shorted to one node.
/// Potentials and flows refer to the original, uncontracted network.
ResistanceResult set_resistance(std::shared_ptr<const Network> net,
                                std::span<const VertexId> from,
                                std::span<const VertexId> to,
                                const SolverOptions& options = {});
ResistanceResult set_resistance(const Network& net, std::span<const VertexId> from,
                                std::span<const VertexId> to,
                                const SolverOptions& options = {});

/// Resistance between i and j using only edges with both ends in `window`.
ResistanceResult restricted_resistance(const LrpSample& sample, Range window, Site i,
                                       Site j, const SolverOptions& options = {});

/// Interval-to-interval resistance between J1 = [x1, x2] and J2 = [x3, x4]
/// for flows confined to [x1, x4] that never use an edge joining (−∞, x2] to
/// [x3, +∞); all current has to cross (x2, x3).
struct HatQuery {
  Site x1 = 0;
  Site x2 = 0;
  Site x3 = 0;
  Site x4 = 0;
};

ResistanceResult hat_resistance(const LrpSample& sample, const HatQuery& query,
                                const SolverOptions& options = {});

/// Reference value for small networks: minimises Σ f²/c over all unit flows
/// from `from` to `to` by a null-space reduction of the flow constraints. No
/// Laplacian is formed. Returns +∞ when no unit flow exists.
inline constexpr std::size_t kBruteForceMaxVertices = 10;

double brute_force_resistance(const Network& net, std::span<const VertexId> from,
                              std::span<const VertexId> to);

}  // namespace lrp
