#include "lrp/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lrp/error.hpp"

namespace lrp {
namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

constexpr std::size_t kUnknown = static_cast<std::size_t>(-1);

struct GroundedSystem {
  std::vector<std::size_t> unknown_of;  // vertex -> row, kUnknown if none
  std::vector<VertexId> vertex_of;      // row -> vertex
  SparseMatrix matrix;
};

GroundedSystem assemble(const Network& net, const std::vector<bool>& component,
                        VertexId ground) {
  GroundedSystem sys;
  sys.unknown_of.assign(net.vertex_count(), kUnknown);
  for (VertexId v = 0; v < net.vertex_count(); ++v) {
    if (component[v] && v != ground) {
      sys.unknown_of[v] = sys.vertex_of.size();
      sys.vertex_of.push_back(v);
    }
  }
  const auto n = static_cast<Eigen::Index>(sys.vertex_of.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(4 * net.edge_count());
  for (const auto& e : net.edges()) {
    if (!component[e.u]) continue;
    const auto iu = sys.unknown_of[e.u];
    const auto iv = sys.unknown_of[e.v];
    const auto ru = static_cast<Eigen::Index>(iu);
    const auto rv = static_cast<Eigen::Index>(iv);
    if (iu != kUnknown) triplets.emplace_back(ru, ru, e.conductance);
    if (iv != kUnknown) triplets.emplace_back(rv, rv, e.conductance);
    if (iu != kUnknown && iv != kUnknown) {
      triplets.emplace_back(ru, rv, -e.conductance);
      triplets.emplace_back(rv, ru, -e.conductance);
    }
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& b) {
  const double bnorm = b.norm();
  const double rnorm = (b - a * x).norm();
  return bnorm > 0.0 ? rnorm / bnorm : rnorm;
}

[[noreturn]] void numeric_failure(SolverMethod method, std::size_t n, std::size_t iterations,
                                  double residual, const char* what) {
  std::ostringstream os;
  os << what << " (method=" << to_string(method) << ", unknowns=" << n
     << ", iterations=" << iterations << ", residual=" << residual << ")";
  fail(ErrorCode::numeric, os.str());
}

// Direct solves are followed by up to two steps of iterative refinement.
template <class Solve>
Eigen::VectorXd refine(const SparseMatrix& a, const Eigen::VectorXd& b, Solve&& solve,
                       double tolerance, std::size_t& steps, double& residual) {
  Eigen::VectorXd x = solve(b);
  residual = relative_residual(a, x, b);
  steps = 1;
  while (residual > 0.01 * tolerance && steps < 3) {
    x += solve(b - a * x);
    residual = relative_residual(a, x, b);
    ++steps;
  }
  return x;
}

Eigen::VectorXd solve_system(const SparseMatrix& a, const Eigen::VectorXd& b,
                             const SolverOptions& options, SolverStats& stats) {
  const auto n = static_cast<std::size_t>(a.rows());
  SolverMethod method = options.method;
  if (method == SolverMethod::automatic) {
    method = n <= options.dense_limit ? SolverMethod::dense_cholesky : options.large_method;
  }
  stats.method = method;
  if (n == 0) return {};

  Eigen::VectorXd x;
  switch (method) {
    case SolverMethod::dense_cholesky: {
      const Eigen::MatrixXd dense(a);
      const Eigen::LLT<Eigen::MatrixXd> llt(dense);
      if (llt.info() != Eigen::Success) {
        numeric_failure(method, n, 0, std::numeric_limits<double>::quiet_NaN(),
                        "grounded Laplacian is not positive definite");
      }
      x = refine(a, b, [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return llt.solve(r); },
                 options.tolerance, stats.iterations, stats.residual);
      break;
    }
    case SolverMethod::sparse_cholesky: {
      Eigen::SimplicialLLT<SparseMatrix> llt(a);
      if (llt.info() != Eigen::Success) {
        numeric_failure(method, n, 0, std::numeric_limits<double>::quiet_NaN(),
                        "grounded Laplacian is not positive definite");
      }
      x = refine(a, b, [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return llt.solve(r); },
                 options.tolerance, stats.iterations, stats.residual);
      break;
    }
    case SolverMethod::conjugate_gradient: {
      Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                               Eigen::DiagonalPreconditioner<double>>
          cg;
      cg.setMaxIterations(static_cast<Eigen::Index>(
          std::ceil(20.0 * std::sqrt(static_cast<double>(n)))));
      cg.setTolerance(options.tolerance);
      cg.compute(a);
      x = cg.solve(b);
      stats.iterations = static_cast<std::size_t>(cg.iterations());
      stats.residual = relative_residual(a, x, b);
      break;
    }
    case SolverMethod::automatic:
      break;
  }
  if (!(stats.residual < options.tolerance)) {
    numeric_failure(method, n, stats.iterations, stats.residual,
                    "linear solve did not reach the residual tolerance");
  }
  return x;
}

double energy_of(const Network& net, std::span<const double> flow) {
  double energy = 0.0;
  const auto edges = net.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    energy += flow[e] * flow[e] / edges[e].conductance;
  }
  return energy;
}

void check_sets(const Network& net, std::span<const VertexId> from,
                std::span<const VertexId> to) {
  if (from.empty() || to.empty()) fail(ErrorCode::invalid_query, "terminal sets must be nonempty");
  std::vector<int> side(net.vertex_count(), 0);
  for (const VertexId v : from) {
    if (v >= net.vertex_count()) fail(ErrorCode::invalid_query, "unknown terminal vertex");
    side[v] = 1;
  }
  for (const VertexId v : to) {
    if (v >= net.vertex_count()) fail(ErrorCode::invalid_query, "unknown terminal vertex");
    if (side[v] == 1) fail(ErrorCode::invalid_query, "terminal sets overlap");
  }
}

}  // namespace

std::string_view to_string(SolverMethod method) {
  switch (method) {
    case SolverMethod::automatic: return "automatic";
    case SolverMethod::dense_cholesky: return "dense_cholesky";
    case SolverMethod::sparse_cholesky: return "sparse_cholesky";
    case SolverMethod::conjugate_gradient: return "conjugate_gradient";
  }
  return "unknown";
}

ElectricSolution solve_injection(const Network& net, std::span<const double> injection,
                                 VertexId ground, const SolverOptions& options) {
  if (injection.size() != net.vertex_count() || ground >= net.vertex_count()) {
    fail(ErrorCode::invalid_query, "injection vector does not match the network");
  }
  const auto component = reachable_from(net, ground);
  double total = 0.0;
  double scale = 0.0;
  for (VertexId v = 0; v < net.vertex_count(); ++v) {
    scale = std::max(scale, std::abs(injection[v]));
    if (!component[v] && injection[v] != 0.0) {
      fail(ErrorCode::invalid_query, "current injected outside the ground's component");
    }
    total += injection[v];
  }
  if (std::abs(total) > 1e-12 * std::max(1.0, scale)) {
    fail(ErrorCode::invalid_query, "injected currents must sum to zero");
  }

  const auto sys = assemble(net, component, ground);
  Eigen::VectorXd b(static_cast<Eigen::Index>(sys.vertex_of.size()));
  for (std::size_t r = 0; r < sys.vertex_of.size(); ++r) {
    b[static_cast<Eigen::Index>(r)] = injection[sys.vertex_of[r]];
  }

  ElectricSolution out;
  const Eigen::VectorXd x = solve_system(sys.matrix, b, options, out.stats);
  out.potentials.assign(net.vertex_count(), 0.0);
  for (std::size_t r = 0; r < sys.vertex_of.size(); ++r) {
    out.potentials[sys.vertex_of[r]] = x[static_cast<Eigen::Index>(r)];
  }
  const auto edges = net.edges();
  out.flow.resize(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    out.flow[e] = edges[e].conductance * (out.potentials[edges[e].u] - out.potentials[edges[e].v]);
  }
  return out;
}

double ResistanceResult::flow_between(VertexId a, VertexId b) const {
  const auto idx = network->edge_index(a, b);
  if (!idx) return 0.0;
  const double f = flow[*idx];
  return network->edges()[*idx].u == a ? f : -f;
}

std::vector<double> ResistanceResult::divergence() const {
  std::vector<double> div(network->vertex_count(), 0.0);
  const auto edges = network->edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    div[edges[e].u] += flow[e];
    div[edges[e].v] -= flow[e];
  }
  return div;
}

ResistanceResult two_point_resistance(std::shared_ptr<const Network> net, VertexId a,
                                      VertexId b, const SolverOptions& options) {
  if (a >= net->vertex_count() || b >= net->vertex_count()) {
    fail(ErrorCode::invalid_query, "terminal is not a vertex of the network");
  }
  if (a == b) fail(ErrorCode::invalid_query, "terminals must be distinct");
  ResistanceResult result;
  result.network = net;
  if (!reachable_from(*net, a)[b]) {
    result.connected = false;
    return result;
  }
  std::vector<double> injection(net->vertex_count(), 0.0);
  injection[a] = 1.0;
  injection[b] = -1.0;
  auto solution = solve_injection(*net, injection, std::max(a, b), options);
  result.value = solution.potentials[a] - solution.potentials[b];
  result.energy = energy_of(*net, solution.flow);
  result.potentials = std::move(solution.potentials);
  result.flow = std::move(solution.flow);
  result.stats = solution.stats;
  return result;
}

ResistanceResult two_point_resistance(const Network& net, VertexId a, VertexId b,
                                      const SolverOptions& options) {
  return two_point_resistance(std::make_shared<const Network>(net), a, b, options);
}

ResistanceResult set_resistance(std::shared_ptr<const Network> net,
                                std::span<const VertexId> from, std::span<const VertexId> to,
                                const SolverOptions& options) {
  check_sets(*net, from, to);
  const std::vector<std::vector<VertexId>> groups{{from.begin(), from.end()},
                                                  {to.begin(), to.end()}};
  const std::vector<std::string> labels{"{source}", "{sink}"};
  auto contracted = contract(*net, groups, labels);
  const auto inner = two_point_resistance(
      std::make_shared<const Network>(std::move(contracted.net)),
      contracted.group_vertices[0], contracted.group_vertices[1], options);

  ResistanceResult result;
  result.network = net;
  result.connected = inner.connected;
  if (!inner.connected) return result;
  result.value = inner.value;
  result.stats = inner.stats;
  result.potentials.resize(net->vertex_count());
  for (VertexId v = 0; v < net->vertex_count(); ++v) {
    result.potentials[v] = inner.potentials[contracted.mapping[v]];
  }
  const auto edges = net->edges();
  result.flow.resize(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    result.flow[e] =
        edges[e].conductance * (result.potentials[edges[e].u] - result.potentials[edges[e].v]);
  }
  result.energy = energy_of(*net, result.flow);
  return result;
}

ResistanceResult set_resistance(const Network& net, std::span<const VertexId> from,
                                std::span<const VertexId> to, const SolverOptions& options) {
  return set_resistance(std::make_shared<const Network>(net), from, to, options);
}

ResistanceResult restricted_resistance(const LrpSample& sample, Range window, Site i, Site j,
                                       const SolverOptions& options) {
  if (window.empty() || window.lo < sample.lo || window.hi > sample.hi) {
    fail(ErrorCode::invalid_query, "restriction window must lie inside the sample window");
  }
  if (!window.contains(i) || !window.contains(j)) {
    fail(ErrorCode::invalid_query, "terminal lies outside the restriction window");
  }
  auto net = std::make_shared<const Network>(network_from_sample(sample, window));
  return two_point_resistance(net, net->at(i), net->at(j), options);
}

ResistanceResult hat_resistance(const LrpSample& sample, const HatQuery& q,
                                const SolverOptions& options) {
  if (!(q.x1 <= q.x2 && q.x2 < q.x3 && q.x3 <= q.x4)) {
    fail(ErrorCode::invalid_query, "hat resistance needs x1 <= x2 < x3 <= x4");
  }
  if (q.x1 < sample.lo || q.x4 > sample.hi) {
    fail(ErrorCode::invalid_query, "hat resistance intervals must lie inside the sample window");
  }
  Network net;
  for (Site x = q.x1; x <= q.x4; ++x) net.add_vertex(x);
  for (const auto& e : sample.edges) {
    if (e.u < q.x1 || e.v > q.x4) continue;
    if (e.u <= q.x2 && e.v >= q.x3) continue;
    net.add_conductance(net.at(e.u), net.at(e.v), 1.0);
  }
  std::vector<VertexId> left, right;
  for (Site x = q.x1; x <= q.x2; ++x) left.push_back(net.at(x));
  for (Site x = q.x3; x <= q.x4; ++x) right.push_back(net.at(x));
  return set_resistance(std::make_shared<const Network>(std::move(net)), left, right, options);
}

double brute_force_resistance(const Network& net, std::span<const VertexId> from,
                              std::span<const VertexId> to) {
  if (net.vertex_count() > kBruteForceMaxVertices) {
    fail(ErrorCode::too_large, "brute-force oracle is limited to small networks");
  }
  check_sets(net, from, to);
  const auto edges = net.edges();
  const auto m = static_cast<Eigen::Index>(edges.size());
  std::vector<int> side(net.vertex_count(), 0);
  for (const VertexId v : from) side[v] = 1;
  for (const VertexId v : to) side[v] = 2;

  // Rows: conservation at each free vertex, plus unit net outflow from `from`.
  std::vector<VertexId> free;
  for (VertexId v = 0; v < net.vertex_count(); ++v) {
    if (side[v] == 0) free.push_back(v);
  }
  const auto rows = static_cast<Eigen::Index>(free.size() + 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, m);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(rows);
  d[rows - 1] = 1.0;
  for (Eigen::Index e = 0; e < m; ++e) {
    const auto& edge = edges[static_cast<std::size_t>(e)];
    for (std::size_t r = 0; r < free.size(); ++r) {
      if (free[r] == edge.u) a(static_cast<Eigen::Index>(r), e) += 1.0;
      if (free[r] == edge.v) a(static_cast<Eigen::Index>(r), e) -= 1.0;
    }
    if (side[edge.u] == 1) a(rows - 1, e) += 1.0;
    if (side[edge.v] == 1) a(rows - 1, e) -= 1.0;
  }
  if (m == 0) return std::numeric_limits<double>::infinity();

  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  const Eigen::VectorXd particular = cod.solve(d);
  if ((a * particular - d).norm() > 1e-9) return std::numeric_limits<double>::infinity();

  Eigen::VectorXd weight(m);
  for (Eigen::Index e = 0; e < m; ++e) {
    weight[e] = 1.0 / edges[static_cast<std::size_t>(e)].conductance;
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd flow = particular;
  if (lu.rank() < m) {
    const Eigen::MatrixXd kernel = lu.kernel();
    const Eigen::MatrixXd gram = kernel.transpose() * weight.asDiagonal() * kernel;
    const Eigen::VectorXd rhs = -(kernel.transpose() * weight.asDiagonal() * particular);
    flow += kernel * gram.ldlt().solve(rhs);
  }
  return flow.dot(weight.asDiagonal() * flow);
}

}  // namespace lrp
