#include "lrp/identities.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "lrp/error.hpp"

namespace lrp {
namespace {

// Flows below this are treated as zero when testing the orientation
// preconditions.
constexpr double kFlowFloor = 1e-12;

DenseMatrix to_dense(const Eigen::MatrixXd& m) {
  DenseMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = m(r, c);
    }
  }
  return out;
}

std::string edge_name(const Network& net, std::size_t e) {
  const auto& edge = net.edges()[e];
  return "edge " + std::to_string(e) + " (" + to_string(net.label(edge.u)) + "-" +
         to_string(net.label(edge.v)) + ")";
}

double uniform_between(CounterRng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform();
}

std::size_t uniform_index(CounterRng& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
}

double log_uniform(CounterRng& rng, double lo, double hi) {
  return std::exp(uniform_between(rng, std::log(lo), std::log(hi)));
}

}  // namespace

double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::invalid_argument, "matrix shapes differ");
  }
  double worst = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      worst = std::max(worst, std::abs(a(r, c) - b(r, c)));
    }
  }
  return worst;
}

ComparisonOutcome flow_comparison(const ComparisonInstance& inst, double tolerance) {
  const auto n = inst.net.vertex_count();
  if (inst.x >= n || inst.y >= n || inst.w >= n || inst.w1 >= n || inst.w2 >= n) {
    fail(ErrorCode::invalid_query, "comparison vertex outside the network");
  }
  if (inst.w == inst.w1 || inst.w == inst.w2 || inst.w1 == inst.w2) {
    fail(ErrorCode::invalid_query, "w, w1 and w2 must be distinct");
  }
  if (!(inst.delta_c >= 0.0) || !std::isfinite(inst.delta_c)) {
    fail(ErrorCode::invalid_argument, "conductance increment must be finite and nonnegative");
  }

  ComparisonOutcome out;
  const auto before = two_point_resistance(inst.net, inst.x, inst.y);
  if (!before.connected) return out;
  out.g_before = before.flow_between(inst.w1, inst.w);
  const double g2 = before.flow_between(inst.w2, inst.w);
  if (!(out.g_before > kFlowFloor && g2 > kFlowFloor)) return out;
  out.applicable = true;

  if (inst.delta_c == 0.0) {
    out.g_after = out.g_before;
    return out;
  }
  Network changed = inst.net;
  changed.add_conductance(inst.w2, inst.w, inst.delta_c);
  const auto after = two_point_resistance(changed, inst.x, inst.y);
  out.g_after = after.flow_between(inst.w1, inst.w);
  out.violation = std::max(0.0, out.g_after - out.g_before);
  out.holds = out.g_after <= out.g_before + tolerance;
  return out;
}

RankOneUpdate rank_one_update(const Network& net, VertexId w2, VertexId w, double delta_c) {
  const auto n = net.vertex_count();
  if (n < 2) fail(ErrorCode::invalid_query, "network needs at least two vertices");
  if (w2 >= n || w >= n || w2 == w) {
    fail(ErrorCode::invalid_query, "w2 and w must be distinct vertices of the network");
  }
  if (!(delta_c >= 0.0) || !std::isfinite(delta_c)) {
    fail(ErrorCode::invalid_argument, "conductance increment must be finite and nonnegative");
  }

  RankOneUpdate out;
  out.ground = net.grounded.value_or(n - 1);
  if (out.ground >= n) fail(ErrorCode::invalid_query, "grounded vertex outside the network");
  const auto reach = reachable_from(net, out.ground);
  if (std::find(reach.begin(), reach.end(), false) != reach.end()) {
    fail(ErrorCode::numeric, "grounded Laplacian is singular: network is disconnected");
  }

  std::vector<Eigen::Index> row(n, -1);
  for (VertexId v = 0; v < n; ++v) {
    if (v == out.ground) continue;
    row[v] = static_cast<Eigen::Index>(out.order.size());
    out.order.push_back(v);
  }
  const auto dim = static_cast<Eigen::Index>(out.order.size());

  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& e : net.edges()) {
    if (row[e.u] >= 0) c(row[e.u], row[e.u]) += e.conductance;
    if (row[e.v] >= 0) c(row[e.v], row[e.v]) += e.conductance;
    if (row[e.u] >= 0 && row[e.v] >= 0) {
      c(row[e.u], row[e.v]) -= e.conductance;
      c(row[e.v], row[e.u]) -= e.conductance;
    }
  }

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::numeric, "grounded Laplacian is not positive definite");
  }
  const Eigen::MatrixXd z = llt.solve(identity);

  Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
  if (row[w2] >= 0) d[row[w2]] += 1.0;
  if (row[w] >= 0) d[row[w]] -= 1.0;
  out.grounded_variant = w == out.ground;

  const Eigen::VectorXd zd = z * d;
  out.c_hat = delta_c / (1.0 + delta_c * d.dot(zd));
  const Eigen::MatrixXd z_new = z - out.c_hat * zd * zd.transpose();
  const Eigen::MatrixXd c_new = c + delta_c * d * d.transpose();

  out.identity_error = (z_new * c_new - identity).cwiseAbs().maxCoeff();
  Eigen::LLT<Eigen::MatrixXd> llt_new(c_new);
  if (llt_new.info() != Eigen::Success) {
    fail(ErrorCode::numeric, "updated Laplacian is not positive definite");
  }
  out.reinversion_error = (z_new - llt_new.solve(identity)).cwiseAbs().maxCoeff();

  out.laplacian = to_dense(c);
  out.inverse = to_dense(z);
  out.updated_laplacian = to_dense(c_new);
  out.updated_inverse = to_dense(z_new);
  return out;
}

bool separates(const Network& net, std::span<const std::size_t> edges, VertexId u, VertexId v) {
  std::vector<bool> removed(net.edge_count(), false);
  for (auto e : edges) {
    if (e >= net.edge_count()) fail(ErrorCode::invalid_query, "edge index out of range");
    removed[e] = true;
  }
  const auto adj = adjacency(net);
  std::vector<bool> seen(net.vertex_count(), false);
  std::vector<VertexId> stack{u};
  seen[u] = true;
  while (!stack.empty()) {
    const auto x = stack.back();
    stack.pop_back();
    if (x == v) return false;
    for (const auto& [y, e] : adj[x]) {
      if (removed[e] || seen[y]) continue;
      seen[y] = true;
      stack.push_back(y);
    }
  }
  return true;
}

void validate_certificate(const CutsetCertificate& cert, const Network& net,
                          double relative_slack) {
  const auto n = net.vertex_count();
  if (cert.u >= n || cert.v >= n || cert.u == cert.v) {
    fail(ErrorCode::certificate_invalid, "terminals must be distinct vertices of the network");
  }
  if (cert.assignment.size() != cert.cutsets.size()) {
    fail(ErrorCode::certificate_invalid, "assignment does not match the cutset list");
  }
  std::vector<double> load(net.edge_count(), 0.0);
  for (std::size_t p = 0; p < cert.cutsets.size(); ++p) {
    const auto& cut = cert.cutsets[p];
    if (cert.assignment[p].size() != cut.size()) {
      fail(ErrorCode::certificate_invalid,
           "cutset " + std::to_string(p) + " has a mismatched assignment");
    }
    std::vector<std::size_t> sorted = cut;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      fail(ErrorCode::certificate_invalid,
           "cutset " + std::to_string(p) + " repeats an edge");
    }
    for (auto e : cut) {
      if (e >= net.edge_count()) {
        fail(ErrorCode::certificate_invalid,
             "cutset " + std::to_string(p) + " names an unknown edge");
      }
    }
    if (!separates(net, cut, cert.u, cert.v)) {
      fail(ErrorCode::certificate_invalid,
           "cutset " + std::to_string(p) + " does not separate the terminals");
    }
    for (std::size_t k = 0; k < cut.size(); ++k) {
      const double c = cert.assignment[p][k];
      if (!(c > 0.0) || !std::isfinite(c)) {
        fail(ErrorCode::certificate_invalid,
             "non-positive conductance on " + edge_name(net, cut[k]) + " in cutset " +
                 std::to_string(p));
      }
      load[cut[k]] += 1.0 / c;
    }
  }
  const auto edges = net.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double r = 1.0 / edges[e].conductance;
    if (load[e] > r * (1.0 + relative_slack)) {
      fail(ErrorCode::certificate_invalid,
           "infeasible on " + edge_name(net, e) + ": sum of 1/c = " + std::to_string(load[e]) +
               " exceeds r = " + std::to_string(r));
    }
  }
}

double cutset_bound(const CutsetCertificate& cert, const Network& net) {
  validate_certificate(cert, net);
  double bound = 0.0;
  for (const auto& weights : cert.assignment) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (total == 0.0) return std::numeric_limits<double>::infinity();
    bound += 1.0 / total;
  }
  return bound;
}

std::vector<std::vector<std::size_t>> enumerate_cutsets(const Network& net, VertexId u,
                                                        VertexId v) {
  const auto m = net.edge_count();
  if (m > kCutsetEnumerationMaxEdges) {
    fail(ErrorCode::too_large, "cutset enumeration supports at most " +
                                   std::to_string(kCutsetEnumerationMaxEdges) + " edges, got " +
                                   std::to_string(m));
  }
  if (u >= net.vertex_count() || v >= net.vertex_count() || u == v) {
    fail(ErrorCode::invalid_query, "terminals must be distinct vertices of the network");
  }
  const std::size_t subsets = std::size_t{1} << m;
  std::vector<bool> cuts(subsets);
  std::vector<std::size_t> members;
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    members.clear();
    for (std::size_t e = 0; e < m; ++e) {
      if (mask >> e & 1U) members.push_back(e);
    }
    cuts[mask] = separates(net, members, u, v);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    if (!cuts[mask]) continue;
    bool minimal = true;
    for (std::size_t e = 0; e < m && minimal; ++e) {
      if ((mask >> e & 1U) && cuts[mask ^ (std::size_t{1} << e)]) minimal = false;
    }
    if (!minimal) continue;
    auto& cut = out.emplace_back();
    for (std::size_t e = 0; e < m; ++e) {
      if (mask >> e & 1U) cut.push_back(e);
    }
  }
  return out;
}

CutsetCertificate potential_level_certificate(const Network& net, VertexId u, VertexId v) {
  const auto res = two_point_resistance(net, u, v);
  if (!res.connected) fail(ErrorCode::invalid_query, "terminals are not connected");
  const double top = res.potentials[u];
  const double bottom = res.potentials[v];
  const double merge = 1e-12 * (top - bottom);
  const auto reach = reachable_from(net, u);

  std::vector<double> values;
  for (VertexId x = 0; x < net.vertex_count(); ++x) {
    if (reach[x]) values.push_back(std::clamp(res.potentials[x], bottom, top));
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  std::vector<double> levels;
  for (double x : values) {
    if (levels.empty() || levels.back() - x > merge) levels.push_back(x);
  }
  levels.front() = top;
  levels.back() = bottom;

  auto level_of = [&](VertexId x) {
    const double p = std::clamp(res.potentials[x], bottom, top);
    const auto it = std::lower_bound(levels.begin(), levels.end(), p + merge, std::greater<>());
    return static_cast<std::size_t>(it - levels.begin());
  };

  CutsetCertificate cert;
  cert.u = u;
  cert.v = v;
  const std::size_t gaps = levels.size() - 1;
  cert.cutsets.resize(gaps);
  cert.assignment.resize(gaps);
  const auto edges = net.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!reach[edges[e].u]) continue;
    auto a = level_of(edges[e].u);
    auto b = level_of(edges[e].v);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const double span = levels[a] - levels[b];
    for (std::size_t k = a; k < b; ++k) {
      const double width = levels[k] - levels[k + 1];
      cert.cutsets[k].push_back(e);
      cert.assignment[k].push_back(edges[e].conductance * span / width);
    }
  }
  return cert;
}

CutsetCertificate random_certificate(const Network& net, VertexId u, VertexId v,
                                     const std::vector<std::vector<std::size_t>>& cutsets,
                                     CounterRng& rng) {
  if (cutsets.empty()) fail(ErrorCode::invalid_argument, "no cutsets to choose from");
  std::vector<std::size_t> chosen;
  for (std::size_t p = 0; p < cutsets.size(); ++p) {
    if (rng.uniform() < 0.5) chosen.push_back(p);
  }
  if (chosen.empty()) chosen.push_back(uniform_index(rng, cutsets.size()));

  CutsetCertificate cert;
  cert.u = u;
  cert.v = v;
  std::vector<std::vector<double>> weight(chosen.size());
  std::vector<double> weight_sum(net.edge_count(), 0.0);
  for (std::size_t q = 0; q < chosen.size(); ++q) {
    const auto& cut = cutsets[chosen[q]];
    cert.cutsets.push_back(cut);
    for (auto e : cut) {
      const double w = uniform_between(rng, 0.05, 1.0);
      weight[q].push_back(w);
      weight_sum[e] += w;
    }
  }
  std::vector<double> share(net.edge_count());
  for (auto& s : share) s = uniform_between(rng, 0.5, 1.0);
  const auto edges = net.edges();
  for (std::size_t q = 0; q < chosen.size(); ++q) {
    auto& row = cert.assignment.emplace_back();
    for (std::size_t k = 0; k < cert.cutsets[q].size(); ++k) {
      const auto e = cert.cutsets[q][k];
      const double r = 1.0 / edges[e].conductance;
      row.push_back(weight_sum[e] / (r * share[e] * weight[q][k]));
    }
  }
  return cert;
}

Network random_connected_network(CounterRng& rng, const RandomNetworkOptions& options) {
  if (options.min_vertices < 2 || options.max_vertices < options.min_vertices) {
    fail(ErrorCode::invalid_argument, "invalid vertex range for random network");
  }
  const auto n = options.min_vertices +
                 uniform_index(rng, options.max_vertices - options.min_vertices + 1);
  Network net;
  for (std::size_t i = 0; i < n; ++i) net.add_vertex(static_cast<Site>(i));
  auto conductance = [&] {
    return options.unit_conductance
               ? 1.0
               : log_uniform(rng, options.min_conductance, options.max_conductance);
  };
  for (VertexId v = 1; v < n; ++v) net.add_conductance(uniform_index(rng, v), v, conductance());
  for (VertexId a = 0; a < n; ++a) {
    for (VertexId b = a + 1; b < n; ++b) {
      if (!net.edge_index(a, b) && rng.uniform() < options.extra_edge_probability) {
        net.add_conductance(a, b, conductance());
      }
    }
  }
  return net;
}

SeriesParallelNetwork random_series_parallel(CounterRng& rng, std::size_t operations) {
  SeriesParallelNetwork out;
  out.source = out.net.add_vertex(Site{0});
  out.sink = out.net.add_vertex(Site{1});
  Site next_label = 2;

  auto build = [&](auto&& self, VertexId a, VertexId b, std::size_t ops) -> double {
    if (ops == 0) {
      const double c = log_uniform(rng, 0.2, 5.0);
      out.net.add_conductance(a, b, c);
      return 1.0 / c;
    }
    const std::size_t left = uniform_index(rng, ops);
    const std::size_t right = ops - 1 - left;
    if (rng.uniform() < 0.5) {
      const auto mid = out.net.add_vertex(next_label++);
      return self(self, a, mid, left) + self(self, mid, b, right);
    }
    const double r1 = self(self, a, b, left);
    const double r2 = self(self, a, b, right);
    return 1.0 / (1.0 / r1 + 1.0 / r2);
  };
  out.resistance = build(build, out.source, out.sink, operations);
  return out;
}

std::string_view to_string(Suite suite) {
  switch (suite) {
    case Suite::solver: return "solver";
    case Suite::flow_comparison: return "flow-comparison";
    case Suite::rank_one: return "rank-one";
    case Suite::cutset: return "cutset";
  }
  return "unknown";
}

std::vector<Suite> all_suites() {
  return {Suite::solver, Suite::flow_comparison, Suite::rank_one, Suite::cutset};
}

namespace {

constexpr std::size_t kMaxDrawsPerTrial = 10'000;

std::pair<VertexId, VertexId> distinct_pair(CounterRng& rng, std::size_t n) {
  const auto a = uniform_index(rng, n);
  auto b = uniform_index(rng, n - 1);
  if (b >= a) ++b;
  return {a, b};
}

struct TrialOutcome {
  double violation = 0.0;
  bool failed = false;
};

void record(TrialOutcome& out, double violation, double tolerance) {
  out.violation = std::max(out.violation, violation);
  if (violation > tolerance) out.failed = true;
}

TrialOutcome solver_trial(CounterRng& rng) {
  TrialOutcome out;
  RandomNetworkOptions opts;
  opts.max_vertices = 8;
  const auto net = random_connected_network(rng, opts);
  const auto [a, b] = distinct_pair(rng, net.vertex_count());
  const auto res = two_point_resistance(net, a, b);
  const std::vector<VertexId> from{a};
  const std::vector<VertexId> to{b};
  record(out, std::abs(res.value - brute_force_resistance(net, from, to)), 1e-9);

  Network denser = net;
  const auto [p, q] = distinct_pair(rng, net.vertex_count());
  denser.add_conductance(p, q, log_uniform(rng, 0.2, 5.0));
  record(out, two_point_resistance(denser, a, b).value - res.value, 1e-10);

  const auto sp = random_series_parallel(rng, 1 + uniform_index(rng, 8));
  const double law = two_point_resistance(sp.net, sp.source, sp.sink).value;
  record(out, std::abs(law - sp.resistance), 1e-10);
  return out;
}

TrialOutcome flow_comparison_trial(CounterRng& rng, std::size_t& rejected) {
  RandomNetworkOptions opts;
  opts.min_vertices = 4;
  opts.max_vertices = 12;
  for (std::size_t draw = 0; draw < kMaxDrawsPerTrial; ++draw) {
    ComparisonInstance inst;
    inst.net = random_connected_network(rng, opts);
    const auto n = inst.net.vertex_count();
    std::tie(inst.x, inst.y) = distinct_pair(rng, n);
    const auto base = two_point_resistance(inst.net, inst.x, inst.y);
    std::vector<std::array<VertexId, 3>> triples;
    for (VertexId w = 0; w < n; ++w) {
      std::vector<VertexId> feeders;
      for (VertexId z = 0; z < n; ++z) {
        if (z != w && base.flow_between(z, w) > kFlowFloor) feeders.push_back(z);
      }
      for (auto w1 : feeders) {
        for (auto w2 : feeders) {
          if (w1 != w2) triples.push_back({w, w1, w2});
        }
      }
    }
    if (triples.empty()) {
      ++rejected;
      continue;
    }
    const auto& pick = triples[uniform_index(rng, triples.size())];
    inst.w = pick[0];
    inst.w1 = pick[1];
    inst.w2 = pick[2];
    inst.delta_c = log_uniform(rng, 1e-2, 1e2);
    const auto outcome = flow_comparison(inst);
    if (!outcome.applicable) {
      ++rejected;
      continue;
    }
    TrialOutcome out;
    out.violation = std::max(0.0, outcome.g_after - outcome.g_before);
    out.failed = !outcome.holds;
    return out;
  }
  fail(ErrorCode::numeric, "no applicable flow-comparison instance found");
}

TrialOutcome rank_one_trial(CounterRng& rng, bool ground_at_w) {
  RandomNetworkOptions opts;
  opts.min_vertices = 3;
  opts.max_vertices = 12;
  Network net = random_connected_network(rng, opts);
  const auto n = net.vertex_count();
  const auto [w2, w] = distinct_pair(rng, n);
  if (ground_at_w) {
    net.grounded = w;
  } else {
    VertexId g = uniform_index(rng, n);
    while (g == w || g == w2) g = (g + 1) % n;
    net.grounded = g;
  }
  const auto upd = rank_one_update(net, w2, w, log_uniform(rng, 1e-2, 1e2));
  TrialOutcome out;
  record(out, upd.identity_error, 1e-9);
  record(out, upd.reinversion_error, 1e-8);
  if (!(upd.c_hat > 0.0)) out.failed = true;
  return out;
}

TrialOutcome cutset_trial(CounterRng& rng, bool series_parallel) {
  TrialOutcome out;
  if (series_parallel) {
    const auto sp = random_series_parallel(rng, 1 + uniform_index(rng, 10));
    const auto cert = potential_level_certificate(sp.net, sp.source, sp.sink);
    record(out, std::abs(cutset_bound(cert, sp.net) - sp.resistance), 1e-8);
    return out;
  }
  RandomNetworkOptions opts;
  opts.max_vertices = 7;
  opts.extra_edge_probability = 0.3;
  Network net;
  do {
    net = random_connected_network(rng, opts);
  } while (net.edge_count() > kCutsetEnumerationMaxEdges);
  const auto [u, v] = distinct_pair(rng, net.vertex_count());
  const double r = two_point_resistance(net, u, v).value;
  const auto cert = random_certificate(net, u, v, enumerate_cutsets(net, u, v), rng);
  record(out, cutset_bound(cert, net) - r, 1e-9);
  return out;
}

}  // namespace

SuiteReport run_suite(Suite suite, std::size_t trials, std::uint64_t seed) {
  SuiteReport report;
  report.suite = std::string(to_string(suite));
  const auto tag = static_cast<std::uint64_t>(suite) + 1;
  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng(seed, stream_id(0x1DE7, tag, t));
    TrialOutcome outcome;
    switch (suite) {
      case Suite::solver: outcome = solver_trial(rng); break;
      case Suite::flow_comparison: outcome = flow_comparison_trial(rng, report.rejected); break;
      case Suite::rank_one: outcome = rank_one_trial(rng, t % 2 == 0); break;
      case Suite::cutset: outcome = cutset_trial(rng, t % 2 == 1); break;
    }
    ++report.trials;
    if (outcome.failed) ++report.failures;
    report.worst_violation = std::max(report.worst_violation, outcome.violation);
  }
  return report;
}

}  // namespace lrp
