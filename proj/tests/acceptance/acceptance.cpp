#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include <lrp/estimation.hpp>
#include <lrp/identities.hpp>
#include <lrp/model.hpp>
#include <lrp/network.hpp>
#include <lrp/renorm.hpp>
#include <lrp/serialize.hpp>
#include <lrp/solver.hpp>

#include "enumeration.hpp"
#include "flow.hpp"
#include "linear.hpp"
#include "qp.hpp"
#include "quadrature.hpp"

namespace {

using lrp::Site;
using lrp::VertexId;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* format, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, x);
  return buf;
}

std::vector<oracle::Conductor> conductors(const lrp::Network& net) {
  std::vector<oracle::Conductor> out;
  for (const auto& e : net.edges()) out.push_back({e.u, e.v, e.conductance});
  return out;
}

lrp::CampaignOptions campaign(std::size_t replicates, std::uint64_t seed, unsigned threads = 1) {
  lrp::CampaignOptions o;
  o.replicates = replicates;
  o.seed = seed;
  o.threads = threads;
  return o;
}

// Shared β = 1 scaling campaign over 16..1024.
lrp::ScalingConfig main_config(unsigned threads) {
  lrp::ScalingConfig c;
  c.beta = 1.0;
  c.scales = {16, 32, 64, 128, 256, 512, 1024};
  c.options = campaign(200, 11, threads);
  c.box_to_box_max_scale = 256;
  c.multiplicativity_pairs = {{4, 8}, {8, 8}, {8, 16}};
  return c;
}

const lrp::ScalingReport& main_report() {
  static const lrp::ScalingReport report = lrp::run_scaling(main_config(1));
  return report;
}

Verdict model_exactness() {
  Verdict v;
  double worst = 0.0;
  for (Site k = 2; k <= 100; ++k) {
    worst = std::max(worst, std::abs(lrp::coupling_exponent(k) -
                                     static_cast<double>(oracle::cell_coupling(k))));
  }
  v.require(worst < 1e-12, "quadrature gap " + fmt("%.3g", worst));
  v.note("max quadrature gap " + fmt("%.2g", worst));

  const std::size_t replicates = 100000;
  double worst_z = 0.0;
  for (const double beta : {0.5, 1.0, 2.0}) {
    lrp::ModelParams params;
    params.beta = beta;
    params.seed = 101;
    std::vector<std::size_t> hits(21, 0);
    for (std::size_t r = 0; r < replicates; ++r) {
      const auto s = lrp::sample_window(params, 0, 20, {}, r);
      for (Site k = 2; k <= 20; ++k) hits[k] += s.has_edge(0, k);
    }
    for (Site k = 2; k <= 20; ++k) {
      const double p = static_cast<double>(oracle::pair_probability(beta, k));
      const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(replicates));
      const double z = std::abs(static_cast<double>(hits[k]) / replicates - p) / sigma;
      worst_z = std::max(worst_z, z);
      if (z > 4.0) v.require(false, "beta " + fmt("%g", beta) + " k " + std::to_string(k) + " off by " + fmt("%.2f", z) + " sigma");
    }
  }
  v.note("max edge-frequency deviation " + fmt("%.2f", worst_z) + " sigma");
  return v;
}

Verdict solver_correctness() {
  Verdict v;
  lrp::CounterRng rng(202, 0);
  double worst = 0.0;
  for (int g = 0; g < 100; ++g) {
    lrp::RandomNetworkOptions opts;
    opts.max_vertices = 8;
    const auto net = lrp::random_connected_network(rng, opts);
    const VertexId a = 0, b = net.vertex_count() - 1;
    const double r = lrp::two_point_resistance(net, a, b).value;
    const auto edges = conductors(net);
    const auto flow = static_cast<double>(oracle::min_flow_energy(net.vertex_count(), edges, a, b));
    const auto elim = static_cast<double>(oracle::resistance(net.vertex_count(), edges, a, b));
    worst = std::max({worst, std::abs(r - flow), std::abs(r - elim)});
  }
  v.require(worst <= 1e-9, "oracle gap " + fmt("%.3g", worst));
  v.note("100 graphs, max oracle gap " + fmt("%.2g", worst));

  double sp_worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto sp = lrp::random_series_parallel(rng, 1 + t % 12);
    sp_worst = std::max(sp_worst, std::abs(lrp::two_point_resistance(sp.net, sp.source, sp.sink).value - sp.resistance));
  }
  v.require(sp_worst <= 1e-10, "series/parallel gap " + fmt("%.3g", sp_worst));
  v.note("series/parallel gap " + fmt("%.2g", sp_worst));

  std::size_t violations = 0;
  for (int t = 0; t < 200; ++t) {
    auto net = lrp::random_connected_network(rng);
    const VertexId a = 0, b = net.vertex_count() - 1;
    const double before = lrp::two_point_resistance(net, a, b).value;
    const auto x = static_cast<VertexId>(rng() % net.vertex_count());
    auto y = static_cast<VertexId>(rng() % net.vertex_count());
    if (y == x) y = (y + 1) % net.vertex_count();
    net.add_conductance(x, y, 0.1 + rng.uniform());
    violations += lrp::two_point_resistance(net, a, b).value > before + 1e-12;
  }
  v.require(violations == 0, std::to_string(violations) + " Rayleigh violations");
  v.note("200 Rayleigh trials");
  return v;
}

Verdict flow_identities() {
  Verdict v;
  const auto report = lrp::run_suite(lrp::Suite::flow_comparison, 500, 303);
  v.require(report.failures == 0, std::to_string(report.failures) + " comparison failures");
  v.note("500 applicable comparisons, worst excess " + fmt("%.2g", report.worst_violation) + ", " +
         std::to_string(report.rejected) + " draws not applicable");

  lrp::CounterRng rng(304, 0);
  std::size_t grounded = 0, interior = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    lrp::RandomNetworkOptions opts;
    opts.max_vertices = 12;
    auto net = lrp::random_connected_network(rng, opts);
    const auto n = net.vertex_count();
    const auto w = static_cast<VertexId>(rng() % n);
    const auto w2 = static_cast<VertexId>((w + 1 + rng() % (n - 1)) % n);
    if (t % 2 == 0) {
      net.grounded = w;
    } else {
      VertexId g = 0;
      while (g == w || g == w2) ++g;
      net.grounded = g;
    }
    const auto upd = lrp::rank_one_update(net, w2, w, std::exp(6.0 * rng.uniform() - 3.0));
    (upd.grounded_variant ? grounded : interior) += 1;
    worst = std::max(worst, upd.identity_error);
  }
  v.require(worst < 1e-9, "rank-one identity error " + fmt("%.3g", worst));
  v.require(grounded > 0 && interior > 0, "both variants must occur");
  v.note("rank-one " + std::to_string(grounded) + " grounded + " + std::to_string(interior) +
         " interior, max error " + fmt("%.2g", worst));
  return v;
}

Verdict cutset_bound() {
  Verdict v;
  lrp::CounterRng rng(404, 0);
  double worst_excess = -1e300;
  std::size_t certificates = 0;
  for (int g = 0; g < 50; ++g) {
    lrp::RandomNetworkOptions opts;
    opts.max_vertices = 7;
    opts.extra_edge_probability = 0.3;
    lrp::Network net;
    do {
      net = lrp::random_connected_network(rng, opts);
    } while (net.edge_count() > lrp::kCutsetEnumerationMaxEdges);
    const VertexId u = 0, w = net.vertex_count() - 1;
    const double r = lrp::two_point_resistance(net, u, w).value;
    const auto cuts = lrp::enumerate_cutsets(net, u, w);
    for (int c = 0; c < 20; ++c) {
      const auto cert = lrp::random_certificate(net, u, w, cuts, rng);
      lrp::validate_certificate(cert, net);
      worst_excess = std::max(worst_excess, lrp::cutset_bound(cert, net) - r);
      ++certificates;
    }
  }
  v.require(worst_excess <= 1e-9, "bound exceeds R by " + fmt("%.3g", worst_excess));
  v.note(std::to_string(certificates) + " certificates on 50 graphs, max bound - R " + fmt("%.3g", worst_excess));

  double sp_worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto sp = lrp::random_series_parallel(rng, 1 + t % 10);
    const auto cert = lrp::potential_level_certificate(sp.net, sp.source, sp.sink);
    lrp::validate_certificate(cert, sp.net);
    sp_worst = std::max(sp_worst, std::abs(lrp::cutset_bound(cert, sp.net) - sp.resistance));
  }
  v.require(sp_worst <= 1e-8, "series-parallel gap " + fmt("%.3g", sp_worst));
  v.note("series-parallel equality gap " + fmt("%.2g", sp_worst));
  return v;
}

Verdict renorm_self_similarity() {
  Verdict v;
  double worst = 0.0;
  for (const double beta : {0.5, 1.0, 2.0}) {
    for (const Site m : {2, 8, 32}) {
      worst = std::max(worst, std::abs(lrp::block_edge_probability(beta, m, 1) - 1.0));
      for (Site d = 2; d <= 64; ++d) {
        worst = std::max(worst, std::abs(lrp::block_edge_probability(beta, m, d) - lrp::edge_probability(beta, d)));
      }
    }
  }
  v.require(worst <= 1e-12, "marginal gap " + fmt("%.3g", worst));
  v.note("marginal gap " + fmt("%.2g", worst));

  const double beta = 1.0;
  const Site m = 8;
  const std::size_t blocks = 64, replicates = 10000;
  lrp::ModelParams params;
  params.beta = beta;
  params.seed = 505;
  std::vector<std::size_t> hits(blocks, 0);
  for (std::size_t r = 0; r < replicates; ++r) {
    const auto s = lrp::sample_window(params, 0, m * static_cast<Site>(blocks) - 1, {}, r);
    const auto rg = lrp::renormalize(s, m);
    for (const auto& e : rg.edges) ++hits[e.j - e.i];
  }
  // One binomial cell per distance; distance 1 is deterministic.
  double chi2 = 0.0, min_p = 1.0;
  std::size_t dof = 0;
  for (std::size_t d = 2; d < blocks; ++d) {
    const double trials = static_cast<double>(replicates * (blocks - d));
    const double p = lrp::block_edge_probability(beta, m, static_cast<Site>(d));
    const double expected = trials * p;
    const double term = std::pow(static_cast<double>(hits[d]) - expected, 2) / (expected * (1 - p));
    chi2 += term;
    ++dof;
    min_p = std::min(min_p, 1.0 - boost::math::cdf(boost::math::chi_squared(1.0), term));
  }
  v.require(hits[1] == replicates * (blocks - 1), "adjacent blocks not always joined");
  const double p_value = 1.0 - boost::math::cdf(boost::math::chi_squared(static_cast<double>(dof)), chi2);
  v.require(p_value > 0.01, "chi-square p = " + fmt("%.3g", p_value));
  v.note("chi-square over " + std::to_string(dof) + " distances = " + fmt("%.1f", chi2) + ", p = " +
         fmt("%.3f", p_value) + " (smallest single-distance p " + fmt("%.3f", min_p) + ")");
  return v;
}

lrp::BlockFlow coarse_unit_flow(const lrp::RenormGraph& rg, std::size_t a, std::size_t b) {
  lrp::Network net;
  for (std::size_t i = 0; i < rg.blocks; ++i) net.add_vertex(static_cast<Site>(i));
  for (const auto& e : rg.edges) net.add_conductance(e.i, e.j, 1.0);
  const auto r = lrp::two_point_resistance(net, a, b);
  lrp::BlockFlow g;
  for (const auto& e : rg.edges) g[{e.i, e.j}] = r.flow_between(e.i, e.j);
  return g;
}

Verdict internal_energy_and_flows() {
  Verdict v;
  lrp::CounterRng rng(606, 0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t k = 1 + rng() % 8;
    std::vector<double> a(k);
    for (auto& x : a) x = std::exp(4.0 * rng.uniform() - 2.0);
    const double b = std::exp(4.0 * rng.uniform() - 2.0);
    worst = std::max(worst, std::abs(lrp::harmonic_energy(a, b) - oracle::internal_energy_qp(a, b).value));
  }
  v.require(worst <= 1e-10, "QP gap " + fmt("%.3g", worst));
  v.note("QP gap " + fmt("%.2g", worst));

  std::size_t mismatches = 0, checked = 0;
  for (std::uint64_t r = 0; r < 50; ++r) {
    lrp::ModelParams params;
    params.seed = 607;
    const auto s = lrp::sample_window(params, 0, 8 * 16 - 1, {}, r);
    const auto rg = lrp::renormalize(s, 8);
    const auto g = coarse_unit_flow(rg, 1, 14);
    const auto back = lrp::project_flow(rg, lrp::lift_flow(rg, s, g, 1, 14).flow);
    for (const auto& [key, f] : g) {
      const auto it = back.find(key);
      mismatches += (it == back.end() ? 0.0 : it->second) != f;
      ++checked;
    }
    for (const auto& [key, f] : back) mismatches += !g.contains(key);
  }
  v.require(mismatches == 0, std::to_string(mismatches) + " coarse edges changed by project after lift");
  v.note("project after lift exact on " + std::to_string(checked) + " coarse edges");
  return v;
}

Verdict small_n() {
  Verdict v;
  const auto opts = campaign(10000, 707);
  const auto e = lrp::estimate_lambda(1.0, 3, opts);
  const auto ratio = lrp::second_moment_ratio(1.0, 3, opts);
  const auto exact = oracle::window_moments(1.0, 3, 0, 2);
  const double mean = static_cast<double>(exact.mean);
  const double second = static_cast<double>(exact.second / (exact.mean * exact.mean));
  v.require(std::abs(mean - 5.0 / 3.0) < 1e-12 && std::abs(second - 1.12) < 1e-12, "enumeration disagrees with 5/3, 1.12");
  v.require(e.ci95.contains(mean), "mean CI misses 5/3");
  v.require(ratio.ci95.contains(second), "ratio CI misses 1.12");
  v.note("E[R] = " + fmt("%.4f", e.mean) + " [" + fmt("%.4f", e.ci95.lo) + ", " + fmt("%.4f", e.ci95.hi) +
         "], ratio = " + fmt("%.4f", ratio.ratio) + " [" + fmt("%.4f", ratio.ci95.lo) + ", " + fmt("%.4f", ratio.ci95.hi) + "]");
  return v;
}

Verdict exponent_existence() {
  Verdict v;
  const auto& rep = main_report();
  const auto& lf = rep.lambda_fit;
  v.require(lf.r_squared > 0.98, "lambda r^2 " + fmt("%.4f", lf.r_squared));
  v.require(lf.delta_hat > 0.02 && lf.delta_hat < 0.98, "lambda exponent out of range");
  v.note("lambda: delta = " + fmt("%.4f", lf.delta_hat) + " +/- " + fmt("%.4f", lf.std_error) + ", r^2 = " + fmt("%.4f", lf.r_squared));
  if (!rep.point_to_box_fit) {
    v.require(false, "no point-to-box fit");
    return v;
  }
  const auto& pf = *rep.point_to_box_fit;
  v.require(pf.r_squared > 0.98, "point-to-box r^2 " + fmt("%.4f", pf.r_squared));
  v.require(pf.delta_hat > 0.02 && pf.delta_hat < 0.98, "point-to-box exponent out of range");
  v.note("point-to-box: delta = " + fmt("%.4f", pf.delta_hat) + " +/- " + fmt("%.4f", pf.std_error) + ", r^2 = " + fmt("%.4f", pf.r_squared));
  const double combined = std::hypot(lf.std_error, pf.std_error);
  const double gap = std::abs(lf.delta_hat - pf.delta_hat);
  v.require(gap <= 2.0 * combined, "exponents differ by " + fmt("%.2f", gap / combined) + " combined stderr");
  return v;
}

Verdict multiplicativity() {
  Verdict v;
  double lo = 1e300, hi = 0.0;
  for (const auto& row : main_report().multiplicativity) {
    v.require(row.applicable && row.ratio > 0.0, "inapplicable pair");
    lo = std::min(lo, row.ratio);
    hi = std::max(hi, row.ratio);
    v.note(std::to_string(row.m) + "x" + std::to_string(row.n) + ": " + fmt("%.3f", row.ratio));
  }
  v.require(hi / lo < 4.0, "band " + fmt("%.3f", hi / lo));
  v.note("band max/min " + fmt("%.3f", hi / lo));
  return v;
}

Verdict comparability() {
  Verdict v;
  const auto& types = main_report().types;
  std::vector<Site> scales;
  for (const auto& row : types.rows) scales.push_back(row.n);
  v.require(scales == std::vector<Site>{16, 32, 64, 128, 256}, "type table must cover 16..256");
  v.require(types.point_to_box_variation < 4.0, "point-to-box variation " + fmt("%.3f", types.point_to_box_variation));
  v.require(types.box_to_box_variation < 4.0, "box-to-box variation " + fmt("%.3f", types.box_to_box_variation));
  v.note("point-to-box variation " + fmt("%.3f", types.point_to_box_variation) + ", box-to-box " + fmt("%.3f", types.box_to_box_variation));
  return v;
}

Verdict cut_points() {
  Verdict v;
  std::size_t checked = 0;
  for (const double beta : {0.5, 1.0}) {
    for (const Site m : {32, 64}) {
      const auto stats = lrp::cut_point_stats(beta, m, campaign(10000, 1111));
      const double floor = 0.1 * std::pow(static_cast<double>(m), -beta);
      // The upper bound covers the left half; the right half mirrors it.
      auto check = [&](const lrp::PositionFrequency& p, const char* kind) {
        const bool left = 2 * p.i < m;
        const double ceiling = 4.0 * std::pow(static_cast<double>(p.i), -beta);
        if ((left && p.frequency > ceiling + 4 * p.sigma) || p.frequency < floor - 4 * p.sigma) {
          v.require(false, std::string(kind) + " point " + std::to_string(p.i) + " at beta " + fmt("%g", beta) +
                               ", m " + std::to_string(m) + ": " + fmt("%.4f", p.frequency));
        }
        ++checked;
      };
      for (const auto& p : stats.cut) check(p, "cut");
      for (const auto& p : stats.separation) check(p, "separation");
    }
  }
  v.note(std::to_string(checked) + " position frequencies within bounds");
  return v;
}

Verdict monotone_exponent() {
  Verdict v;
  auto fit_at = [](double beta) {
    if (beta == 1.0) return main_report().lambda_fit;
    lrp::ScalingConfig c = main_config(1);
    c.beta = beta;
    c.point_to_box = false;
    c.box_to_box_max_scale = 0;
    c.multiplicativity_pairs.clear();
    return lrp::run_scaling(c).lambda_fit;
  };
  const auto half = fit_at(0.5), one = fit_at(1.0), two = fit_at(2.0);
  auto ordered = [&](const lrp::ExponentFit& a, const lrp::ExponentFit& b, const std::string& label) {
    const double slack = 2.0 * std::hypot(a.std_error, b.std_error);
    v.require(a.delta_hat >= b.delta_hat - slack, label + " out of order");
  };
  ordered(half, one, "delta(0.5) >= delta(1)");
  ordered(one, two, "delta(1) >= delta(2)");
  v.note("delta(0.5) = " + fmt("%.4f", half.delta_hat) + " +/- " + fmt("%.4f", half.std_error) +
         ", delta(1) = " + fmt("%.4f", one.delta_hat) + " +/- " + fmt("%.4f", one.std_error) +
         ", delta(2) = " + fmt("%.4f", two.delta_hat) + " +/- " + fmt("%.4f", two.std_error));
  return v;
}

Verdict reproducibility() {
  Verdict v;
  const auto first = lrp::dump(lrp::to_json(main_report()));
  const auto second = lrp::dump(lrp::to_json(lrp::run_scaling(main_config(3))));
  v.require(first == second, "reports differ between runs");
  v.note("two full runs (1 and 3 threads) byte-identical, " + std::to_string(first.size()) + " bytes");

  const auto opts = campaign(0, 1313);
  const auto whole = lrp::collect(lrp::Quantity::point_to_box, 1.0, 64, opts, 0, 120);
  std::vector<lrp::ReplicateAccumulator> batches;
  for (std::size_t start = 0; start < 120; start += 17) {
    batches.push_back(lrp::collect(lrp::Quantity::point_to_box, 1.0, 64, opts, start, std::min<std::size_t>(17, 120 - start)));
  }
  lrp::ReplicateAccumulator forward, backward;
  for (const auto& b : batches) forward.merge(b);
  for (auto it = batches.rbegin(); it != batches.rend(); ++it) backward.merge(*it);
  const auto digits = [](const lrp::ReplicateAccumulator& acc) {
    return lrp::dump(lrp::to_json(lrp::finalize(lrp::Quantity::point_to_box, 64, acc)));
  };
  v.require(digits(forward) == digits(whole) && digits(backward) == digits(whole), "merge order changed an estimate");
  v.note("batch merge order leaves every digit unchanged");
  return v;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Verdict()> check;
  double budget_seconds;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "model exactness", model_exactness, 60},
      {2, "solver correctness", solver_correctness, 60},
      {3, "flow comparison and rank-one update", flow_identities, 60},
      {4, "cutset variational bound", cutset_bound, 1e9},
      {5, "renormalization self-similarity", renorm_self_similarity, 1e9},
      {6, "internal energy and flow projection", internal_energy_and_flows, 1e9},
      {7, "exhaustive small-n agreement", small_n, 1e9},
      {8, "exponent existence", exponent_existence, 1800},
      {9, "two-sided multiplicativity", multiplicativity, 1e9},
      {10, "comparability bands", comparability, 1e9},
      {11, "cut and separation point bounds", cut_points, 1e9},
      {12, "monotone exponent", monotone_exponent, 1e9},
      {13, "reproducibility", reproducibility, 1e9},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v.require(seconds < c.budget_seconds, "over time budget");
    failed += !v.pass;
    std::printf("criterion %d: %s %s (%s) [%.1f s]\n", c.id, v.pass ? "PASS" : "FAIL", c.title,
                v.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
