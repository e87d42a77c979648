#include "lrp/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <string>
#include <tuple>

#include "lrp/error.hpp"

namespace lrp {
namespace {

struct BlockContacts {
  std::vector<Site> far;       // one entry per far edge (parallel ones repeated)
  std::vector<Site> entering;  // one entry per edge leaving the block, sorted
};

Range far_context(const RenormGraph& rg, std::size_t i) {
  const Site lo = rg.origin + (static_cast<Site>(i) - 1) * rg.m;
  return {lo, lo + 3 * rg.m - 1};
}

std::vector<BlockContacts> scan_contacts(const LrpSample& sample, const RenormGraph& rg) {
  std::vector<BlockContacts> out(rg.blocks);
  auto visit = [&](Site x, std::optional<Site> other, std::uint32_t count) {
    const auto b = rg.block_of(x);
    if (!b) return;
    if (other && rg.block_range(*b).contains(*other)) return;
    auto& c = out[*b];
    const bool far = !other || !far_context(rg, *b).contains(*other);
    for (std::uint32_t k = 0; k < count; ++k) {
      c.entering.push_back(x);
      if (far) c.far.push_back(x);
    }
  };
  for (const auto& e : sample.edges) {
    visit(e.u, e.v, 1);
    visit(e.v, e.u, 1);
  }
  for (const auto& node : sample.supernodes) {
    for (const auto& [site, count] : node.counts) visit(site, std::nullopt, count);
  }
  for (auto& c : out) {
    std::sort(c.entering.begin(), c.entering.end());
    std::sort(c.far.begin(), c.far.end());
  }
  return out;
}

std::vector<Site> distinct(std::vector<Site> v) {
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Every far edge must be at least `gap` away from every other edge that
// leaves the block. The far edge itself is one of the leaving edges.
bool endpoints_separated(const BlockContacts& c, double gap) {
  for (const Site p : c.far) {
    const auto lo = std::upper_bound(c.entering.begin(), c.entering.end(),
                                     static_cast<double>(p) - gap,
                                     [](double x, Site s) { return x < static_cast<double>(s); });
    const auto hi = std::lower_bound(c.entering.begin(), c.entering.end(),
                                     static_cast<double>(p) + gap,
                                     [](Site s, double x) { return static_cast<double>(s) < x; });
    if (hi - lo >= 2) return false;
  }
  return true;
}

InternalEnergy compute_internal(const LrpSample& sample, const RenormGraph& rg,
                                std::size_t block, std::vector<Site> points, double alpha1) {
  InternalEnergy out;
  out.boundary_points = std::move(points);
  const Range range = rg.block_range(block);
  const double radius = alpha1 * static_cast<double>(rg.m);
  auto net = std::make_shared<const Network>(network_from_sample(sample, range));
  for (const Site u : out.boundary_points) {
    std::vector<VertexId> outside;
    for (Site x = range.lo; x <= range.hi; ++x) {
      if (std::abs(static_cast<double>(x - u)) >= radius) outside.push_back(net->at(x));
    }
    if (outside.empty()) {
      out.point_resistances.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const VertexId from[] = {net->at(u)};
    out.point_resistances.push_back(set_resistance(net, from, outside).value);
  }
  const Range left = rg.block_range(block - 1);
  const Range right = rg.block_range(block + 1);
  out.interval_resistance =
      hat_resistance(sample, HatQuery{left.lo, left.hi, right.lo, right.hi}).value;
  out.value = harmonic_energy(out.point_resistances, out.interval_resistance);
  return out;
}

void check_interior(const RenormGraph& rg, std::size_t block) {
  if (block == 0 || block + 1 >= rg.blocks) {
    fail(ErrorCode::invalid_scale,
         "block " + std::to_string(block) + " lacks a neighbouring block on both sides");
  }
}

}  // namespace

const Edge& BlockEdge::representative() const {
  if (fine.empty()) fail(ErrorCode::lift_infeasible, "coarse edge has no fine edge");
  return *std::min_element(fine.begin(), fine.end(), [](const Edge& a, const Edge& b) {
    return std::tuple(a.length(), a.u, a.v) < std::tuple(b.length(), b.u, b.v);
  });
}

Range RenormGraph::block_range(std::size_t i) const {
  const Site lo = origin + static_cast<Site>(i) * m;
  return {lo, lo + m - 1};
}

std::optional<std::size_t> RenormGraph::block_of(Site x) const {
  if (x < origin) return std::nullopt;
  const auto b = static_cast<std::size_t>((x - origin) / m);
  if (b >= blocks) return std::nullopt;
  return b;
}

const BlockEdge* RenormGraph::find(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  const auto it = std::lower_bound(edges.begin(), edges.end(), std::pair(i, j),
                                   [](const BlockEdge& e, const std::pair<std::size_t, std::size_t>& k) {
                                     return std::pair(e.i, e.j) < k;
                                   });
  if (it == edges.end() || it->i != i || it->j != j) return nullptr;
  return &*it;
}

std::vector<std::size_t> RenormGraph::degrees() const {
  std::vector<std::size_t> deg(blocks, 0);
  for (const auto& e : edges) {
    ++deg[e.i];
    ++deg[e.j];
  }
  return deg;
}

RenormGraph renormalize(const LrpSample& sample, Site m) {
  if (m < 1) fail(ErrorCode::invalid_scale, "block length must be at least 1");
  const Site length = sample.hi - sample.lo + 1;
  if (length / m < 2) {
    fail(ErrorCode::invalid_scale, "window of length " + std::to_string(length) +
                                       " holds fewer than two blocks of length " +
                                       std::to_string(m));
  }
  RenormGraph rg;
  rg.origin = sample.lo;
  rg.m = m;
  rg.blocks = static_cast<std::size_t>(length / m);
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Edge>> joined;
  for (const auto& e : sample.edges) {
    const auto a = rg.block_of(e.u);
    const auto b = rg.block_of(e.v);
    if (!a || !b || *a == *b) continue;
    joined[{*a, *b}].push_back(e);
  }
  rg.edges.reserve(joined.size());
  for (auto& [key, fine] : joined) {
    rg.edges.push_back(BlockEdge{key.first, key.second, std::move(fine)});
  }
  return rg;
}

double block_edge_probability(double beta, Site m, Site d) {
  if (m < 1) fail(ErrorCode::invalid_scale, "block length must be at least 1");
  if (d < 1) fail(ErrorCode::invalid_distance, "block distance must be at least 1");
  if (!(beta > 0.0)) fail(ErrorCode::invalid_argument, "beta must be positive");
  if (d == 1) return 1.0;
  double sum = 0.0;
  double carry = 0.0;
  for (Site k = (d - 1) * m + 1; k <= (d + 1) * m - 1; ++k) {
    const double term = static_cast<double>(m - std::abs(k - d * m)) * coupling_exponent(k);
    const double t = sum + term;
    carry += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return -std::expm1(-beta * (sum + carry));
}

void ClassifyParams::validate() const {
  if (m < 1) fail(ErrorCode::invalid_scale, "block length must be at least 1");
  if (!(delta > 0.0 && delta <= 1.0)) fail(ErrorCode::invalid_argument, "delta must lie in (0, 1]");
  if (!(alpha1 > 0.0 && alpha1 < 1.0)) fail(ErrorCode::invalid_argument, "alpha1 must lie in (0, 1)");
  if (!(alpha2 > 0.0 && alpha2 < 1.0)) fail(ErrorCode::invalid_argument, "alpha2 must lie in (0, 1)");
  if (mode == ThresholdMode::lambda_hat && !(lambda_hat > 0.0 && std::isfinite(lambda_hat))) {
    fail(ErrorCode::invalid_argument, "lambda-hat mode needs a positive lambda_hat");
  }
}

double ClassifyParams::threshold() const {
  return mode == ThresholdMode::power ? alpha2 * std::pow(static_cast<double>(m), delta)
                                      : alpha2 * lambda_hat;
}

std::vector<IntervalClassification> classify(const LrpSample& sample,
                                             const ClassifyParams& params) {
  params.validate();
  const auto rg = renormalize(sample, params.m);
  const auto contacts = scan_contacts(sample, rg);
  const auto degree = rg.degrees();
  const double threshold = params.threshold();
  const double gap = params.alpha1 * static_cast<double>(params.m);

  std::vector<IntervalClassification> out(rg.blocks);
  for (std::size_t i = 0; i < rg.blocks; ++i) {
    auto& c = out[i];
    c.block = i;
    c.boundary_points = distinct(contacts[i].far);
    c.xi = c.boundary_points.size();
    c.eta = degree[i];
    c.m_good = c.xi <= params.max_boundary_points;
    if (i == 0 || i + 1 == rg.blocks) {
      c.indeterminate = true;
      continue;
    }
    c.cond1 = endpoints_separated(contacts[i], gap);
    const auto energy = compute_internal(sample, rg, i, c.boundary_points, params.alpha1);
    c.internal_energy = energy.value;
    c.interval_resistance = energy.interval_resistance;
    c.cond2 = std::all_of(energy.point_resistances.begin(), energy.point_resistances.end(),
                          [&](double a) { return a >= threshold; });
    c.cond3 = energy.interval_resistance >= threshold;
    c.very_good = c.cond1 && energy.value >= threshold;
  }
  return out;
}

double harmonic_energy(std::span<const double> a, double b) {
  if (!(b >= 0.0)) fail(ErrorCode::invalid_argument, "interval resistance must be nonnegative");
  double inverse = std::isinf(b) ? 0.0 : (b == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / b);
  for (const double x : a) {
    if (!(x >= 0.0)) fail(ErrorCode::invalid_argument, "point resistances must be nonnegative");
    if (x == 0.0) return 0.0;
    if (!std::isinf(x)) inverse += 1.0 / x;
  }
  if (std::isinf(inverse)) return 0.0;
  if (inverse == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / inverse;
}

std::vector<double> optimal_split(std::span<const double> a, double b) {
  if (!(b >= 0.0)) fail(ErrorCode::invalid_argument, "interval resistance must be nonnegative");
  std::vector<double> theta(a.size(), 0.0);
  double h = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!(a[k] >= 0.0)) fail(ErrorCode::invalid_argument, "point resistances must be nonnegative");
    if (a[k] == 0.0) {
      theta[k] = 1.0;
      return theta;
    }
    if (!std::isinf(a[k])) h += 1.0 / a[k];
  }
  if (h == 0.0 || b == 0.0) return theta;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::isinf(a[k])) continue;
    theta[k] = std::isinf(b) ? (1.0 / a[k]) / h : b / (a[k] * (1.0 + b * h));
  }
  return theta;
}

InternalEnergy internal_energy(const LrpSample& sample, std::size_t block, Site m,
                               double alpha1) {
  if (!(alpha1 > 0.0 && alpha1 < 1.0)) {
    fail(ErrorCode::invalid_argument, "alpha1 must lie in (0, 1)");
  }
  const auto rg = renormalize(sample, m);
  check_interior(rg, block);
  const auto contacts = scan_contacts(sample, rg);
  return compute_internal(sample, rg, block, distinct(contacts[block].far), alpha1);
}

RedComponents red_components(const RenormGraph& rg, std::span<const bool> red) {
  if (red.size() != rg.blocks) {
    fail(ErrorCode::invalid_argument, "one flag per block is required");
  }
  std::vector<std::vector<std::size_t>> adj(rg.blocks);
  for (const auto& e : rg.edges) {
    if (red[e.i] && red[e.j]) {
      adj[e.i].push_back(e.j);
      adj[e.j].push_back(e.i);
    }
  }
  RedComponents out;
  std::vector<bool> seen(rg.blocks, false);
  for (std::size_t s = 0; s < rg.blocks; ++s) {
    if (!red[s] || seen[s]) continue;
    auto& comp = out.components.emplace_back();
    std::deque<std::size_t> queue{s};
    seen[s] = true;
    while (!queue.empty()) {
      const auto x = queue.front();
      queue.pop_front();
      comp.push_back(x);
      for (const auto y : adj[x]) {
        if (!seen[y]) {
          seen[y] = true;
          queue.push_back(y);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.sizes.push_back(comp.size());
  }
  std::sort(out.sizes.begin(), out.sizes.end(), std::greater<>());
  if (!out.sizes.empty()) {
    const auto total = static_cast<double>(out.sizes.size());
    out.survival.resize(out.sizes.front() + 1);
    for (std::size_t k = 0; k < out.survival.size(); ++k) {
      const auto at_least = std::count_if(out.sizes.begin(), out.sizes.end(),
                                          [k](std::size_t s) { return s >= k; });
      out.survival[k] = static_cast<double>(at_least) / total;
    }
  }
  return out;
}

FineFlow fine_flow(const ResistanceResult& result) {
  FineFlow out;
  if (!result.connected) return out;
  const auto edges = result.network->edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto* a = std::get_if<Site>(&result.network->label(edges[e].u));
    const auto* b = std::get_if<Site>(&result.network->label(edges[e].v));
    if (!a || !b) continue;
    if (*a < *b) {
      out[Edge{*a, *b}] += result.flow[e];
    } else {
      out[Edge{*b, *a}] -= result.flow[e];
    }
  }
  return out;
}

std::map<Site, double> divergence(const FineFlow& flow) {
  std::map<Site, double> div;
  for (const auto& [e, f] : flow) {
    div[e.u] += f;
    div[e.v] -= f;
  }
  return div;
}

std::vector<double> divergence(const BlockFlow& flow, std::size_t blocks) {
  std::vector<double> div(blocks, 0.0);
  for (const auto& [key, f] : flow) {
    if (key.first >= blocks || key.second >= blocks) {
      fail(ErrorCode::invalid_flow, "block flow names a block outside the graph");
    }
    div[key.first] += f;
    div[key.second] -= f;
  }
  return div;
}

BlockFlow project_flow(const RenormGraph& rg, const FineFlow& flow, double tolerance) {
  std::vector<std::pair<Site, double>> unbalanced;
  for (const auto& [site, d] : divergence(flow)) {
    if (std::abs(d) > tolerance) unbalanced.emplace_back(site, d);
  }
  const bool conserving =
      unbalanced.empty() ||
      (unbalanced.size() == 2 &&
       std::abs(unbalanced[0].second + unbalanced[1].second) <= tolerance);
  if (!conserving) {
    fail(ErrorCode::invalid_flow, "fine flow does not conserve current: " +
                                      std::to_string(unbalanced.size()) +
                                      " unbalanced sites");
  }
  BlockFlow g;
  for (const auto& [e, f] : flow) {
    const auto a = rg.block_of(e.u);
    const auto b = rg.block_of(e.v);
    if (!a || !b) {
      fail(ErrorCode::invalid_flow, "flow on edge {" + std::to_string(e.u) + "," +
                                        std::to_string(e.v) + "} leaves the tiled blocks");
    }
    if (*a != *b) g[{*a, *b}] += f;
  }
  return g;
}

LiftedFlow lift_flow(const RenormGraph& rg, const LrpSample& sample, const BlockFlow& g,
                     std::size_t source_block, std::size_t sink_block,
                     std::optional<Site> source, std::optional<Site> sink, double tolerance) {
  if (source_block >= rg.blocks || sink_block >= rg.blocks || source_block == sink_block) {
    fail(ErrorCode::invalid_flow, "terminal blocks must be distinct blocks of the graph");
  }
  LiftedFlow out;
  out.source = source.value_or(rg.block_range(source_block).lo);
  out.sink = sink.value_or(rg.block_range(sink_block).lo);
  if (!rg.block_range(source_block).contains(out.source) ||
      !rg.block_range(sink_block).contains(out.sink)) {
    fail(ErrorCode::invalid_flow, "fine terminal lies outside its terminal block");
  }

  const auto div = divergence(g, rg.blocks);
  for (std::size_t b = 0; b < rg.blocks; ++b) {
    const double want = b == source_block ? 1.0 : (b == sink_block ? -1.0 : 0.0);
    if (std::abs(div[b] - want) > tolerance) {
      fail(ErrorCode::invalid_flow, "block flow is not a unit flow between the terminal blocks "
                                    "(block " + std::to_string(b) + ")");
    }
  }

  // Per block: (partner block or external, amount) for arriving and departing
  // mass, plus the fine injection pattern.
  struct Side {
    std::optional<std::size_t> partner;
    double amount;
  };
  std::vector<std::vector<Side>> arriving(rg.blocks), departing(rg.blocks);
  std::vector<std::map<Site, double>> injection(rg.blocks);
  for (const auto& [key, f] : g) {
    if (f == 0.0) continue;
    const auto* edge = rg.find(key.first, key.second);
    if (!edge || key.first >= key.second) {
      fail(ErrorCode::lift_infeasible, "no fine edge joins blocks " + std::to_string(key.first) +
                                           " and " + std::to_string(key.second));
    }
    const Edge& rep = edge->representative();
    out.flow[rep] += f;
    injection[key.first][rep.u] -= f;
    injection[key.second][rep.v] += f;
    const auto [from, to] = f > 0 ? std::pair(key.first, key.second)
                                  : std::pair(key.second, key.first);
    departing[from].push_back({to, std::abs(f)});
    arriving[to].push_back({from, std::abs(f)});
  }
  injection[source_block][out.source] += 1.0;
  injection[sink_block][out.sink] -= 1.0;
  arriving[source_block].push_back({std::nullopt, 1.0});
  departing[sink_block].push_back({std::nullopt, 1.0});

  for (std::size_t b = 0; b < rg.blocks; ++b) {
    double total = 0.0;
    for (const auto& s : arriving[b]) total += s.amount;
    if (total == 0.0) continue;
    for (const auto& in : arriving[b]) {
      for (const auto& leave : departing[b]) {
        out.splits.push_back({b, in.partner, leave.partner, in.amount * leave.amount / total});
      }
    }

    const Range range = rg.block_range(b);
    const Network net = network_from_sample(sample, range);
    std::vector<double> inject(net.vertex_count(), 0.0);
    bool any = false;
    for (const auto& [site, amount] : injection[b]) {
      inject[net.at(site)] += amount;
      any = any || amount != 0.0;
    }
    if (!any) continue;
    const auto solution = solve_injection(net, inject, 0);
    const auto edges = net.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (solution.flow[e] == 0.0) continue;
      const Site a = std::get<Site>(net.label(edges[e].u));
      const Site c = std::get<Site>(net.label(edges[e].v));
      if (a < c) {
        out.flow[Edge{a, c}] += solution.flow[e];
      } else {
        out.flow[Edge{c, a}] -= solution.flow[e];
      }
    }
  }
  return out;
}

}  // namespace lrp
