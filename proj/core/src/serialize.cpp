#include "lrp/serialize.hpp"

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "lrp/error.hpp"

namespace lrp {
namespace {

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json end_point(Site x) {
  if (x == kMinusInfinity || x == kPlusInfinity) return nullptr;
  return x;
}

Site read_end(const Json& j, Site infinite) { return j.is_null() ? infinite : j.get<Site>(); }

std::string format(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json interval(const Interval& i) { return Json::array({number(i.lo), number(i.hi)}); }

}  // namespace

Json to_json(const LrpSample& sample) {
  Json edges = Json::array();
  for (const auto& e : sample.edges) edges.push_back({e.u, e.v});
  Json supernodes = Json::array();
  for (const auto& node : sample.supernodes) {
    Json counts = Json::object();
    for (const auto& [site, count] : node.counts) counts[std::to_string(site)] = count;
    supernodes.push_back({{"label", node.label}, {"covers", node.covers}, {"counts", counts}});
  }
  Json forbidden = Json::array();
  for (const auto& c : sample.forbidden.classes) {
    forbidden.push_back({{"a", {end_point(c.a.lo), end_point(c.a.hi)}},
                         {"b", {end_point(c.b.lo), end_point(c.b.hi)}}});
  }
  return {{"beta", sample.params.beta},
          {"seed", sample.params.seed},
          {"tail_horizon", sample.params.tail_horizon},
          {"replicate", sample.replicate},
          {"window", {sample.lo, sample.hi}},
          {"edges", edges},
          {"supernodes", supernodes},
          {"forbidden", forbidden}};
}

LrpSample sample_from_json(const Json& doc) {
  try {
    LrpSample s;
    s.params.beta = doc.at("beta").get<double>();
    s.params.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("tail_horizon")) s.params.tail_horizon = doc.at("tail_horizon").get<Site>();
    s.params.validate();
    s.replicate = doc.value("replicate", std::uint64_t{0});
    s.lo = doc.at("window").at(0).get<Site>();
    s.hi = doc.at("window").at(1).get<Site>();
    if (s.hi <= s.lo) fail(ErrorCode::empty_window, "sample window is empty");
    for (const auto& e : doc.at("edges")) {
      Site u = e.at(0).get<Site>();
      Site v = e.at(1).get<Site>();
      if (u > v) std::swap(u, v);
      if (u == v || u < s.lo || v > s.hi) {
        fail(ErrorCode::invalid_data, "edge outside the window or a self-loop");
      }
      s.edges.push_back({u, v});
    }
    std::sort(s.edges.begin(), s.edges.end());
    if (std::adjacent_find(s.edges.begin(), s.edges.end()) != s.edges.end()) {
      fail(ErrorCode::invalid_data, "duplicate edge in sample");
    }
    for (Site i = s.lo; i < s.hi; ++i) {
      if (!std::binary_search(s.edges.begin(), s.edges.end(), Edge{i, i + 1})) {
        fail(ErrorCode::invalid_data, "missing nearest-neighbour edge at " + std::to_string(i));
      }
    }
    for (const auto& node : doc.value("supernodes", Json::array())) {
      Supernode sn;
      sn.label = node.at("label").get<std::string>();
      sn.covers = node.value("covers", std::string{});
      for (const auto& [key, count] : node.at("counts").items()) {
        const Site site = std::stoll(key);
        if (site < s.lo || site > s.hi) fail(ErrorCode::invalid_data, "supernode count outside window");
        sn.counts[site] = count.get<std::uint32_t>();
      }
      s.supernodes.push_back(std::move(sn));
    }
    for (const auto& c : doc.value("forbidden", Json::array())) {
      PairClass pc;
      pc.a = {read_end(c.at("a").at(0), kMinusInfinity), read_end(c.at("a").at(1), kPlusInfinity)};
      pc.b = {read_end(c.at("b").at(0), kMinusInfinity), read_end(c.at("b").at(1), kPlusInfinity)};
      s.forbidden.classes.push_back(pc);
    }
    for (const auto& e : s.edges) {
      if (s.forbidden.contains(e.u, e.v)) fail(ErrorCode::invalid_data, "sample contains a forbidden edge");
    }
    return s;
  } catch (const Json::exception& e) {
    fail(ErrorCode::parse, std::string("malformed sample document: ") + e.what());
  }
}

Json to_json(const ResistanceResult& result, bool with_flow) {
  Json out;
  out["connected"] = result.connected;
  out["value"] = result.connected ? number(result.value) : Json(nullptr);
  if (!result.connected) return out;
  Json potentials = Json::object();
  for (VertexId v = 0; v < result.network->vertex_count(); ++v) {
    potentials[to_string(result.network->label(v))] = number(result.potentials[v]);
  }
  out["potentials"] = potentials;
  out["energy"] = number(result.energy);
  out["solver_stats"] = {{"method", to_string(result.stats.method)},
                         {"iterations", result.stats.iterations},
                         {"residual", number(result.stats.residual)}};
  if (with_flow) {
    Json flow = Json::array();
    const auto edges = result.network->edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      flow.push_back({{"from", to_string(result.network->label(edges[e].u))},
                      {"to", to_string(result.network->label(edges[e].v))},
                      {"value", number(result.flow[e])}});
    }
    out["flow"] = flow;
  }
  return out;
}

Json to_json(const Estimate& e) {
  Json quantiles = Json::object();
  for (const auto& [p, v] : e.quantiles) quantiles[format(p)] = number(v);
  return {{"n", e.n},
          {"quantity", to_string(e.quantity)},
          {"mean", number(e.mean)},
          {"stderr", number(e.std_error)},
          {"ci95", interval(e.ci95)},
          {"replicates", e.replicates},
          {"second_moment", number(e.second_moment)},
          {"quantiles", quantiles}};
}

Json to_json(const ExponentFit& fit) {
  return {{"delta_hat", number(fit.delta_hat)},
          {"stderr", number(fit.std_error)},
          {"r_squared", number(fit.r_squared)},
          {"intercept", number(fit.intercept)},
          {"weighted", fit.weighted}};
}

Json to_json(const MultiplicativityRow& row) {
  Json out = {{"m", row.m}, {"n", row.n}, {"applicable", row.applicable}};
  if (row.applicable) {
    out["ratio"] = number(row.ratio);
    out["stderr"] = number(row.std_error);
    out["ci95"] = interval(row.ci95);
  }
  return out;
}

Json to_json(const TypeComparison& types) {
  Json rows = Json::array();
  for (const auto& r : types.rows) {
    rows.push_back({{"n", r.n},
                    {"lambda", number(r.lambda)},
                    {"point_to_box", number(r.point_to_box)},
                    {"box_to_box", number(r.box_to_box)},
                    {"point_to_box_over_lambda", number(r.point_to_box_ratio)},
                    {"point_to_box_over_lambda_ci95", interval(r.point_to_box_ci)},
                    {"box_to_box_over_lambda", number(r.box_to_box_ratio)},
                    {"box_to_box_over_lambda_ci95", interval(r.box_to_box_ci)}});
  }
  return {{"rows", rows},
          {"point_to_box_variation", number(types.point_to_box_variation)},
          {"box_to_box_variation", number(types.box_to_box_variation)}};
}

Json to_json(const ScalingReport& report) {
  const auto& c = report.config;
  Json estimates = Json::array();
  for (const auto& e : report.estimates) estimates.push_back(to_json(e));
  Json mult = Json::array();
  for (const auto& r : report.multiplicativity) mult.push_back(to_json(r));
  Json pairs = Json::array();
  for (const auto& [m, n] : c.multiplicativity_pairs) pairs.push_back({m, n});
  return {{"beta", c.beta},
          {"seed", c.options.seed},
          {"replicates", c.options.replicates},
          {"truncation_factor", c.options.truncation_factor},
          {"scales", c.scales},
          {"box_to_box_max_scale", c.box_to_box_max_scale},
          {"multiplicativity_pairs", pairs},
          {"estimates", estimates},
          {"delta_hat", number(report.lambda_fit.delta_hat)},
          {"delta_stderr", number(report.lambda_fit.std_error)},
          {"r_squared", number(report.lambda_fit.r_squared)},
          {"lambda_fit", to_json(report.lambda_fit)},
          {"point_to_box_fit",
           report.point_to_box_fit ? to_json(*report.point_to_box_fit) : Json(nullptr)},
          {"multiplicativity", mult},
          {"type_ratios", to_json(report.types)}};
}

Json to_json(const SuiteReport& r) {
  return {{"suite", r.suite},
          {"trials", r.trials},
          {"failures", r.failures},
          {"worst_violation", number(r.worst_violation)},
          {"rejected", r.rejected}};
}

Json to_json(const CutPointStats& stats) {
  auto rows = [](const std::vector<PositionFrequency>& v) {
    Json out = Json::array();
    for (const auto& p : v) {
      out.push_back({{"i", p.i},
                     {"hits", p.hits},
                     {"frequency", number(p.frequency)},
                     {"sigma", number(p.sigma)}});
    }
    return out;
  };
  return {{"beta", stats.beta},
          {"m", stats.m},
          {"replicates", stats.replicates},
          {"cut", rows(stats.cut)},
          {"separation", rows(stats.separation)}};
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::string series_csv(const ScalingReport& report) {
  std::ostringstream os;
  os << "n,mean,ci_lo,ci_hi,std_error,series\n";
  for (const auto& e : report.estimates) {
    os << e.n << ',' << format(e.mean) << ',' << format(e.ci95.lo) << ',' << format(e.ci95.hi)
       << ',' << format(e.std_error) << ',' << to_string(e.quantity) << '\n';
  }
  return os.str();
}

std::string classification_csv(std::span<const IntervalClassification> blocks) {
  std::ostringstream os;
  os << kClassificationHeader << '\n';
  for (const auto& b : blocks) {
    if (b.indeterminate) continue;
    os << b.block << ',' << b.xi << ',' << b.eta << ',' << int{b.m_good} << ',' << int{b.cond1}
       << ',' << int{b.cond2} << ',' << int{b.cond3} << ',' << int{b.very_good} << ','
       << format(b.internal_energy) << '\n';
  }
  return os.str();
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  const auto dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  const auto tmp = dir / ("." + path.filename().string() + ".tmp-" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::invalid_argument, "cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) fail(ErrorCode::invalid_argument, "failed writing " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::invalid_argument, "cannot move output into place at " + path.string());
  }
}

}  // namespace lrp
