#include "lrp/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "lrp/error.hpp"

namespace lrp {

std::string to_string(const VertexLabel& label) {
  if (const auto* site = std::get_if<Site>(&label)) return std::to_string(*site);
  return std::get<std::string>(label);
}

VertexId Network::add_vertex(const VertexLabel& label) {
  const auto [it, inserted] = index_.try_emplace(label, labels_.size());
  if (inserted) labels_.push_back(label);
  return it->second;
}

std::uint64_t Network::key(VertexId a, VertexId b) {
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

void Network::add_conductance(VertexId a, VertexId b, double conductance) {
  if (a >= vertex_count() || b >= vertex_count()) {
    fail(ErrorCode::invalid_query, "edge endpoint is not a vertex of the network");
  }
  if (!(conductance > 0.0) || !std::isfinite(conductance)) {
    fail(ErrorCode::invalid_argument, "conductances must be positive and finite");
  }
  if (a == b) return;
  if (a > b) std::swap(a, b);
  const auto [it, inserted] = edge_index_.try_emplace(key(a, b), edges_.size());
  if (inserted) {
    edges_.push_back({a, b, conductance});
  } else {
    edges_[it->second].conductance += conductance;
  }
}

void Network::set_conductance(VertexId a, VertexId b, double conductance) {
  if (const auto idx = edge_index(a, b)) {
    if (!(conductance > 0.0)) {
      fail(ErrorCode::invalid_argument, "conductances must be positive");
    }
    edges_[*idx].conductance = conductance;
  } else {
    add_conductance(a, b, conductance);
  }
}

std::optional<VertexId> Network::find(const VertexLabel& label) const {
  const auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VertexId Network::at(const VertexLabel& label) const {
  if (const auto id = find(label)) return *id;
  fail(ErrorCode::invalid_query, "vertex " + to_string(label) + " is not in the network");
}

std::optional<std::size_t> Network::edge_index(VertexId a, VertexId b) const {
  if (a > b) std::swap(a, b);
  const auto it = edge_index_.find(key(a, b));
  if (it == edge_index_.end()) return std::nullopt;
  return it->second;
}

double Network::conductance(VertexId a, VertexId b) const {
  const auto idx = edge_index(a, b);
  return idx ? edges_[*idx].conductance : 0.0;
}

std::vector<std::vector<std::pair<VertexId, std::size_t>>> adjacency(const Network& net) {
  std::vector<std::vector<std::pair<VertexId, std::size_t>>> adj(net.vertex_count());
  const auto edges = net.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    adj[edges[e].u].emplace_back(edges[e].v, e);
    adj[edges[e].v].emplace_back(edges[e].u, e);
  }
  return adj;
}

std::vector<bool> reachable_from(const Network& net, VertexId start) {
  const auto adj = adjacency(net);
  std::vector<bool> seen(net.vertex_count(), false);
  std::deque<VertexId> queue{start};
  seen[start] = true;
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    for (const auto& [w, e] : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        queue.push_back(w);
      }
    }
  }
  return seen;
}

Network network_from_sample(const LrpSample& sample, std::optional<Range> restrict_to) {
  Network net;
  const Range range = restrict_to.value_or(sample.window());
  for (Site x = std::max(range.lo, sample.lo); x <= std::min(range.hi, sample.hi); ++x) {
    net.add_vertex(x);
  }
  for (const auto& e : sample.edges) {
    if (!range.contains(e.u) || !range.contains(e.v)) continue;
    net.add_conductance(net.at(e.u), net.at(e.v), 1.0);
  }
  if (!restrict_to) {
    for (const auto& node : sample.supernodes) {
      const VertexId s = net.add_vertex(node.label);
      for (const auto& [site, count] : node.counts) {
        if (count > 0) net.add_conductance(net.at(site), s, static_cast<double>(count));
      }
    }
  }
  return net;
}

Contraction contract(const Network& net, std::span<const std::vector<VertexId>> groups,
                     std::span<const std::string> labels) {
  if (groups.size() != labels.size()) {
    fail(ErrorCode::invalid_argument, "one label per contracted group is required");
  }
  constexpr VertexId kUnassigned = static_cast<VertexId>(-1);
  std::vector<std::size_t> group_of(net.vertex_count(), kUnassigned);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const VertexId v : groups[g]) {
      if (v >= net.vertex_count()) fail(ErrorCode::invalid_query, "unknown vertex in group");
      if (group_of[v] != kUnassigned && group_of[v] != g) {
        fail(ErrorCode::invalid_query, "contracted groups must be disjoint");
      }
      group_of[v] = g;
    }
  }
  for (VertexId v = 0; v < net.vertex_count(); ++v) {
    if (group_of[v] != kUnassigned) continue;
    const auto& name = net.label(v);
    if (std::holds_alternative<std::string>(name) &&
        std::find(labels.begin(), labels.end(), std::get<std::string>(name)) != labels.end()) {
      fail(ErrorCode::invalid_query, "group label collides with vertex " + to_string(name));
    }
  }
  Contraction out;
  out.mapping.assign(net.vertex_count(), kUnassigned);
  out.group_vertices.assign(groups.size(), kUnassigned);
  for (VertexId v = 0; v < net.vertex_count(); ++v) {
    if (group_of[v] == kUnassigned) {
      out.mapping[v] = out.net.add_vertex(net.label(v));
    } else if (out.group_vertices[group_of[v]] == kUnassigned) {
      out.group_vertices[group_of[v]] = out.net.add_vertex(labels[group_of[v]]);
      out.mapping[v] = out.group_vertices[group_of[v]];
    } else {
      out.mapping[v] = out.group_vertices[group_of[v]];
    }
  }
  for (const auto& e : net.edges()) {
    out.net.add_conductance(out.mapping[e.u], out.mapping[e.v], e.conductance);
  }
  return out;
}

}  // namespace lrp
