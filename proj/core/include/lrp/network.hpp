#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "lrp/model.hpp"

namespace lrp {

using VertexId = std::size_t;
using VertexLabel = std::variant<Site, std::string>;

std::string to_string(const VertexLabel& label);

struct WeightedEdge {
  VertexId u = 0;  // u < v
  VertexId v = 0;
  double conductance = 0.0;
};

/// Finite conductance network. Parallel edges are folded into one entry whose
/// conductance is the sum; self-loops are dropped.
class Network {
 public:
  VertexId add_vertex(const VertexLabel& label);
  void add_conductance(VertexId a, VertexId b, double conductance);
  /// Sets (not adds) the conductance of an existing or new edge.
  void set_conductance(VertexId a, VertexId b, double conductance);

  std::size_t vertex_count() const { return labels_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const WeightedEdge> edges() const { return edges_; }
  const VertexLabel& label(VertexId id) const { return labels_.at(id); }

  std::optional<VertexId> find(const VertexLabel& label) const;
  /// Throws invalid_query when the label is unknown.
  VertexId at(const VertexLabel& label) const;
  std::optional<std::size_t> edge_index(VertexId a, VertexId b) const;
  double conductance(VertexId a, VertexId b) const;

  std::optional<VertexId> grounded;

 private:
  static std::uint64_t key(VertexId a, VertexId b);

  std::vector<VertexLabel> labels_;
  std::unordered_map<VertexLabel, VertexId> index_;
  std::vector<WeightedEdge> edges_;
  std::unordered_map<std::uint64_t, std::size_t> edge_index_;
};

/// Adjacency lists (neighbour, edge index) for traversal.
std::vector<std::vector<std::pair<VertexId, std::size_t>>> adjacency(const Network& net);

/// Vertices reachable from `start`, as a membership mask.
std::vector<bool> reachable_from(const Network& net, VertexId start);

/// Unit-conductance network on the sample's edges. With `restrict_to`, only
/// edges with both endpoints inside the range are kept and supernodes are
/// left out; otherwise every window vertex and supernode is included.
Network network_from_sample(const LrpSample& sample,
                            std::optional<Range> restrict_to = std::nullopt);

/// Merges each group into one vertex labelled `labels[g]`. Edges inside a
/// group vanish and parallel conductances are summed. `mapping[v]` gives the
/// image of every original vertex.
struct Contraction {
  Network net;
  std::vector<VertexId> mapping;
  std::vector<VertexId> group_vertices;
};

Contraction contract(const Network& net,
                     std::span<const std::vector<VertexId>> groups,
                     std::span<const std::string> labels);

}  // namespace lrp
