#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace platoon {

using NodeIndex = std::size_t;
using ArcIndex = std::size_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Node {
  std::string id;
  bool has_charger = false;
  /// Money per canonical energy unit; set iff the node can charge.
  std::optional<double> charge_price;
};

struct Arc {
  NodeIndex tail = 0;
  NodeIndex head = 0;
  double travel_time = 0.0;  // hours
};

/// Directed road graph. Nodes are addressed by dense index in insertion
/// order; that order is also the tie-break order for shortest paths.
class RoadNetwork {
 public:
  NodeIndex add_node(Node node);
  /// Throws InputError on self loops, parallel arcs, unknown endpoints or
  /// nonpositive travel times.
  ArcIndex add_arc(NodeIndex tail, NodeIndex head, double travel_time);
  /// Two directed arcs with equal travel time.
  void add_road(NodeIndex a, NodeIndex b, double travel_time);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_arcs() const { return arcs_.size(); }

  const Node& node(NodeIndex i) const { return nodes_.at(i); }
  Node& node(NodeIndex i) { return nodes_.at(i); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Arc& arc(ArcIndex a) const { return arcs_.at(a); }
  const std::vector<Arc>& arcs() const { return arcs_; }

  const std::vector<ArcIndex>& out_arcs(NodeIndex i) const { return out_.at(i); }
  const std::vector<ArcIndex>& in_arcs(NodeIndex i) const { return in_.at(i); }

  std::optional<ArcIndex> find_arc(NodeIndex tail, NodeIndex head) const;
  /// Throws InputError(unknown_node).
  NodeIndex index_of(const std::string& id) const;
  bool contains(const std::string& id) const { return by_id_.count(id) != 0; }

  double max_travel_time() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<ArcIndex>> out_;
  std::vector<std::vector<ArcIndex>> in_;
  std::unordered_map<std::string, NodeIndex> by_id_;
};

struct ShortestPathTree {
  std::vector<double> time;                      // kInfinity when unreachable
  std::vector<std::optional<NodeIndex>> predecessor;
};

ShortestPathTree dijkstra(const RoadNetwork& network, NodeIndex source);

/// Dense row-major matrix of shortest travel times.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * n, kInfinity) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Floyd-Warshall.
DistanceMatrix all_pairs_shortest(const RoadNetwork& network);

struct Path {
  std::vector<ArcIndex> arcs;
  double hours = 0.0;

  std::vector<NodeIndex> nodes(const RoadNetwork& network, NodeIndex origin) const;
};

/// Empty optional when `destination` is unreachable.
std::optional<Path> shortest_path(const RoadNetwork& network, NodeIndex origin,
                                  NodeIndex destination);

/// Same as shortest_path but with caller-supplied nonnegative arc weights;
/// `hours` of the result is still the travel time of the path.
std::optional<Path> cheapest_path(const RoadNetwork& network, NodeIndex origin,
                                  NodeIndex destination, const std::vector<double>& arc_weight);

/// Shortest-path trees from every source; node sequences are consistent
/// with `dijkstra` tie-breaking.
class ShortestPaths {
 public:
  ShortestPaths() = default;
  explicit ShortestPaths(const RoadNetwork& network);

  double time(NodeIndex from, NodeIndex to) const { return trees_.at(from).time.at(to); }
  /// Node sequence from..to inclusive; empty when unreachable.
  std::vector<NodeIndex> nodes(NodeIndex from, NodeIndex to) const;
  std::size_t size() const { return trees_.size(); }

 private:
  std::vector<ShortestPathTree> trees_;
};

}  // namespace platoon
