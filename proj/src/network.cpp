#include "platoon/network.hpp"

#include <algorithm>
#include <queue>
#include <utility>

#include "platoon/errors.hpp"

namespace platoon {

NodeIndex RoadNetwork::add_node(Node node) {
  if (by_id_.count(node.id) != 0) {
    throw InputError(ErrorCode::schema, "duplicate node id '" + node.id + "'");
  }
  if (node.charge_price && *node.charge_price < 0.0) {
    throw InputError(ErrorCode::invalid_parameter, "negative charge price at '" + node.id + "'");
  }
  const NodeIndex index = nodes_.size();
  by_id_.emplace(node.id, index);
  nodes_.push_back(std::move(node));
  out_.emplace_back();
  in_.emplace_back();
  return index;
}

ArcIndex RoadNetwork::add_arc(NodeIndex tail, NodeIndex head, double travel_time) {
  if (tail >= nodes_.size() || head >= nodes_.size()) {
    throw InputError(ErrorCode::dangling_reference, "arc endpoint out of range");
  }
  if (tail == head) {
    throw InputError(ErrorCode::schema, "self loop at '" + nodes_[tail].id + "'");
  }
  if (!(travel_time > 0.0)) {
    throw InputError(ErrorCode::nonpositive_travel_time,
                     "arc " + nodes_[tail].id + "->" + nodes_[head].id);
  }
  if (find_arc(tail, head)) {
    throw InputError(ErrorCode::parallel_arc, "arc " + nodes_[tail].id + "->" + nodes_[head].id);
  }
  const ArcIndex index = arcs_.size();
  arcs_.push_back(Arc{tail, head, travel_time});
  out_[tail].push_back(index);
  in_[head].push_back(index);
  return index;
}

void RoadNetwork::add_road(NodeIndex a, NodeIndex b, double travel_time) {
  add_arc(a, b, travel_time);
  add_arc(b, a, travel_time);
}

std::optional<ArcIndex> RoadNetwork::find_arc(NodeIndex tail, NodeIndex head) const {
  if (tail >= out_.size()) return std::nullopt;
  for (ArcIndex a : out_[tail]) {
    if (arcs_[a].head == head) return a;
  }
  return std::nullopt;
}

NodeIndex RoadNetwork::index_of(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw InputError(ErrorCode::unknown_node, "'" + id + "'");
  return it->second;
}

double RoadNetwork::max_travel_time() const {
  double best = 0.0;
  for (const Arc& a : arcs_) best = std::max(best, a.travel_time);
  return best;
}

namespace {

// Dijkstra over explicit weights. Among equal-cost predecessors the lowest
// node index wins.
void run_dijkstra(const RoadNetwork& network, NodeIndex source, const std::vector<double>& weight,
                  std::vector<double>& dist, std::vector<std::optional<NodeIndex>>& pred,
                  std::vector<std::optional<ArcIndex>>* pred_arc) {
  const std::size_t n = network.num_nodes();
  dist.assign(n, kInfinity);
  pred.assign(n, std::nullopt);
  if (pred_arc) pred_arc->assign(n, std::nullopt);
  std::vector<bool> settled(n, false);

  using Entry = std::pair<double, NodeIndex>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (settled[u]) continue;
    settled[u] = true;
    for (ArcIndex a : network.out_arcs(u)) {
      const NodeIndex v = network.arc(a).head;
      if (settled[v]) continue;
      const double candidate = d + weight[a];
      if (candidate < dist[v]) {
        dist[v] = candidate;
        pred[v] = u;
        if (pred_arc) (*pred_arc)[v] = a;
        queue.emplace(candidate, v);
      } else if (candidate == dist[v] && pred[v] && u < *pred[v]) {
        pred[v] = u;
        if (pred_arc) (*pred_arc)[v] = a;
      }
    }
  }
}

std::vector<double> travel_times(const RoadNetwork& network) {
  std::vector<double> w(network.num_arcs());
  for (ArcIndex a = 0; a < network.num_arcs(); ++a) w[a] = network.arc(a).travel_time;
  return w;
}

std::optional<Path> extract_path(const RoadNetwork& network, NodeIndex origin,
                                 NodeIndex destination,
                                 const std::vector<std::optional<ArcIndex>>& pred_arc,
                                 const std::vector<double>& dist) {
  if (dist[destination] == kInfinity) return std::nullopt;
  Path path;
  for (NodeIndex v = destination; v != origin;) {
    const ArcIndex a = *pred_arc[v];
    path.arcs.push_back(a);
    path.hours += network.arc(a).travel_time;
    v = network.arc(a).tail;
  }
  std::reverse(path.arcs.begin(), path.arcs.end());
  // Re-sum in path order so the total matches a forward accumulation.
  path.hours = 0.0;
  for (ArcIndex a : path.arcs) path.hours += network.arc(a).travel_time;
  return path;
}

}  // namespace

ShortestPathTree dijkstra(const RoadNetwork& network, NodeIndex source) {
  if (source >= network.num_nodes()) {
    throw InputError(ErrorCode::unknown_node, "dijkstra source out of range");
  }
  ShortestPathTree tree;
  run_dijkstra(network, source, travel_times(network), tree.time, tree.predecessor, nullptr);
  return tree;
}

DistanceMatrix all_pairs_shortest(const RoadNetwork& network) {
  const std::size_t n = network.num_nodes();
  DistanceMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 0.0;
  for (const Arc& a : network.arcs()) m(a.tail, a.head) = std::min(m(a.tail, a.head), a.travel_time);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double ik = m(i, k);
      if (ik == kInfinity) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double through = ik + m(k, j);
        if (through < m(i, j)) m(i, j) = through;
      }
    }
  }
  return m;
}

std::vector<NodeIndex> Path::nodes(const RoadNetwork& network, NodeIndex origin) const {
  std::vector<NodeIndex> out{origin};
  for (ArcIndex a : arcs) out.push_back(network.arc(a).head);
  return out;
}

std::optional<Path> shortest_path(const RoadNetwork& network, NodeIndex origin,
                                  NodeIndex destination) {
  return cheapest_path(network, origin, destination, travel_times(network));
}

std::optional<Path> cheapest_path(const RoadNetwork& network, NodeIndex origin,
                                  NodeIndex destination, const std::vector<double>& arc_weight) {
  if (origin >= network.num_nodes() || destination >= network.num_nodes()) {
    throw InputError(ErrorCode::unknown_node, "path endpoint out of range");
  }
  if (origin == destination) return Path{};
  std::vector<double> dist;
  std::vector<std::optional<NodeIndex>> pred;
  std::vector<std::optional<ArcIndex>> pred_arc;
  run_dijkstra(network, origin, arc_weight, dist, pred, &pred_arc);
  return extract_path(network, origin, destination, pred_arc, dist);
}

ShortestPaths::ShortestPaths(const RoadNetwork& network) {
  trees_.reserve(network.num_nodes());
  for (NodeIndex i = 0; i < network.num_nodes(); ++i) trees_.push_back(dijkstra(network, i));
}

std::vector<NodeIndex> ShortestPaths::nodes(NodeIndex from, NodeIndex to) const {
  const ShortestPathTree& tree = trees_.at(from);
  if (tree.time.at(to) == kInfinity) return {};
  std::vector<NodeIndex> out{to};
  while (out.back() != from) out.push_back(*tree.predecessor[out.back()]);
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace platoon
