#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "platoon/network.hpp"
#include "platoon/rng.hpp"

namespace support {

using platoon::NodeIndex;
using platoon::RoadNetwork;

/// Random strongly connected-ish digraph: a bidirectional ring plus random
/// chords, travel times in quarter hours.
inline RoadNetwork random_network(std::uint64_t seed, std::size_t n, std::size_t chords) {
  platoon::Rng rng(seed);
  RoadNetwork net;
  for (std::size_t i = 0; i < n; ++i) net.add_node(platoon::Node{"v" + std::to_string(i), false, std::nullopt});
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 0.25 * static_cast<double>(rng.uniform_int(1, 12));
    net.add_road(i, (i + 1) % n, t);
  }
  for (std::size_t c = 0; c < chords; ++c) {
    const auto a = static_cast<NodeIndex>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    const auto b = static_cast<NodeIndex>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    if (a == b || net.find_arc(a, b)) continue;
    net.add_arc(a, b, 0.25 * static_cast<double>(rng.uniform_int(1, 12)));
  }
  return net;
}

/// Minimum travel time over every simple path (exhaustive).
inline double brute_force_distance(const RoadNetwork& net, NodeIndex from, NodeIndex to) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> seen(net.num_nodes(), 0);
  std::function<void(NodeIndex, double)> go = [&](NodeIndex u, double t) {
    if (t >= best) return;
    if (u == to) {
      best = t;
      return;
    }
    seen[u] = 1;
    for (auto a : net.out_arcs(u)) {
      const auto& arc = net.arc(a);
      if (!seen[arc.head]) go(arc.head, t + arc.travel_time);
    }
    seen[u] = 0;
  };
  go(from, 0.0);
  return best;
}

}  // namespace support
