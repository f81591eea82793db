#include "platoon/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>

#include "platoon/errors.hpp"
#include "platoon/rng.hpp"

namespace platoon {

using nlohmann::json;
using nlohmann::ordered_json;

Parameters default_parameters(double beta) {
  Parameters p;
  p.beta = beta;
  p.capacity = 340.0;
  p.kwh_per_unit = 135.0 / 340.0;
  p.speed_kmh = 100.0;
  p.sigma = p.speed_kmh;
  p.eta = 251.9;
  return p;
}

double Instance::price(NodeIndex i) const {
  const Node& n = network.node(i);
  return n.has_charger && n.charge_price ? *n.charge_price : 0.0;
}

const char* to_string(ScenarioMode mode) {
  switch (mode) {
    case ScenarioMode::no_platoon: return "no-platoon";
    case ScenarioMode::platoon_no_swap: return "platoon-no-swap";
    case ScenarioMode::platoon_swap: return "platoon-swap";
  }
  return "?";
}

ScenarioMode parse_scenario_mode(const std::string& text) {
  if (text == "no-platoon") return ScenarioMode::no_platoon;
  if (text == "platoon-no-swap") return ScenarioMode::platoon_no_swap;
  if (text == "platoon-swap") return ScenarioMode::platoon_swap;
  throw InputError(ErrorCode::invalid_parameter, "unknown mode '" + text + "'");
}

Instance apply_mode(Instance instance, ScenarioMode mode) {
  switch (mode) {
    case ScenarioMode::no_platoon:
      instance.params.max_platoon_size = 1;
      instance.params.binary_leading_ratio = true;
      break;
    case ScenarioMode::platoon_no_swap:
      instance.params.binary_leading_ratio = true;
      break;
    case ScenarioMode::platoon_swap:
      instance.params.binary_leading_ratio = false;
      break;
  }
  return instance;
}

void validate(Instance& instance) {
  const Parameters& p = instance.params;
  auto bad = [](ErrorCode code, const std::string& what) { throw InputError(code, what); };
  if (!(p.soc_lower >= 0.0 && p.soc_lower < p.soc_upper && p.soc_upper <= 1.0)) {
    bad(ErrorCode::soc_bounds, "require 0 <= soc_lower < soc_upper <= 1");
  }
  if (p.max_platoon_size < 1) bad(ErrorCode::invalid_parameter, "max_platoon_size < 1");
  if (!(p.beta >= 0.0 && p.beta < 1.0)) bad(ErrorCode::invalid_parameter, "beta outside [0,1)");
  if (!(p.alpha1 >= p.alpha2 && p.alpha2 >= 0.0)) {
    bad(ErrorCode::invalid_parameter, "require alpha1 >= alpha2 >= 0");
  }
  if (p.alpha3 < 0.0 || p.alpha4 < 0.0) bad(ErrorCode::invalid_parameter, "negative alpha3/alpha4");
  if (!(p.eta > 0.0)) bad(ErrorCode::invalid_parameter, "charging speed must be positive");
  if (!(p.sigma > 0.0)) bad(ErrorCode::invalid_parameter, "consumption rate must be positive");
  if (!(p.capacity > 0.0)) bad(ErrorCode::invalid_parameter, "capacity must be positive");
  if (!(p.speed_kmh > 0.0) || !(p.kwh_per_unit > 0.0)) {
    bad(ErrorCode::invalid_parameter, "speed and energy conversion must be positive");
  }

  const std::size_t n = instance.network.num_nodes();
  for (const TruckDelivery& t : instance.trucks) {
    if (t.origin >= n || t.destination >= n) {
      bad(ErrorCode::dangling_reference, "truck '" + t.id + "' references a missing node");
    }
    if (t.origin == t.destination) {
      bad(ErrorCode::schema, "truck '" + t.id + "' has origin == destination");
    }
    Node& dest = instance.network.node(t.destination);
    if (!dest.charge_price) {
      bad(ErrorCode::schema, "destination '" + dest.id + "' needs a charging price");
    }
    dest.has_charger = true;
  }
  for (const Node& node : instance.network.nodes()) {
    if (node.has_charger && !node.charge_price) {
      bad(ErrorCode::schema, "charging node '" + node.id + "' has no price");
    }
  }
  for (std::size_t a = 0; a < instance.trucks.size(); ++a) {
    for (std::size_t b = a + 1; b < instance.trucks.size(); ++b) {
      if (instance.trucks[a].id == instance.trucks[b].id) {
        bad(ErrorCode::schema, "duplicate truck id '" + instance.trucks[a].id + "'");
      }
    }
  }
  for (const TruckDelivery& t : instance.trucks) {
    const auto tree = dijkstra(instance.network, t.origin);
    if (tree.time[t.destination] == kInfinity) {
      bad(ErrorCode::infeasible_deadline, "truck '" + t.id + "': destination unreachable");
    }
    if (t.latest_arrival + 1e-9 < tree.time[t.destination]) {
      bad(ErrorCode::infeasible_deadline,
          "truck '" + t.id + "': latest arrival before shortest travel time");
    }
  }
}

namespace {

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw InputError(ErrorCode::schema, where + ": missing key '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(ErrorCode::schema, where + "." + key + ": " + e.what());
  }
}

template <typename T>
T optional_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return required<T>(obj, key, where);
}

// Smallest perturbation of `guess` such that forward(x) == target exactly.
// Keeps save -> load bit-exact across unit conversions.
double invert_exactly(double target, double guess, const std::function<double(double)>& forward) {
  if (forward(guess) == target) return guess;
  double up = guess, down = guess;
  for (int step = 0; step < 64; ++step) {
    up = std::nextafter(up, kInfinity);
    if (forward(up) == target) return up;
    down = std::nextafter(down, -kInfinity);
    if (forward(down) == target) return down;
  }
  return guess;
}

}  // namespace

Instance instance_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError(ErrorCode::schema, "top level must be an object");
  for (const char* key : {"nodes", "arcs", "params", "trucks"}) {
    if (!doc.contains(key)) throw InputError(ErrorCode::schema, std::string("missing '") + key + "'");
  }
  Instance inst;
  const json& pj = doc.at("params");
  Parameters& p = inst.params;
  p.max_platoon_size = required<int>(pj, "max_platoon_size", "params");
  p.alpha1 = required<double>(pj, "alpha1", "params");
  p.alpha2 = required<double>(pj, "alpha2", "params");
  p.alpha3 = required<double>(pj, "alpha3", "params");
  p.alpha4 = required<double>(pj, "alpha4", "params");
  p.beta = required<double>(pj, "beta", "params");
  p.soc_upper = required<double>(pj, "soc_upper", "params");
  p.soc_lower = required<double>(pj, "soc_lower", "params");
  p.speed_kmh = required<double>(pj, "speed_kmh", "params");
  const double range_km = required<double>(pj, "range_km", "params");
  const double battery_kwh = required<double>(pj, "battery_kwh", "params");
  if (!(range_km > 0.0) || !(battery_kwh > 0.0)) {
    throw InputError(ErrorCode::invalid_parameter, "range_km and battery_kwh must be positive");
  }
  p.capacity = range_km;
  p.kwh_per_unit = battery_kwh / range_km;
  p.sigma = pj.contains("sigma_kwh_per_hr")
                ? required<double>(pj, "sigma_kwh_per_hr", "params") / p.kwh_per_unit
                : p.speed_kmh;
  const bool has_kw = pj.contains("charging_kw");
  const bool has_kmh = pj.contains("charging_km_per_hr");
  if (has_kw == has_kmh) {
    throw InputError(ErrorCode::schema, "params: exactly one of charging_kw / charging_km_per_hr");
  }
  p.eta = has_kw ? required<double>(pj, "charging_kw", "params") / p.kwh_per_unit
                 : required<double>(pj, "charging_km_per_hr", "params");
  p.binary_leading_ratio = optional_or<bool>(pj, "binary_leading_ratio", false, "params");

  for (const json& nj : doc.at("nodes")) {
    Node node;
    node.id = required<std::string>(nj, "id", "nodes[]");
    node.has_charger = optional_or<bool>(nj, "charger", false, "nodes[]");
    if (nj.contains("price_per_kwh") && !nj.at("price_per_kwh").is_null()) {
      node.charge_price = required<double>(nj, "price_per_kwh", "nodes[]") * p.kwh_per_unit;
    }
    inst.network.add_node(std::move(node));
  }
  for (const json& aj : doc.at("arcs")) {
    const auto from = required<std::string>(aj, "from", "arcs[]");
    const auto to = required<std::string>(aj, "to", "arcs[]");
    const double km = required<double>(aj, "km", "arcs[]");
    if (!inst.network.contains(from) || !inst.network.contains(to)) {
      throw InputError(ErrorCode::dangling_reference, "arc " + from + "->" + to);
    }
    if (!(km > 0.0)) throw InputError(ErrorCode::nonpositive_travel_time, "arc " + from + "->" + to);
    inst.network.add_arc(inst.network.index_of(from), inst.network.index_of(to), km / p.speed_kmh);
  }
  for (const json& tj : doc.at("trucks")) {
    if (tj.contains("battery_kwh") || tj.contains("speed_kmh") || tj.contains("sigma_kwh_per_hr")) {
      throw InputError(ErrorCode::schema, "per-truck vehicle overrides are not supported");
    }
    TruckDelivery t;
    t.id = required<std::string>(tj, "id", "trucks[]");
    const auto o = required<std::string>(tj, "origin", "trucks[]");
    const auto d = required<std::string>(tj, "destination", "trucks[]");
    if (!inst.network.contains(o) || !inst.network.contains(d)) {
      throw InputError(ErrorCode::dangling_reference, "truck '" + t.id + "'");
    }
    t.origin = inst.network.index_of(o);
    t.destination = inst.network.index_of(d);
    t.latest_arrival = required<double>(tj, "latest_arrival_hr", "trucks[]");
    inst.trucks.push_back(std::move(t));
  }
  validate(inst);
  return inst;
}

ordered_json instance_to_json(const Instance& inst) {
  const Parameters& p = inst.params;
  ordered_json doc;
  ordered_json nodes = ordered_json::array();
  for (const Node& n : inst.network.nodes()) {
    ordered_json nj;
    nj["id"] = n.id;
    nj["charger"] = n.has_charger;
    if (n.charge_price) {
      const double unit = *n.charge_price;
      nj["price_per_kwh"] = invert_exactly(unit, unit / p.kwh_per_unit,
                                           [&](double x) { return x * p.kwh_per_unit; });
    }
    nodes.push_back(std::move(nj));
  }
  ordered_json arcs = ordered_json::array();
  for (const Arc& a : inst.network.arcs()) {
    ordered_json aj;
    aj["from"] = inst.network.node(a.tail).id;
    aj["to"] = inst.network.node(a.head).id;
    aj["km"] = invert_exactly(a.travel_time, a.travel_time * p.speed_kmh,
                              [&](double x) { return x / p.speed_kmh; });
    arcs.push_back(std::move(aj));
  }
  const double range_km = p.capacity;
  const double battery_kwh = invert_exactly(p.kwh_per_unit, p.kwh_per_unit * range_km,
                                            [&](double x) { return x / range_km; });
  ordered_json pj;
  pj["max_platoon_size"] = p.max_platoon_size;
  pj["alpha1"] = p.alpha1;
  pj["alpha2"] = p.alpha2;
  pj["alpha3"] = p.alpha3;
  pj["alpha4"] = p.alpha4;
  pj["beta"] = p.beta;
  pj["battery_kwh"] = battery_kwh;
  pj["range_km"] = range_km;
  if (p.sigma != p.speed_kmh) {
    pj["sigma_kwh_per_hr"] = invert_exactly(p.sigma, p.sigma * p.kwh_per_unit,
                                            [&](double x) { return x / p.kwh_per_unit; });
  }
  pj["charging_kw"] = invert_exactly(p.eta, p.eta * p.kwh_per_unit,
                                     [&](double x) { return x / p.kwh_per_unit; });
  pj["soc_upper"] = p.soc_upper;
  pj["soc_lower"] = p.soc_lower;
  pj["speed_kmh"] = p.speed_kmh;
  if (p.binary_leading_ratio) pj["binary_leading_ratio"] = true;

  ordered_json trucks = ordered_json::array();
  for (const TruckDelivery& t : inst.trucks) {
    ordered_json tj;
    tj["id"] = t.id;
    tj["origin"] = inst.network.node(t.origin).id;
    tj["destination"] = inst.network.node(t.destination).id;
    tj["latest_arrival_hr"] = t.latest_arrival;
    trucks.push_back(std::move(tj));
  }
  doc["nodes"] = std::move(nodes);
  doc["arcs"] = std::move(arcs);
  doc["params"] = std::move(pj);
  doc["trucks"] = std::move(trucks);
  return doc;
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(ErrorCode::io, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(ErrorCode::schema, path.string() + ": " + e.what());
  }
  return instance_from_json(doc);
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError(ErrorCode::io, "cannot write " + path.string());
  out << instance_to_json(instance).dump(2) << '\n';
}

RoadNetwork generate_grid(int n, double edge_km, const Parameters& params, double price_per_kwh) {
  if (n < 2 || !(edge_km > 0.0)) {
    throw InputError(ErrorCode::invalid_parameter, "grid needs n >= 2 and edge_km > 0");
  }
  RoadNetwork net;
  const double price = price_per_kwh * params.kwh_per_unit;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      net.add_node(Node{"r" + std::to_string(r) + "c" + std::to_string(c), true, price});
    }
  }
  const double hours = edge_km / params.speed_kmh;
  auto at = [n](int r, int c) { return static_cast<NodeIndex>(r * n + c); };
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (c + 1 < n) net.add_road(at(r, c), at(r, c + 1), hours);
      if (r + 1 < n) net.add_road(at(r, c), at(r + 1, c), hours);
    }
  }
  return net;
}

RoadNetwork generate_stand_in_network(const Parameters& params, double price_per_kwh) {
  constexpr int kNodes = 38;
  constexpr double kWidth = 560.0, kHeight = 480.0, kMinSeparation = 55.0, kDetour = 1.2;
  Rng rng(0x59524421);  // fixed: the stand-in network never changes
  std::vector<std::pair<double, double>> pts;
  while (static_cast<int>(pts.size()) < kNodes) {
    const double x = rng.uniform(0.0, kWidth), y = rng.uniform(0.0, kHeight);
    bool ok = true;
    for (auto [px, py] : pts) ok = ok && std::hypot(px - x, py - y) >= kMinSeparation;
    if (ok) pts.emplace_back(x, y);
  }
  auto dist = [&](int a, int b) {
    return std::hypot(pts[a].first - pts[b].first, pts[a].second - pts[b].second);
  };
  std::vector<std::pair<int, int>> edges;
  auto add_edge = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    if (std::find(edges.begin(), edges.end(), std::make_pair(a, b)) == edges.end()) {
      edges.emplace_back(a, b);
    }
  };
  // Minimum spanning tree (Prim) for connectivity, then 3 nearest neighbours.
  std::vector<bool> in_tree(kNodes, false);
  std::vector<double> best(kNodes, kInfinity);
  std::vector<int> parent(kNodes, -1);
  best[0] = 0.0;
  for (int it = 0; it < kNodes; ++it) {
    int u = -1;
    for (int v = 0; v < kNodes; ++v) {
      if (!in_tree[v] && (u < 0 || best[v] < best[u])) u = v;
    }
    in_tree[u] = true;
    if (parent[u] >= 0) add_edge(parent[u], u);
    for (int v = 0; v < kNodes; ++v) {
      if (!in_tree[v] && dist(u, v) < best[v]) {
        best[v] = dist(u, v);
        parent[v] = u;
      }
    }
  }
  for (int a = 0; a < kNodes; ++a) {
    std::vector<int> order(kNodes);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return dist(a, x) < dist(a, y); });
    for (int k = 1; k <= 3; ++k) add_edge(a, order[k]);
  }
  std::sort(edges.begin(), edges.end());

  RoadNetwork net;
  const double price = price_per_kwh * params.kwh_per_unit;
  for (int i = 0; i < kNodes; ++i) {
    char name[8];
    std::snprintf(name, sizeof name, "Y%02d", i + 1);
    net.add_node(Node{name, true, price});
  }
  for (auto [a, b] : edges) {
    const double km = std::clamp(std::round(dist(a, b) * kDetour), 50.0, 250.0);
    net.add_road(static_cast<NodeIndex>(a), static_cast<NodeIndex>(b), km / params.speed_kmh);
  }
  return net;
}

std::vector<TruckDelivery> generate_deliveries(const RoadNetwork& network, std::size_t count,
                                               std::uint64_t seed) {
  std::vector<TruckDelivery> out;
  if (count == 0) return out;
  const DistanceMatrix sp = all_pairs_shortest(network);
  std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
  double max_sp = 0.0;
  for (NodeIndex o = 0; o < network.num_nodes(); ++o) {
    for (NodeIndex d = 0; d < network.num_nodes(); ++d) {
      if (o != d && sp(o, d) < kInfinity) {
        pairs.emplace_back(o, d);
        max_sp = std::max(max_sp, sp(o, d));
      }
    }
  }
  if (count > pairs.size()) {
    throw InputError(ErrorCode::invalid_parameter,
                     "requested " + std::to_string(count) + " deliveries but only " +
                         std::to_string(pairs.size()) + " distinct OD pairs exist");
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(pairs.size() - 1)));
    std::swap(pairs[i], pairs[j]);
    const auto [o, d] = pairs[i];
    TruckDelivery t;
    t.id = "T" + std::to_string(i + 1);
    t.origin = o;
    t.destination = d;
    const double lo = sp(o, d);
    t.latest_arrival = std::min(max_sp, std::max(lo, rng.uniform(lo, max_sp)));
    out.push_back(std::move(t));
  }
  return out;
}

Instance make_instance(RoadNetwork network, Parameters params, std::size_t trucks,
                       std::uint64_t seed) {
  Instance inst;
  inst.network = std::move(network);
  inst.params = params;
  inst.trucks = generate_deliveries(inst.network, trucks, seed);
  validate(inst);
  return inst;
}

}  // namespace platoon
