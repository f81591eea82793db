#include "platoon/fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "platoon/errors.hpp"
#include "platoon/preprocess.hpp"
#include "platoon/rng.hpp"

namespace platoon {

namespace {

struct Road {
  const char* a;
  const char* b;
  double km;
};

Instance build(const std::vector<std::pair<const char*, double>>& nodes, const std::vector<Road>& roads,
               Parameters params, double deadline) {
  Instance inst;
  inst.params = params;
  for (const auto& [id, price_per_kwh] : nodes) {
    Node n;
    n.id = id;
    if (price_per_kwh > 0.0) {
      n.has_charger = true;
      n.charge_price = price_per_kwh * params.kwh_per_unit;
    }
    inst.network.add_node(std::move(n));
  }
  for (const Road& r : roads) {
    inst.network.add_road(inst.network.index_of(r.a), inst.network.index_of(r.b), r.km / params.speed_kmh);
  }
  inst.trucks.push_back({"T1", inst.network.index_of("A"), inst.network.index_of("B"), deadline});
  inst.trucks.push_back({"T2", inst.network.index_of("C"), inst.network.index_of("D"), deadline});
  validate(inst);
  return inst;
}

Parameters fixture_parameters() {
  Parameters p;
  p.max_platoon_size = 4;
  p.beta = 0.15;
  p.capacity = 340.0;
  p.kwh_per_unit = 68.0 / 340.0;
  p.speed_kmh = 100.0;
  p.sigma = p.speed_kmh;
  p.soc_lower = 0.0;
  p.soc_upper = 1.0;
  return p;
}

void add_walk(Plan& plan, const Instance& inst, TruckIndex truck, PlatoonId solo,
              const std::vector<const char*>& nodes, const std::vector<double>& charges,
              const std::vector<std::pair<PlatoonId, double>>& membership) {
  for (std::size_t p = 0; p + 1 < nodes.size(); ++p) {
    SegmentRecord s;
    s.truck = truck;
    s.tail = inst.network.index_of(nodes[p]);
    s.head = inst.network.index_of(nodes[p + 1]);
    s.platoon = membership.empty() ? solo : membership[p].first;
    s.leading_ratio = membership.empty() ? 1.0 : membership[p].second;
    s.charge_at_head = charges[p];
    plan.segments.push_back(s);
  }
}

}  // namespace

Instance illustrative_instance() {
  Parameters p = fixture_parameters();
  p.alpha1 = p.alpha2 = p.alpha3 = p.alpha4 = 0.0;
  p.eta = 100.0 / p.kwh_per_unit;  // 100 kW
  const std::vector<std::pair<const char*, double>> nodes = {
      {"A", 0.0},  {"S1", 0.5}, {"S2", 0.5}, {"B", 0.5},  {"C", 0.0},  {"S3", 0.5}, {"S4", 0.5},
      {"D", 0.5},  {"M1", 0.5}, {"M2", 0.5}, {"M3", 0.5}, {"M4", 0.5}, {"M5", 0.5}};
  const std::vector<Road> roads = {
      {"A", "S1", 250},  {"S1", "S2", 200}, {"S2", "B", 250},  {"C", "S3", 250},  {"S3", "S4", 200},
      {"S4", "D", 250},  {"A", "M1", 155},  {"C", "M1", 155},  {"M1", "M2", 100}, {"M2", "M3", 100},
      {"M3", "M4", 100}, {"M4", "M5", 100}, {"M5", "B", 155},  {"M5", "D", 155}};
  return build(nodes, roads, p, 24.0);
}

Plan illustrative_no_platoon_plan(const Instance& inst) {
  Plan plan;
  add_walk(plan, inst, 0, 0, {"A", "S1", "S2", "B"}, {110, 250, 340}, {});
  add_walk(plan, inst, 1, 1, {"C", "S3", "S4", "D"}, {110, 250, 340}, {});
  return plan;
}

Plan illustrative_platoon_plan(const Instance& inst) {
  Plan plan;
  // T1 follows into M2, leads to M3, leads M3->M4, follows M4->M5.
  add_walk(plan, inst, 0, 0, {"A", "M1", "M2", "M3", "M4", "M5", "B"}, {0, 0, 340, 0, 0, 340},
           {{1, 1.0}, {0, 0.0}, {0, 1.0}, {0, 1.0}, {0, 0.0}, {1, 1.0}});
  add_walk(plan, inst, 1, 2, {"C", "M1", "M2", "M3", "M4", "M5", "D"}, {0, 0, 340, 0, 0, 340},
           {{2, 1.0}, {0, 1.0}, {0, 0.0}, {0, 0.0}, {0, 1.0}, {2, 1.0}});
  return plan;
}

Instance small_test_instance() {
  Parameters p = fixture_parameters();
  p.alpha1 = 30.0;
  p.alpha2 = 15.0;
  p.alpha3 = 5.0;
  p.alpha4 = 0.0;
  p.eta = 100.0;
  const std::vector<std::pair<const char*, double>> nodes = {
      {"A", 0.0},  {"S1", 0.5}, {"S2", 0.5}, {"B", 0.5},  {"C", 0.0},  {"S3", 0.5},
      {"S4", 0.5}, {"D", 0.5},  {"M1", 1.0}, {"M3", 0.5}, {"M5", 1.0}};
  const std::vector<Road> roads = {
      {"A", "S1", 250}, {"S1", "S2", 200}, {"S2", "B", 250}, {"C", "S3", 250}, {"S3", "S4", 200},
      {"S4", "D", 250}, {"A", "M1", 155},  {"C", "M1", 155}, {"M1", "M3", 200}, {"M3", "M5", 200},
      {"M5", "B", 155}, {"M5", "D", 155}};
  return build(nodes, roads, p, 15.0);
}

Instance micro_instance(std::uint64_t seed) {
  Rng rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Parameters p = fixture_parameters();
    p.kwh_per_unit = 135.0 / 340.0;
    p.alpha1 = 30.0;
    p.alpha2 = 15.0;
    p.alpha3 = 5.0;
    p.alpha4 = 2.0;
    p.eta = 251.9;

    const auto n = static_cast<std::size_t>(rng.uniform_int(6, 8));
    std::vector<double> px(n), py(n);
    Instance inst;
    inst.params = p;
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = rng.uniform(0.0, 450.0);
      py[i] = rng.uniform(0.0, 450.0);
      Node node;
      node.id = "N" + std::to_string(i);
      if (rng.uniform() < 0.6) {
        node.has_charger = true;
        node.charge_price = static_cast<double>(rng.uniform_int(3, 6)) / 10.0 * p.kwh_per_unit;
      }
      inst.network.add_node(std::move(node));
    }
    auto km = [&](std::size_t a, std::size_t b) {
      return std::max(20.0, 10.0 * std::round(std::hypot(px[a] - px[b], py[a] - py[b]) / 10.0));
    };
    auto join = [&](std::size_t a, std::size_t b) {
      if (a != b && !inst.network.find_arc(a, b)) inst.network.add_road(a, b, km(a, b) / p.speed_kmh);
    };
    // Tree to the nearest earlier node keeps the graph connected.
    for (std::size_t i = 1; i < n; ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < i; ++j) {
        if (km(i, j) < km(i, best)) best = j;
      }
      join(i, best);
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> order;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) order.push_back(j);
      }
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return km(i, a) < km(i, b); });
      for (std::size_t r = 0; r < 2 && r < order.size(); ++r) join(i, order[r]);
    }

    const ShortestPaths sp(inst.network);
    for (int t = 0; t < 2; ++t) {
      auto o = static_cast<NodeIndex>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
      auto d = static_cast<NodeIndex>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 2));
      if (d >= o) ++d;
      inst.trucks.push_back({"T" + std::to_string(t + 1), o, d, sp.time(o, d) + rng.uniform(1.5, 4.0)});
    }
    if (inst.trucks[0].origin == inst.trucks[1].origin && inst.trucks[0].destination == inst.trucks[1].destination)
      continue;
    try {
      validate(inst);
      for (TruckIndex k = 0; k < inst.num_trucks(); ++k) candidate_plan(inst, sp, k, CandidateMode::solo);
    } catch (const InputError&) {
      continue;
    }
    return inst;
  }
  throw InputError(ErrorCode::unservable, "no servable micro instance for this seed");
}

}  // namespace platoon
