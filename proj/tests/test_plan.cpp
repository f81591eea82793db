#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "platoon/alns.hpp"
#include "platoon/fixtures.hpp"
#include "platoon/plan.hpp"
#include "platoon/solution.hpp"

using namespace platoon;

namespace {

// Nodes o -> m -> d in a line plus a side node b -> m; every node but the
// origins can charge at $0.5/kWh.
Instance corridor(std::size_t trucks_from_o, double om_km = 100.0, double bm_km = 50.0) {
  Instance inst;
  inst.params = default_parameters(0.1);
  const double price = 0.5 * inst.params.kwh_per_unit;
  inst.network.add_node(Node{"o", false, std::nullopt});
  inst.network.add_node(Node{"m", true, price});
  inst.network.add_node(Node{"d", true, price});
  inst.network.add_node(Node{"b", false, std::nullopt});
  inst.network.add_arc(0, 1, om_km / 100.0);
  inst.network.add_arc(1, 2, 1.0);
  inst.network.add_arc(3, 1, bm_km / 100.0);
  for (std::size_t k = 0; k < trucks_from_o; ++k) inst.trucks.push_back({"T" + std::to_string(k), 0, 2, 10.0});
  validate(inst);
  return inst;
}

SegmentRecord seg(TruckIndex k, PlatoonId p, double h, NodeIndex i, NodeIndex j, double charge = 0.0) {
  return SegmentRecord{k, p, h, i, j, charge};
}

bool has_kind(const std::vector<Violation>& v, const std::string& kind) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.kind == kind; });
}

// A solo o->m->d trip; consumption 100 + 100 out of 340, refill 200 at d.
Plan solo_plan() {
  return Plan{{seg(0, 0, 1.0, 0, 1), seg(0, 0, 1.0, 1, 2, 200.0)}};
}

}  // namespace

TEST(Consumption, FollowerAtBeta015) {
  Parameters p = default_parameters(0.15);
  EXPECT_NEAR(arc_consumption(p, 1.0, 0.0, 2), 85.0, 1e-9);
  EXPECT_NEAR(arc_consumption(p, 1.0, 1.0, 2), 100.0, 1e-9);
  EXPECT_NEAR(arc_consumption(p, 1.0, 0.5, 2), 92.5, 1e-9);
  // Singletons pay the full rate whatever h says.
  EXPECT_NEAR(arc_consumption(p, 1.0, 0.0, 1), 100.0, 1e-9);
}

TEST(Evaluate, IllustrativeCharging) {
  const Instance inst = illustrative_instance();
  const CostBreakdown solo = evaluate(inst, illustrative_no_platoon_plan(inst));
  const CostBreakdown platoon = evaluate(inst, illustrative_platoon_plan(inst));
  // (110 + 250 + 340) units * 0.2 kWh * $0.5 per truck.
  EXPECT_NEAR(solo.charging, (110 + 250 + 340) * 0.2 * 0.5 * 2, 1e-6);
  EXPECT_NEAR(platoon.charging, (340 + 340) * 0.2 * 0.5 * 2, 1e-6);
  EXPECT_NEAR(1.0 - platoon.charging / solo.charging, 4.0 / 140.0, 1e-9);
  EXPECT_TRUE(check_feasibility(inst, illustrative_no_platoon_plan(inst)).empty());
  EXPECT_TRUE(check_feasibility(inst, illustrative_platoon_plan(inst)).empty());
}

TEST(Evaluate, IllustrativeSwapMileage) {
  // Leads alternate, so both trucks reach M3 with the same energy.
  const Instance inst = illustrative_instance();
  const Schedule s = derive_schedule(inst, illustrative_platoon_plan(inst));
  const NodeIndex m3 = inst.network.index_of("M3");
  std::vector<double> at_m3;
  for (const auto& ts : s.trucks) {
    for (const auto& st : ts.stops) {
      if (st.node == m3) at_m3.push_back(st.energy_on_arrival);
    }
  }
  ASSERT_EQ(at_m3.size(), 2u);
  EXPECT_NEAR(at_m3[0], at_m3[1], 1e-9);
}

TEST(Evaluate, EmptyPlanEmptyInstance) {
  Instance inst;
  inst.params = default_parameters();
  const CostBreakdown c = evaluate(inst, Plan{});
  EXPECT_EQ(c.total, 0.0);
  EXPECT_EQ(c.charging, 0.0);
  EXPECT_EQ(c.idle, 0.0);
}

TEST(Evaluate, TotalIsSumOfParts) {
  for (std::uint64_t s = 1; s <= 6; ++s) {
    const Instance inst = micro_instance(s);
    AlnsConfig cfg;
    cfg.time_limit_s = 10;
    const AlnsResult r = run(inst, cfg, s);
    const CostBreakdown c = evaluate(inst, r.best);
    EXPECT_NEAR(c.total, c.charging + c.leading_labor + c.following_labor + c.idle + c.restructuring, 1e-9);
  }
}

TEST(Schedule, OneArcTrip) {
  Instance inst;
  inst.params = default_parameters();
  inst.network.add_node(Node{"o", false, std::nullopt});
  inst.network.add_node(Node{"d", true, 0.2});
  inst.network.add_arc(0, 1, 1.0);
  inst.trucks.push_back({"T", 0, 1, 3.0});
  validate(inst);
  const Plan plan{{seg(0, 0, 1.0, 0, 1, 100.0)}};
  const Schedule s = derive_schedule(inst, plan);
  ASSERT_EQ(s.trucks.size(), 1u);
  const Stop& dest = s.trucks[0].stops.back();
  EXPECT_NEAR(dest.arrival, 1.0, 1e-12);
  EXPECT_NEAR(dest.soc_on_arrival, 1.0 - inst.params.sigma * 1.0 / inst.params.capacity, 1e-12);
  EXPECT_TRUE(check_feasibility(inst, plan).empty());
}

TEST(Schedule, LaterArrivalMakesPartnerWait) {
  // T0 reaches m after 1 h, T1 after 1.5 h; they share m -> d.
  Instance inst = corridor(1, 100.0, 150.0);
  inst.trucks.push_back({"T1", 3, 2, 10.0});
  validate(inst);
  const Plan plan{{seg(0, 0, 1.0, 0, 1), seg(0, 7, 1.0, 1, 2, 200.0), seg(1, 1, 1.0, 3, 1),
                   seg(1, 7, 0.0, 1, 2, 240.0)}};
  const Schedule s = derive_schedule(inst, plan);
  const auto& a = s.trucks[0].stops;
  const auto& b = s.trucks[1].stops;
  // Equal departures from m.
  EXPECT_NEAR(a[1].arrival + a[1].dwell, b[1].arrival + b[1].dwell, 1e-12);
  EXPECT_NEAR(b[1].arrival + b[1].dwell, 1.5, 1e-12);
  // The early truck absorbs 0.5 h of waiting in total.
  EXPECT_NEAR(a[0].dwell + a[1].dwell, 0.5, 1e-12);
  EXPECT_TRUE(check_feasibility(inst, plan).empty()) << check_feasibility(inst, plan).front().kind;
}

TEST(Schedule, InvariantsOnSearchOutput) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Instance inst = micro_instance(seed);
    AlnsConfig cfg;
    cfg.time_limit_s = 10;
    const AlnsResult r = run(inst, cfg, seed);
    ASSERT_TRUE(check_feasibility(inst, r.best).empty());
    const Schedule s = derive_schedule(inst, r.best);
    const Parameters& p = inst.params;
    for (const auto& ts : s.trucks) {
      EXPECT_NEAR(ts.stops.front().soc_on_arrival, p.soc_upper, 1e-12);
      double energy = p.full_energy();
      double charged = 0.0, consumed = 0.0;
      for (std::size_t i = 0; i < ts.stops.size(); ++i) {
        const Stop& st = ts.stops[i];
        EXPECT_GE(st.soc_on_arrival, p.soc_lower - 1e-6);
        EXPECT_LE(st.soc_on_arrival, p.soc_upper + 1e-6);
        EXPECT_GE(st.dwell + 1e-9, st.charge / p.eta);
        EXPECT_LE(st.energy_on_arrival + st.charge, p.full_energy() + 1e-6);
        if (i > 0) consumed += energy - st.energy_on_arrival;
        charged += st.charge;
        energy = st.energy_on_arrival + st.charge;
      }
      // Start full, end full after the destination top-up.
      EXPECT_NEAR(energy, p.full_energy(), 1e-6);
      EXPECT_NEAR(p.full_energy() + charged, consumed + energy, 1e-9);
    }
  }
}

TEST(Evaluate, SegmentOrderDoesNotMatter) {
  const Instance inst = illustrative_instance();
  Plan plan = illustrative_platoon_plan(inst);
  const CostBreakdown ref = evaluate(inst, plan);
  std::mt19937 gen(3);
  for (int rep = 0; rep < 10; ++rep) {
    std::shuffle(plan.segments.begin(), plan.segments.end(), gen);
    const CostBreakdown c = evaluate(inst, plan);
    EXPECT_NEAR(c.total, ref.total, 1e-9);
    EXPECT_NEAR(c.charging, ref.charging, 1e-9);
    EXPECT_NEAR(c.idle, ref.idle, 1e-9);
  }
}

TEST(Evaluate, ChargingAffineNonIncreasingInBeta) {
  const Instance base = illustrative_instance();
  const Plan plan = illustrative_platoon_plan(base);
  std::vector<double> charging;
  for (int step = 0; step <= 6; ++step) {
    Instance inst = base;
    inst.params.beta = 0.05 + 0.025 * step;
    std::vector<Violation> structural;
    Solution sol = to_solution(inst, plan, &structural);
    ASSERT_TRUE(structural.empty());
    std::vector<TruckIndex> all{0, 1};
    ASSERT_TRUE(recharge(inst, sol, all, sol.groups()));
    charging.push_back(evaluate(inst, to_plan(sol)).charging);
  }
  for (std::size_t i = 1; i < charging.size(); ++i) EXPECT_LE(charging[i], charging[i - 1] + 1e-9);
  for (std::size_t i = 2; i < charging.size(); ++i) {
    EXPECT_NEAR(charging[i] - charging[i - 1], charging[i - 1] - charging[i - 2], 1e-9);
  }
}

TEST(Feasibility, OriginCharge) {
  const Instance inst = corridor(1);
  EXPECT_TRUE(check_feasibility(inst, solo_plan()).empty());
  // Only a walk that comes back to its origin can charge there.
  Instance loop = inst;
  loop.network.add_arc(1, 0, 1.0);
  loop.network.add_arc(0, 2, 1.0);
  const Plan plan{{seg(0, 0, 1.0, 0, 1), seg(0, 0, 1.0, 1, 0, 10.0), seg(0, 0, 1.0, 0, 2, 290.0)}};
  EXPECT_TRUE(has_kind(check_feasibility(loop, plan), "origin-charge"));
}

TEST(Feasibility, PlatoonTooLarge) {
  const Instance inst = corridor(5);
  Plan plan;
  for (TruckIndex k = 0; k < 5; ++k) {
    plan.segments.push_back(seg(k, 0, 0.2, 0, 1));
    plan.segments.push_back(seg(k, 0, 0.2, 1, 2, 184.0));
  }
  EXPECT_TRUE(has_kind(check_feasibility(inst, plan), "platoon-size"));
}

TEST(Feasibility, Kinds) {
  const Instance inst = corridor(2);
  auto expect_kind = [&](const Plan& plan, const char* kind) {
    EXPECT_TRUE(has_kind(check_feasibility(inst, plan), kind)) << kind;
  };
  // Destination not refilled.
  expect_kind(Plan{{seg(0, 0, 1.0, 0, 1), seg(0, 0, 1.0, 1, 2, 150.0), seg(1, 1, 1.0, 0, 1),
                    seg(1, 1, 1.0, 1, 2, 200.0)}},
              "dest-recharge");
  // Broken walk.
  expect_kind(Plan{{seg(0, 0, 1.0, 1, 2, 200.0), seg(1, 1, 1.0, 0, 1), seg(1, 1, 1.0, 1, 2, 200.0)}},
              "route-contiguity");
  // Ratios of a two-truck platoon summing to 1.5.
  expect_kind(Plan{{seg(0, 0, 1.0, 0, 1), seg(0, 0, 1.0, 1, 2, 200.0), seg(1, 0, 0.5, 0, 1),
                    seg(1, 1, 1.0, 1, 2, 200.0)}},
              "ratio-sum");
  // Overcharge past the top.
  expect_kind(Plan{{seg(0, 0, 1.0, 0, 1, 150.0), seg(0, 0, 1.0, 1, 2, 200.0), seg(1, 1, 1.0, 0, 1),
                    seg(1, 1, 1.0, 1, 2, 200.0)}},
              "soc-upper");
  // Negative charge.
  expect_kind(Plan{{seg(0, 0, 1.0, 0, 1, -5.0), seg(0, 0, 1.0, 1, 2, 200.0), seg(1, 1, 1.0, 0, 1),
                    seg(1, 1, 1.0, 1, 2, 200.0)}},
              "negative-charge");
  // Missing truck.
  expect_kind(Plan{{seg(0, 0, 1.0, 0, 1), seg(0, 0, 1.0, 1, 2, 200.0)}}, "missing-truck");
}

TEST(Feasibility, LowBatteryAndDeadline) {
  Instance inst = corridor(1, 300.0);
  // 300 + 100 units exceeds the 340 range without a charge at m.
  const Plan dry{{seg(0, 0, 1.0, 0, 1), seg(0, 0, 1.0, 1, 2, 340.0)}};
  EXPECT_TRUE(has_kind(check_feasibility(inst, dry), "soc-lower"));

  inst.trucks[0].latest_arrival = 4.1;
  // Charging 300 at m takes 300 / 251.9 h > 0.1 h of slack.
  const Plan late{{seg(0, 0, 1.0, 0, 1, 300.0), seg(0, 0, 1.0, 1, 2, 100.0)}};
  EXPECT_TRUE(has_kind(check_feasibility(inst, late), "latest-arrival"));
}

TEST(Feasibility, ChargeAtNonStation) {
  Instance line;
  line.params = default_parameters();
  line.network.add_node(Node{"o", false, std::nullopt});
  line.network.add_node(Node{"x", false, std::nullopt});
  line.network.add_node(Node{"d", true, 0.2});
  line.network.add_arc(0, 1, 1.0);
  line.network.add_arc(1, 2, 1.0);
  line.trucks.push_back({"T", 0, 2, 5.0});
  validate(line);
  const Plan plan{{seg(0, 0, 1.0, 0, 1, 50.0), seg(0, 0, 1.0, 1, 2, 150.0)}};
  EXPECT_TRUE(has_kind(check_feasibility(line, plan), "charge-at-non-station"));
}

TEST(Restructuring, Examples) {
  EXPECT_EQ(restructuring_count(solo_plan()), 0u);
  const Plan half{{seg(0, 0, 0.5, 0, 1), seg(1, 0, 0.5, 0, 1)}};
  const Plan lead{{seg(0, 0, 1.0, 0, 1), seg(1, 0, 0.0, 0, 1)}};
  EXPECT_EQ(restructuring_count(lead), 0u);

  // Oracle: minimise sum(e - l) over binary e >= h and one-hot l.
  auto oracle = [](const std::vector<double>& h) {
    const std::size_t m = h.size();
    long best = 1 << 20;
    for (unsigned e = 0; e < (1u << m); ++e) {
      bool ok = true;
      for (std::size_t k = 0; k < m; ++k) ok = ok && ((e >> k) & 1u ? 1.0 : 0.0) >= h[k];
      if (!ok) continue;
      // Exactly one l is set, whichever member leads.
      long v = -1;
      for (std::size_t k = 0; k < m; ++k) v += (e >> k) & 1u;
      best = std::min(best, v);
    }
    return static_cast<std::size_t>(best);
  };
  EXPECT_EQ(restructuring_count(half), oracle({0.5, 0.5}));
  EXPECT_EQ(restructuring_count(half), 1u);

  for (const std::vector<double>& h :
       {std::vector<double>{0.2, 0.3, 0.5}, {0.0, 0.5, 0.5}, {1.0, 0.0, 0.0}, {0.25, 0.25, 0.25, 0.25}}) {
    Plan p;
    for (TruckIndex k = 0; k < h.size(); ++k) p.segments.push_back(seg(k, 3, h[k], 0, 1));
    EXPECT_EQ(restructuring_count(p), oracle(h));
  }
}

TEST(Restructuring, BinaryRatiosGiveZero) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Instance inst = apply_mode(micro_instance(seed), ScenarioMode::platoon_no_swap);
    AlnsConfig cfg;
    cfg.time_limit_s = 10;
    const AlnsResult r = run(inst, cfg, seed);
    EXPECT_EQ(restructuring_count(r.best), 0u);
    EXPECT_EQ(r.cost.restructuring, 0.0);
  }
}

TEST(PlanJson, RoundTrip) {
  const Instance inst = illustrative_instance();
  const Plan plan = illustrative_platoon_plan(inst);
  const auto doc = plan_to_json(inst, plan);
  ASSERT_TRUE(doc.contains("segments"));
  ASSERT_TRUE(doc.contains("schedule"));
  ASSERT_TRUE(doc.contains("cost_breakdown"));
  const Plan back = plan_from_json(inst, nlohmann::json::parse(doc.dump()));
  ASSERT_EQ(back.segments.size(), plan.segments.size());
  EXPECT_NEAR(evaluate(inst, back).total, evaluate(inst, plan).total, 1e-9);
  EXPECT_EQ(plan_to_json(inst, back).dump(), doc.dump());
}
