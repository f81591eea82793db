#include <gtest/gtest.h>

#include <filesystem>
#include <map>

#include "platoon/alns.hpp"
#include "platoon/errors.hpp"
#include "platoon/fixtures.hpp"
#include "platoon/milp.hpp"

using namespace platoon;

namespace {

std::map<std::string, std::size_t> census(const MilpModel& m) {
  std::map<std::string, std::size_t> out;
  for (const Constraint& c : m.constraints) out[c.name.substr(0, c.name.find('_'))]++;
  return out;
}

Instance one_arc() {
  Instance inst;
  inst.params = default_parameters();
  inst.network.add_node(Node{"o", false, std::nullopt});
  inst.network.add_node(Node{"d", true, 0.2});
  inst.network.add_arc(0, 1, 1.0);
  inst.trucks.push_back({"T", 0, 1, 3.0});
  validate(inst);
  return inst;
}

// Plans to check the model against: warm starts and search results.
std::vector<std::pair<Instance, Plan>> sample_plans(std::size_t count) {
  std::vector<std::pair<Instance, Plan>> out;
  const ScenarioMode modes[] = {ScenarioMode::no_platoon, ScenarioMode::platoon_no_swap, ScenarioMode::platoon_swap};
  for (std::uint64_t seed = 1; out.size() < count; ++seed) {
    const Instance inst = apply_mode(micro_instance(seed), modes[seed % 3]);
    out.emplace_back(inst, build_initial_plan(inst));
    AlnsConfig cfg;
    cfg.time_limit_s = 10;
    out.emplace_back(inst, run(inst, cfg, seed).best);
  }
  out.resize(count);
  return out;
}

}  // namespace

TEST(Build, VariableAndConstraintCensus) {
  for (const Instance& inst : {illustrative_instance(), micro_instance(2), micro_instance(7)}) {
    const MilpModel m = build(inst);
    const std::size_t n = inst.network.num_nodes();
    const std::size_t a = inst.network.num_arcs();
    const std::size_t K = inst.num_trucks();
    EXPECT_EQ(m.variables.size(), 4 * a * K + 4 * n * K + 2 * a * K * (K - 1));

    std::size_t c9 = 0;
    for (const auto& t : inst.trucks) {
      for (NodeIndex i = 0; i < n; ++i) c9 += (!inst.network.node(i).has_charger || i == t.origin) ? 1 : 0;
    }
    const auto c = census(m);
    EXPECT_EQ(c.at("c2"), K * (n - 2));
    for (const char* name : {"c3", "c4", "c7", "c8", "c13"}) EXPECT_EQ(c.at(name), K) << name;
    for (const char* name : {"c5", "c6", "c14"}) EXPECT_EQ(c.at(name), n * K) << name;
    EXPECT_EQ(c.at("c9"), c9);
    for (const char* name : {"c10", "c11", "c12", "c15", "c16", "c19", "c22", "c33", "c34"}) {
      EXPECT_EQ(c.at(name), a * K) << name;
    }
    for (const char* name : {"c20", "c21", "c35", "c36", "c37"}) EXPECT_EQ(c.at(name), a * K * (K - 1)) << name;
  }
}

TEST(Build, OneTruckOneArc) {
  const MilpModel m = build(one_arc());
  EXPECT_EQ(m.variables.size(), 12u);
  EXPECT_TRUE(m.find("x_0_1_0").has_value());
  EXPECT_TRUE(m.find("y_1_0").has_value());
  EXPECT_FALSE(m.find("x_1_0_0").has_value());
  EXPECT_THROW(m.at("nope"), InputError);
}

TEST(Build, VariableKinds) {
  const Instance swap = apply_mode(micro_instance(3), ScenarioMode::platoon_swap);
  const Instance binary = apply_mode(micro_instance(3), ScenarioMode::platoon_no_swap);
  const MilpModel ms = build(swap);
  const MilpModel mb = build(binary);
  for (std::size_t i = 0; i < ms.variables.size(); ++i) {
    const char sym = ms.variables[i].name[0];
    const bool is_h = ms.variables[i].name.rfind("h_", 0) == 0;
    if (sym == 'x' || sym == 'l' || sym == 'f' || sym == 'e') {
      EXPECT_EQ(ms.variables[i].kind, VarKind::binary) << ms.variables[i].name;
    }
    if (is_h) {
      EXPECT_EQ(ms.variables[i].kind, VarKind::continuous);
      EXPECT_EQ(mb.variables[i].kind, VarKind::binary);
    }
  }
}

TEST(Build, SizeOneForbidsFollowers) {
  Instance inst = micro_instance(5);
  inst.params.max_platoon_size = 1;
  const MilpModel m = build(inst);
  std::size_t rows = 0;
  for (const Constraint& c : m.constraints) {
    if (c.name.rfind("c19_", 0) != 0) continue;
    ++rows;
    EXPECT_EQ(c.rhs, 0.0);
    EXPECT_EQ(c.sense, Sense::le);
    for (const auto& [var, coef] : c.terms) {
      EXPECT_EQ(m.variables[var].name[0], 'f');
      EXPECT_EQ(coef, 1.0);
    }
  }
  EXPECT_GT(rows, 0u);
}

TEST(Build, BigM) {
  const Instance inst = illustrative_instance();
  const BigMPolicy M = BigMPolicy::for_instance(inst);
  double max_t = 0.0;
  for (const Arc& a : inst.network.arcs()) max_t = std::max(max_t, a.travel_time);
  EXPECT_NEAR(M.soc, inst.params.capacity + inst.params.sigma * max_t, 1e-9);
  EXPECT_EQ(M.ratio, static_cast<double>(inst.num_trucks()));
  EXPECT_EQ(M.platoon, M.time);
  EXPECT_GT(M.time, 2 * 24.0);
}

TEST(Assignment, FeasibleAndObjectiveMatchesEvaluate) {
  for (const auto& [inst, plan] : sample_plans(24)) {
    const MilpModel m = build(inst);
    const auto x = plan_to_assignment(inst, m, plan);
    ASSERT_EQ(x.size(), m.variables.size());
    const auto bad = m.violations(x);
    EXPECT_TRUE(bad.empty()) << bad.front();
    EXPECT_NEAR(m.objective_value(x), evaluate(inst, plan).total, 1e-6);
  }
}

TEST(Assignment, IllustrativeFixtures) {
  const Instance inst = illustrative_instance();
  const MilpModel m = build(inst);
  for (const Plan& plan : {illustrative_no_platoon_plan(inst), illustrative_platoon_plan(inst)}) {
    const auto x = plan_to_assignment(inst, m, plan);
    EXPECT_TRUE(m.violations(x).empty());
    EXPECT_NEAR(m.objective_value(x), evaluate(inst, plan).total, 1e-6);
  }
}

TEST(Assignment, RejectsInfeasiblePlan) {
  const Instance inst = one_arc();
  const MilpModel m = build(inst);
  EXPECT_THROW(plan_to_assignment(inst, m, Plan{{SegmentRecord{0, 0, 1.0, 0, 1, 500.0}}}), ScheduleError);
}

TEST(Lp, RoundTrip) {
  for (const Instance& inst : {illustrative_instance(), apply_mode(micro_instance(4), ScenarioMode::platoon_no_swap)}) {
    const MilpModel m = build(inst);
    const std::string text = to_lp_string(m);
    const MilpModel back = parse_lp(text);
    EXPECT_TRUE(back == m.rounded());
    EXPECT_EQ(to_lp_string(back), text);
  }
}

TEST(Lp, FileRoundTrip) {
  const MilpModel m = build(micro_instance(6));
  const auto path = std::filesystem::temp_directory_path() / "platoon_test_model.lp";
  export_lp(m, path);
  EXPECT_TRUE(load_lp(path) == m.rounded());
  std::filesystem::remove(path);
}

TEST(Lp, Layout) {
  const std::string text = to_lp_string(build(one_arc()));
  const auto pos = [&](const char* s) { return text.find(s); };
  ASSERT_NE(pos("Minimize"), std::string::npos);
  EXPECT_LT(pos("Minimize"), pos("Subject To"));
  EXPECT_LT(pos("Subject To"), pos("Bounds"));
  EXPECT_LT(pos("Bounds"), pos("Binaries"));
  EXPECT_LT(pos("Binaries"), pos("End"));
  EXPECT_NE(pos(" obj:"), std::string::npos);
}

TEST(Lp, MalformedInput) {
  EXPECT_THROW(parse_lp("Minimize\n obj: 2 x\nSubject To\n c1: x >=\nEnd\n"), InputError);
  EXPECT_THROW(parse_lp("garbage"), InputError);
}

TEST(BruteForce, SingleTruckOneArc) {
  const Instance inst = one_arc();
  const auto r = brute_force_exact(inst);
  ASSERT_TRUE(r.has_value());
  // alpha1 * 1 h plus refilling 100 units at $0.2.
  EXPECT_NEAR(r->cost.total, inst.params.alpha1 * 1.0 + 100.0 * 0.2, 1e-9);
}

TEST(BruteForce, FeasibleAndModeNesting) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Instance base = micro_instance(seed);
    double prev = kInfinity;
    for (ScenarioMode mode : {ScenarioMode::no_platoon, ScenarioMode::platoon_no_swap, ScenarioMode::platoon_swap}) {
      const Instance inst = apply_mode(base, mode);
      const auto r = brute_force_exact(inst);
      ASSERT_TRUE(r.has_value());
      EXPECT_TRUE(check_feasibility(inst, r->plan).empty());
      EXPECT_NEAR(evaluate(inst, r->plan).total, r->cost.total, 1e-9);
      EXPECT_LE(r->cost.total, prev + 1e-9);
      prev = r->cost.total;
    }
  }
}

TEST(BruteForce, IllustrativeOptimum) {
  const Instance inst = illustrative_instance();
  const auto solo = brute_force_exact(apply_mode(inst, ScenarioMode::no_platoon));
  const auto swap = brute_force_exact(apply_mode(inst, ScenarioMode::platoon_swap));
  ASSERT_TRUE(solo && swap);
  EXPECT_NEAR(solo->cost.total, 140.0, 1e-6);
  EXPECT_NEAR(swap->cost.total, 136.0, 1e-6);
}

TEST(BruteForce, TooLarge) {
  Instance four = small_test_instance();
  four.trucks.push_back(four.trucks[0]);
  four.trucks.push_back(four.trucks[1]);
  try {
    brute_force_exact(four);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(e.code(), ErrorCode::too_large);
  }
  const Instance grid = make_instance(generate_grid(5, 100.0, default_parameters()), default_parameters(), 2, 1);
  EXPECT_THROW(brute_force_exact(grid), InputError);
}
