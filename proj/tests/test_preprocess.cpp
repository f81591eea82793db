#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "platoon/errors.hpp"
#include "platoon/fixtures.hpp"
#include "platoon/preprocess.hpp"

using namespace platoon;

namespace {

struct OracleEntry {
  double score;
  std::vector<NodeIndex> stations;
};

// Every ordered selection of at most three stations, scored leg by leg.
std::vector<OracleEntry> oracle_candidates(const Instance& inst, TruckIndex k, double factor) {
  const Parameters& p = inst.params;
  const TruckDelivery& t = inst.trucks[k];
  const ShortestPaths sp(inst.network);
  std::vector<NodeIndex> stations;
  for (NodeIndex i = 0; i < inst.network.num_nodes(); ++i) {
    if (i != t.origin && i != t.destination && inst.can_charge(i)) stations.push_back(i);
  }
  std::vector<std::vector<NodeIndex>> seqs{{}};
  for (int depth = 0; depth < 3; ++depth) {
    const std::size_t before = seqs.size();
    for (std::size_t s = 0; s < before; ++s) {
      if (seqs[s].size() != static_cast<std::size_t>(depth)) continue;
      for (NodeIndex st : stations) {
        if (std::find(seqs[s].begin(), seqs[s].end(), st) != seqs[s].end()) continue;
        auto next = seqs[s];
        next.push_back(st);
        seqs.push_back(next);
      }
    }
  }

  std::vector<OracleEntry> out;
  for (const auto& seq : seqs) {
    std::vector<NodeIndex> stops{t.origin};
    stops.insert(stops.end(), seq.begin(), seq.end());
    stops.push_back(t.destination);

    std::vector<NodeIndex> route{t.origin};
    bool ok = true;
    double hours = 0.0, charged = 0.0, score = 0.0, energy = p.full_energy();
    for (std::size_t i = 0; ok && i + 1 < stops.size(); ++i) {
      const double leg_h = sp.time(stops[i], stops[i + 1]);
      if (leg_h == kInfinity) {
        ok = false;
        break;
      }
      const auto nodes = sp.nodes(stops[i], stops[i + 1]);
      route.insert(route.end(), nodes.begin() + 1, nodes.end());
      const double leg = p.sigma * leg_h * factor;
      if (leg > p.usable_energy() + 1e-9) ok = false;
      if (i > 0) {
        const double need = leg - (energy - p.floor_energy());
        if (need <= 1e-9) ok = false;  // a stop must charge something
        charged += need;
        score += need * (inst.price(stops[i]) + p.alpha3 / p.eta);
        energy += need;
      } else if (leg > energy - p.floor_energy() + 1e-9) {
        ok = false;
      }
      energy -= leg;
      hours += leg_h;
      score += p.alpha1 * leg_h;
    }
    if (!ok) continue;
    if (hours + charged / p.eta > t.latest_arrival + 1e-9) continue;
    std::set<NodeIndex> distinct(route.begin(), route.end());
    if (distinct.size() != route.size()) continue;
    out.push_back({score, seq});
  }
  std::sort(out.begin(), out.end(), [](const OracleEntry& a, const OracleEntry& b) {
    return a.score != b.score ? a.score < b.score : a.stations < b.stations;
  });
  return out;
}

void expect_matches_oracle(const Instance& inst) {
  for (TruckIndex k = 0; k < inst.num_trucks(); ++k) {
    for (CandidateMode mode : {CandidateMode::solo, CandidateMode::follower}) {
      const double factor = mode == CandidateMode::solo ? 1.0 : 1.0 - inst.params.beta;
      const auto expected = oracle_candidates(inst, k, factor);
      ASSERT_FALSE(expected.empty());
      const CandidatePair got = candidate_plan(inst, k, mode);
      EXPECT_NEAR(got.best.score, expected[0].score, 1e-6);
      EXPECT_EQ(got.best.stations, expected[0].stations);
      ASSERT_EQ(got.second_best.has_value(), expected.size() > 1);
      if (got.second_best) {
        EXPECT_NEAR(got.second_best->score, expected[1].score, 1e-6);
      }
    }
  }
}

}  // namespace

TEST(CandidatePlan, MatchesExhaustiveOracleOnFixtures) {
  expect_matches_oracle(small_test_instance());
  expect_matches_oracle(illustrative_instance());
}

TEST(CandidatePlan, MatchesExhaustiveOracleOnMicro) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) expect_matches_oracle(micro_instance(seed));
}

TEST(CandidatePlan, RouteIsSimpleAndPassesStations) {
  const Instance inst = small_test_instance();
  for (TruckIndex k = 0; k < inst.num_trucks(); ++k) {
    const CandidatePair c = candidate_plan(inst, k, CandidateMode::solo);
    const auto& r = c.best.route;
    EXPECT_EQ(r.front(), inst.trucks[k].origin);
    EXPECT_EQ(r.back(), inst.trucks[k].destination);
    EXPECT_EQ(std::set<NodeIndex>(r.begin(), r.end()).size(), r.size());
    for (NodeIndex s : c.best.stations) EXPECT_NE(std::find(r.begin(), r.end(), s), r.end());
  }
}

TEST(CandidatePlan, UnservableWhenDeadlineTooTight) {
  Instance inst = small_test_instance();
  inst.trucks[0].latest_arrival = 1.0;
  try {
    candidate_plan(inst, 0, CandidateMode::solo);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(e.code(), ErrorCode::unservable);
  }
}

TEST(Classify, GroupFollowsStationSets) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Instance inst = micro_instance(seed);
    for (const TruckClass& c : classify_trucks(inst)) {
      const bool same = c.best.stations == c.follower_best.stations;
      EXPECT_EQ(c.group == TruckGroup::no_difference, same);
      EXPECT_GE(c.regret, 0.0);
      if (!c.second_best) {
        EXPECT_EQ(c.regret, 0.0);
      }
    }
  }
}

TEST(Preprocess, RoutesAndCosts) {
  const Instance inst = small_test_instance();
  const Preprocessed pre = preprocess(inst);
  ASSERT_EQ(pre.routes.size(), inst.num_trucks());
  for (TruckIndex k = 0; k < inst.num_trucks(); ++k) {
    ASSERT_FALSE(pre.routes[k].empty());
    EXPECT_EQ(pre.routes[k][0], pre.classes[k].best.route);
    const double sp = pre.paths.time(inst.trucks[k].origin, inst.trucks[k].destination);
    EXPECT_NEAR(pre.sp_cost[k], inst.params.alpha1 * sp, 1e-9);
    EXPECT_GE(pre.solo_cost[k], pre.sp_cost[k] - 1e-9);
  }
}

TEST(InitialSolution, FeasibleOnFixturesAndMicro) {
  std::vector<Instance> cases{illustrative_instance(), small_test_instance()};
  for (std::uint64_t seed = 1; seed <= 15; ++seed) cases.push_back(micro_instance(seed));
  for (const Instance& inst : cases) {
    for (ScenarioMode m : {ScenarioMode::no_platoon, ScenarioMode::platoon_no_swap, ScenarioMode::platoon_swap}) {
      const Instance moded = apply_mode(inst, m);
      const Plan plan = build_initial_plan(moded);
      const auto v = check_feasibility(moded, plan);
      EXPECT_TRUE(v.empty()) << v.front().kind << " " << v.front().detail;
      std::set<TruckIndex> present;
      for (const auto& s : plan.segments) present.insert(s.truck);
      EXPECT_EQ(present.size(), moded.num_trucks());
    }
  }
}

TEST(InitialSolution, NoPlatoonModeStaysSolo) {
  const Instance inst = apply_mode(small_test_instance(), ScenarioMode::no_platoon);
  const Plan plan = build_initial_plan(inst);
  EXPECT_EQ(evaluate(inst, plan).following_labor, 0.0);
}

TEST(InitialSolution, Deterministic) {
  const Instance inst = micro_instance(4);
  const Plan a = build_initial_plan(inst);
  const Plan b = build_initial_plan(inst);
  EXPECT_EQ(plan_to_json(inst, a).dump(), plan_to_json(inst, b).dump());
}
