#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "platoon/alns.hpp"
#include "platoon/errors.hpp"
#include "platoon/fixtures.hpp"

using namespace platoon;

namespace {

OperatorPool two_ops(double w0, double w1) {
  OperatorPool pool;
  pool.ops = {{"a", w0, 0.0, 0}, {"b", w1, 0.0, 0}};
  return pool;
}

}  // namespace

TEST(Pools, NamesAndSizes) {
  EXPECT_EQ(make_pool(PoolKind::removal).ops.size(), 5u);
  EXPECT_EQ(make_pool(PoolKind::insertion).ops.size(), 7u);
  EXPECT_EQ(make_pool(PoolKind::swap).ops.size(), 2u);
  for (const auto& op : make_pool(PoolKind::insertion).ops) EXPECT_EQ(op.weight, 1.0);
}

TEST(Selection, SoftmaxProbabilities) {
  const auto p = two_ops(1.0, 0.0).probabilities(10.0);
  const double expected = std::exp(10.0) / (std::exp(10.0) + 1.0);
  EXPECT_NEAR(p[0], expected, 1e-12);
  EXPECT_NEAR(p[1], 1.0 - expected, 1e-12);

  const auto even = make_pool(PoolKind::removal).probabilities(10.0);
  for (double q : even) EXPECT_NEAR(q, 0.2, 1e-12);

  // Large weights must not overflow.
  const auto big = two_ops(500.0, 499.0).probabilities(10.0);
  EXPECT_NEAR(big[0], expected, 1e-12);
}

TEST(Selection, RouletteFrequencies) {
  const OperatorPool pool = two_ops(0.3, 0.1);
  const auto p = pool.probabilities(10.0);
  Rng rng(11);
  const int n = 100000;
  int first = 0;
  for (int i = 0; i < n; ++i) first += select_operator(pool, 10.0, rng) == 0;
  const double sd = std::sqrt(p[0] * (1 - p[0]) / n);
  EXPECT_NEAR(static_cast<double>(first) / n, p[0], 3 * sd);
}

TEST(Acceptance, ImprovementsAlwaysAccepted) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_TRUE(accept(10.0, 10.0, 1.0, rng));
    EXPECT_TRUE(accept(9.0, 10.0, 1e-6, rng));
  }
}

TEST(Acceptance, MetropolisRate) {
  Rng rng(6);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += accept(12.0, 10.0, 4.0, rng);
  const double p = std::exp(-0.5);
  EXPECT_NEAR(static_cast<double>(hits) / n, p, 3 * std::sqrt(p * (1 - p) / n));
}

TEST(Weights, ReactionUpdate) {
  OperatorPool pool = two_ops(1.0, 1.0);
  pool.ops[0].score = 3.0;
  update_weights(pool, 0.2);
  EXPECT_DOUBLE_EQ(pool.ops[0].weight, 0.8 * 1.0 + 0.2 * 3.0);
  EXPECT_DOUBLE_EQ(pool.ops[1].weight, 0.8);
  EXPECT_EQ(pool.ops[0].score, 0.0);
  EXPECT_EQ(pool.ops[1].score, 0.0);
}

TEST(Kappa, WithinBounds) {
  AlnsConfig cfg;
  Rng rng(1);
  for (std::size_t trucks : {0u, 1u, 2u, 3u, 10u, 40u, 150u}) {
    const std::size_t hi = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(0.1 * trucks)));
    std::set<std::size_t> seen;
    for (int i = 0; i < 2000; ++i) {
      const std::size_t k = draw_kappa(trucks, cfg, rng);
      EXPECT_LE(k, trucks);
      if (trucks >= 2) {
        EXPECT_GE(k, 2u);
        EXPECT_LE(k, hi);
      }
      seen.insert(k);
    }
    // 150 trucks draw from 2..15.
    if (trucks == 150) {
      EXPECT_EQ(seen.size(), 14u);
    }
  }
}

TEST(Config, RejectsBadValues) {
  AlnsConfig cfg;
  cfg.cooling = 1.5;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = AlnsConfig{};
  cfg.nu = 0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = AlnsConfig{};
  cfg.swap_probability = -0.1;
  EXPECT_THROW(cfg.validate(), InputError);
  EXPECT_NO_THROW(AlnsConfig{}.validate());
}

TEST(Operators, CandidatesAreCompleteAndGateAgreesWithChecker) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Instance inst = apply_mode(micro_instance(seed), ScenarioMode::platoon_swap);
    const Preprocessed pre = preprocess(inst);
    AlnsConfig cfg;
    const Operators ops(inst, pre, cfg);
    Rng rng(seed);
    Solution current = build_initial_solution(inst, pre);
    for (int step = 0; step < 150; ++step) {
      Solution cand = current;
      const auto removed = ops.remove(static_cast<std::size_t>(rng.uniform_int(0, 4)), cand, rng);
      ops.insert(static_cast<std::size_t>(rng.uniform_int(0, 6)), cand, removed.removed);
      if (rng.uniform() < 0.5) ops.swap(static_cast<std::size_t>(rng.uniform_int(0, 1)), cand, rng);
      for (TruckIndex k = 0; k < inst.num_trucks(); ++k) ASSERT_TRUE(cand.has(k));
      const bool gate = assess(inst, cand.refs()).feasible();
      EXPECT_EQ(gate, check_feasibility(inst, to_plan(cand)).empty());
      if (gate) current = std::move(cand);
    }
  }
}

TEST(Operators, SwapRollsBackWhenViolated) {
  const Instance inst = apply_mode(small_test_instance(), ScenarioMode::platoon_swap);
  const Preprocessed pre = preprocess(inst);
  AlnsConfig cfg;
  const Operators ops(inst, pre, cfg);
  Rng rng(9);
  Solution sol = build_initial_solution(inst, pre);
  for (int i = 0; i < 200; ++i) {
    const Solution before = sol;
    const SwapResult r = ops.swap(static_cast<std::size_t>(i % 2), sol, rng);
    if (r.violated || !r.applied) {
      EXPECT_TRUE(sol == before);
    }
    EXPECT_TRUE(assess(inst, sol.refs()).feasible());
  }
}

TEST(Operators, NoSwapModeKeepsBinaryRatios) {
  const Instance inst = apply_mode(small_test_instance(), ScenarioMode::platoon_no_swap);
  const Preprocessed pre = preprocess(inst);
  AlnsConfig cfg;
  const Operators ops(inst, pre, cfg);
  Rng rng(2);
  Solution sol = build_initial_solution(inst, pre);
  for (int i = 0; i < 100; ++i) {
    ops.swap(static_cast<std::size_t>(i % 2), sol, rng);
    for (const auto& s : to_plan(sol).segments) {
      EXPECT_TRUE(s.leading_ratio == 0.0 || s.leading_ratio == 1.0);
    }
  }
}

TEST(Run, DeterministicPerSeed) {
  const Instance inst = small_test_instance();
  AlnsConfig cfg;
  cfg.time_limit_s = 60;
  const AlnsResult a = run(inst, cfg, 42);
  const AlnsResult b = run(inst, cfg, 42);
  EXPECT_EQ(a.cost.total, b.cost.total);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(plan_to_json(inst, a.best).dump(), plan_to_json(inst, b.best).dump());
  std::ostringstream la, lb;
  write_run_log(a.log, la);
  write_run_log(b.log, lb);
  EXPECT_EQ(la.str(), lb.str());
}

TEST(Run, BestNeverWorseThanInitialAndFeasible) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Instance inst = micro_instance(seed);
    AlnsConfig cfg;
    cfg.time_limit_s = 30;
    const AlnsResult r = run(inst, cfg, seed);
    EXPECT_LE(r.cost.total, r.initial_cost + 1e-9);
    EXPECT_TRUE(check_feasibility(inst, r.best).empty());
    EXPECT_NEAR(evaluate(inst, r.best).total, r.cost.total, 1e-9);
    ASSERT_FALSE(r.log.empty());
    double prev = r.log.front().best;
    for (const auto& row : r.log) {
      EXPECT_LE(row.best, prev + 1e-12);
      EXPECT_LE(row.best, row.incumbent + 1e-9);
      prev = row.best;
    }
  }
}

TEST(Run, StopsAfterNoImprovementLimit) {
  const Instance inst = micro_instance(3);
  AlnsConfig cfg;
  cfg.no_improve_limit = 7;
  const AlnsResult r = run(inst, cfg, 1);
  ASSERT_GE(r.log.size(), 7u);
  EXPECT_EQ(r.log.size(), r.iterations);
  // The final streak of 7 iterations found nothing better.
  const double before = r.log.size() > 7 ? r.log[r.log.size() - 8].best : r.initial_cost;
  for (std::size_t i = r.log.size() - 7; i < r.log.size(); ++i) EXPECT_EQ(r.log[i].best, before);
}

TEST(Run, LogHeader) {
  std::ostringstream out;
  write_run_log({}, out);
  EXPECT_EQ(out.str(), "iteration,removal,insertion,swap,delta,accepted,temperature,incumbent,best\n");
}

TEST(Run, UnservableThrows) {
  Instance inst = small_test_instance();
  inst.trucks[1].latest_arrival = 0.5;
  EXPECT_THROW(run(inst, AlnsConfig{}, 1), InputError);
}
