// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// blocking criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "platoon/alns.hpp"
#include "platoon/experiments.hpp"
#include "platoon/fixtures.hpp"
#include "platoon/milp.hpp"

using namespace platoon;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

constexpr std::uint64_t kMicroSeeds = 20;

struct MicroResults {
  double exact[3][kMicroSeeds];  // by mode: no-platoon, no-swap, swap
  double alns[kMicroSeeds];
  double worst_pair_s = 0.0;
  bool all_found = true;
};

const ScenarioMode kModes[3] = {ScenarioMode::no_platoon, ScenarioMode::platoon_no_swap, ScenarioMode::platoon_swap};

MicroResults& micro_results() {
  static MicroResults r = [] {
    MicroResults out;
    for (std::uint64_t s = 0; s < kMicroSeeds; ++s) {
      const Instance base = micro_instance(s + 1);
      for (int m = 0; m < 3; ++m) {
        const auto t0 = Clock::now();
        const Instance inst = apply_mode(base, kModes[m]);
        const auto exact = brute_force_exact(inst);
        out.all_found = out.all_found && exact.has_value();
        out.exact[m][s] = exact ? exact->cost.total : kInfinity;
        if (m == 2) {
          AlnsConfig cfg;
          cfg.time_limit_s = 55;
          out.alns[s] = run(inst, cfg, s + 1).cost.total;
        }
        out.worst_pair_s = std::max(out.worst_pair_s, seconds_since(t0));
      }
    }
    return out;
  }();
  return r;
}

Outcome ac1() {
  const auto t0 = Clock::now();
  const Instance inst = illustrative_instance();
  const double solo = evaluate(inst, illustrative_no_platoon_plan(inst)).charging;
  const double plat = evaluate(inst, illustrative_platoon_plan(inst)).charging;
  const double saving = (solo - plat) / solo * 100.0;
  const double t = seconds_since(t0);
  const bool ok = std::abs(solo - 140.0) <= 1e-6 && std::abs(plat - 136.0) <= 1e-6 &&
                  std::abs(saving - 400.0 / 140.0) <= 1e-6 && t < 1.0;
  return {ok, fmt("charging %.6f / %.6f, saving %.3f%%, %.3fs", solo, plat, saving, t)};
}

Outcome ac2() {
  const double c = arc_consumption(default_parameters(0.15), 1.0, 0.0, 2);
  return {std::abs(c - 85.0) <= 1e-9, fmt("follower consumption %.12g units", c)};
}

Outcome ac3() {
  const MicroResults& r = micro_results();
  double worst = 0.0;
  bool ok = r.all_found;
  for (std::uint64_t s = 0; s < kMicroSeeds; ++s) {
    worst = std::max(worst, r.alns[s] / r.exact[2][s]);
    ok = ok && r.alns[s] <= r.exact[2][s] * 1.02;
  }
  ok = ok && r.worst_pair_s < 60.0;
  return {ok, fmt("%g instances, worst ALNS/exact %.4f, slowest pair %.1fs", kMicroSeeds, worst, r.worst_pair_s)};
}

Outcome ac4() {
  const MicroResults& r = micro_results();
  bool ok = r.all_found;
  int strict = 0;
  for (std::uint64_t s = 0; s < kMicroSeeds; ++s) {
    ok = ok && r.exact[2][s] <= r.exact[1][s] + 1e-9 && r.exact[1][s] <= r.exact[0][s] + 1e-9;
    strict += (r.exact[2][s] < r.exact[1][s] - 1e-9 || r.exact[1][s] < r.exact[0][s] - 1e-9) ? 1 : 0;
  }
  ok = ok && strict > 0;
  return {ok, fmt("ordering holds on all %g, strict on %g", kMicroSeeds, strict)};
}

Outcome ac5() {
  const auto rows = run_suite("small3", AlnsConfig{}, 1, 1);
  const double np = rows[0].cost.total, ns = rows[1].cost.total, sw = rows[2].cost.total;
  const double platoon_saving = (np - sw) / np * 100.0;
  const double swap_charging = (rows[1].cost.charging - rows[2].cost.charging) / rows[1].cost.charging * 100.0;
  const bool ok = np > ns && ns > sw && platoon_saving >= 5.0 && platoon_saving <= 20.0 && swap_charging >= 1.0 &&
                  swap_charging <= 10.0;
  return {ok, fmt("totals %.2f / %.2f / %.2f, platoon saving %.2f%%", np, ns, sw, platoon_saving) +
                  fmt(", swap charging saving %.2f%%", swap_charging)};
}

Outcome ac6() {
  std::size_t applications = 0, accepted = 0, bad = 0;
  std::vector<Instance> cases{apply_mode(small_test_instance(), ScenarioMode::platoon_swap),
                              apply_mode(illustrative_instance(), ScenarioMode::platoon_swap)};
  for (std::uint64_t s = 1; s <= 8; ++s) cases.push_back(apply_mode(micro_instance(s), kModes[s % 3]));
  const std::size_t per_case = 10000 / cases.size() + 1;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const Instance& inst = cases[c];
    const Preprocessed pre = preprocess(inst);
    AlnsConfig cfg;
    const Operators ops(inst, pre, cfg);
    Rng rng(1000 + c);
    Solution current = build_initial_solution(inst, pre);
    double current_cost = assess(inst, current.refs()).cost.total;
    double temperature = cfg.initial_temperature;
    for (std::size_t i = 0; i < per_case; ++i) {
      Solution cand = current;
      const auto removed = ops.remove(static_cast<std::size_t>(rng.uniform_int(0, 4)), cand, rng);
      ops.insert(static_cast<std::size_t>(rng.uniform_int(0, 6)), cand, removed.removed);
      if (rng.uniform() < 0.5) ops.swap(static_cast<std::size_t>(rng.uniform_int(0, 1)), cand, rng);
      ++applications;
      const Assessment a = assess(inst, cand.refs());
      if (!a.feasible() || !accept(a.cost.total, current_cost, temperature, rng)) continue;
      ++accepted;
      if (!check_feasibility(inst, to_plan(cand)).empty()) ++bad;
      current = std::move(cand);
      current_cost = a.cost.total;
      temperature = std::max(1.0, temperature * cfg.cooling);
    }
  }
  return {bad == 0 && applications >= 10000,
          fmt("%g applications, %g accepted, %g with violations", static_cast<double>(applications),
              static_cast<double>(accepted), static_cast<double>(bad))};
}

Outcome ac7() {
  OperatorPool pool;
  pool.ops = {{"a", 1.0, 0.0, 0}, {"b", 0.0, 0.0, 0}};
  const int n = 100000;
  Rng rng(7);
  int first = 0;
  for (int i = 0; i < n; ++i) first += select_operator(pool, 10.0, rng) == 0;
  const double p = std::exp(10.0) / (std::exp(10.0) + 1.0);
  const double freq = static_cast<double>(first) / n;
  const double sd = std::sqrt(p * (1 - p) / n);
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += accept(15.0, 10.0, 5.0, rng);
  const double q = std::exp(-1.0);
  const double rate = static_cast<double>(hits) / n;
  const double sd2 = std::sqrt(q * (1 - q) / n);
  const bool ok = std::abs(freq - p) <= 3 * sd && std::abs(rate - q) <= 3 * sd2;
  return {ok, fmt("selection %.6f vs %.6f, acceptance %.5f vs %.5f", freq, p, rate, q)};
}

Outcome ac8() {
  OperatorPool pool;
  pool.ops = {{"a", 1.0, 3.0, 0}, {"b", 1.0, 0.0, 0}};
  update_weights(pool, AlnsConfig{}.reaction);
  const bool ok = std::abs(pool.ops[0].weight - 1.4) <= 1e-12 && std::abs(pool.ops[1].weight - 0.8) <= 1e-12;
  return {ok, fmt("weights (%.15g, %.15g)", pool.ops[0].weight, pool.ops[1].weight)};
}

Outcome ac9() {
  const std::uint64_t seed = 1;
  RunSpec spec;
  for (const RunSpec& s : suite_runs("scaling", seed)) {
    if (s.param_value == 150.0) spec = s;
  }
  AlnsConfig cfg;
  cfg.time_limit_s = 600;
  spec.mode = ScenarioMode::no_platoon;
  const ReportRow solo = solve_run(spec, cfg);
  spec.mode = ScenarioMode::platoon_swap;
  const ReportRow plat = solve_run(spec, cfg);
  const double benefit = solo.cost.total - plat.cost.total;
  const double pct = benefit / solo.cost.total * 100.0;
  const bool ok = solo.status == "ok" && plat.status == "ok" && solo.feasible && plat.feasible &&
                  solo.wall_clock_s < 600.0 && plat.wall_clock_s < 600.0 && benefit >= 0.0;
  return {ok, fmt("150 trucks: %.1fs / %.1fs, benefit %.2f (%.2f%%, reported only)", solo.wall_clock_s,
                  plat.wall_clock_s, benefit, pct)};
}

Outcome ac10() {
  std::size_t plans = 0, mismatched = 0, round_trip_bad = 0;
  double worst = 0.0;
  for (std::uint64_t s = 1; plans < 50; ++s) {
    const Instance inst = apply_mode(micro_instance(s), kModes[s % 3]);
    const MilpModel model = build(inst);
    const std::string text = to_lp_string(model);
    const MilpModel parsed = parse_lp(text);
    if (!(parsed == model.rounded()) || to_lp_string(parsed) != text) ++round_trip_bad;
    AlnsConfig cfg;
    cfg.time_limit_s = 10;
    const AlnsResult r = run(inst, cfg, s);
    std::vector<Plan> sample{build_initial_plan(inst), r.best};
    if (auto exact = brute_force_exact(inst)) sample.push_back(exact->plan);
    for (const Plan& plan : sample) {
      if (plans == 50) break;
      if (!check_feasibility(inst, plan).empty()) continue;
      const auto x = plan_to_assignment(inst, model, plan);
      const double gap = std::abs(parsed.objective_value(x) - evaluate(inst, plan).total);
      worst = std::max(worst, gap);
      if (gap > 1e-6 || !parsed.violations(x).empty()) ++mismatched;
      ++plans;
    }
  }
  return {mismatched == 0 && round_trip_bad == 0,
          fmt("%g plans, worst objective gap %.2e, %g mismatches, %g LP round-trip failures",
              static_cast<double>(plans), worst, static_cast<double>(mismatched),
              static_cast<double>(round_trip_bad))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}};
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
