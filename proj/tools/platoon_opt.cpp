// platoon_opt: generate instances, solve them in a scenario mode, run the
// experiment suites, export the MILP and check plans.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "platoon/errors.hpp"
#include "platoon/experiments.hpp"
#include "platoon/fixtures.hpp"
#include "platoon/milp.hpp"

namespace fs = std::filesystem;
using namespace platoon;

namespace {

enum Exit { kOk = 0, kFailed = 1, kInput = 2, kUnservable = 3 };

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("platoon_opt");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("PLATOON_OPT_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept those it knows.
    if (level != spdlog::level::off || std::string(env) == "off") {
      spdlog::set_level(level);
    } else {
      spdlog::warn("ignoring PLATOON_OPT_LOG={}", env);
    }
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(ErrorCode::io, "cannot write " + path.string());
  return out;
}

struct SearchFlags {
  std::uint64_t seed = 1;
  int time_limit_s = 600;
  int no_improve_limit = 50;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("--time-limit-s", time_limit_s, "Search time limit per run")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--no-improve-limit", no_improve_limit, "Stop after this many iterations without a new best")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  AlnsConfig config() const {
    AlnsConfig c;
    c.time_limit_s = time_limit_s;
    c.no_improve_limit = no_improve_limit;
    c.validate();
    return c;
  }
};

const std::map<std::string, ScenarioMode> kModes = {{"no-platoon", ScenarioMode::no_platoon},
                                                    {"platoon-no-swap", ScenarioMode::platoon_no_swap},
                                                    {"platoon-swap", ScenarioMode::platoon_swap}};

void print_cost(const CostBreakdown& c) {
  std::cout << "charging " << c.charging << "\nleading_labor " << c.leading_labor << "\nfollowing_labor "
            << c.following_labor << "\nidle " << c.idle << "\nrestructuring " << c.restructuring << "\ntotal "
            << c.total << '\n';
}

int cmd_solve(const fs::path& instance_path, ScenarioMode mode, const SearchFlags& flags, const fs::path& out_dir) {
  RunSpec spec;
  spec.suite = "solve";
  spec.instance_id = instance_path.stem().string();
  spec.seed = flags.seed;
  spec.mode = mode;
  spec.instance = load_instance(instance_path);
  spdlog::info("solving {} ({} trucks, {} nodes) in mode {}", instance_path.string(), spec.instance.num_trucks(),
               spec.instance.network.num_nodes(), to_string(mode));

  AlnsResult result;
  ReportRow row = solve_run(spec, flags.config(), &result);
  ensure_dir(out_dir);
  {
    auto out = open_out(out_dir / "report.csv");
    write_report_csv({row}, out);
  }
  if (row.status == "unservable") {
    spdlog::error("instance is unservable: some truck cannot reach its destination in time");
    return kUnservable;
  }
  if (row.status != "ok") {
    spdlog::error("{}", row.status);
    return kFailed;
  }
  const Instance inst = apply_mode(spec.instance, mode);
  save_plan(inst, result.best, out_dir / "solution.json");
  {
    auto out = open_out(out_dir / "run_log.csv");
    write_run_log(result.log, out);
  }
  spdlog::info("{} iterations in {:.2f} s, initial {:.4f}, best {:.4f}", row.iterations, row.wall_clock_s,
               result.initial_cost, row.cost.total);
  print_cost(row.cost);
  return kOk;
}

int cmd_suite(const std::string& suite, const SearchFlags& flags, std::size_t workers, const fs::path& out_dir) {
  const auto specs = suite_runs(suite, flags.seed);
  spdlog::info("suite {}: {} runs on {} worker(s)", suite, specs.size(), workers);
  const auto rows = run_specs(specs, flags.config(), workers, [](const ReportRow& r) {
    spdlog::info("{} {} {}={} total={:.4f} status={} ({:.1f} s)", r.instance_id, to_string(r.mode), r.param_name,
                 r.param_value, r.cost.total, r.status, r.wall_clock_s);
  });
  ensure_dir(out_dir);
  const fs::path path = out_dir / (suite + ".csv");
  auto out = open_out(path);
  write_report_csv(rows, out);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.status != "ok";
  std::cout << path.string() << ": " << rows.size() << " rows, " << failed << " failed\n";
  return kOk;
}

int cmd_generate(const std::string& kind, std::size_t trucks, std::uint64_t seed, const fs::path& out) {
  if (kind == "illustrative-no-platoon-plan" || kind == "illustrative-platoon-plan") {
    const Instance inst = illustrative_instance();
    save_plan(inst, kind == "illustrative-platoon-plan" ? illustrative_platoon_plan(inst)
                                                        : illustrative_no_platoon_plan(inst),
              out);
    return kOk;
  }
  Instance inst;
  if (kind == "illustrative") {
    inst = illustrative_instance();
  } else if (kind == "small-test") {
    inst = small_test_instance();
  } else if (kind == "micro") {
    inst = micro_instance(seed);
  } else if (kind == "grid") {
    const Parameters p = default_parameters();
    inst = make_instance(generate_grid(4, 150.0, p), p, trucks, seed);
    relax_deadlines(inst);
  } else if (kind == "stand-in") {
    const Parameters p = default_parameters();
    inst = make_instance(generate_stand_in_network(p), p, trucks, seed);
    relax_deadlines(inst);
  } else {
    throw InputError(ErrorCode::invalid_parameter, "unknown kind: " + kind);
  }
  save_instance(inst, out);
  return kOk;
}

int cmd_export_lp(const fs::path& instance_path, ScenarioMode mode, const fs::path& out) {
  const Instance inst = apply_mode(load_instance(instance_path), mode);
  const MilpModel model = build(inst);
  export_lp(model, out);
  std::cout << out.string() << ": " << model.variables.size() << " variables, " << model.constraints.size()
            << " constraints\n";
  return kOk;
}

int cmd_evaluate(const fs::path& instance_path, const fs::path& plan_path, std::optional<ScenarioMode> mode) {
  Instance inst = load_instance(instance_path);
  if (mode) inst = apply_mode(inst, *mode);
  const Plan plan = load_plan(inst, plan_path);
  const auto violations = check_feasibility(inst, plan);
  for (const auto& v : violations) {
    std::cout << "violation " << v.kind;
    if (v.truck) std::cout << " truck " << inst.trucks.at(*v.truck).id;
    std::cout << ": " << v.detail << '\n';
  }
  try {
    print_cost(evaluate(inst, plan));
  } catch (const ScheduleError& e) {
    std::cout << "schedule error: " << e.what() << '\n';
  }
  return violations.empty() ? kOk : kFailed;
}

int cmd_exact(const fs::path& instance_path, ScenarioMode mode, const BruteForceGrid& grid,
              const std::optional<fs::path>& out) {
  const Instance inst = apply_mode(load_instance(instance_path), mode);
  const auto r = brute_force_exact(inst, grid);
  if (!r) {
    std::cout << "no feasible plan on the grid\n";
    return kFailed;
  }
  if (out) save_plan(inst, r->plan, *out);
  std::cout << "evaluated " << r->evaluated << '\n';
  print_cost(r->cost);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Electric truck platooning: routing, charging and platoon planning"};
  app.require_subcommand(1);

  std::string mode_name = "platoon-swap";
  auto add_mode = [&](CLI::App* sub) {
    return sub->add_option("--mode", mode_name, "Scenario mode")
        ->check(CLI::IsMember({"no-platoon", "platoon-no-swap", "platoon-swap"}))
        ->capture_default_str();
  };

  SearchFlags flags;
  fs::path instance_path, out_path = "out", plan_path;

  auto* solve = app.add_subcommand("solve", "Solve one instance");
  solve->add_option("--instance", instance_path, "Instance JSON")->required()->check(CLI::ExistingFile);
  add_mode(solve);
  flags.attach(solve);
  solve->add_option("--out", out_path, "Output directory")->capture_default_str();

  std::string suite_name;
  std::size_t workers = 1;
  auto* suite = app.add_subcommand("suite", "Run an experiment suite");
  suite->add_option("--suite", suite_name, "Suite name")->required()->check(CLI::IsMember(suite_names()));
  suite->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber)->capture_default_str();
  flags.attach(suite);
  suite->add_option("--out", out_path, "Output directory")->capture_default_str();

  std::string kind;
  std::size_t trucks = 10;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("generate", "Write a fixture or generated instance");
  gen->add_option("--kind", kind, "Instance kind")
      ->required()
      ->check(CLI::IsMember({"illustrative", "small-test", "micro", "grid", "stand-in",
                             "illustrative-no-platoon-plan", "illustrative-platoon-plan"}));
  gen->add_option("--trucks", trucks, "Deliveries for grid and stand-in")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
  gen->add_option("--out", out_path, "Output file")->required();

  auto* lp = app.add_subcommand("export-lp", "Write the MILP in LP format");
  lp->add_option("--instance", instance_path, "Instance JSON")->required()->check(CLI::ExistingFile);
  add_mode(lp);
  lp->add_option("--out", out_path, "Output file")->required();

  bool eval_mode_set = false;
  auto* eval = app.add_subcommand("evaluate", "Check and cost a plan");
  eval->add_option("--instance", instance_path, "Instance JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--plan", plan_path, "Plan JSON")->required()->check(CLI::ExistingFile);
  add_mode(eval)->each([&](const std::string&) { eval_mode_set = true; });

  BruteForceGrid grid;
  std::optional<fs::path> exact_out;
  auto* exact = app.add_subcommand("exact", "Exhaustive grid search on a tiny instance");
  exact->add_option("--instance", instance_path, "Instance JSON")->required()->check(CLI::ExistingFile);
  add_mode(exact);
  exact->add_option("--h-step", grid.h_step, "Leading-ratio grid step")->capture_default_str();
  exact->add_option("--charge-step", grid.charge_step, "Charge grid step as a fraction of Q")->capture_default_str();
  exact->add_option("--out", exact_out, "Plan output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    const ScenarioMode mode = kModes.at(mode_name);
    if (*solve) return cmd_solve(instance_path, mode, flags, out_path);
    if (*suite) return cmd_suite(suite_name, flags, workers, out_path);
    if (*gen) return cmd_generate(kind, trucks, gen_seed, out_path);
    if (*lp) return cmd_export_lp(instance_path, mode, out_path);
    if (*eval) return cmd_evaluate(instance_path, plan_path, eval_mode_set ? std::optional(mode) : std::nullopt);
    if (*exact) return cmd_exact(instance_path, mode, grid, exact_out);
  } catch (const InputError& e) {
    spdlog::error("{}", e.what());
    return e.code() == ErrorCode::unservable ? kUnservable : kInput;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailed;
  }
  return kOk;
}
