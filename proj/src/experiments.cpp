#include "platoon/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "platoon/errors.hpp"
#include "platoon/fixtures.hpp"

namespace platoon {

namespace {

std::string csv_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Instance generated(RoadNetwork network, const Parameters& params, std::size_t trucks, std::uint64_t seed) {
  Instance inst = make_instance(std::move(network), params, trucks, seed);
  relax_deadlines(inst);
  return inst;
}

constexpr ScenarioMode kAllModes[] = {ScenarioMode::no_platoon, ScenarioMode::platoon_no_swap,
                                      ScenarioMode::platoon_swap};

}  // namespace

void relax_deadlines(Instance& instance) {
  const Parameters& par = instance.params;
  const ShortestPaths sp(instance.network);
  for (auto& t : instance.trucks) {
    const double hours = sp.time(t.origin, t.destination);
    const double stops = std::ceil(hours * par.sigma / par.usable_energy());
    t.latest_arrival = std::max(t.latest_arrival, 1.5 * hours + stops * par.capacity / par.eta + 1.0);
  }
}

ReportRow solve_run(const RunSpec& spec, const AlnsConfig& config, AlnsResult* result) {
  ReportRow row;
  row.suite = spec.suite;
  row.instance_id = spec.instance_id;
  row.seed = spec.seed;
  row.mode = spec.mode;
  row.param_name = spec.param_name;
  row.param_value = spec.param_value;
  row.trucks = spec.instance.num_trucks();
  const auto start = std::chrono::steady_clock::now();
  try {
    const Instance inst = apply_mode(spec.instance, spec.mode);
    AlnsResult r = run(inst, config, spec.seed);
    row.cost = r.cost;
    row.iterations = r.iterations;
    row.feasible = check_feasibility(inst, r.best).empty();
    if (!row.feasible) row.status = "infeasible";
    if (result) *result = std::move(r);
  } catch (const InputError& e) {
    row.status = e.code() == ErrorCode::unservable ? "unservable" : std::string("error: ") + e.what();
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
  }
  row.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<std::string> suite_names() {
  return {"illustrative", "small3", "scaling", "sensitivity-beta", "sensitivity-battery", "sensitivity-alpha1"};
}

std::vector<RunSpec> suite_runs(const std::string& suite, std::uint64_t seed) {
  std::vector<RunSpec> out;
  auto push = [&](const std::string& id, ScenarioMode mode, const std::string& pname, double pvalue,
                  const Instance& inst) {
    out.push_back(RunSpec{suite, id, seed, mode, pname, pvalue, inst});
  };

  if (suite == "illustrative") {
    const Instance inst = illustrative_instance();
    for (ScenarioMode m : kAllModes) push("illustrative", m, "", 0.0, inst);
  } else if (suite == "small3") {
    const Instance inst = small_test_instance();
    for (ScenarioMode m : kAllModes) push("small-test", m, "", 0.0, inst);
  } else if (suite == "scaling") {
    const Parameters params = default_parameters();
    const RoadNetwork net = generate_stand_in_network(params);
    for (std::size_t k = 5; k <= 150; k += 5) {
      const Instance inst = generated(net, params, k, seed + k);
      const std::string id = "stand-in-" + std::to_string(k);
      push(id, ScenarioMode::no_platoon, "trucks", static_cast<double>(k), inst);
      push(id, ScenarioMode::platoon_swap, "trucks", static_cast<double>(k), inst);
    }
  } else if (suite == "sensitivity-beta") {
    for (std::size_t k : {10u, 15u, 20u}) {
      for (int step = 0; step <= 4; ++step) {
        const double beta = 0.05 + 0.025 * step;
        const Parameters params = default_parameters(beta);
        // Same deliveries for every beta.
        const Instance inst = generated(generate_grid(4, 150.0, params), params, k, seed + k);
        push("grid4-" + std::to_string(k), ScenarioMode::platoon_swap, "beta", beta, inst);
      }
    }
  } else if (suite == "sensitivity-battery") {
    for (double range : {200.0, 270.0, 340.0, 410.0, 480.0}) {
      Parameters params = default_parameters();
      params.capacity = range;
      Instance inst = generated(generate_grid(4, 150.0, params), params, 20, seed + 20);
      push("grid4-20", ScenarioMode::platoon_swap, "range_km", range, inst);
    }
  } else if (suite == "sensitivity-alpha1") {
    for (double a1 : {20.0, 25.0, 30.0, 35.0}) {
      Parameters params = default_parameters();
      params.alpha1 = a1;
      Instance inst = generated(generate_grid(4, 150.0, params), params, 20, seed + 20);
      push("grid4-20", ScenarioMode::platoon_swap, "alpha1", a1, inst);
    }
  } else {
    throw InputError(ErrorCode::invalid_parameter, "unknown suite: " + suite);
  }
  return out;
}

std::vector<ReportRow> run_specs(const std::vector<RunSpec>& specs, const AlnsConfig& config, std::size_t workers,
                                 const std::function<void(const ReportRow&)>& on_row) {
  std::vector<ReportRow> rows(specs.size());
  std::atomic<std::size_t> next{0};
  std::mutex report;
  auto work = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      rows[i] = solve_run(specs[i], config);
      if (on_row) {
        std::lock_guard<std::mutex> lock(report);
        on_row(rows[i]);
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, specs.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  attach_platoon_benefit(rows);
  return rows;
}

std::vector<ReportRow> run_suite(const std::string& suite, const AlnsConfig& config, std::uint64_t seed,
                                 std::size_t workers, const std::function<void(const ReportRow&)>& on_row) {
  return run_specs(suite_runs(suite, seed), config, workers, on_row);
}

void attach_platoon_benefit(std::vector<ReportRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::uint64_t, std::string, double>;
  std::map<Key, double> baseline;
  for (const ReportRow& r : rows) {
    if (r.mode == ScenarioMode::no_platoon && r.status == "ok") {
      baseline[Key{r.suite, r.instance_id, r.seed, r.param_name, r.param_value}] = r.cost.total;
    }
  }
  for (ReportRow& r : rows) {
    if (r.mode == ScenarioMode::no_platoon || r.status != "ok") continue;
    auto it = baseline.find(Key{r.suite, r.instance_id, r.seed, r.param_name, r.param_value});
    if (it == baseline.end()) continue;
    r.platoon_benefit = it->second - r.cost.total;
    if (it->second != 0.0) r.platoon_benefit_pct = *r.platoon_benefit / it->second * 100.0;
  }
}

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> columns = {
      "suite",    "instance_id",     "seed",    "mode",          "param_name",   "param_value",
      "trucks",   "charging",        "leading_labor", "following_labor", "idle", "restructuring",
      "total",    "wall_clock_s",    "iterations",    "feasible",  "platoon_benefit", "platoon_benefit_pct",
      "status"};
  return columns;
}

void write_report_csv(const std::vector<ReportRow>& rows, std::ostream& out) {
  const auto& cols = report_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const ReportRow& r : rows) {
    out << csv_field(r.suite) << ',' << csv_field(r.instance_id) << ',' << r.seed << ',' << to_string(r.mode) << ','
        << csv_field(r.param_name) << ',' << (r.param_name.empty() ? "" : csv_number(r.param_value)) << ','
        << r.trucks << ',' << csv_number(r.cost.charging) << ',' << csv_number(r.cost.leading_labor) << ','
        << csv_number(r.cost.following_labor) << ',' << csv_number(r.cost.idle) << ','
        << csv_number(r.cost.restructuring) << ',' << csv_number(r.cost.total) << ','
        << csv_number(r.wall_clock_s) << ',' << r.iterations << ',' << (r.feasible ? "true" : "false") << ','
        << (r.platoon_benefit ? csv_number(*r.platoon_benefit) : "") << ','
        << (r.platoon_benefit_pct ? csv_number(*r.platoon_benefit_pct) : "") << ',' << csv_field(r.status) << '\n';
  }
}

}  // namespace platoon
