#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "platoon/alns.hpp"

namespace platoon {

/// One solver run of a suite.
struct RunSpec {
  std::string suite;
  std::string instance_id;
  std::uint64_t seed = 0;
  ScenarioMode mode = ScenarioMode::platoon_swap;
  std::string param_name;  // empty for suites without a swept parameter
  double param_value = 0.0;
  Instance instance;       // before the mode is applied
};

struct ReportRow {
  std::string suite;
  std::string instance_id;
  std::uint64_t seed = 0;
  ScenarioMode mode = ScenarioMode::platoon_swap;
  std::string param_name;
  double param_value = 0.0;
  std::size_t trucks = 0;
  CostBreakdown cost;
  double wall_clock_s = 0.0;
  std::size_t iterations = 0;
  bool feasible = false;
  std::optional<double> platoon_benefit;      // no-platoon total minus this total
  std::optional<double> platoon_benefit_pct;  // benefit / no-platoon total * 100
  std::string status = "ok";
};

/// Solve one run under its mode. Never throws for solver or data problems;
/// they end up in `status`. `result` receives the search output on success.
ReportRow solve_run(const RunSpec& spec, const AlnsConfig& config, AlnsResult* result = nullptr);

std::vector<std::string> suite_names();

/// The (instance, mode, parameter) grid of a suite. Throws
/// InputError(invalid_parameter) for an unknown name.
std::vector<RunSpec> suite_runs(const std::string& suite, std::uint64_t seed);

/// Runs every spec on up to `workers` threads; rows come back in spec order.
std::vector<ReportRow> run_specs(const std::vector<RunSpec>& specs, const AlnsConfig& config, std::size_t workers,
                                 const std::function<void(const ReportRow&)>& on_row = {});

std::vector<ReportRow> run_suite(const std::string& suite, const AlnsConfig& config, std::uint64_t seed,
                                 std::size_t workers, const std::function<void(const ReportRow&)>& on_row = {});

/// Fills the benefit columns of platoon rows that have a successful
/// no-platoon row with the same suite, instance, seed and parameter.
void attach_platoon_benefit(std::vector<ReportRow>& rows);

/// Column order of the report CSV.
const std::vector<std::string>& report_columns();
void write_report_csv(const std::vector<ReportRow>& rows, std::ostream& out);

/// Loosens latest arrivals so every truck can stop to charge along its
/// shortest path: max(current, 1.5 * SP + stops * Q / eta + 1).
void relax_deadlines(Instance& instance);

}  // namespace platoon
