#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "platoon/plan.hpp"

namespace platoon {

enum class VarKind { binary, continuous };

struct Variable {
  std::string name;
  VarKind kind = VarKind::continuous;
  double lower = 0.0;
  double upper = kInfinity;
  bool operator==(const Variable&) const = default;
};

enum class Sense { le, ge, eq };

struct Constraint {
  std::string name;
  std::vector<std::pair<std::size_t, double>> terms;  // (variable index, coefficient)
  Sense sense = Sense::le;
  double rhs = 0.0;
  bool operator==(const Constraint&) const = default;
};

/// Variables are named symbol_indices with node and truck indices, e.g.
/// x_3_5_0 (arc 3->5, truck 0) or f_3_5_0_1 (truck 0 leads truck 1).
struct MilpModel {
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::vector<std::pair<std::size_t, double>> objective;  // minimized

  std::size_t add_variable(std::string name, VarKind kind, double lower, double upper);
  std::optional<std::size_t> find(const std::string& name) const;
  std::size_t at(const std::string& name) const;

  double objective_value(const std::vector<double>& x) const;
  /// Names of violated rows, bounds and integrality requirements.
  std::vector<std::string> violations(const std::vector<double>& x, double tol = 1e-6) const;
  /// Copy with every coefficient, bound and rhs rounded to 9 significant
  /// digits, i.e. what an LP file round trip preserves.
  MilpModel rounded() const;

  bool operator==(const MilpModel& other) const;

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

struct BigMPolicy {
  double time = 0.0;     // hours, route timing rows
  double soc = 0.0;      // energy units
  double platoon = 0.0;  // hours, synchronized departures
  double ratio = 0.0;    // leading-ratio sums

  static BigMPolicy for_instance(const Instance& instance);
};

/// The full mixed-integer model with the bilinear ratio constraints in
/// linearised form. Leading ratios are binary when the instance's
/// parameters say so.
MilpModel build(const Instance& instance);

std::string to_lp_string(const MilpModel& model);
void export_lp(const MilpModel& model, const std::filesystem::path& path);
/// Reads the subset of LP syntax that export_lp writes. Throws
/// InputError(schema) on malformed input.
MilpModel parse_lp(const std::string& text);
MilpModel load_lp(const std::filesystem::path& path);

/// Values for every model variable describing a feasible plan. Unvisited
/// nodes get y = soc_u and zero time and charge.
std::vector<double> plan_to_assignment(const Instance& instance, const MilpModel& model, const Plan& plan);

struct BruteForceGrid {
  double h_step = 0.5;
  double charge_step = 0.25;  // fraction of Q
};

struct BruteForceResult {
  Plan plan;
  CostBreakdown cost;
  std::size_t evaluated = 0;
};

/// Exhaustive search over simple paths, platoon memberships on shared arcs,
/// leading ratios on the h grid and en-route charges on the charge grid
/// (destination charge tops up). Nullopt when nothing is feasible. Throws
/// InputError(too_large) above 3 trucks or 16 nodes.
std::optional<BruteForceResult> brute_force_exact(const Instance& instance, const BruteForceGrid& grid = {});

}  // namespace platoon
