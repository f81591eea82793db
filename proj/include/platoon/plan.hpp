#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "platoon/instance.hpp"

namespace platoon {

using PlatoonId = std::int64_t;

/// One truck on one arc: the canonical solution record.
struct SegmentRecord {
  TruckIndex truck = 0;
  PlatoonId platoon = 0;
  double leading_ratio = 1.0;   // h in [0,1]
  NodeIndex tail = 0;
  NodeIndex head = 0;
  double charge_at_head = 0.0;  // energy units charged at `head`
};

/// Set of segment records; order carries no meaning.
struct Plan {
  std::vector<SegmentRecord> segments;
};

struct Stop {
  NodeIndex node = 0;
  double arrival = 0.0;            // s, hours
  double dwell = 0.0;              // w, hours
  double energy_on_arrival = 0.0;  // units
  double soc_on_arrival = 0.0;     // y
  double charge = 0.0;             // units charged here
};

struct TruckSchedule {
  TruckIndex truck = 0;
  std::vector<Stop> stops;  // origin .. destination

  double departure() const { return stops.empty() ? 0.0 : stops.front().arrival + stops.front().dwell; }
  double arrival() const { return stops.empty() ? 0.0 : stops.back().arrival; }
};

struct Schedule {
  std::vector<TruckSchedule> trucks;  // one per truck present in the plan, by truck index
};

struct CostBreakdown {
  double charging = 0.0;
  double leading_labor = 0.0;
  double following_labor = 0.0;
  double idle = 0.0;
  double restructuring = 0.0;
  double total = 0.0;

  CostBreakdown& operator+=(const CostBreakdown& other);
  void finalize() { total = charging + leading_labor + following_labor + idle + restructuring; }
};

struct Violation {
  std::string kind;  // e.g. "origin-charge", "platoon-size", "soc-lower"
  std::optional<TruckIndex> truck;
  std::string detail;
};

/// Arrival times, dwell and SOC for every truck. Trucks sharing a
/// platoon-arc leave its tail together; waiting is placed as late in the
/// route as the destination arrivals allow, so slack collects in the (free)
/// origin dwell. Throws ScheduleError when the walks are broken or the
/// synchronization requirements are cyclic.
Schedule derive_schedule(const Instance& instance, const Plan& plan);

/// Cost components of the objective. Throws ScheduleError like
/// derive_schedule.
CostBreakdown evaluate(const Instance& instance, const Plan& plan);

/// Empty iff the plan is feasible (tolerance 1e-6).
std::vector<Violation> check_feasibility(const Instance& instance, const Plan& plan);

/// Sum over platoon-arcs of (members with h > 0) - 1.
std::size_t restructuring_count(const Plan& plan);

/// Energy drawn on an arc of `hours` by a truck with leading ratio h in a
/// platoon of `platoon_size` trucks. Singletons always pay full rate.
double arc_consumption(const Parameters& params, double hours, double leading_ratio,
                       std::size_t platoon_size);

/// Solution file: segments, derived schedule and cost breakdown, with stable
/// key order. Charge amounts are written in range-km.
nlohmann::ordered_json plan_to_json(const Instance& instance, const Plan& plan);
Plan plan_from_json(const Instance& instance, const nlohmann::json& doc);
Plan load_plan(const Instance& instance, const std::filesystem::path& path);
void save_plan(const Instance& instance, const Plan& plan, const std::filesystem::path& path);

}  // namespace platoon
