#pragma once

#include <cstddef>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "platoon/plan.hpp"

namespace platoon {

/// One truck's part of a plan in route order. `platoon`, `ratio`, `charge`
/// are per arc; charge[p] is the amount taken at nodes[p + 1].
struct Itinerary {
  std::vector<NodeIndex> nodes;
  std::vector<PlatoonId> platoon;
  std::vector<double> ratio;
  std::vector<double> charge;

  std::size_t num_arcs() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  double travel_hours(const RoadNetwork& network) const;
};

/// Build a solo itinerary on `nodes` with every arc in `platoon`, ratio 1
/// and zero charges.
Itinerary make_itinerary(std::vector<NodeIndex> nodes, PlatoonId platoon);

struct GroupKey {
  NodeIndex tail;
  NodeIndex head;
  PlatoonId platoon;
  bool operator==(const GroupKey&) const = default;
};

struct GroupKeyHash {
  std::size_t operator()(const GroupKey& k) const noexcept {
    std::size_t h = std::hash<std::size_t>{}(k.tail);
    h = h * 1000003u ^ std::hash<std::size_t>{}(k.head);
    h = h * 1000003u ^ std::hash<std::int64_t>{}(k.platoon);
    return h;
  }
};

struct Member {
  TruckIndex truck;
  std::size_t pos;  // arc position in the truck's itinerary
};

using GroupMap = std::unordered_map<GroupKey, std::vector<Member>, GroupKeyHash>;

/// A set of itineraries keyed by truck; the unit that schedules and costs
/// are computed on. Must be closed under platoon membership for results to
/// be meaningful.
using ItineraryRefs = std::vector<std::pair<TruckIndex, const Itinerary*>>;

GroupMap build_groups(const ItineraryRefs& refs);

/// Per-arc consumption of one itinerary given its platoon context.
std::vector<double> consumption_profile(const Instance& instance, const Itinerary& it,
                                        TruckIndex truck, const GroupMap& groups);

/// Greedy cheapest charging along a fixed route for fixed per-arc
/// consumption: at each station charge just enough to reach the next station
/// that is no more expensive (charging price plus dwell cost per unit), or
/// fill up when none is in reach; refill to soc_u at the destination.
/// Returns false (leaving `it` untouched) when some leg is out of range.
/// The minimal policy instead charges only what reaches the next station,
/// which gives the least en-route charging time.
enum class ChargePolicy { cheapest, minimal };
bool assign_charges(const Instance& instance, Itinerary& it, const std::vector<double>& consumption,
                    ChargePolicy policy = ChargePolicy::cheapest);

struct Assessment {
  CostBreakdown cost;
  std::vector<Violation> violations;
  std::optional<Schedule> schedule;  // absent when it could not be derived
  std::vector<double> truck_cost;    // per entry of the assessed refs, restructuring excluded
  bool feasible() const { return violations.empty(); }
};

/// Full check + costing of a closed set of itineraries.
Assessment assess(const Instance& instance, const ItineraryRefs& refs, bool with_schedule = false);

/// Working solution: optional itinerary per truck.
class Solution {
 public:
  Solution() = default;
  explicit Solution(std::size_t trucks) : trucks_(trucks) {}

  std::size_t num_trucks() const { return trucks_.size(); }
  const std::optional<Itinerary>& at(TruckIndex k) const { return trucks_.at(k); }
  std::optional<Itinerary>& at(TruckIndex k) { return trucks_.at(k); }
  bool has(TruckIndex k) const { return trucks_.at(k).has_value(); }

  PlatoonId fresh_platoon_id() { return next_id_++; }
  PlatoonId next_platoon_id() const { return next_id_; }
  void reserve_platoon_ids(PlatoonId next) { next_id_ = std::max(next_id_, next); }

  ItineraryRefs refs() const;
  ItineraryRefs refs(const std::vector<TruckIndex>& subset) const;
  GroupMap groups() const { return build_groups(refs()); }

  /// Trucks connected to `seeds` through shared platoon-arcs.
  std::vector<TruckIndex> component(const std::vector<TruckIndex>& seeds, const GroupMap& groups) const;

  bool operator==(const Solution&) const;

 private:
  std::vector<std::optional<Itinerary>> trucks_;
  PlatoonId next_id_ = 0;
};

bool operator==(const Itinerary& a, const Itinerary& b);

Solution to_solution(const Instance& instance, const Plan& plan, std::vector<Violation>* structural);
Plan to_plan(const Solution& solution);

/// Renormalise leading ratios of every multi-member group so they sum to 1;
/// singletons get ratio 1; binary mode gives the whole lead to the largest.
void normalize_ratios(const Instance& instance, Solution& solution);
/// Same, limited to the groups of `trucks` (which must be closed).
void normalize_ratios(const Instance& instance, Solution& solution, const std::vector<TruckIndex>& trucks);

/// Recompute greedy charges for the listed trucks under the current platoon
/// structure. False if any of them cannot complete its route.
bool recharge(const Instance& instance, Solution& solution, const std::vector<TruckIndex>& trucks,
              const GroupMap& groups);

}  // namespace platoon
