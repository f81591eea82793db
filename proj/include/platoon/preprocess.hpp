#pragma once

#include <optional>
#include <vector>

#include "platoon/solution.hpp"

namespace platoon {

enum class CandidateMode { solo, follower };

/// Up to three en-route charging stops joined by shortest paths.
struct ChargingPlanCandidate {
  std::vector<NodeIndex> stations;
  std::vector<NodeIndex> route;  // origin .. destination
  double hours = 0.0;
  double score = 0.0;
};

struct CandidatePair {
  ChargingPlanCandidate best;
  std::optional<ChargingPlanCandidate> second_best;
};

/// Cheapest station sequences for one truck. The score is
/// alpha1 * (route hours) + sum over stops of charge * (price + alpha3/eta),
/// with each stop charging exactly enough for the next leg and the
/// destination recharge left out. Sequences whose route revisits a node, or
/// whose leg needs more than the usable range, or that cannot meet the
/// deadline, are skipped. Throws InputError(unservable) when nothing fits.
CandidatePair candidate_plan(const Instance& instance, const ShortestPaths& paths, TruckIndex truck,
                             CandidateMode mode);
CandidatePair candidate_plan(const Instance& instance, TruckIndex truck, CandidateMode mode);

enum class TruckGroup { no_difference, difference };

struct TruckClass {
  TruckIndex truck = 0;
  TruckGroup group = TruckGroup::no_difference;
  ChargingPlanCandidate best;
  std::optional<ChargingPlanCandidate> second_best;
  ChargingPlanCandidate follower_best;
  std::optional<ChargingPlanCandidate> follower_second;
  double regret = 0.0;  // second_best.score - best.score, 0 without a second
};

std::vector<TruckClass> classify_trucks(const Instance& instance, const ShortestPaths& paths);
std::vector<TruckClass> classify_trucks(const Instance& instance);

/// Everything the construction and search phases reuse per instance.
struct Preprocessed {
  ShortestPaths paths;
  std::vector<TruckClass> classes;
  /// Distinct candidate routes per truck, best solo first.
  std::vector<std::vector<std::vector<NodeIndex>>> routes;
  /// alpha1 * shortest travel time.
  std::vector<double> sp_cost;
  /// Cost of the truck alone on its best route.
  std::vector<double> solo_cost;
};

Preprocessed preprocess(const Instance& instance);

/// Which incumbent trucks a join may attach to.
enum class PartnerScope { any, solo_only, platooned_only };

/// Insertion moves shared by the initial construction and the search.
class Inserter {
 public:
  Inserter(const Instance& instance, const Preprocessed& pre);

  /// Place `truck` alone on its first workable candidate route. False when
  /// no route fits (cannot happen for a truck that passed preprocessing).
  bool insert_solo(Solution& sol, TruckIndex truck) const;

  /// Best join of `truck` onto incumbent platoons within `scope`. Applied
  /// only when it beats the solo insertion; returns the saving over solo.
  std::optional<double> insert_joining(Solution& sol, TruckIndex truck, PartnerScope scope) const;

  /// Cheapest way to insert two absent trucks together on a shared
  /// subpath. Applied only when cheaper than both alone; returns the saving.
  std::optional<double> insert_pair(Solution& sol, TruckIndex first, TruckIndex second) const;

  /// Recharge the trucks connected to `seeds` and drop any that can no
  /// longer finish; returns the dropped trucks.
  std::vector<TruckIndex> repair_after_removal(Solution& sol, const std::vector<TruckIndex>& seeds) const;

  /// Renormalise ratios and recharge a closed set of trucks; true when the
  /// set is then feasible.
  bool settle(Solution& sol, const std::vector<TruckIndex>& component) const;

  /// Cost of a closed set of trucks, or nullopt when infeasible.
  std::optional<double> component_cost(const Solution& sol, const std::vector<TruckIndex>& trucks) const;

 private:
  struct Option {
    double delta = 0.0;
    Solution result;
  };

  using Route = std::vector<NodeIndex>;

  void consider_joins(const Solution& sol, TruckIndex truck, const std::vector<TruckIndex>& partners,
                      std::optional<Option>& best) const;
  /// Joins of `truck` (absent from `sol`) onto `partner` along each route;
  /// delta is measured against `base`, the cost of `after` without truck.
  void try_partner(const Solution& sol, TruckIndex truck, TruckIndex partner, const std::vector<Route>& routes,
                   double base, const std::vector<TruckIndex>& after, std::optional<Option>& best) const;
  /// Routes o -> a, partner's own a..b, b -> d for the best-looking (a, b).
  std::vector<Route> meeting_routes(TruckIndex truck, const Itinerary& partner) const;
  /// Route pairs sharing the shortest a -> b path, best-looking first.
  std::vector<std::pair<Route, Route>> meeting_pairs(TruckIndex first, TruckIndex second) const;
  double estimate(double hours, double shared_hours) const;
  std::optional<Itinerary> solo_itinerary(const Solution& sol, TruckIndex truck,
                                          const std::vector<NodeIndex>& route, PlatoonId id) const;

  const Instance& inst_;
  const Preprocessed& pre_;
  double unit_cost_ = 0.0;  // mean charging price plus dwell cost per unit
};

/// Warm start: trucks ordered by slack (deadline minus candidate route
/// time); no-difference trucks seed solo, difference trucks join a seed's
/// platoon when that is feasible and saves cost, and the rest are inserted
/// once into existing platoons or left solo.
Solution build_initial_solution(const Instance& instance, const Preprocessed& pre);
Plan build_initial_plan(const Instance& instance);

}  // namespace platoon
