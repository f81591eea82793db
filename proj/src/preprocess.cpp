#include "platoon/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "platoon/errors.hpp"

namespace platoon {

namespace {

constexpr double kEps = 1e-9;

struct Scored {
  double score;
  double hours;
  std::vector<NodeIndex> stations;
};

bool scored_less(const Scored& a, const Scored& b) {
  if (a.score != b.score) return a.score < b.score;
  return a.stations < b.stations;
}

std::vector<NodeIndex> concat_route(const ShortestPaths& paths, NodeIndex origin, NodeIndex dest,
                                    const std::vector<NodeIndex>& stations) {
  std::vector<NodeIndex> route{origin};
  NodeIndex at = origin;
  auto extend = [&](NodeIndex to) {
    const auto leg = paths.nodes(at, to);
    route.insert(route.end(), leg.begin() + 1, leg.end());
    at = to;
  };
  for (NodeIndex s : stations) extend(s);
  extend(dest);
  return route;
}

bool is_simple(const std::vector<NodeIndex>& route) {
  std::vector<NodeIndex> sorted = route;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

// Enumerates station sequences keeping at most `cap` best (0 = all).
std::vector<Scored> enumerate_sequences(const Instance& inst, const ShortestPaths& paths, TruckIndex k,
                                        CandidateMode mode, std::size_t cap, std::size_t& total) {
  const Parameters& par = inst.params;
  const TruckDelivery& truck = inst.trucks[k];
  const double factor = mode == CandidateMode::solo ? 1.0 : 1.0 - par.beta;
  const double usable = par.usable_energy();
  const double dwell_rate = par.alpha3 / par.eta;
  auto cons = [&](NodeIndex a, NodeIndex b) { return par.sigma * paths.time(a, b) * factor; };

  std::vector<NodeIndex> stations;
  for (NodeIndex i = 0; i < inst.network.num_nodes(); ++i) {
    if (i != truck.origin && i != truck.destination && inst.can_charge(i) &&
        paths.time(truck.origin, i) < kInfinity && paths.time(i, truck.destination) < kInfinity) {
      stations.push_back(i);
    }
  }

  std::vector<Scored> kept;  // max-heap on scored_less when capped
  total = 0;
  auto keep = [&](Scored&& s) {
    ++total;
    if (cap == 0 || kept.size() < cap) {
      kept.push_back(std::move(s));
      if (cap != 0) std::push_heap(kept.begin(), kept.end(), scored_less);
    } else if (scored_less(s, kept.front())) {
      std::pop_heap(kept.begin(), kept.end(), scored_less);
      kept.back() = std::move(s);
      std::push_heap(kept.begin(), kept.end(), scored_less);
    }
  };

  std::vector<NodeIndex> seq;
  // energy: on arrival at `at`; hours/score accumulated so far.
  auto recurse = [&](auto&& self, NodeIndex at, double energy, double hours, double score, double charged) -> void {
    // Finish at the destination from here.
    const double last = cons(at, truck.destination);
    if (last <= usable + kEps) {
      double e = energy;
      double s = score;
      double c = charged;
      bool ok = true;
      if (!seq.empty()) {
        const double need = std::max(0.0, last - (e - par.floor_energy()));
        if (need <= kEps) ok = false;  // a stop that charges nothing is not a stop
        s += need * (inst.price(at) + dwell_rate);
        c += need;
      } else if (last > e - par.floor_energy() + kEps) {
        ok = false;
      }
      const double h = hours + paths.time(at, truck.destination);
      if (ok && h + c / par.eta <= truck.latest_arrival + kEps) {
        keep(Scored{s + par.alpha1 * paths.time(at, truck.destination), h, seq});
      }
    }
    if (seq.size() == 3) return;
    for (NodeIndex next : stations) {
      if (std::find(seq.begin(), seq.end(), next) != seq.end()) continue;
      const double leg = cons(at, next);
      if (leg > usable + kEps) continue;
      double e = energy;
      double s = score + par.alpha1 * paths.time(at, next);
      double c = charged;
      if (!seq.empty()) {
        const double need = std::max(0.0, leg - (e - par.floor_energy()));
        if (need <= kEps) continue;
        s += need * (inst.price(at) + dwell_rate);
        c += need;
        e += need;
      } else if (leg > e - par.floor_energy() + kEps) {
        continue;
      }
      const double h = hours + paths.time(at, next);
      if (h + c / par.eta > truck.latest_arrival + kEps) continue;
      seq.push_back(next);
      self(self, next, e - leg, h, s, c);
      seq.pop_back();
    }
  };
  recurse(recurse, truck.origin, par.full_energy(), 0.0, 0.0, 0.0);
  std::sort(kept.begin(), kept.end(), scored_less);
  return kept;
}

}  // namespace

CandidatePair candidate_plan(const Instance& instance, const ShortestPaths& paths, TruckIndex truck,
                             CandidateMode mode) {
  const TruckDelivery& t = instance.trucks.at(truck);
  std::vector<ChargingPlanCandidate> found;
  for (std::size_t cap : {std::size_t{64}, std::size_t{0}}) {
    std::size_t total = 0;
    const auto seqs = enumerate_sequences(instance, paths, truck, mode, cap, total);
    found.clear();
    for (const Scored& s : seqs) {
      auto route = concat_route(paths, t.origin, t.destination, s.stations);
      if (!is_simple(route)) continue;
      found.push_back(ChargingPlanCandidate{s.stations, std::move(route), s.hours, s.score});
      if (found.size() == 2) break;
    }
    if (found.size() == 2 || total <= seqs.size()) break;
  }
  if (found.empty()) {
    throw InputError(ErrorCode::unservable,
                     "truck '" + t.id + "' has no charging plan with at most 3 stops");
  }
  CandidatePair out{std::move(found[0]), std::nullopt};
  if (found.size() > 1) out.second_best = std::move(found[1]);
  return out;
}

CandidatePair candidate_plan(const Instance& instance, TruckIndex truck, CandidateMode mode) {
  return candidate_plan(instance, ShortestPaths(instance.network), truck, mode);
}

std::vector<TruckClass> classify_trucks(const Instance& instance, const ShortestPaths& paths) {
  std::vector<TruckClass> out;
  for (TruckIndex k = 0; k < instance.num_trucks(); ++k) {
    CandidatePair solo = candidate_plan(instance, paths, k, CandidateMode::solo);
    CandidatePair follower = candidate_plan(instance, paths, k, CandidateMode::follower);
    TruckClass c;
    c.truck = k;
    c.group = solo.best.stations == follower.best.stations ? TruckGroup::no_difference
                                                           : TruckGroup::difference;
    c.regret = solo.second_best ? solo.second_best->score - solo.best.score : 0.0;
    c.best = std::move(solo.best);
    c.second_best = std::move(solo.second_best);
    c.follower_best = std::move(follower.best);
    c.follower_second = std::move(follower.second_best);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<TruckClass> classify_trucks(const Instance& instance) {
  return classify_trucks(instance, ShortestPaths(instance.network));
}

Preprocessed preprocess(const Instance& instance) {
  Preprocessed pre;
  pre.paths = ShortestPaths(instance.network);
  pre.classes = classify_trucks(instance, pre.paths);
  const std::size_t K = instance.num_trucks();
  pre.routes.resize(K);
  pre.sp_cost.resize(K);
  pre.solo_cost.resize(K);
  for (TruckIndex k = 0; k < K; ++k) {
    const TruckClass& c = pre.classes[k];
    auto& routes = pre.routes[k];
    auto add = [&](const std::vector<NodeIndex>& r) {
      if (!r.empty() && std::find(routes.begin(), routes.end(), r) == routes.end()) routes.push_back(r);
    };
    add(c.best.route);
    if (c.second_best) add(c.second_best->route);
    add(c.follower_best.route);
    if (c.follower_second) add(c.follower_second->route);
    const TruckDelivery& t = instance.trucks[k];
    add(pre.paths.nodes(t.origin, t.destination));
    pre.sp_cost[k] = instance.params.alpha1 * pre.paths.time(t.origin, t.destination);
  }
  Inserter inserter(instance, pre);
  for (TruckIndex k = 0; k < K; ++k) {
    Solution alone(K);
    if (!inserter.insert_solo(alone, k)) {
      throw InputError(ErrorCode::unservable, "truck '" + instance.trucks[k].id + "' cannot run alone");
    }
    pre.solo_cost[k] = *inserter.component_cost(alone, {k});
  }
  return pre;
}

// ---------------------------------------------------------------------------

std::optional<double> Inserter::component_cost(const Solution& sol, const std::vector<TruckIndex>& trucks) const {
  const Assessment a = assess(inst_, sol.refs(trucks));
  if (!a.feasible()) return std::nullopt;
  return a.cost.total;
}

std::optional<Itinerary> Inserter::solo_itinerary(const Solution& sol, TruckIndex truck,
                                                  const std::vector<NodeIndex>& route, PlatoonId id) const {
  (void)sol;
  Itinerary it = make_itinerary(route, id);
  const std::vector<double> cons = consumption_profile(inst_, it, truck, GroupMap{});
  const double hours = it.travel_hours(inst_.network);
  for (ChargePolicy policy : {ChargePolicy::cheapest, ChargePolicy::minimal}) {
    if (!assign_charges(inst_, it, cons, policy)) return std::nullopt;
    double charged = 0.0;
    for (std::size_t p = 0; p + 1 < it.num_arcs(); ++p) charged += it.charge[p];
    if (hours + charged / inst_.params.eta <= inst_.trucks[truck].latest_arrival + 1e-6) return it;
  }
  return std::nullopt;
}

bool Inserter::insert_solo(Solution& sol, TruckIndex truck) const {
  for (const auto& route : pre_.routes.at(truck)) {
    auto it = solo_itinerary(sol, truck, route, sol.next_platoon_id());
    if (!it) continue;
    sol.fresh_platoon_id();
    sol.at(truck) = std::move(*it);
    return true;
  }
  return false;
}

bool Inserter::settle(Solution& sol, const std::vector<TruckIndex>& component) const {
  normalize_ratios(inst_, sol, component);
  for (ChargePolicy policy : {ChargePolicy::cheapest, ChargePolicy::minimal}) {
    const GroupMap groups = build_groups(sol.refs(component));
    bool ok = true;
    for (TruckIndex k : component) {
      Itinerary& it = *sol.at(k);
      ok = assign_charges(inst_, it, consumption_profile(inst_, it, k, groups), policy) && ok;
    }
    if (!ok) return false;
    if (assess(inst_, sol.refs(component)).feasible()) return true;
  }
  return false;
}

namespace {

struct Run {
  std::size_t k_start;  // arc position on the joining truck's route
  std::size_t j_start;  // arc position on the partner's itinerary
  std::size_t length;
};

std::vector<Run> shared_runs(const std::vector<NodeIndex>& route, const Itinerary& partner) {
  std::vector<Run> runs;
  std::map<std::pair<NodeIndex, NodeIndex>, std::size_t> partner_arcs;
  for (std::size_t q = 0; q < partner.num_arcs(); ++q) partner_arcs[{partner.nodes[q], partner.nodes[q + 1]}] = q;
  for (std::size_t p = 0; p + 1 < route.size();) {
    auto found = partner_arcs.find({route[p], route[p + 1]});
    if (found == partner_arcs.end()) {
      ++p;
      continue;
    }
    Run run{p, found->second, 0};
    while (p + 1 < route.size() && run.j_start + run.length < partner.num_arcs() &&
           route[p] == partner.nodes[run.j_start + run.length] &&
           route[p + 1] == partner.nodes[run.j_start + run.length + 1]) {
      ++run.length;
      ++p;
    }
    runs.push_back(run);
  }
  return runs;
}

enum class Variant { follow, lead, soc_rule, balanced, alternate_even, alternate_odd };

// Energy on arrival at each node of a route for an itinerary.
std::vector<double> arrival_energy(const Instance& inst, const Itinerary& it, const std::vector<double>& cons) {
  std::vector<double> e(it.nodes.size(), inst.params.full_energy());
  for (std::size_t p = 0; p < it.num_arcs(); ++p) {
    e[p + 1] = e[p] - cons[p] + (p > 0 ? it.charge[p - 1] : 0.0);
  }
  return e;
}

}  // namespace

Inserter::Inserter(const Instance& instance, const Preprocessed& pre) : inst_(instance), pre_(pre) {
  double sum = 0.0;
  std::size_t count = 0;
  for (NodeIndex i = 0; i < instance.network.num_nodes(); ++i) {
    if (instance.can_charge(i)) {
      sum += instance.price(i);
      ++count;
    }
  }
  unit_cost_ = (count ? sum / static_cast<double>(count) : 0.0) + instance.params.alpha3 / instance.params.eta;
}

double Inserter::estimate(double hours, double shared_hours) const {
  const Parameters& par = inst_.params;
  return par.alpha1 * hours - (par.alpha1 - par.alpha2) * shared_hours +
         unit_cost_ * par.sigma * (hours - par.beta * shared_hours);
}

namespace {

constexpr std::size_t kMeetingRoutes = 4;

std::vector<NodeIndex> join_legs(const ShortestPaths& paths, NodeIndex from, const std::vector<NodeIndex>& middle,
                                 NodeIndex to) {
  std::vector<NodeIndex> route = paths.nodes(from, middle.front());
  if (route.empty()) return {};
  route.insert(route.end(), middle.begin() + 1, middle.end());
  const auto tail = paths.nodes(middle.back(), to);
  if (tail.empty()) return {};
  route.insert(route.end(), tail.begin() + 1, tail.end());
  return route;
}

double route_hours(const RoadNetwork& net, const std::vector<NodeIndex>& route) {
  double h = 0.0;
  for (std::size_t p = 0; p + 1 < route.size(); ++p) h += net.arc(*net.find_arc(route[p], route[p + 1])).travel_time;
  return h;
}

}  // namespace

std::vector<Inserter::Route> Inserter::meeting_routes(TruckIndex truck, const Itinerary& partner) const {
  const TruckDelivery& t = inst_.trucks[truck];
  std::vector<std::pair<double, Route>> scored;
  for (std::size_t a = 0; a < partner.nodes.size(); ++a) {
    double shared = 0.0;
    for (std::size_t b = a + 1; b < partner.nodes.size(); ++b) {
      shared += inst_.network.arc(*inst_.network.find_arc(partner.nodes[b - 1], partner.nodes[b])).travel_time;
      const std::vector<NodeIndex> middle(partner.nodes.begin() + a, partner.nodes.begin() + b + 1);
      Route route = join_legs(pre_.paths, t.origin, middle, t.destination);
      if (route.empty() || !is_simple(route)) continue;
      const double hours = route_hours(inst_.network, route);
      if (hours > t.latest_arrival + kEps) continue;
      scored.emplace_back(estimate(hours, shared), std::move(route));
    }
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Route> out;
  for (auto& [est, route] : scored) {
    if (out.size() == kMeetingRoutes) break;
    out.push_back(std::move(route));
  }
  return out;
}

std::vector<std::pair<Inserter::Route, Inserter::Route>> Inserter::meeting_pairs(TruckIndex first,
                                                                                 TruckIndex second) const {
  const TruckDelivery& t1 = inst_.trucks[first];
  const TruckDelivery& t2 = inst_.trucks[second];
  const std::size_t n = inst_.network.num_nodes();
  std::vector<std::tuple<double, Route, Route>> scored;
  for (NodeIndex a = 0; a < n; ++a) {
    for (NodeIndex b = 0; b < n; ++b) {
      if (a == b || pre_.paths.time(a, b) == kInfinity) continue;
      const double shared = pre_.paths.time(a, b);
      const double h1 = pre_.paths.time(t1.origin, a) + shared + pre_.paths.time(b, t1.destination);
      const double h2 = pre_.paths.time(t2.origin, a) + shared + pre_.paths.time(b, t2.destination);
      if (h1 > t1.latest_arrival + kEps || h2 > t2.latest_arrival + kEps) continue;
      const auto middle = pre_.paths.nodes(a, b);
      Route r1 = join_legs(pre_.paths, t1.origin, middle, t1.destination);
      Route r2 = join_legs(pre_.paths, t2.origin, middle, t2.destination);
      if (r1.empty() || r2.empty() || !is_simple(r1) || !is_simple(r2)) continue;
      scored.emplace_back(estimate(h1, shared) + estimate(h2, 0.0), std::move(r1), std::move(r2));
    }
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& x, const auto& y) { return std::get<0>(x) < std::get<0>(y); });
  std::vector<std::pair<Route, Route>> out;
  for (auto& [est, r1, r2] : scored) {
    if (out.size() == kMeetingRoutes) break;
    if (std::find(out.begin(), out.end(), std::pair{r1, r2}) != out.end()) continue;
    out.emplace_back(std::move(r1), std::move(r2));
  }
  return out;
}

void Inserter::try_partner(const Solution& sol, TruckIndex truck, TruckIndex j, const std::vector<Route>& routes,
                           double base, const std::vector<TruckIndex>& after, std::optional<Option>& best) const {
  const Parameters& par = inst_.params;
  const Itinerary& partner = *sol.at(j);
  const GroupMap groups = build_groups(sol.refs(after));
  const std::vector<double> partner_energy =
      arrival_energy(inst_, partner, consumption_profile(inst_, partner, j, groups));

  for (const auto& route : routes) {
    const std::vector<Run> runs = shared_runs(route, partner);
    if (runs.empty()) continue;
    std::vector<std::vector<Run>> join_sets{runs};
    if (runs.size() > 1) {
      const Run longest = *std::max_element(runs.begin(), runs.end(), [](const Run& a, const Run& b) {
        return a.length < b.length;
      });
      join_sets.push_back({longest});
    }
    // Solo energy profile of the joiner on this route, for the lead rule.
    Itinerary solo = make_itinerary(route, 0);
    std::vector<double> solo_cons = consumption_profile(inst_, solo, truck, GroupMap{});
    if (!assign_charges(inst_, solo, solo_cons)) {
      for (double& c : solo_cons) c *= 1.0 - par.beta;
      assign_charges(inst_, solo, solo_cons);
    }
    const std::vector<double> own_energy = arrival_energy(inst_, solo, solo_cons);

    for (const auto& joins : join_sets) {
      std::vector<std::pair<std::size_t, std::size_t>> arcs;  // (joiner pos, partner pos)
      std::vector<bool> k_leads_run;
      for (const Run& r : joins) {
        k_leads_run.push_back(own_energy[r.k_start + r.length] > partner_energy[r.j_start + r.length] + kEps);
        for (std::size_t x = 0; x < r.length; ++x) {
          const std::size_t q = r.j_start + x;
          const GroupKey key{partner.nodes[q], partner.nodes[q + 1], partner.platoon[q]};
          if (static_cast<int>(groups.at(key).size()) < par.max_platoon_size) arcs.emplace_back(r.k_start + x, q);
        }
      }
      if (arcs.empty()) continue;
      std::vector<Variant> variants{Variant::follow, Variant::lead, Variant::soc_rule, Variant::alternate_even,
                                    Variant::alternate_odd};
      if (!par.binary_leading_ratio) variants.push_back(Variant::balanced);

      for (Variant v : variants) {
        Solution trial = sol;
        const PlatoonId own = trial.fresh_platoon_id();
        Itinerary it = make_itinerary(route, own);
        for (std::size_t a = 0; a < arcs.size(); ++a) {
          const auto [kp, jq] = arcs[a];
          const GroupKey key{partner.nodes[jq], partner.nodes[jq + 1], partner.platoon[jq]};
          it.platoon[kp] = key.platoon;
          const auto& members = groups.at(key);
          bool lead = false;
          switch (v) {
            case Variant::follow: lead = false; break;
            case Variant::lead: lead = true; break;
            case Variant::soc_rule: {
              std::size_t run = 0;
              while (run + 1 < joins.size() && kp >= joins[run + 1].k_start) ++run;
              lead = k_leads_run[run];
              break;
            }
            case Variant::alternate_even: lead = a % 2 == 0; break;
            case Variant::alternate_odd: lead = a % 2 == 1; break;
            case Variant::balanced: break;
          }
          if (v == Variant::balanced) {
            const double share = 1.0 / static_cast<double>(members.size() + 1);
            it.ratio[kp] = share;
            for (const Member& mb : members) trial.at(mb.truck)->ratio[mb.pos] = share;
          } else if (lead) {
            it.ratio[kp] = 1.0;
            for (const Member& mb : members) trial.at(mb.truck)->ratio[mb.pos] = 0.0;
          } else {
            it.ratio[kp] = 0.0;
          }
        }
        trial.at(truck) = std::move(it);
        if (!settle(trial, after)) continue;
        const auto cost = component_cost(trial, after);
        if (!cost) continue;
        const double delta = *cost - base;
        if (!best || delta < best->delta - kEps) best = Option{delta, std::move(trial)};
      }
    }
  }
}

void Inserter::consider_joins(const Solution& sol, TruckIndex truck, const std::vector<TruckIndex>& partners,
                              std::optional<Option>& best) const {
  if (inst_.params.max_platoon_size < 2) return;
  const GroupMap all_groups = sol.groups();
  const TruckDelivery& t = inst_.trucks[truck];
  for (TruckIndex j : partners) {
    if (j == truck || !sol.has(j)) continue;
    const Itinerary& partner = *sol.at(j);
    const std::vector<TruckIndex> comp = sol.component({j}, all_groups);
    const auto base = component_cost(sol, comp);
    if (!base) continue;
    std::vector<TruckIndex> after = comp;
    after.push_back(truck);
    std::sort(after.begin(), after.end());

    std::vector<Route> routes = pre_.routes[truck];
    auto add = [&](Route r) {
      if (!r.empty() && std::find(routes.begin(), routes.end(), r) == routes.end()) routes.push_back(std::move(r));
    };
    std::vector<double> weight(inst_.network.num_arcs());
    for (ArcIndex a = 0; a < weight.size(); ++a) weight[a] = inst_.network.arc(a).travel_time;
    for (std::size_t q = 0; q < partner.num_arcs(); ++q) {
      weight[*inst_.network.find_arc(partner.nodes[q], partner.nodes[q + 1])] *= 0.5;
    }
    if (auto path = cheapest_path(inst_.network, t.origin, t.destination, weight)) {
      add(path->nodes(inst_.network, t.origin));
    }
    for (Route& r : meeting_routes(truck, partner)) add(std::move(r));
    try_partner(sol, truck, j, routes, *base, after, best);
  }
}

std::optional<double> Inserter::insert_joining(Solution& sol, TruckIndex truck, PartnerScope scope) const {
  if (sol.has(truck)) return std::nullopt;
  const GroupMap groups = sol.groups();
  const TruckDelivery& t = inst_.trucks[truck];
  std::vector<TruckIndex> partners;
  for (TruckIndex j = 0; j < sol.num_trucks(); ++j) {
    if (j == truck || !sol.has(j)) continue;
    const Itinerary& it = *sol.at(j);
    bool platooned = false;
    bool has_room = false;
    for (std::size_t p = 0; p < it.num_arcs(); ++p) {
      const auto size = groups.at(GroupKey{it.nodes[p], it.nodes[p + 1], it.platoon[p]}).size();
      if (size >= 2) {
        platooned = true;
        if (static_cast<int>(size) < inst_.params.max_platoon_size) has_room = true;
      }
    }
    if (scope == PartnerScope::solo_only && platooned) continue;
    if (scope == PartnerScope::platooned_only && !has_room) continue;
    // Some arc of the partner must be reachable as a detour within the deadline.
    bool reachable = false;
    for (std::size_t p = 0; p < it.num_arcs() && !reachable; ++p) {
      const double h = pre_.paths.time(t.origin, it.nodes[p]) + pre_.paths.time(it.nodes[p], it.nodes[p + 1]) +
                       pre_.paths.time(it.nodes[p + 1], t.destination);
      reachable = h <= t.latest_arrival + kEps;
    }
    if (reachable) partners.push_back(j);
  }
  std::optional<Option> best;
  consider_joins(sol, truck, partners, best);
  if (!best || best->delta >= pre_.solo_cost[truck] - kEps) return std::nullopt;
  sol = std::move(best->result);
  return pre_.solo_cost[truck] - best->delta;
}

std::optional<double> Inserter::insert_pair(Solution& sol, TruckIndex first, TruckIndex second) const {
  if (sol.has(first) || sol.has(second) || first == second || inst_.params.max_platoon_size < 2) {
    return std::nullopt;
  }
  std::optional<Option> best;
  std::vector<std::pair<Route, Route>> combos;
  for (const Route& r : pre_.routes[first]) combos.emplace_back(r, Route{});
  for (auto& c : meeting_pairs(first, second)) combos.push_back(std::move(c));
  const std::vector<TruckIndex> after = first < second ? std::vector<TruckIndex>{first, second}
                                                       : std::vector<TruckIndex>{second, first};
  for (const auto& [r1, r2] : combos) {
    Solution trial = sol;
    Itinerary it = make_itinerary(r1, trial.fresh_platoon_id());
    std::vector<double> cons = consumption_profile(inst_, it, first, GroupMap{});
    if (!assign_charges(inst_, it, cons)) {
      // Only workable as a follower; the join below recharges it.
      for (double& c : cons) c *= 1.0 - inst_.params.beta;
      if (!assign_charges(inst_, it, cons)) continue;
    }
    trial.at(first) = std::move(it);
    std::vector<Route> routes;
    if (!r2.empty()) {
      routes.push_back(r2);
    } else {
      routes = pre_.routes[second];
      for (Route& r : meeting_routes(second, *trial.at(first))) {
        if (std::find(routes.begin(), routes.end(), r) == routes.end()) routes.push_back(std::move(r));
      }
    }
    try_partner(trial, second, first, routes, 0.0, after, best);
  }
  const double solo = pre_.solo_cost[first] + pre_.solo_cost[second];
  if (!best || best->delta >= solo - kEps) return std::nullopt;
  sol = std::move(best->result);
  return solo - best->delta;
}

std::vector<TruckIndex> Inserter::repair_after_removal(Solution& sol, const std::vector<TruckIndex>& seeds) const {
  std::vector<TruckIndex> dropped;
  std::vector<TruckIndex> pending;
  for (TruckIndex k : seeds) {
    if (sol.has(k)) pending.push_back(k);
  }
  while (!pending.empty()) {
    const std::vector<TruckIndex> comp = sol.component(pending, sol.groups());
    if (settle(sol, comp)) break;
    // Drop the trucks that cannot finish, or everything if none is singled out.
    const GroupMap groups = build_groups(sol.refs(comp));
    std::vector<TruckIndex> bad;
    for (TruckIndex k : comp) {
      Itinerary copy = *sol.at(k);
      if (!assign_charges(inst_, copy, consumption_profile(inst_, copy, k, groups), ChargePolicy::minimal)) {
        bad.push_back(k);
      }
    }
    if (bad.empty()) {
      for (const Violation& v : assess(inst_, sol.refs(comp)).violations) {
        if (v.truck) bad.push_back(*v.truck);
      }
    }
    if (bad.empty()) bad = comp;
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    for (TruckIndex k : bad) {
      sol.at(k).reset();
      dropped.push_back(k);
    }
    pending.clear();
    for (TruckIndex k : comp) {
      if (sol.has(k)) pending.push_back(k);
    }
  }
  return dropped;
}

// ---------------------------------------------------------------------------

Solution build_initial_solution(const Instance& instance, const Preprocessed& pre) {
  const std::size_t K = instance.num_trucks();
  std::vector<TruckIndex> order(K);
  for (TruckIndex k = 0; k < K; ++k) order[k] = k;
  auto slack = [&](TruckIndex k) { return instance.trucks[k].latest_arrival - pre.classes[k].best.hours; };
  std::stable_sort(order.begin(), order.end(), [&](TruckIndex a, TruckIndex b) { return slack(a) < slack(b); });

  Solution sol(K);
  Inserter inserter(instance, pre);
  for (TruckIndex k : order) {
    if (pre.classes[k].group == TruckGroup::no_difference) inserter.insert_solo(sol, k);
  }
  std::vector<TruckIndex> pending;
  for (TruckIndex k : order) {
    if (pre.classes[k].group != TruckGroup::difference) continue;
    if (!inserter.insert_joining(sol, k, PartnerScope::any)) pending.push_back(k);
  }
  for (TruckIndex k : pending) {
    if (!inserter.insert_joining(sol, k, PartnerScope::any)) inserter.insert_solo(sol, k);
  }
  return sol;
}

Plan build_initial_plan(const Instance& instance) {
  const Preprocessed pre = preprocess(instance);
  return to_plan(build_initial_solution(instance, pre));
}

}  // namespace platoon
