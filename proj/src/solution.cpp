#include "platoon/solution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "platoon/errors.hpp"

namespace platoon {

namespace {

constexpr double kTol = 1e-6;
constexpr double kPositive = 1e-9;  // leading ratio counted as "leads"

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

double Itinerary::travel_hours(const RoadNetwork& network) const {
  double total = 0.0;
  for (std::size_t p = 0; p < num_arcs(); ++p) {
    total += network.arc(*network.find_arc(nodes[p], nodes[p + 1])).travel_time;
  }
  return total;
}

Itinerary make_itinerary(std::vector<NodeIndex> nodes, PlatoonId platoon) {
  Itinerary it;
  const std::size_t m = nodes.empty() ? 0 : nodes.size() - 1;
  it.nodes = std::move(nodes);
  it.platoon.assign(m, platoon);
  it.ratio.assign(m, 1.0);
  it.charge.assign(m, 0.0);
  return it;
}

bool operator==(const Itinerary& a, const Itinerary& b) {
  return a.nodes == b.nodes && a.platoon == b.platoon && a.ratio == b.ratio && a.charge == b.charge;
}

double arc_consumption(const Parameters& params, double hours, double leading_ratio,
                       std::size_t platoon_size) {
  const double h = platoon_size >= 2 ? leading_ratio : 1.0;
  return params.sigma * hours * (h + (1.0 - params.beta) * (1.0 - h));
}

GroupMap build_groups(const ItineraryRefs& refs) {
  GroupMap groups;
  for (const auto& [truck, it] : refs) {
    for (std::size_t p = 0; p < it->num_arcs(); ++p) {
      groups[GroupKey{it->nodes[p], it->nodes[p + 1], it->platoon[p]}].push_back(Member{truck, p});
    }
  }
  return groups;
}

std::vector<double> consumption_profile(const Instance& instance, const Itinerary& it,
                                        TruckIndex truck, const GroupMap& groups) {
  (void)truck;
  std::vector<double> cons(it.num_arcs());
  for (std::size_t p = 0; p < it.num_arcs(); ++p) {
    const auto arc = instance.network.find_arc(it.nodes[p], it.nodes[p + 1]);
    const double hours = arc ? instance.network.arc(*arc).travel_time : 0.0;
    auto g = groups.find(GroupKey{it.nodes[p], it.nodes[p + 1], it.platoon[p]});
    const std::size_t size = g == groups.end() ? 1 : g->second.size();
    cons[p] = arc_consumption(instance.params, hours, it.ratio[p], size);
  }
  return cons;
}

bool assign_charges(const Instance& instance, Itinerary& it, const std::vector<double>& consumption,
                    ChargePolicy policy) {
  const Parameters& par = instance.params;
  const std::size_t m = it.num_arcs();
  if (m == 0) return false;
  const NodeIndex origin = it.nodes.front();
  const double dwell_cost = par.alpha3 / par.eta;
  auto station = [&](std::size_t p) {
    return p > 0 && p < m && instance.can_charge(it.nodes[p]) && it.nodes[p] != origin;
  };
  auto unit_cost = [&](std::size_t p) {
    return p == m ? instance.price(it.nodes[p]) : instance.price(it.nodes[p]) + dwell_cost;
  };

  std::vector<double> charge(m, 0.0);
  double energy = par.full_energy();
  for (std::size_t p = 1; p < m; ++p) {
    energy -= consumption[p - 1];
    if (energy < par.floor_energy() - kTol) return false;
    if (!station(p)) continue;
    // Nearest no-more-expensive charging opportunity within a full battery.
    double need = 0.0;
    std::optional<double> need_to_cheaper;
    for (std::size_t q = p + 1; q <= m; ++q) {
      need += consumption[q - 1];
      if (need > par.usable_energy() + kTol) break;
      if ((q == m || station(q)) &&
          (policy == ChargePolicy::minimal || unit_cost(q) <= unit_cost(p) + 1e-12)) {
        need_to_cheaper = need;
        break;
      }
    }
    double c;
    if (need_to_cheaper) {
      c = std::max(0.0, *need_to_cheaper - (energy - par.floor_energy()));
    } else {
      c = std::max(0.0, par.full_energy() - energy);
    }
    charge[p - 1] = c;
    energy += c;
  }
  energy -= consumption[m - 1];
  if (energy < par.floor_energy() - kTol) return false;
  charge[m - 1] = std::max(0.0, par.full_energy() - energy);
  it.charge = std::move(charge);
  return true;
}

namespace {

struct Timing {
  std::vector<double> arrival;  // per node
  std::vector<double> dwell;    // per node
};

// Earliest-start pass then as-late-as-possible pass keeping destination
// arrivals. Returns false on cyclic synchronization.
bool compute_timing(const Instance& instance, const ItineraryRefs& refs, const GroupMap& groups,
                    std::vector<Timing>& out) {
  const std::size_t n = refs.size();
  std::vector<std::vector<double>> travel(n), charge_time(n);
  std::vector<std::vector<int>> gid(n);
  std::unordered_map<GroupKey, int, GroupKeyHash> ids;
  int num_groups = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const Itinerary& it = *refs[r].second;
    const std::size_t m = it.num_arcs();
    travel[r].resize(m);
    gid[r].assign(m, -1);
    charge_time[r].assign(m + 1, 0.0);
    for (std::size_t p = 0; p < m; ++p) {
      travel[r][p] = instance.network.arc(*instance.network.find_arc(it.nodes[p], it.nodes[p + 1])).travel_time;
      charge_time[r][p + 1] = it.charge[p] / instance.params.eta;
      const GroupKey key{it.nodes[p], it.nodes[p + 1], it.platoon[p]};
      auto g = groups.find(key);
      if (g != groups.end() && g->second.size() >= 2) {
        auto [pos, inserted] = ids.emplace(key, num_groups);
        if (inserted) ++num_groups;
        gid[r][p] = pos->second;
      }
    }
  }

  std::vector<std::vector<double>> dep(n), arr(n);
  std::vector<double> early(num_groups, -kInfinity);
  bool stable = false;
  for (int round = 0; round <= num_groups + 1 && !stable; ++round) {
    stable = true;
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t m = travel[r].size();
      dep[r].assign(m, 0.0);
      arr[r].assign(m + 1, 0.0);
      for (std::size_t p = 0; p < m; ++p) {
        double d = arr[r][p] + charge_time[r][p];
        const int g = gid[r][p];
        if (g >= 0) {
          if (d > early[g]) {
            early[g] = d;
            stable = false;
          }
          d = early[g];
        }
        dep[r][p] = d;
        arr[r][p + 1] = d + travel[r][p];
      }
    }
  }
  if (!stable) return false;

  std::vector<double> late(num_groups, kInfinity);
  std::vector<std::vector<double>> late_dep(n);
  stable = false;
  for (int round = 0; round <= num_groups + 1 && !stable; ++round) {
    stable = true;
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t m = travel[r].size();
      late_dep[r].assign(m, 0.0);
      double latest_arrival = arr[r][m];
      for (std::size_t p = m; p-- > 0;) {
        double d = latest_arrival - travel[r][p];
        const int g = gid[r][p];
        if (g >= 0) {
          if (d < late[g]) {
            late[g] = d;
            stable = false;
          }
          d = late[g];
        }
        late_dep[r][p] = d;
        latest_arrival = d - charge_time[r][p];
      }
    }
  }
  if (stable) {
    // Never earlier than the earliest schedule (guards rounding).
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t p = 0; p < dep[r].size(); ++p) dep[r][p] = std::max(dep[r][p], late_dep[r][p]);
    }
  }

  out.assign(n, Timing{});
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t m = travel[r].size();
    Timing& t = out[r];
    t.arrival.assign(m + 1, 0.0);
    t.dwell.assign(m + 1, 0.0);
    t.dwell[0] = m > 0 ? dep[r][0] : 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      t.arrival[p + 1] = dep[r][p] + travel[r][p];
      if (p + 1 < m) t.dwell[p + 1] = dep[r][p + 1] - t.arrival[p + 1];
    }
    t.dwell[m] = charge_time[r][m];
  }
  return true;
}

}  // namespace

Assessment assess(const Instance& instance, const ItineraryRefs& refs, bool with_schedule) {
  Assessment result;
  const Parameters& par = instance.params;
  const RoadNetwork& net = instance.network;
  auto violate = [&](const char* kind, std::optional<TruckIndex> truck, std::string detail) {
    result.violations.push_back(Violation{kind, truck, std::move(detail)});
  };

  bool structure_ok = true;
  for (const auto& [k, it] : refs) {
    const TruckDelivery& truck = instance.trucks.at(k);
    const std::size_t m = it->num_arcs();
    if (m == 0 || it->platoon.size() != m || it->ratio.size() != m || it->charge.size() != m) {
      violate("route-contiguity", k, "empty or inconsistent itinerary");
      structure_ok = false;
      continue;
    }
    if (it->nodes.front() != truck.origin || it->nodes.back() != truck.destination) {
      violate("route-contiguity", k, "walk does not join origin to destination");
      structure_ok = false;
    }
    std::set<NodeIndex> seen;
    for (std::size_t p = 0; p <= m; ++p) {
      if (!seen.insert(it->nodes[p]).second) {
        violate("route-repeat", k, "node " + net.node(it->nodes[p]).id + " visited twice");
      }
    }
    for (std::size_t p = 0; p < m; ++p) {
      if (!net.find_arc(it->nodes[p], it->nodes[p + 1])) {
        violate("route-contiguity", k, "no arc " + net.node(it->nodes[p]).id + "->" +
                                           net.node(it->nodes[p + 1]).id);
        structure_ok = false;
      }
      const double h = it->ratio[p];
      if (!(h >= -kTol && h <= 1.0 + kTol)) violate("ratio-range", k, fmt(h));
      const double c = it->charge[p];
      const NodeIndex head = it->nodes[p + 1];
      if (c < -kTol) violate("negative-charge", k, fmt(c));
      if (c > kTol && head == truck.origin) {
        violate("origin-charge", k, "charging at origin " + net.node(head).id);
      } else if (c > kTol && !instance.can_charge(head)) {
        violate("charge-at-non-station", k, net.node(head).id);
      }
    }
  }
  if (!structure_ok) return result;

  const GroupMap groups = build_groups(refs);

  // Platoon-level checks (sorted for deterministic reporting).
  std::map<std::tuple<NodeIndex, NodeIndex, PlatoonId>, const std::vector<Member>*> ordered;
  for (const auto& [key, members] : groups) ordered[{key.tail, key.head, key.platoon}] = &members;
  std::unordered_map<TruckIndex, const Itinerary*> by_truck;
  for (const auto& [k, it] : refs) by_truck[k] = it;
  for (const auto& [key, members] : ordered) {
    const std::string where = net.node(std::get<0>(key)).id + "->" + net.node(std::get<1>(key)).id +
                              " platoon " + std::to_string(std::get<2>(key));
    if (static_cast<int>(members->size()) > par.max_platoon_size) {
      violate("platoon-size", std::nullopt, where + " has " + std::to_string(members->size()));
    }
    if (members->size() >= 2) {
      double sum = 0.0;
      for (const Member& mb : *members) {
        const double h = by_truck[mb.truck]->ratio[mb.pos];
        sum += h;
        if (par.binary_leading_ratio && std::min(std::abs(h), std::abs(1.0 - h)) > kTol) {
          violate("ratio-binary", mb.truck, where + " h=" + fmt(h));
        }
      }
      if (std::abs(sum - 1.0) > kTol) violate("ratio-sum", std::nullopt, where + " sum=" + fmt(sum));
    }
  }

  // Energy.
  for (const auto& [k, it] : refs) {
    const std::vector<double> cons = consumption_profile(instance, *it, k, groups);
    double energy = par.full_energy();
    const std::size_t m = it->num_arcs();
    for (std::size_t p = 0; p < m; ++p) {
      energy -= cons[p];
      const NodeIndex node = it->nodes[p + 1];
      if (energy < par.floor_energy() - kTol) {
        violate("soc-lower", k, "at " + net.node(node).id + " energy " + fmt(energy));
      }
      if (energy + it->charge[p] > par.full_energy() + kTol) {
        violate("soc-upper", k, "at " + net.node(node).id);
      }
      energy += it->charge[p];
    }
    if (std::abs(energy - par.full_energy()) > kTol) {
      violate("dest-recharge", k, "final energy " + fmt(energy) + " != " + fmt(par.full_energy()));
    }
  }

  std::vector<Timing> timing;
  if (!compute_timing(instance, refs, groups, timing)) {
    violate("sync-cycle", std::nullopt, "platoon departures cannot be synchronized");
    return result;
  }

  // Leader designation: largest ratio, ties to lowest truck index.
  auto is_designated_leader = [&](TruckIndex k, std::size_t pos, const Itinerary& it) {
    const auto& members = groups.at(GroupKey{it.nodes[pos], it.nodes[pos + 1], it.platoon[pos]});
    if (members.size() < 2) return true;
    const Member* best = nullptr;
    for (const Member& mb : members) {
      const double h = by_truck[mb.truck]->ratio[mb.pos];
      if (!best) {
        best = &mb;
        continue;
      }
      const double hb = by_truck[best->truck]->ratio[best->pos];
      if (h > hb + 1e-12 || (std::abs(h - hb) <= 1e-12 && mb.truck < best->truck)) best = &mb;
    }
    return best->truck == k;
  };

  CostBreakdown& cost = result.cost;
  if (with_schedule) result.schedule.emplace();
  for (std::size_t r = 0; r < refs.size(); ++r) {
    const auto [k, itp] = refs[r];
    const Itinerary& it = *itp;
    const TruckDelivery& truck = instance.trucks.at(k);
    const Timing& t = timing[r];
    const std::size_t m = it.num_arcs();
    const double before = cost.charging + cost.leading_labor + cost.following_labor + cost.idle;
    for (std::size_t p = 0; p < m; ++p) {
      const double hours = net.arc(*net.find_arc(it.nodes[p], it.nodes[p + 1])).travel_time;
      if (is_designated_leader(k, p, it)) {
        cost.leading_labor += par.alpha1 * hours;
      } else {
        cost.following_labor += par.alpha2 * hours;
      }
      cost.charging += instance.price(it.nodes[p + 1]) * it.charge[p];
      if (p + 1 < m) cost.idle += par.alpha3 * t.dwell[p + 1];
    }
    result.truck_cost.push_back(cost.charging + cost.leading_labor + cost.following_labor + cost.idle - before);
    for (std::size_t p = 1; p <= m; ++p) {
      const double need = it.charge[p - 1] / par.eta;
      if (t.dwell[p] < need - kTol) violate("dwell-charge", k, net.node(it.nodes[p]).id);
    }
    if (t.arrival[m] > truck.latest_arrival + kTol) {
      violate("latest-arrival", k, "arrives " + fmt(t.arrival[m]) + " > " + fmt(truck.latest_arrival));
    }
    if (with_schedule) {
      TruckSchedule ts;
      ts.truck = k;
      const std::vector<double> cons = consumption_profile(instance, it, k, groups);
      double energy = par.full_energy();
      for (std::size_t p = 0; p <= m; ++p) {
        if (p > 0) energy -= cons[p - 1];
        Stop s;
        s.node = it.nodes[p];
        s.arrival = t.arrival[p];
        s.dwell = t.dwell[p];
        s.energy_on_arrival = energy;
        s.soc_on_arrival = energy / par.capacity;
        s.charge = p > 0 ? it.charge[p - 1] : 0.0;
        energy += s.charge;
        ts.stops.push_back(s);
      }
      result.schedule->trucks.push_back(std::move(ts));
    }
  }
  for (const auto& [key, members] : ordered) {
    if (members->size() < 2) continue;
    std::size_t leaders = 0;
    for (const Member& mb : *members) {
      if (by_truck[mb.truck]->ratio[mb.pos] > kPositive) ++leaders;
    }
    if (leaders > 1) cost.restructuring += par.alpha4 * static_cast<double>(leaders - 1);
  }
  cost.finalize();
  return result;
}

ItineraryRefs Solution::refs() const {
  ItineraryRefs out;
  for (TruckIndex k = 0; k < trucks_.size(); ++k) {
    if (trucks_[k]) out.emplace_back(k, &*trucks_[k]);
  }
  return out;
}

ItineraryRefs Solution::refs(const std::vector<TruckIndex>& subset) const {
  std::vector<TruckIndex> sorted = subset;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  ItineraryRefs out;
  for (TruckIndex k : sorted) {
    if (trucks_.at(k)) out.emplace_back(k, &*trucks_[k]);
  }
  return out;
}

std::vector<TruckIndex> Solution::component(const std::vector<TruckIndex>& seeds,
                                            const GroupMap& groups) const {
  std::vector<bool> seen(trucks_.size(), false);
  std::vector<TruckIndex> stack, out;
  for (TruckIndex k : seeds) {
    if (k < trucks_.size() && trucks_[k] && !seen[k]) {
      seen[k] = true;
      stack.push_back(k);
    }
  }
  while (!stack.empty()) {
    const TruckIndex k = stack.back();
    stack.pop_back();
    out.push_back(k);
    const Itinerary& it = *trucks_[k];
    for (std::size_t p = 0; p < it.num_arcs(); ++p) {
      auto g = groups.find(GroupKey{it.nodes[p], it.nodes[p + 1], it.platoon[p]});
      if (g == groups.end()) continue;
      for (const Member& mb : g->second) {
        if (!seen[mb.truck] && trucks_[mb.truck]) {
          seen[mb.truck] = true;
          stack.push_back(mb.truck);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Solution::operator==(const Solution& other) const {
  return trucks_ == other.trucks_ && next_id_ == other.next_id_;
}

Solution to_solution(const Instance& instance, const Plan& plan, std::vector<Violation>* structural) {
  const std::size_t K = instance.num_trucks();
  Solution sol(K);
  auto violate = [&](const char* kind, std::optional<TruckIndex> truck, std::string detail) {
    if (structural) structural->push_back(Violation{kind, truck, std::move(detail)});
  };
  std::vector<std::vector<const SegmentRecord*>> by_truck(K);
  PlatoonId max_id = -1;
  for (const SegmentRecord& s : plan.segments) {
    if (s.truck >= K) {
      violate("unknown-truck", std::nullopt, std::to_string(s.truck));
      continue;
    }
    if (s.tail >= instance.network.num_nodes() || s.head >= instance.network.num_nodes()) {
      violate("unknown-node", s.truck, "segment endpoint out of range");
      continue;
    }
    // A record that charges at the origin breaks the walk anyway; name the
    // charge explicitly so it is not reported as a contiguity problem only.
    if (s.head == instance.trucks[s.truck].origin && s.charge_at_head > kTol) {
      violate("origin-charge", s.truck, "charging at origin " + instance.network.node(s.head).id);
    }
    by_truck[s.truck].push_back(&s);
    max_id = std::max(max_id, s.platoon);
  }
  for (TruckIndex k = 0; k < K; ++k) {
    const TruckDelivery& truck = instance.trucks[k];
    auto& segs = by_truck[k];
    if (segs.empty()) {
      violate("missing-truck", k, "no segments for truck " + truck.id);
      continue;
    }
    std::map<NodeIndex, const SegmentRecord*> next;
    bool ok = true;
    for (const SegmentRecord* s : segs) {
      if (!next.emplace(s->tail, s).second) {
        violate("route-contiguity", k, "two segments leave " + instance.network.node(s->tail).id);
        ok = false;
      }
    }
    if (!ok) continue;
    Itinerary it;
    it.nodes.push_back(truck.origin);
    NodeIndex at = truck.origin;
    while (true) {
      auto found = next.find(at);
      if (found == next.end()) break;
      const SegmentRecord* s = found->second;
      next.erase(found);
      it.nodes.push_back(s->head);
      it.platoon.push_back(s->platoon);
      it.ratio.push_back(s->leading_ratio);
      it.charge.push_back(s->charge_at_head);
      at = s->head;
    }
    if (!next.empty()) {
      violate("route-contiguity", k, "segments not on the walk from the origin");
      continue;
    }
    if (at != truck.destination) {
      violate("route-contiguity", k, "walk ends at " + instance.network.node(at).id);
      continue;
    }
    sol.at(k) = std::move(it);
  }
  sol.reserve_platoon_ids(max_id + 1);
  return sol;
}

Plan to_plan(const Solution& solution) {
  Plan plan;
  for (TruckIndex k = 0; k < solution.num_trucks(); ++k) {
    if (!solution.has(k)) continue;
    const Itinerary& it = *solution.at(k);
    for (std::size_t p = 0; p < it.num_arcs(); ++p) {
      plan.segments.push_back(
          SegmentRecord{k, it.platoon[p], it.ratio[p], it.nodes[p], it.nodes[p + 1], it.charge[p]});
    }
  }
  return plan;
}

void normalize_ratios(const Instance& instance, Solution& solution) {
  std::vector<TruckIndex> all;
  for (TruckIndex k = 0; k < solution.num_trucks(); ++k) all.push_back(k);
  normalize_ratios(instance, solution, all);
}

void normalize_ratios(const Instance& instance, Solution& solution, const std::vector<TruckIndex>& trucks) {
  const GroupMap groups = build_groups(solution.refs(trucks));
  for (const auto& [key, members] : groups) {
    auto ratio = [&](const Member& mb) -> double& { return solution.at(mb.truck)->ratio[mb.pos]; };
    if (members.size() == 1) {
      ratio(members.front()) = 1.0;
      continue;
    }
    double sum = 0.0;
    for (const Member& mb : members) sum += std::max(0.0, ratio(mb));
    const Member* top = &members.front();
    for (const Member& mb : members) {
      if (ratio(mb) > ratio(*top) + 1e-12 || (std::abs(ratio(mb) - ratio(*top)) <= 1e-12 && mb.truck < top->truck)) {
        top = &mb;
      }
    }
    if (sum <= kPositive || instance.params.binary_leading_ratio) {
      for (const Member& mb : members) ratio(mb) = 0.0;
      ratio(*top) = 1.0;
      continue;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      double rest = 0.0;
      for (const Member& mb : members) {
        if (&mb == top) continue;
        ratio(mb) = std::max(0.0, ratio(mb)) / sum;
        rest += ratio(mb);
      }
      ratio(*top) = 1.0 - rest;
    }
  }
}

bool recharge(const Instance& instance, Solution& solution, const std::vector<TruckIndex>& trucks,
              const GroupMap& groups) {
  bool ok = true;
  for (TruckIndex k : trucks) {
    if (!solution.has(k)) continue;
    Itinerary& it = *solution.at(k);
    const auto cons = consumption_profile(instance, it, k, groups);
    ok = assign_charges(instance, it, cons) && ok;
  }
  return ok;
}

}  // namespace platoon
