#include "platoon/plan.hpp"

#include <fstream>
#include <map>
#include <tuple>

#include "platoon/errors.hpp"
#include "platoon/solution.hpp"

namespace platoon {

CostBreakdown& CostBreakdown::operator+=(const CostBreakdown& other) {
  charging += other.charging;
  leading_labor += other.leading_labor;
  following_labor += other.following_labor;
  idle += other.idle;
  restructuring += other.restructuring;
  finalize();
  return *this;
}

namespace {

Assessment assess_plan(const Instance& instance, const Plan& plan, std::vector<Violation>& structural) {
  const Solution sol = to_solution(instance, plan, &structural);
  return assess(instance, sol.refs(), true);
}

Assessment assess_or_throw(const Instance& instance, const Plan& plan) {
  std::vector<Violation> structural;
  Assessment a = assess_plan(instance, plan, structural);
  for (const Violation& v : structural) {
    if (v.kind != "missing-truck") throw ScheduleError(v.kind + ": " + v.detail);
  }
  if (!a.schedule) {
    for (const Violation& v : a.violations) {
      if (v.kind == "sync-cycle" || v.kind == "route-contiguity") {
        throw ScheduleError(v.kind + ": " + v.detail);
      }
    }
    throw ScheduleError("schedule could not be derived");
  }
  return a;
}

}  // namespace

Schedule derive_schedule(const Instance& instance, const Plan& plan) {
  return *assess_or_throw(instance, plan).schedule;
}

CostBreakdown evaluate(const Instance& instance, const Plan& plan) {
  return assess_or_throw(instance, plan).cost;
}

std::vector<Violation> check_feasibility(const Instance& instance, const Plan& plan) {
  std::vector<Violation> out;
  Assessment a = assess_plan(instance, plan, out);
  out.insert(out.end(), a.violations.begin(), a.violations.end());
  return out;
}

std::size_t restructuring_count(const Plan& plan) {
  std::map<std::tuple<NodeIndex, NodeIndex, PlatoonId>, std::pair<std::size_t, std::size_t>> groups;
  for (const SegmentRecord& s : plan.segments) {
    auto& [members, leaders] = groups[{s.tail, s.head, s.platoon}];
    ++members;
    if (s.leading_ratio > 1e-9) ++leaders;
  }
  std::size_t count = 0;
  for (const auto& [key, g] : groups) {
    if (g.first >= 2 && g.second > 1) count += g.second - 1;
  }
  return count;
}

nlohmann::ordered_json plan_to_json(const Instance& instance, const Plan& plan) {
  const RoadNetwork& net = instance.network;
  nlohmann::ordered_json doc;
  std::vector<SegmentRecord> segs = plan.segments;
  std::stable_sort(segs.begin(), segs.end(), [](const SegmentRecord& a, const SegmentRecord& b) {
    return a.truck < b.truck;
  });
  // Keep each truck's segments in route order.
  std::vector<Violation> structural;
  const Solution sol = to_solution(instance, plan, &structural);
  nlohmann::ordered_json segments = nlohmann::ordered_json::array();
  auto emit = [&](const SegmentRecord& s) {
    nlohmann::ordered_json j;
    j["truck"] = instance.trucks.at(s.truck).id;
    j["platoon"] = s.platoon;
    j["leading_ratio"] = s.leading_ratio;
    j["from"] = net.node(s.tail).id;
    j["to"] = net.node(s.head).id;
    j["charge_km"] = s.charge_at_head;
    segments.push_back(std::move(j));
  };
  if (structural.empty()) {
    for (const SegmentRecord& s : to_plan(sol).segments) emit(s);
  } else {
    for (const SegmentRecord& s : segs) emit(s);
  }
  doc["segments"] = std::move(segments);

  try {
    const Assessment a = assess_or_throw(instance, plan);
    nlohmann::ordered_json sched = nlohmann::ordered_json::array();
    for (const TruckSchedule& ts : a.schedule->trucks) {
      nlohmann::ordered_json t;
      t["truck"] = instance.trucks.at(ts.truck).id;
      nlohmann::ordered_json stops = nlohmann::ordered_json::array();
      for (const Stop& s : ts.stops) {
        nlohmann::ordered_json j;
        j["node"] = net.node(s.node).id;
        j["arrival_hr"] = s.arrival;
        j["dwell_hr"] = s.dwell;
        j["soc_on_arrival"] = s.soc_on_arrival;
        j["charge_km"] = s.charge;
        stops.push_back(std::move(j));
      }
      t["stops"] = std::move(stops);
      sched.push_back(std::move(t));
    }
    doc["schedule"] = std::move(sched);
    nlohmann::ordered_json cost;
    cost["charging"] = a.cost.charging;
    cost["leading_labor"] = a.cost.leading_labor;
    cost["following_labor"] = a.cost.following_labor;
    cost["idle"] = a.cost.idle;
    cost["restructuring"] = a.cost.restructuring;
    cost["total"] = a.cost.total;
    doc["cost_breakdown"] = std::move(cost);
  } catch (const ScheduleError&) {
    doc["schedule"] = nullptr;
    doc["cost_breakdown"] = nullptr;
  }
  return doc;
}

Plan plan_from_json(const Instance& instance, const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("segments") || !doc["segments"].is_array()) {
    throw InputError(ErrorCode::schema, "solution needs a 'segments' array");
  }
  std::map<std::string, TruckIndex> truck_index;
  for (TruckIndex k = 0; k < instance.trucks.size(); ++k) truck_index[instance.trucks[k].id] = k;
  auto node = [&](const nlohmann::json& j, const char* key) {
    const std::string id = j.at(key).get<std::string>();
    if (!instance.network.contains(id)) throw InputError(ErrorCode::unknown_node, id);
    return instance.network.index_of(id);
  };
  Plan plan;
  try {
    for (const auto& j : doc["segments"]) {
      const std::string id = j.at("truck").get<std::string>();
      auto found = truck_index.find(id);
      if (found == truck_index.end()) throw InputError(ErrorCode::dangling_reference, "truck " + id);
      SegmentRecord s;
      s.truck = found->second;
      s.platoon = j.at("platoon").get<PlatoonId>();
      s.leading_ratio = j.value("leading_ratio", 1.0);
      s.tail = node(j, "from");
      s.head = node(j, "to");
      s.charge_at_head = j.value("charge_km", 0.0);
      plan.segments.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(ErrorCode::schema, e.what());
  }
  return plan;
}

Plan load_plan(const Instance& instance, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(ErrorCode::io, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(ErrorCode::schema, e.what());
  }
  return plan_from_json(instance, doc);
}

void save_plan(const Instance& instance, const Plan& plan, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError(ErrorCode::io, "cannot write " + path.string());
  out << plan_to_json(instance, plan).dump(2) << '\n';
}

}  // namespace platoon
