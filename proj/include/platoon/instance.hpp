#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "platoon/network.hpp"

namespace platoon {

using TruckIndex = std::size_t;

/// Global model parameters in canonical units. Energy is measured in
/// km-equivalent range units (1 unit drives a leading truck 1 km), time in
/// hours, money in dollars.
struct Parameters {
  int max_platoon_size = 4;       // L
  double alpha1 = 30.0;           // $/h leading
  double alpha2 = 15.0;           // $/h following
  double alpha3 = 5.0;            // $/h dwell
  double alpha4 = 0.0;            // $ per restructuring
  double beta = 0.1;              // follower saving fraction
  double sigma = 100.0;           // units/h consumed at lead position
  double eta = 251.9;             // units/h charging speed
  double capacity = 340.0;        // Q, units
  double soc_upper = 1.0;
  double soc_lower = 0.0;
  double speed_kmh = 100.0;
  double kwh_per_unit = 135.0 / 340.0;
  /// Scenario restriction: leading ratios must be 0 or 1.
  bool binary_leading_ratio = false;

  /// Energy usable between two charges: (soc_u - soc_l) * Q.
  double usable_energy() const { return (soc_upper - soc_lower) * capacity; }
  double full_energy() const { return soc_upper * capacity; }
  double floor_energy() const { return soc_lower * capacity; }
};

/// Parameter set of the experiment suites (L=4, $30/$15/$5/$0,
/// 135 kWh = 340 km, 100 kW charging, 100 km/h).
Parameters default_parameters(double beta = 0.1);

struct TruckDelivery {
  std::string id;
  NodeIndex origin = 0;
  NodeIndex destination = 0;
  double latest_arrival = 0.0;  // hours
};

struct Instance {
  RoadNetwork network;
  Parameters params;
  std::vector<TruckDelivery> trucks;

  std::size_t num_trucks() const { return trucks.size(); }
  /// Money per energy unit at node i (0 when the node cannot charge).
  double price(NodeIndex i) const;
  bool can_charge(NodeIndex i) const { return network.node(i).has_charger; }
};

enum class ScenarioMode { no_platoon, platoon_no_swap, platoon_swap };

const char* to_string(ScenarioMode mode);
ScenarioMode parse_scenario_mode(const std::string& text);

/// Copy of the instance restricted to the scenario (L=1, or binary h).
Instance apply_mode(Instance instance, ScenarioMode mode);

/// Checks parameter and delivery invariants; marks destinations chargeable.
/// Throws InputError.
void validate(Instance& instance);

Instance instance_from_json(const nlohmann::json& doc);
nlohmann::ordered_json instance_to_json(const Instance& instance);
Instance load_instance(const std::filesystem::path& path);
void save_instance(const Instance& instance, const std::filesystem::path& path);

/// n x n grid with bidirectional arcs of edge_km; every node chargeable at
/// price_per_kwh.
RoadNetwork generate_grid(int n, double edge_km, const Parameters& params,
                          double price_per_kwh = 0.5);

/// 38-node stand-in for a regional highway network (edges 50-250 km,
/// all nodes chargeable). Deterministic; not the real network.
RoadNetwork generate_stand_in_network(const Parameters& params, double price_per_kwh = 0.5);

/// Distinct OD pairs drawn uniformly; latest arrival ~ U(SP(o,d), max SP).
std::vector<TruckDelivery> generate_deliveries(const RoadNetwork& network, std::size_t count,
                                               std::uint64_t seed);

/// Convenience: network + params + generated deliveries, validated.
Instance make_instance(RoadNetwork network, Parameters params, std::size_t trucks,
                       std::uint64_t seed);

}  // namespace platoon
