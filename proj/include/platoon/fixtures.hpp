#pragma once

#include <cstdint>

#include "platoon/plan.hpp"

namespace platoon {

/// Two trucks (A->B, C->D) on a 13-node network: two disjoint three-leg
/// rows with stations S1..S4, and a shared corridor M1..M5 of 100 km arcs.
/// Labor costs zero, beta 0.15, 0.2 kWh/km, $0.5/kWh everywhere.
Instance illustrative_instance();

/// Both trucks on their row, charging 110 + 250 en route and 340 at home.
Plan illustrative_no_platoon_plan(const Instance& illustrative);

/// Both trucks on the corridor, platooning M1..M5 with alternating leaders
/// and one full charge at M3.
Plan illustrative_platoon_plan(const Instance& illustrative);

/// The corridor network without M2 and M4 (11 nodes); M1 and M5 charge at
/// $1.0/kWh, labor rates 30/15/5/0, beta 0.15, 15 h deadlines, 20 kW chargers.
Instance small_test_instance();

/// Random 6-8 node network with two servable trucks, for exhaustive
/// comparisons. Nodes lie in a 450 km square joined to their nearest
/// neighbours; about 60% can charge at $0.3-0.6/kWh. Deterministic in seed.
Instance micro_instance(std::uint64_t seed);

}  // namespace platoon
