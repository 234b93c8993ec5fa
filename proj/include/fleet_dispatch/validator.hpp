#pragma once

#include <span>
#include <string>
#include <vector>

#include "fleet_dispatch/domain.hpp"
#include "fleet_dispatch/network.hpp"

namespace fleet {

/// Checks a schedule against its vehicle, the requests it was built for and
/// the reduced network, recomputing everything from the stops themselves.
/// Returns one message per violation; empty means valid.
///
/// Checked: start at the vehicle's next vertex no earlier than its arrival
/// there; legs respect travel times; every request picked up inside its
/// window and dropped within its ride limit, pickup first, exactly once;
/// load within [0, capacity] and zero at the terminal refuel station; all
/// times within the operation limit; reported distance and road route
/// consistent with the legs.
std::vector<std::string> validate_schedule(const Schedule& schedule, const Vehicle& k,
                                           std::span<const Request> reqs,
                                           const ReducedNetwork& rn);

}  // namespace fleet
