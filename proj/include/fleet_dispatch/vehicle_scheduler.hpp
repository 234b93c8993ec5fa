#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fleet_dispatch/domain.hpp"
#include "fleet_dispatch/network.hpp"

namespace fleet {

struct SolveOptions {
  /// Cut branches whose cost so far plus the cheapest hop to a refuel
  /// station cannot beat the incumbent. Off gives plain enumeration.
  bool prune = true;
};

struct SolveStats {
  std::uint64_t nodes = 0;
  std::uint64_t complete_routes = 0;
};

/// Minimum-cost schedule for one vehicle serving every request in reqs and
/// ending at a refuel station. Requests in k.in_service are already on
/// board: they get a dropoff stop only. Equal costs resolve to the
/// lexicographically smallest stop sequence. Returns nullopt when no
/// feasible schedule exists; an empty reqs gives the empty schedule.
std::optional<Schedule> solve_vehicle(const Vehicle& k, std::span<const Request> reqs,
                                      const ReducedNetwork& rn, const SolveOptions& options = {},
                                      SolveStats* stats = nullptr);

/// Earliest feasible timetable for a stop sequence.
///
/// The start is pinned at k.time_to_next. Each later stop is reached at the
/// previous time plus the leg time; a pickup waits for its earliest start,
/// and also waits long enough that its own dropoff respects the ride limit
/// when a later wait would otherwise stretch the ride. Returns nullopt when
/// a pickup misses its latest start, a ride exceeds its limit, or any time
/// exceeds the vehicle's operation limit.
std::optional<std::vector<Seconds>> settle_times(const StopSequence& seq, const Vehicle& k,
                                                 const ReducedNetwork& rn,
                                                 std::span<const Request> reqs);

/// Running load after each stop, starting from the seats of the requests
/// already on board. Returns nullopt if the load leaves [0, capacity].
std::optional<std::vector<int>> settle_occupancy(const StopSequence& seq, const Vehicle& k,
                                                 std::span<const Request> reqs);

/// Settles a complete sequence into a Schedule, or nullopt if infeasible.
std::optional<Schedule> build_schedule(const StopSequence& seq, const Vehicle& k,
                                       const ReducedNetwork& rn, std::span<const Request> reqs);

}  // namespace fleet
