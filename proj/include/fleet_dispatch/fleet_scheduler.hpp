#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "fleet_dispatch/domain.hpp"
#include "fleet_dispatch/network.hpp"
#include "fleet_dispatch/vehicle_scheduler.hpp"

namespace fleet {

/// Request id -> vehicle id, total over the requests being scheduled.
using Assignment = std::map<RequestId, VehicleId>;

struct FleetResult {
  std::map<VehicleId, Schedule> schedules;  // only vehicles with work
  Distance total_distance;
  Cents total_cost = 0;  // sum of per-vehicle fuel cost in cents

  bool operator==(const FleetResult&) const = default;
};

enum class ExecutionMode { Cumulative, Distributed };

std::string_view to_string(ExecutionMode m);
ExecutionMode execution_mode_from_string(std::string_view s);

struct FleetOptions {
  ExecutionMode mode = ExecutionMode::Cumulative;
  std::size_t workers = 1;
  double cents_per_mile = 16.0;
  /// Vehicles whose link is down; the coordinator solves their subproblem.
  std::set<VehicleId> unavailable;
  /// Reuse per-vehicle results across calls on the same instance.
  bool memoize = false;
};

/// Which subproblem failed, for error reporting.
struct Infeasibility {
  VehicleId vehicle = 0;
  std::vector<RequestId> requests;
};

/// Coordinator for one scheduling instance (network, fleet, request pool).
///
/// Each call groups requests per vehicle and solves every non-empty group
/// independently. In distributed mode the groups travel to worker threads
/// as AssignRequests messages and come back as CostReport messages; the
/// schedule itself stays with the worker until the coordinator collects
/// the report. Results are reduced in vehicle order, so the outcome does
/// not depend on the worker count or completion order.
///
/// Calls must come from one thread at a time.
class FleetScheduler {
 public:
  FleetScheduler(std::shared_ptr<const ReducedNetwork> rn, std::vector<Vehicle> vehicles,
                 std::vector<Request> requests, FleetOptions options = {});
  ~FleetScheduler();
  FleetScheduler(const FleetScheduler&) = delete;
  FleetScheduler& operator=(const FleetScheduler&) = delete;

  /// Throws InputError on unknown ids or broken forced pairings.
  std::optional<FleetResult> solve(const Assignment& assignment, Infeasibility* why = nullptr);

  /// groups[v] lists request indices for vehicle index v.
  using Groups = std::vector<std::vector<std::size_t>>;
  std::optional<FleetResult> solve_groups(const Groups& groups, Infeasibility* why = nullptr);

  /// Solves several independent groupings in one round trip; all
  /// subproblems of the batch are in flight together.
  std::vector<std::optional<FleetResult>> solve_batch(const std::vector<Groups>& batch,
                                                      std::vector<Infeasibility>* why = nullptr);

  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  const std::vector<Request>& requests() const { return requests_; }
  const ReducedNetwork& network() const { return *network_; }
  const FleetOptions& options() const { return options_; }

  std::size_t vehicle_index(VehicleId id) const;
  std::size_t request_index(RequestId id) const;

  std::size_t cache_size() const;

 private:
  class WorkerPool;
  struct Cache;

  std::optional<Schedule> solve_one(std::size_t vehicle, const std::vector<std::size_t>& group) const;

  std::shared_ptr<const ReducedNetwork> network_;
  std::vector<Vehicle> vehicles_;
  std::vector<Request> requests_;
  FleetOptions options_;
  std::map<VehicleId, std::size_t> vehicle_index_;
  std::map<RequestId, std::size_t> request_index_;
  std::unique_ptr<Cache> cache_;
  std::unique_ptr<WorkerPool> pool_;
  std::uint64_t next_ticket_ = 0;
};

/// One-shot convenience over FleetScheduler.
std::optional<FleetResult> solve_assignment(const Assignment& assignment,
                                            std::span<const Vehicle> vehicles,
                                            std::span<const Request> requests,
                                            const ReducedNetwork& rn,
                                            const FleetOptions& options = {});

inline constexpr std::size_t kDefaultOracleCap = 5;

/// Exhaustive minimum over every assignment that honours forced pairings;
/// all requests must be served. Equal totals keep the assignment that is
/// smallest in request-id order of vehicle ids.
std::optional<FleetResult> brute_force_fleet(std::span<const Request> requests,
                                             std::span<const Vehicle> vehicles,
                                             const ReducedNetwork& rn,
                                             std::size_t cap = kDefaultOracleCap,
                                             const FleetOptions& options = {},
                                             Assignment* best_assignment = nullptr);

/// True iff k can serve r together with the requests already on board k.
/// pool must contain k's on-board requests.
bool is_admissible(const Request& r, const Vehicle& k, std::span<const Request> pool,
                   const ReducedNetwork& rn);

struct TabuLists {
  std::map<RequestId, std::set<VehicleId>> tabu;
  std::set<RequestId> non_admissible;  // every vehicle is tabu

  bool allows(RequestId r, VehicleId k) const;
};

/// Vehicles that cannot serve each request. Built once per interval.
TabuLists build_tabu_lists(std::span<const Request> requests, std::span<const Vehicle> vehicles,
                           const ReducedNetwork& rn);

}  // namespace fleet
