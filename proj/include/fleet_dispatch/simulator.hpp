#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "fleet_dispatch/admission.hpp"
#include "fleet_dispatch/domain.hpp"
#include "fleet_dispatch/network.hpp"

namespace fleet {

/// A request and the interval in which it is submitted. Request times are
/// absolute; the earliest pickup doubles as the submission time.
struct Arrival {
  Request request;
  std::size_t interval = 0;

  bool operator==(const Arrival&) const = default;
};

struct Scenario {
  std::uint64_t seed = 0;
  RoadNetwork network;
  std::vector<Vehicle> vehicles;
  std::vector<Arrival> arrivals;  // sorted by interval
  Seconds interval_seconds = 180.0;
  std::size_t horizon = 1;
  GAConfig ga;
  double fuel_cents_per_mile = 16.0;
  double discount = 0.5;
  /// Operation time a vehicle gets back after refueling.
  Seconds refuel_operation = 14400.0;

  void validate() const;  // throws InputError
};

/// Knobs that do not change results.
struct RunOptions {
  ExecutionMode mode = ExecutionMode::Cumulative;
  std::size_t workers = 1;
};

struct Ledger {
  Cents revenue = 0;
  Cents cost = 0;
  Cents profit = 0;
  std::size_t admitted = 0;

  bool operator==(const Ledger&) const = default;
};

/// A committed schedule in absolute time; stops before `next` have
/// already been passed.
struct Plan {
  Schedule schedule;
  std::size_t next = 1;
};

/// The operating system between two duty assignments. The clock is the
/// next decision time. Vehicle times are relative to it: time_to_next is
/// the time left to reach next_vertex, max_operation the operation time
/// left.
struct SystemState {
  Seconds clock = 0.0;
  std::size_t interval = 0;
  RoadNetwork network;
  std::vector<Vehicle> vehicles;
  std::map<VehicleId, Plan> plans;
  std::map<RequestId, Request> requests;  // every request seen, absolute times
  std::vector<RequestId> pending;         // new and carried-over, ascending
  std::map<RequestId, Seconds> boarded;   // pickup time of on-board requests
  std::map<RequestId, Cents> booked;      // revenue booked per admitted request
  Ledger ledger;
  RequestId next_request_id = 1;
};

/// Fresh state at the first decision time (one interval after time 0).
SystemState initial_state(const Scenario& scenario);

struct IntervalReport {
  std::size_t interval = 0;
  Seconds clock = 0.0;  // decision time
  std::vector<RequestId> admitted;        // all admitted, forced included
  std::vector<RequestId> newly_admitted;
  std::vector<RequestId> carried;         // not admitted, kept for the next round
  std::vector<RequestId> carried_in;      // pool members left over from earlier rounds
  std::vector<RequestId> excluded;        // no vehicle can serve them
  std::vector<RequestId> demoted;         // forced requests their vehicle can no longer serve
  Cents profit = 0;
  Cents cumulative_profit = 0;
  std::size_t cumulative_admitted = 0;
  /// Dispatched schedules with the vehicles and pool they were solved
  /// for, all in absolute time.
  std::map<VehicleId, Schedule> schedules;
  std::vector<Vehicle> vehicles;
  std::vector<Request> pool;
  std::vector<TracePoint> trace;
};

/// One operating interval: merge, exclude, admit, commit, then advance
/// every vehicle along its committed timetable to the next decision time.
IntervalReport run_interval(SystemState& state, const std::vector<Request>& arrivals,
                            const Scenario& scenario, const RunOptions& options = {});

/// What one decision sees: the pool and fleet with times relative to the
/// decision clock, and the network reduced to their vertices.
struct DecisionFrame {
  Seconds clock = 0.0;
  std::shared_ptr<const ReducedNetwork> network;
  std::vector<Request> pool;
  std::vector<Vehicle> vehicles;
};

/// Every arrival of the scenario as one pool at the first decision time.
DecisionFrame scenario_frame(const Scenario& scenario);

AdmissionOptions admission_options(const Scenario& scenario, const RunOptions& options = {});

std::unique_ptr<AdmissionContext> scenario_admission(const Scenario& scenario,
                                                     const RunOptions& options = {});

struct HorizonResult {
  std::vector<IntervalReport> reports;
  SystemState final_state;
};

HorizonResult run_horizon(const Scenario& scenario, const RunOptions& options = {});

enum class TrafficCase {
  Unused,       // no committed route crosses the edge
  Replan,       // only unserved requests affected: back to the pool
  Compensate,   // passengers on board: schedule kept, flag set
};

struct TrafficImpact {
  std::map<VehicleId, TrafficCase> vehicles;  // only vehicles with a plan
  std::vector<RequestId> demoted;
  std::vector<RequestId> compensated;
};

/// Changes the travel time of edge (from, to) and classifies its effect on
/// every committed route from the vehicles' current positions.
TrafficImpact apply_traffic_update(SystemState& state, VertexId from, VertexId to,
                                   Seconds new_time, const Scenario& scenario);

/// Some or all passengers of an assigned request did not show up. Partial
/// absence frees seats; full absence drops the request's stops and
/// re-settles the remaining route. The booked fare is kept.
void apply_no_show(SystemState& state, RequestId id, int absent_seats, const Scenario& scenario);

struct GeneratorParams {
  std::size_t requests = 100;
  std::size_t vehicles = 5;
  std::size_t vertices = 60;
  std::size_t stations = 5;
  double area_miles = 10.0;
  std::size_t neighbours = 3;
  Seconds pace = 150.0;  // seconds per mile
  Seconds arrival_span = 1800.0;
  Seconds interval = 180.0;
  /// Submission times are spread evenly over this many equal slots.
  std::size_t strata = 20;
  Seconds window = 900.0;
  double ride_factor = 1.5;
  int min_seats = 1;
  int max_seats = 5;
  int capacity = 5;
  Cents fare_base = 260;
  double fare_per_mile = 280.0;
  double fuel_cents_per_mile = 16.0;
  double discount = 0.5;
  Seconds operation = 14400.0;
  GAConfig ga;

  void validate() const;  // throws InputError
};

/// Random city: vertices scattered over a square, joined to their nearest
/// neighbours and along a spanning tree in both directions.
Scenario generate_scenario(std::uint64_t seed, const GeneratorParams& params = {});

/// Splits the same arrivals into `intervals` equal intervals over span.
Scenario rechunk(Scenario scenario, std::size_t intervals, Seconds span);

/// Per-interval cumulative series: profit and admitted requests.
struct Series {
  std::vector<Cents> cumulative_profit;
  std::vector<std::size_t> cumulative_admitted;
};
Series horizon_series(const std::vector<IntervalReport>& reports);

}  // namespace fleet
