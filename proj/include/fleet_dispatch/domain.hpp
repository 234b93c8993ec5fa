#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fleet_dispatch/core.hpp"

namespace fleet {

enum class RequestState {
  New,
  CarriedOver,
  AssignedUnserved,
  InService,
  Completed,
  CompletedUnserved,
  Rejected,
};

std::string_view to_string(RequestState s);
RequestState request_state_from_string(std::string_view s);

/// A transportation request: pickup, dropoff, maximum ride time, service
/// start window and seat count. An empty window bound means unbounded.
struct Request {
  RequestId id = 0;
  VertexId pickup = 0;
  VertexId dropoff = 0;
  Seconds max_ride = 0.0;
  std::optional<Seconds> earliest;
  std::optional<Seconds> latest;
  int seats = 1;
  Cents fare = 0;
  RequestState state = RequestState::New;

  /// Vehicle holding the request. Binding only while in service.
  std::optional<VehicleId> assigned_vehicle;
  std::optional<RequestId> split_from;
  bool compensation = false;

  /// Admission must keep this request (it was accepted earlier).
  bool admission_forced() const {
    return state == RequestState::AssignedUnserved || state == RequestState::InService;
  }
  /// The vehicle cannot change (passengers are on board).
  bool vehicle_forced() const { return state == RequestState::InService; }

  bool operator==(const Request&) const = default;
};

/// Throws InputError on a malformed request.
void validate(const Request& r);

/// A fleet member: next vertex a_k, time to reach it, remaining operation
/// time, seat capacity, and the requests it already holds.
struct Vehicle {
  VehicleId id = 0;
  VertexId next_vertex = 0;
  Seconds time_to_next = 0.0;
  Seconds max_operation = 0.0;
  int capacity = 0;
  std::set<RequestId> in_service;
  std::set<RequestId> assigned_unserved;

  bool operator==(const Vehicle&) const = default;
};

void validate(const Vehicle& k);

/// Splits a request whose seat count exceeds max_seats into greedy parts.
/// The first part keeps the id; later parts take ids from next_free_id.
/// Fares are apportioned by seats, remainder cents to the first part.
std::vector<Request> split_oversized(const Request& r, int max_seats, RequestId& next_free_id);

/// Rewrites an on-board request so it starts at the vehicle's next vertex
/// with the ride time already spent removed and an unbounded window.
Request normalize_in_service(const Request& r, const Vehicle& k, Seconds elapsed);

enum class StopKind { Start, Pickup, Dropoff, Refuel };

std::string_view to_string(StopKind k);
StopKind stop_kind_from_string(std::string_view s);

struct Stop {
  VertexId vertex = 0;
  StopKind kind = StopKind::Start;
  std::optional<RequestId> request;

  auto operator<=>(const Stop&) const = default;
};

using StopSequence = std::vector<Stop>;

struct ScheduledStop {
  VertexId vertex = 0;
  StopKind kind = StopKind::Start;
  std::optional<RequestId> request;
  Seconds time = 0.0;
  int occupancy = 0;  // after the stop's boarding or alighting

  bool operator==(const ScheduledStop&) const = default;
};

/// A vehicle's committed route: key stops with settled times and loads,
/// the terminal refuel station, and the full road route.
struct Schedule {
  VehicleId vehicle = 0;
  std::vector<ScheduledStop> stops;
  std::optional<VertexId> end_station;
  Distance distance;
  std::vector<VertexId> route;

  bool empty() const { return stops.empty(); }
  StopSequence sequence() const;
  bool operator==(const Schedule&) const = default;
};

}  // namespace fleet
