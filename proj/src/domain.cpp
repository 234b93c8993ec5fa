#include "fleet_dispatch/domain.hpp"

#include <array>
#include <cmath>
#include <utility>

namespace fleet {

namespace {

constexpr std::array<std::pair<RequestState, std::string_view>, 7> kStateNames{{
    {RequestState::New, "new"},
    {RequestState::CarriedOver, "carried_over"},
    {RequestState::AssignedUnserved, "assigned_unserved"},
    {RequestState::InService, "in_service"},
    {RequestState::Completed, "completed"},
    {RequestState::CompletedUnserved, "completed_unserved"},
    {RequestState::Rejected, "rejected"},
}};

constexpr std::array<std::pair<StopKind, std::string_view>, 4> kStopNames{{
    {StopKind::Start, "start"},
    {StopKind::Pickup, "pickup"},
    {StopKind::Dropoff, "dropoff"},
    {StopKind::Refuel, "refuel"},
}};

}  // namespace

std::string_view to_string(RequestState s) {
  for (const auto& [state, name] : kStateNames) {
    if (state == s) return name;
  }
  return "unknown";
}

RequestState request_state_from_string(std::string_view s) {
  for (const auto& [state, name] : kStateNames) {
    if (name == s) return state;
  }
  throw InputError("unknown request state '" + std::string(s) + "'");
}

std::string_view to_string(StopKind k) {
  for (const auto& [kind, name] : kStopNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

StopKind stop_kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kStopNames) {
    if (name == s) return kind;
  }
  throw InputError("unknown stop kind '" + std::string(s) + "'");
}

void validate(const Request& r) {
  const std::string who = "request " + std::to_string(r.id);
  if (!(r.max_ride > 0.0)) throw InputError(who + ": max ride time must be positive");
  if (r.seats < 1) throw InputError(who + ": seat count must be at least 1");
  if (r.earliest && r.latest && *r.earliest > *r.latest) {
    throw InputError(who + ": window is empty");
  }
  if (r.fare < 0) throw InputError(who + ": negative fare");
  if ((r.state == RequestState::New || r.state == RequestState::CarriedOver) &&
      r.pickup == r.dropoff) {
    throw InputError(who + ": pickup equals dropoff");
  }
}

void validate(const Vehicle& k) {
  const std::string who = "vehicle " + std::to_string(k.id);
  if (k.time_to_next < 0.0) throw InputError(who + ": negative time to next vertex");
  if (k.capacity < 1) throw InputError(who + ": capacity must be at least 1");
  if (!(k.in_service.empty() && k.assigned_unserved.empty()) &&
      k.time_to_next > k.max_operation) {
    throw InputError(who + ": cannot reach its next vertex within its operation time");
  }
  for (auto id : k.in_service) {
    if (k.assigned_unserved.contains(id)) {
      throw InputError(who + ": request " + std::to_string(id) + " both on board and pending");
    }
  }
}

std::vector<Request> split_oversized(const Request& r, int max_seats, RequestId& next_free_id) {
  if (max_seats < 1) throw InputError("max_seats must be at least 1");
  if (r.seats <= max_seats) return {r};

  std::vector<Request> parts;
  for (int left = r.seats; left > 0; left -= max_seats) {
    Request part = r;
    part.seats = std::min(left, max_seats);
    if (!parts.empty()) {
      part.id = next_free_id++;
      part.split_from = r.id;
    }
    parts.push_back(part);
  }
  Cents assigned = 0;
  for (auto& part : parts) {
    part.fare = r.fare * part.seats / r.seats;
    assigned += part.fare;
  }
  parts.front().fare += r.fare - assigned;
  return parts;
}

Request normalize_in_service(const Request& r, const Vehicle& k, Seconds elapsed) {
  if (!k.in_service.contains(r.id)) {
    throw InputError("request " + std::to_string(r.id) + " is not on board vehicle " +
                     std::to_string(k.id));
  }
  if (elapsed >= r.max_ride) {
    throw ConstraintViolated("request " + std::to_string(r.id) +
                             " has already exceeded its maximum ride time");
  }
  Request out = r;
  out.pickup = k.next_vertex;
  out.max_ride = r.max_ride - elapsed;
  out.earliest.reset();
  out.latest.reset();
  out.state = RequestState::InService;
  out.assigned_vehicle = k.id;
  return out;
}

StopSequence Schedule::sequence() const {
  StopSequence seq;
  seq.reserve(stops.size());
  for (const auto& s : stops) seq.push_back(Stop{s.vertex, s.kind, s.request});
  return seq;
}

}  // namespace fleet
