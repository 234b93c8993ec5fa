#include "fleet_dispatch/validator.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace fleet {

namespace {

std::string describe(const ScheduledStop& s, std::size_t index) {
  std::ostringstream os;
  os << "stop " << index << " (" << to_string(s.kind);
  if (s.request) os << " r" << *s.request;
  os << " @" << s.vertex << ")";
  return os.str();
}

}  // namespace

std::vector<std::string> validate_schedule(const Schedule& schedule, const Vehicle& k,
                                           std::span<const Request> reqs,
                                           const ReducedNetwork& rn) {
  std::vector<std::string> errors;
  auto fail = [&](std::string msg) { errors.push_back("vehicle " + std::to_string(k.id) + ": " + msg); };
  const double tol = kTimeTolerance;

  if (schedule.vehicle != k.id) fail("schedule belongs to another vehicle");

  std::map<RequestId, const Request*> wanted;
  for (const auto& r : reqs) wanted[r.id] = &r;

  if (schedule.stops.empty()) {
    if (!wanted.empty()) fail("requests assigned but the schedule is empty");
    if (schedule.distance != Distance{}) fail("empty schedule with nonzero distance");
    if (schedule.end_station) fail("empty schedule with an end station");
    return errors;
  }
  if (wanted.empty()) fail("schedule present without any requests");

  const auto& first = schedule.stops.front();
  if (first.kind != StopKind::Start || first.vertex != k.next_vertex) {
    fail("does not begin at the vehicle's next vertex");
  }
  if (first.time + tol < k.time_to_next) fail("starts before the vehicle can reach its start");

  int initial = 0;
  for (auto id : k.in_service) {
    auto it = wanted.find(id);
    if (it == wanted.end()) {
      fail("on-board request " + std::to_string(id) + " not among the requests");
      continue;
    }
    initial += it->second->seats;
  }
  if (first.occupancy != initial) fail("start load does not match on-board seats");

  std::map<RequestId, Seconds> picked_at;
  std::map<RequestId, Seconds> dropped_at;
  for (auto id : k.in_service) picked_at[id] = first.time;

  int load = initial;
  Distance distance;
  std::vector<VertexId> key_route{first.vertex};
  for (std::size_t i = 0; i < schedule.stops.size(); ++i) {
    const auto& s = schedule.stops[i];
    const std::string where = describe(s, i);
    if (s.time > k.max_operation + tol) fail(where + " exceeds the operation limit");
    if (i > 0) {
      const auto& prev = schedule.stops[i - 1];
      const auto* leg = rn.is_key(prev.vertex) && rn.is_key(s.vertex) ? rn.leg(prev.vertex, s.vertex) : nullptr;
      if (!leg) {
        fail(where + " is unreachable from the previous stop");
      } else {
        if (s.time + tol < prev.time + leg->time) fail(where + " reached faster than travel time");
        distance += leg->cost;
      }
      key_route.push_back(s.vertex);
      if (s.kind == StopKind::Start) fail(where + " repeats the start");
    }

    if (s.kind == StopKind::Pickup || s.kind == StopKind::Dropoff) {
      const Request* r = s.request && wanted.contains(*s.request) ? wanted[*s.request] : nullptr;
      if (!r) {
        fail(where + " serves an unknown request");
        continue;
      }
      if (s.kind == StopKind::Pickup) {
        if (picked_at.contains(r->id)) fail(where + " picks up twice");
        if (s.vertex != r->pickup) fail(where + " is not the pickup vertex");
        if (r->earliest && s.time + tol < *r->earliest) fail(where + " before the window opens");
        if (r->latest && s.time > *r->latest + tol) fail(where + " after the window closes");
        picked_at[r->id] = s.time;
        load += r->seats;
      } else {
        if (!picked_at.contains(r->id)) fail(where + " drops off before pickup");
        if (dropped_at.contains(r->id)) fail(where + " drops off twice");
        if (s.vertex != r->dropoff) fail(where + " is not the dropoff vertex");
        if (picked_at.contains(r->id) && s.time - picked_at[r->id] > r->max_ride + tol) {
          fail(where + " exceeds the maximum ride time");
        }
        dropped_at[r->id] = s.time;
        load -= r->seats;
      }
    }
    if (load < 0 || load > k.capacity) fail(where + " load out of [0, capacity]");
    if (s.occupancy != load) fail(where + " reports a wrong load");
    if (s.kind == StopKind::Refuel && i + 1 != schedule.stops.size()) {
      fail(where + " refuels before the end");
    }
  }

  const auto& last = schedule.stops.back();
  const auto& stations = rn.refuel_stations();
  if (last.kind != StopKind::Refuel) {
    fail("does not end with a refuel stop");
  } else {
    if (!std::binary_search(stations.begin(), stations.end(), last.vertex)) {
      fail("ends away from a refuel station");
    }
    if (last.occupancy != 0) fail("reaches the refuel station with passengers");
  }
  if (schedule.end_station != std::optional<VertexId>(last.vertex)) {
    fail("end station does not match the last stop");
  }
  for (const auto& [id, r] : wanted) {
    if (!dropped_at.contains(id)) fail("request " + std::to_string(id) + " not served");
  }
  if (distance != schedule.distance) fail("distance differs from the sum of legs");
  try {
    if (expand_route(rn, key_route) != schedule.route) fail("road route does not match the stops");
  } catch (const std::exception&) {
    fail("road route cannot be expanded");
  }
  return errors;
}

}  // namespace fleet
