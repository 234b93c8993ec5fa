#include "fleet_dispatch/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <set>
#include <string>

#include "fleet_dispatch/random.hpp"
#include "fleet_dispatch/vehicle_scheduler.hpp"

namespace fleet {

namespace {

bool is_free(const Request& r) {
  return r.state == RequestState::New || r.state == RequestState::CarriedOver;
}

Request shifted(Request r, Seconds by) {
  if (r.earliest) *r.earliest += by;
  if (r.latest) *r.latest += by;
  return r;
}

Schedule shifted(Schedule s, Seconds by) {
  for (auto& stop : s.stops) stop.time += by;
  return s;
}

Vehicle shifted(Vehicle k, Seconds by) {
  k.time_to_next += by;
  k.max_operation += by;
  return k;
}

PathResult road_path(const RoadNetwork& net, VertexId from, VertexId to) {
  if (from == to) return PathResult{Distance{}, 0.0, {from}};
  auto p = shortest_path(net, from, to);
  if (!p) {
    throw InfeasibleRouteError("no road from " + std::to_string(from) + " to " + std::to_string(to));
  }
  return std::move(*p);
}

/// Road cost still ahead of a vehicle on its committed plan, counted from
/// its next vertex.
Distance remaining_cost(const RoadNetwork& net, const Plan& plan, const Vehicle& k) {
  const auto& stops = plan.schedule.stops;
  if (plan.next >= stops.size()) return {};
  Distance d = road_path(net, k.next_vertex, stops[plan.next].vertex).cost;
  for (std::size_t i = plan.next; i + 1 < stops.size(); ++i) {
    d += road_path(net, stops[i].vertex, stops[i + 1].vertex).cost;
  }
  return d;
}

std::vector<VertexId> remaining_route(const RoadNetwork& net, const Plan& plan, const Vehicle& k) {
  std::vector<VertexId> route{k.next_vertex};
  for (std::size_t i = plan.next; i < plan.schedule.stops.size(); ++i) {
    const auto p = road_path(net, route.back(), plan.schedule.stops[i].vertex);
    route.insert(route.end(), p.path.begin() + 1, p.path.end());
  }
  return route;
}

bool serves_requests(const Plan& plan) {
  for (std::size_t i = plan.next; i < plan.schedule.stops.size(); ++i) {
    const auto kind = plan.schedule.stops[i].kind;
    if (kind == StopKind::Pickup || kind == StopKind::Dropoff) return true;
  }
  return false;
}

Vehicle& vehicle_by_id(SystemState& state, VehicleId id) {
  for (auto& k : state.vehicles) {
    if (k.id == id) return k;
  }
  throw InputError("unknown vehicle " + std::to_string(id));
}

void settle_ledger(Ledger& ledger) { ledger.profit = ledger.revenue - ledger.cost; }

/// An admitted request the system can no longer keep goes back to the
/// pool as if newly submitted, and its booked revenue is reversed.
void demote(SystemState& state, Vehicle& k, RequestId id) {
  Request& r = state.requests.at(id);
  r.state = RequestState::New;
  r.assigned_vehicle.reset();
  k.assigned_unserved.erase(id);
  state.pending.insert(std::lower_bound(state.pending.begin(), state.pending.end(), id), id);
  auto it = state.booked.find(id);
  if (it != state.booked.end()) {
    state.ledger.revenue -= it->second;
    state.booked.erase(it);
    --state.ledger.admitted;
  }
  settle_ledger(state.ledger);
}

void cancel_plan(SystemState& state, const Vehicle& k, double cents_per_mile) {
  auto it = state.plans.find(k.id);
  if (it == state.plans.end()) return;
  state.ledger.cost -= cost_in_cents(remaining_cost(state.network, it->second, k), cents_per_mile);
  settle_ledger(state.ledger);
  state.plans.erase(it);
}

/// The request as the solver sees it at the current decision time.
Request relative_request(const SystemState& state, const Request& r, const Vehicle* holder) {
  if (r.state != RequestState::InService) {
    Request out = shifted(r, -state.clock);
    if (holder) out.assigned_vehicle = holder->id;
    return out;
  }
  const Seconds elapsed = state.clock + holder->time_to_next - state.boarded.at(r.id);
  Request out =
      normalize_in_service(r, *holder, std::min(elapsed, r.max_ride - kTimeTolerance));
  if (r.compensation) out.max_ride = std::max(out.max_ride, holder->max_operation);
  return out;
}

/// Forced requests of one vehicle, in the solver's frame.
std::vector<Request> held_requests(const SystemState& state, const Vehicle& k) {
  std::vector<Request> out;
  for (auto id : k.in_service) out.push_back(relative_request(state, state.requests.at(id), &k));
  for (auto id : k.assigned_unserved) {
    out.push_back(relative_request(state, state.requests.at(id), &k));
  }
  return out;
}

std::vector<Request> build_pool(const SystemState& state) {
  std::vector<Request> pool;
  for (auto id : state.pending) pool.push_back(relative_request(state, state.requests.at(id), nullptr));
  for (const auto& k : state.vehicles) {
    auto held = held_requests(state, k);
    pool.insert(pool.end(), held.begin(), held.end());
  }
  std::sort(pool.begin(), pool.end(), [](const Request& a, const Request& b) { return a.id < b.id; });
  return pool;
}

std::shared_ptr<const ReducedNetwork> reduce_for(const RoadNetwork& net,
                                                 const std::vector<Request>& reqs,
                                                 const std::vector<Vehicle>& vehicles) {
  std::vector<VertexId> keys;
  for (const auto& r : reqs) {
    keys.push_back(r.pickup);
    keys.push_back(r.dropoff);
  }
  for (const auto& k : vehicles) keys.push_back(k.next_vertex);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return std::make_shared<const ReducedNetwork>(reduce(net, keys));
}

/// Vehicles whose forced requests no longer fit lose their unserved ones.
/// Returns the demoted ids; throws if on-board passengers alone fail.
std::vector<RequestId> demote_unservable(SystemState& state, const ReducedNetwork& rn) {
  std::vector<RequestId> demoted;
  for (auto& k : state.vehicles) {
    if (k.assigned_unserved.empty()) continue;
    const auto held = held_requests(state, k);
    if (solve_vehicle(k, held, rn)) continue;
    const std::vector<RequestId> ids(k.assigned_unserved.begin(), k.assigned_unserved.end());
    for (auto id : ids) {
      demote(state, k, id);
      demoted.push_back(id);
    }
  }
  if (demoted.empty()) {
    throw ConstraintViolated("passengers on board can no longer be served");
  }
  return demoted;
}

void pass_stop(SystemState& state, Vehicle& k, const ScheduledStop& stop) {
  if (!stop.request) return;
  const RequestId id = *stop.request;
  Request& r = state.requests.at(id);
  if (stop.kind == StopKind::Pickup) {
    r.state = RequestState::InService;
    state.boarded[id] = stop.time;
    k.assigned_unserved.erase(id);
    k.in_service.insert(id);
  } else if (stop.kind == StopKind::Dropoff) {
    r.state = RequestState::Completed;
    state.boarded.erase(id);
    k.in_service.erase(id);
  }
}

/// Moves every vehicle along its committed timetable to time `until`.
void advance(SystemState& state, Seconds until, Seconds refuel_operation) {
  const Seconds step = until - state.clock;
  for (auto& k : state.vehicles) {
    auto pit = state.plans.find(k.id);
    if (pit == state.plans.end()) {
      const Seconds drive = std::min(k.time_to_next, step);
      k.time_to_next -= drive;
      k.max_operation -= drive;
      continue;
    }
    Plan& plan = pit->second;
    const auto& stops = plan.schedule.stops;
    if (until < stops.front().time) {
      k.time_to_next = stops.front().time - until;
      k.max_operation -= step;
      continue;
    }
    while (plan.next < stops.size() && stops[plan.next].time <= until + kTimeTolerance) {
      pass_stop(state, k, stops[plan.next]);
      ++plan.next;
    }
    if (plan.next == stops.size()) {
      k.next_vertex = stops.back().vertex;
      k.time_to_next = 0.0;
      k.max_operation = refuel_operation;
      state.plans.erase(pit);
      continue;
    }
    const auto& from = stops[plan.next - 1];
    const auto& to = stops[plan.next];
    const auto path = road_path(state.network, from.vertex, to.vertex).path;
    const auto arrive = path_arrival_times(state.network, path);
    k.next_vertex = to.vertex;
    k.time_to_next = 0.0;
    for (std::size_t j = 0; j < path.size(); ++j) {
      if (from.time + arrive[j] >= until - kTimeTolerance) {
        k.next_vertex = path[j];
        k.time_to_next = std::max(0.0, from.time + arrive[j] - until);
        break;
      }
    }
    k.max_operation -= step;
  }
  state.clock = until;
}

void merge_arrivals(SystemState& state, const std::vector<Request>& arrivals) {
  int max_capacity = 0;
  for (const auto& k : state.vehicles) max_capacity = std::max(max_capacity, k.capacity);
  for (const auto& arrival : arrivals) {
    validate(arrival);
    if (state.requests.contains(arrival.id)) {
      throw InputError("request " + std::to_string(arrival.id) + " submitted twice");
    }
    state.next_request_id = std::max(state.next_request_id, arrival.id + 1);
    Request fresh = arrival;
    fresh.state = RequestState::New;
    fresh.assigned_vehicle.reset();
    const auto parts = max_capacity > 0 ? split_oversized(fresh, max_capacity, state.next_request_id)
                                        : std::vector<Request>{fresh};
    for (const auto& part : parts) {
      state.requests[part.id] = part;
      state.pending.push_back(part.id);
    }
  }
  std::sort(state.pending.begin(), state.pending.end());
}

}  // namespace

AdmissionOptions admission_options(const Scenario& scenario, const RunOptions& options) {
  AdmissionOptions admission;
  admission.mode = options.mode;
  admission.workers = options.workers;
  admission.cents_per_mile = scenario.fuel_cents_per_mile;
  admission.discount = scenario.discount;
  return admission;
}

void Scenario::validate() const {
  if (horizon < 1) throw InputError("horizon must be at least 1");
  if (!(interval_seconds > 0.0)) throw InputError("interval duration must be positive");
  if (fuel_cents_per_mile < 0.0) throw InputError("negative fuel cost");
  if (discount < 0.0 || discount > 1.0) throw InputError("discount must lie in [0, 1]");
  if (!(refuel_operation > 0.0)) throw InputError("refuel operation time must be positive");
  ga.validate();

  std::set<VehicleId> vehicle_ids;
  for (const auto& k : vehicles) {
    fleet::validate(k);
    if (!vehicle_ids.insert(k.id).second) throw InputError("duplicate vehicle " + std::to_string(k.id));
    if (!network.has_vertex(k.next_vertex)) {
      throw InputError("vehicle " + std::to_string(k.id) + " starts off the network");
    }
    if (!k.in_service.empty() || !k.assigned_unserved.empty()) {
      throw InputError("vehicle " + std::to_string(k.id) + " must start without requests");
    }
  }
  std::set<RequestId> request_ids;
  std::size_t last = 0;
  for (const auto& a : arrivals) {
    const auto& r = a.request;
    fleet::validate(r);
    if (!request_ids.insert(r.id).second) throw InputError("duplicate request " + std::to_string(r.id));
    if (a.interval < last) throw InputError("arrivals are not sorted by interval");
    if (a.interval >= horizon) {
      throw InputError("request " + std::to_string(r.id) + " arrives after the horizon");
    }
    if (!network.has_vertex(r.pickup) || !network.has_vertex(r.dropoff)) {
      throw InputError("request " + std::to_string(r.id) + " uses an unknown vertex");
    }
    if (r.state != RequestState::New) {
      throw InputError("request " + std::to_string(r.id) + " must arrive as new");
    }
    last = a.interval;
  }
}

SystemState initial_state(const Scenario& scenario) {
  SystemState state;
  state.clock = scenario.interval_seconds;
  state.network = scenario.network;
  state.vehicles = scenario.vehicles;
  for (const auto& a : scenario.arrivals) {
    state.next_request_id = std::max(state.next_request_id, a.request.id + 1);
  }
  return state;
}

IntervalReport run_interval(SystemState& state, const std::vector<Request>& arrivals,
                            const Scenario& scenario, const RunOptions& options) {
  IntervalReport report;
  report.interval = state.interval;
  report.clock = state.clock;
  const Cents profit_before = state.ledger.profit;

  for (auto id : state.pending) {
    if (state.requests.at(id).state == RequestState::CarriedOver) report.carried_in.push_back(id);
  }

  merge_arrivals(state, arrivals);

  const AdmissionOptions admission = admission_options(scenario, options);
  std::vector<Request> pool = build_pool(state);
  auto rn = reduce_for(state.network, pool, state.vehicles);
  auto ctx = std::make_unique<AdmissionContext>(rn, pool, state.vehicles, admission);
  if (!ctx->evaluate(ctx->base()).feasible()) {
    report.demoted = demote_unservable(state, *rn);
    pool = build_pool(state);
    ctx = std::make_unique<AdmissionContext>(rn, pool, state.vehicles, admission);
  }

  std::set<RequestId> excluded;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const Request& r = pool[i];
    if (!is_free(r) || !ctx->non_admissible(i)) continue;
    excluded.insert(r.id);
    state.requests.at(r.id).state = RequestState::Rejected;
  }

  GAConfig ga = scenario.ga;
  ga.seed = scenario.ga.seed + state.interval;
  ga.discount = scenario.discount;
  AdmissionOutcome outcome = run_admission(*ctx, ga);
  report.trace = outcome.trace;

  for (const auto& k : ctx->vehicles()) report.vehicles.push_back(shifted(k, state.clock));
  for (const auto& r : pool) report.pool.push_back(shifted(r, state.clock));

  const std::set<RequestId> admitted(outcome.admitted.begin(), outcome.admitted.end());
  std::vector<RequestId> still_pending;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const RequestId id = pool[i].id;
    Request& r = state.requests.at(id);
    if (admitted.contains(id)) {
      report.admitted.push_back(id);
      if (is_free(r)) {
        report.newly_admitted.push_back(id);
        state.booked[id] = ctx->revenue_of(i);
        state.ledger.revenue += ctx->revenue_of(i);
        ++state.ledger.admitted;
        r.state = RequestState::AssignedUnserved;
      }
    } else if (excluded.contains(id)) {
      report.excluded.push_back(id);
    } else {
      report.carried.push_back(id);
      r.state = RequestState::CarriedOver;
      still_pending.push_back(id);
    }
  }
  state.pending = std::move(still_pending);

  for (auto& k : state.vehicles) {
    const auto it = outcome.result.schedules.find(k.id);
    const bool dispatched = it != outcome.result.schedules.end() && !it->second.empty();
    if (!dispatched) {
      auto pit = state.plans.find(k.id);
      if (pit != state.plans.end() && serves_requests(pit->second)) {
        cancel_plan(state, k, scenario.fuel_cents_per_mile);
      }
      k.assigned_unserved.clear();
      continue;
    }
    const Schedule& schedule = it->second;
    Cents previous = 0;
    if (auto pit = state.plans.find(k.id); pit != state.plans.end()) {
      previous = cost_in_cents(remaining_cost(state.network, pit->second, k),
                               scenario.fuel_cents_per_mile);
    }
    state.ledger.cost += cost_in_cents(schedule.distance, scenario.fuel_cents_per_mile) - previous;
    Schedule absolute = shifted(schedule, state.clock);
    state.plans[k.id] = Plan{absolute, 1};
    report.schedules[k.id] = std::move(absolute);

    k.assigned_unserved.clear();
    for (const auto& stop : schedule.stops) {
      if (stop.kind != StopKind::Pickup) continue;
      k.assigned_unserved.insert(*stop.request);
      state.requests.at(*stop.request).assigned_vehicle = k.id;
    }
  }
  settle_ledger(state.ledger);

  report.profit = state.ledger.profit - profit_before;
  report.cumulative_profit = state.ledger.profit;
  report.cumulative_admitted = state.ledger.admitted;

  advance(state, state.clock + scenario.interval_seconds, scenario.refuel_operation);
  ++state.interval;
  return report;
}

DecisionFrame scenario_frame(const Scenario& scenario) {
  scenario.validate();
  SystemState state = initial_state(scenario);
  std::vector<Request> all;
  for (const auto& a : scenario.arrivals) all.push_back(a.request);
  merge_arrivals(state, all);
  DecisionFrame frame;
  frame.clock = state.clock;
  frame.pool = build_pool(state);
  frame.vehicles = state.vehicles;
  frame.network = reduce_for(state.network, frame.pool, frame.vehicles);
  return frame;
}

std::unique_ptr<AdmissionContext> scenario_admission(const Scenario& scenario,
                                                     const RunOptions& options) {
  auto frame = scenario_frame(scenario);
  return std::make_unique<AdmissionContext>(frame.network, std::move(frame.pool),
                                            std::move(frame.vehicles),
                                            admission_options(scenario, options));
}

HorizonResult run_horizon(const Scenario& scenario, const RunOptions& options) {
  scenario.validate();
  HorizonResult out;
  out.final_state = initial_state(scenario);
  std::size_t next = 0;
  for (std::size_t n = 0; n < scenario.horizon; ++n) {
    std::vector<Request> arrivals;
    while (next < scenario.arrivals.size() && scenario.arrivals[next].interval == n) {
      arrivals.push_back(scenario.arrivals[next++].request);
    }
    out.reports.push_back(run_interval(out.final_state, arrivals, scenario, options));
  }
  return out;
}

TrafficImpact apply_traffic_update(SystemState& state, VertexId from, VertexId to,
                                   Seconds new_time, const Scenario& scenario) {
  if (!state.network.has_edge(from, to)) {
    throw InputError("no edge " + std::to_string(from) + " -> " + std::to_string(to));
  }
  if (!(new_time > 0.0)) throw InputError("travel time must be positive");

  TrafficImpact impact;
  for (auto& k : state.vehicles) {
    auto pit = state.plans.find(k.id);
    if (pit == state.plans.end()) continue;
    const auto route = remaining_route(state.network, pit->second, k);
    bool used = false;
    for (std::size_t i = 0; i + 1 < route.size() && !used; ++i) {
      used = route[i] == from && route[i + 1] == to;
    }
    if (!used) {
      impact.vehicles[k.id] = TrafficCase::Unused;
    } else if (!k.in_service.empty()) {
      impact.vehicles[k.id] = TrafficCase::Compensate;
      for (auto id : k.in_service) {
        state.requests.at(id).compensation = true;
        impact.compensated.push_back(id);
      }
    } else {
      impact.vehicles[k.id] = TrafficCase::Replan;
      cancel_plan(state, k, scenario.fuel_cents_per_mile);
      const std::vector<RequestId> ids(k.assigned_unserved.begin(), k.assigned_unserved.end());
      for (auto id : ids) {
        demote(state, k, id);
        impact.demoted.push_back(id);
      }
    }
  }
  state.network.set_travel_time(from, to, new_time);
  return impact;
}

void apply_no_show(SystemState& state, RequestId id, int absent_seats, const Scenario& scenario) {
  auto rit = state.requests.find(id);
  if (rit == state.requests.end()) throw InputError("unknown request " + std::to_string(id));
  Request& r = rit->second;
  if (absent_seats < 0 || absent_seats > r.seats) {
    throw InputError("request " + std::to_string(id) + ": absent seats outside [0, " +
                     std::to_string(r.seats) + "]");
  }
  if (absent_seats == 0) return;
  if (r.state != RequestState::AssignedUnserved || !r.assigned_vehicle) {
    throw InputError("request " + std::to_string(id) + " is not waiting for pickup");
  }
  Vehicle& k = vehicle_by_id(state, *r.assigned_vehicle);
  Plan& plan = state.plans.at(k.id);
  auto& stops = plan.schedule.stops;

  if (absent_seats < r.seats) {
    r.seats -= absent_seats;
    bool aboard = false;
    for (std::size_t i = plan.next; i < stops.size(); ++i) {
      if (stops[i].request == id) aboard = stops[i].kind == StopKind::Pickup;
      if (aboard) stops[i].occupancy -= absent_seats;
    }
    return;
  }

  r.state = RequestState::CompletedUnserved;
  k.assigned_unserved.erase(id);
  const Cents previous =
      cost_in_cents(remaining_cost(state.network, plan, k), scenario.fuel_cents_per_mile);

  StopSequence seq{Stop{k.next_vertex, StopKind::Start, std::nullopt}};
  bool any_request = false;
  for (std::size_t i = plan.next; i < stops.size(); ++i) {
    if (stops[i].request == id) continue;
    any_request |= stops[i].request.has_value();
    seq.push_back(Stop{stops[i].vertex, stops[i].kind, stops[i].request});
  }
  if (!any_request) {
    state.ledger.cost -= previous;
    settle_ledger(state.ledger);
    state.plans.erase(k.id);
    return;
  }

  const auto held = held_requests(state, k);
  std::vector<Request> keyed = held;
  const auto rn = reduce_for(state.network, keyed, {k});
  auto schedule = build_schedule(seq, k, *rn, held);
  if (!schedule) schedule = solve_vehicle(k, held, *rn);
  if (!schedule) throw ConstraintViolated("vehicle " + std::to_string(k.id) + " cannot re-settle its route");
  state.ledger.cost += cost_in_cents(schedule->distance, scenario.fuel_cents_per_mile) - previous;
  settle_ledger(state.ledger);
  plan = Plan{shifted(*schedule, state.clock), 1};
}

void GeneratorParams::validate() const {
  if (vehicles < 1) throw InputError("at least one vehicle is required");
  if (vertices < 2) throw InputError("the network needs at least two vertices");
  if (stations < 1 || stations > vertices) throw InputError("station count must lie in [1, vertices]");
  if (neighbours < 1) throw InputError("neighbour count must be at least 1");
  if (!(area_miles > 0.0)) throw InputError("area must be positive");
  if (!(pace > 0.0)) throw InputError("pace must be positive");
  if (!(arrival_span > 0.0)) throw InputError("arrival span must be positive");
  if (!(interval > 0.0)) throw InputError("interval duration must be positive");
  if (strata < 1) throw InputError("strata must be at least 1");
  if (window < 0.0) throw InputError("window must be nonnegative");
  if (ride_factor < 1.0) throw InputError("ride factor must be at least 1");
  if (min_seats < 1 || min_seats > max_seats) throw InputError("seat range must satisfy 1 <= min <= max");
  if (capacity < 1) throw InputError("capacity must be at least 1");
  if (fare_base < 0 || fare_per_mile < 0.0) throw InputError("fares must be nonnegative");
  if (fuel_cents_per_mile < 0.0) throw InputError("negative fuel cost");
  if (discount < 0.0 || discount > 1.0) throw InputError("discount must lie in [0, 1]");
  if (!(operation > 0.0)) throw InputError("operation time must be positive");
  ga.validate();
}

Scenario generate_scenario(std::uint64_t seed, const GeneratorParams& p) {
  p.validate();
  Rng rng(seed);
  const std::size_t n = p.vertices;

  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = unit(rng) * p.area_miles;
    y[i] = unit(rng) * p.area_miles;
  }
  auto dist = [&](std::size_t a, std::size_t b) { return std::hypot(x[a] - x[b], y[a] - y[b]); };

  std::set<std::pair<std::size_t, std::size_t>> links;
  auto link = [&](std::size_t a, std::size_t b) { links.insert({std::min(a, b), std::max(a, b)}); };
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<std::size_t> others;
    for (std::size_t b = 0; b < n; ++b) {
      if (b != a) others.push_back(b);
    }
    std::stable_sort(others.begin(), others.end(),
                     [&](std::size_t u, std::size_t v) { return dist(a, u) < dist(a, v); });
    for (std::size_t j = 0; j < std::min(p.neighbours, others.size()); ++j) link(a, others[j]);
  }
  // Prim's spanning tree keeps the city connected.
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, 0);
  best[0] = 0.0;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!in_tree[v] && (u == n || best[v] < best[u])) u = v;
    }
    in_tree[u] = true;
    if (u != 0) link(parent[u], u);
    for (std::size_t v = 0; v < n; ++v) {
      if (!in_tree[v] && dist(u, v) < best[v]) {
        best[v] = dist(u, v);
        parent[v] = u;
      }
    }
  }

  std::vector<VertexId> ids(n);
  std::iota(ids.begin(), ids.end(), VertexId{1});
  std::vector<Edge> edges;
  for (auto [a, b] : links) {
    const double stretch = 1.0 + 0.3 * unit(rng);
    const double miles = std::max(0.01, std::round(dist(a, b) * stretch * 100.0) / 100.0);
    edges.push_back(Edge{ids[a], ids[b], miles, miles * p.pace});
    edges.push_back(Edge{ids[b], ids[a], miles, miles * p.pace});
  }
  std::vector<VertexId> shuffled = ids;
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[uniform_index(rng, i)]);
  }
  std::vector<VertexId> stations(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(p.stations));
  std::sort(stations.begin(), stations.end());

  Scenario sc;
  sc.seed = seed;
  sc.network = RoadNetwork(ids, edges, stations);
  sc.interval_seconds = p.interval;
  sc.horizon = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(p.arrival_span / p.interval - 1e-9)));
  sc.ga = p.ga;
  sc.ga.discount = p.discount;
  sc.fuel_cents_per_mile = p.fuel_cents_per_mile;
  sc.discount = p.discount;
  sc.refuel_operation = p.operation;

  for (std::size_t v = 0; v < p.vehicles; ++v) {
    Vehicle k;
    k.id = static_cast<VehicleId>(v + 1);
    k.next_vertex = ids[uniform_index(rng, n)];
    k.max_operation = p.operation;
    k.capacity = p.capacity;
    sc.vehicles.push_back(k);
  }

  const Seconds slot = p.arrival_span / static_cast<double>(p.strata);
  std::vector<Seconds> submitted;
  for (std::size_t i = 0; i < p.requests; ++i) {
    submitted.push_back((static_cast<double>(i % p.strata) + unit(rng)) * slot);
  }
  std::sort(submitted.begin(), submitted.end());
  const auto seat_span = static_cast<std::size_t>(p.max_seats - p.min_seats + 1);
  for (std::size_t i = 0; i < p.requests; ++i) {
    Request r;
    r.id = static_cast<RequestId>(i + 1);
    r.pickup = ids[uniform_index(rng, n)];
    do {
      r.dropoff = ids[uniform_index(rng, n)];
    } while (r.dropoff == r.pickup);
    const auto direct = road_path(sc.network, r.pickup, r.dropoff);
    r.max_ride = p.ride_factor * direct.time;
    r.earliest = submitted[i];
    r.latest = submitted[i] + p.window;
    r.seats = p.min_seats + static_cast<int>(uniform_index(rng, seat_span));
    r.fare = p.fare_base + static_cast<Cents>(std::llround(p.fare_per_mile * direct.cost.miles()));
    const auto interval = static_cast<std::size_t>(submitted[i] / p.interval);
    sc.arrivals.push_back(Arrival{r, std::min(interval, sc.horizon - 1)});
  }
  return sc;
}

Scenario rechunk(Scenario scenario, std::size_t intervals, Seconds span) {
  if (intervals < 1) throw InputError("interval count must be at least 1");
  if (!(span > 0.0)) throw InputError("span must be positive");
  scenario.interval_seconds = span / static_cast<double>(intervals);
  scenario.horizon = intervals;
  for (auto& a : scenario.arrivals) {
    const Seconds t = a.request.earliest.value_or(0.0);
    const auto n = static_cast<std::size_t>(std::max(0.0, t) / scenario.interval_seconds);
    a.interval = std::min(n, intervals - 1);
  }
  std::stable_sort(scenario.arrivals.begin(), scenario.arrivals.end(),
                   [](const Arrival& a, const Arrival& b) { return a.interval < b.interval; });
  return scenario;
}

Series horizon_series(const std::vector<IntervalReport>& reports) {
  Series s;
  for (const auto& r : reports) {
    s.cumulative_profit.push_back(r.cumulative_profit);
    s.cumulative_admitted.push_back(r.cumulative_admitted);
  }
  return s;
}

}  // namespace fleet
