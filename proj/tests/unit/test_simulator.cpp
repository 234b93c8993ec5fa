#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "fleet_dispatch/simulator.hpp"
#include "fleet_dispatch/validator.hpp"
#include "report_check.hpp"

using namespace fleet;

namespace {

RoadNetwork line5() {
  std::vector<Edge> edges;
  for (VertexId v = 1; v < 5; ++v) {
    edges.push_back({v, v + 1, 1.0, 60.0});
    edges.push_back({v + 1, v, 1.0, 60.0});
  }
  return RoadNetwork({1, 2, 3, 4, 5}, edges, {5});
}

Request trip(RequestId id, VertexId s, VertexId d, Seconds earliest, int seats = 1) {
  Request r;
  r.id = id;
  r.pickup = s;
  r.dropoff = d;
  r.max_ride = 600;
  r.earliest = earliest;
  r.latest = earliest + 1000;
  r.seats = seats;
  r.fare = 10000;
  return r;
}

Scenario line_scenario(std::vector<Request> rs, std::size_t horizon = 1) {
  Scenario sc;
  sc.network = line5();
  Vehicle k;
  k.id = 1;
  k.next_vertex = 1;
  k.max_operation = 14400;
  k.capacity = 5;
  sc.vehicles = {k};
  for (auto& r : rs) sc.arrivals.push_back(Arrival{r, 0});
  sc.horizon = horizon;
  return sc;
}

std::vector<Request> arrivals_of(const Scenario& sc, std::size_t n) {
  std::vector<Request> out;
  for (const auto& a : sc.arrivals) {
    if (a.interval == n) out.push_back(a.request);
  }
  return out;
}

std::size_t report_violations(const IntervalReport& rep, const RoadNetwork& net) {
  const auto errors = fleet::testing::report_violations(rep, net);
  for (const auto& e : errors) ADD_FAILURE() << e;
  return errors.size();
}

/// A committed plan checked from its own start. Only for plans without
/// passengers on board at that start.
std::vector<std::string> plan_violations(const SystemState& state, VehicleId id) {
  const auto& k = *std::find_if(state.vehicles.begin(), state.vehicles.end(),
                                [&](const Vehicle& v) { return v.id == id; });
  const Plan& plan = state.plans.at(id);
  Vehicle abs = k;
  abs.next_vertex = plan.schedule.stops.front().vertex;
  abs.time_to_next = plan.schedule.stops.front().time;
  abs.max_operation += state.clock;
  abs.in_service.clear();
  std::vector<Request> reqs;
  std::vector<VertexId> keys{k.next_vertex};
  for (const auto& st : plan.schedule.stops) {
    keys.push_back(st.vertex);
    if (st.kind == StopKind::Pickup) reqs.push_back(state.requests.at(*st.request));
  }
  return validate_schedule(plan.schedule, abs, reqs, reduce(state.network, keys));
}

}  // namespace

TEST(GenerateScenario, PaperSettings) {
  const auto sc = generate_scenario(7);
  EXPECT_NO_THROW(sc.validate());
  ASSERT_EQ(sc.arrivals.size(), 100u);
  EXPECT_EQ(sc.vehicles.size(), 5u);
  EXPECT_EQ(sc.network.refuel_stations().size(), 5u);
  EXPECT_EQ(sc.horizon, 10u);
  EXPECT_DOUBLE_EQ(sc.fuel_cents_per_mile, 16.0);
  for (const auto& k : sc.vehicles) EXPECT_EQ(k.capacity, 5);
  for (const auto& a : sc.arrivals) {
    const auto& r = a.request;
    const auto direct = shortest_path(sc.network, r.pickup, r.dropoff);
    ASSERT_TRUE(direct);
    EXPECT_NEAR(r.max_ride, 1.5 * direct->time, 1e-9);
    EXPECT_GE(r.max_ride, direct->time);
    EXPECT_DOUBLE_EQ(*r.latest - *r.earliest, 900.0);
    EXPECT_GE(r.seats, 1);
    EXPECT_LE(r.seats, 5);
    EXPECT_EQ(r.fare, 260 + std::llround(280.0 * direct->cost.miles()));
    EXPECT_GE(*r.earliest, 0.0);
    EXPECT_LT(*r.earliest, 1800.0);
    EXPECT_EQ(a.interval, static_cast<std::size_t>(*r.earliest / 180.0));
  }
}

TEST(GenerateScenario, DeterministicAndSeedSensitive) {
  const auto a = generate_scenario(3);
  const auto b = generate_scenario(3);
  const auto c = generate_scenario(4);
  EXPECT_EQ(a.arrivals, b.arrivals);
  EXPECT_EQ(a.vehicles, b.vehicles);
  EXPECT_EQ(a.network.fingerprint(), b.network.fingerprint());
  EXPECT_NE(a.network.fingerprint(), c.network.fingerprint());
}

TEST(GenerateScenario, EmptyPoolAndBadParameters) {
  GeneratorParams p;
  p.requests = 0;
  const auto sc = generate_scenario(1, p);
  EXPECT_TRUE(sc.arrivals.empty());
  EXPECT_NO_THROW(sc.validate());

  p = {};
  p.stations = 100;
  EXPECT_THROW(generate_scenario(1, p), InputError);
  p = {};
  p.min_seats = 3;
  p.max_seats = 2;
  EXPECT_THROW(generate_scenario(1, p), InputError);
  p = {};
  p.vehicles = 0;
  EXPECT_THROW(generate_scenario(1, p), InputError);
}

TEST(Rechunk, PresetsSplitTheSamePoolEvenly) {
  const auto base = generate_scenario(11);
  for (auto [intervals, per] : {std::pair{10u, 10u}, std::pair{20u, 5u}}) {
    const auto sc = rechunk(base, intervals, 1800.0);
    EXPECT_EQ(sc.horizon, intervals);
    std::map<std::size_t, std::size_t> count;
    for (const auto& a : sc.arrivals) ++count[a.interval];
    ASSERT_EQ(count.size(), intervals);
    for (auto [n, c] : count) EXPECT_EQ(c, per) << "interval " << n;
    EXPECT_NO_THROW(sc.validate());
  }
}

TEST(ScenarioCheck, RejectsBrokenScenarios) {
  auto sc = line_scenario({trip(10, 2, 3, 0)});
  EXPECT_NO_THROW(sc.validate());
  auto late = sc;
  late.arrivals[0].interval = 1;
  EXPECT_THROW(late.validate(), InputError);
  auto dup = sc;
  dup.arrivals.push_back(dup.arrivals[0]);
  EXPECT_THROW(dup.validate(), InputError);
  auto zero = sc;
  zero.horizon = 0;
  EXPECT_THROW(zero.validate(), InputError);
  auto off = sc;
  off.arrivals[0].request.pickup = 99;
  EXPECT_THROW(off.validate(), InputError);
}

TEST(RunInterval, IdleIntervalChangesNothingButTheClock) {
  const auto sc = line_scenario({});
  auto state = initial_state(sc);
  const Seconds before = state.clock;
  const auto rep = run_interval(state, {}, sc);
  EXPECT_TRUE(rep.admitted.empty());
  EXPECT_TRUE(rep.schedules.empty());
  EXPECT_EQ(rep.profit, 0);
  EXPECT_EQ(state.ledger, Ledger{});
  EXPECT_DOUBLE_EQ(state.clock, before + sc.interval_seconds);
  EXPECT_EQ(state.vehicles, sc.vehicles);
}

TEST(RunInterval, AdmitsCommitsAndAdvances) {
  // decided at 180, picked up at 240 on vertex 2, dropped at 5 at 420
  auto r = trip(10, 2, 5, 0);
  const auto sc = line_scenario({r}, 3);
  auto state = initial_state(sc);

  auto rep = run_interval(state, arrivals_of(sc, 0), sc);
  EXPECT_EQ(rep.admitted, (std::vector<RequestId>{10}));
  EXPECT_EQ(rep.newly_admitted, (std::vector<RequestId>{10}));
  ASSERT_EQ(rep.schedules.count(1), 1u);
  EXPECT_DOUBLE_EQ(rep.schedules.at(1).stops[1].time, 240.0);
  EXPECT_EQ(rep.profit, 5000 - 64);
  EXPECT_EQ(report_violations(rep, sc.network), 0u);

  EXPECT_EQ(state.requests.at(10).state, RequestState::InService);
  EXPECT_TRUE(state.vehicles[0].in_service.contains(10));
  EXPECT_EQ(state.vehicles[0].next_vertex, 4);
  EXPECT_DOUBLE_EQ(state.vehicles[0].time_to_next, 0.0);
  EXPECT_DOUBLE_EQ(state.vehicles[0].max_operation, 14400 - 180);

  rep = run_interval(state, {}, sc);
  EXPECT_EQ(rep.admitted, (std::vector<RequestId>{10}));
  EXPECT_TRUE(rep.newly_admitted.empty());
  EXPECT_EQ(rep.profit, 0);
  EXPECT_EQ(report_violations(rep, sc.network), 0u);
  EXPECT_EQ(state.requests.at(10).state, RequestState::Completed);
  EXPECT_EQ(state.vehicles[0].next_vertex, 5);
  EXPECT_DOUBLE_EQ(state.vehicles[0].max_operation, sc.refuel_operation);
  EXPECT_TRUE(state.plans.empty());
  EXPECT_EQ(state.ledger.profit, 5000 - 64);
}

TEST(RunInterval, UnprofitableRequestIsCarriedAndUnservableExcluded) {
  auto cheap = trip(10, 2, 3, 0);
  cheap.fare = 10;
  auto gone = trip(11, 4, 5, 0);
  gone.latest = 100;  // nobody reaches vertex 4 by then
  const auto sc = line_scenario({cheap, gone}, 2);
  auto state = initial_state(sc);
  auto rep = run_interval(state, arrivals_of(sc, 0), sc);
  EXPECT_EQ(rep.carried, (std::vector<RequestId>{10}));
  EXPECT_EQ(rep.excluded, (std::vector<RequestId>{11}));
  EXPECT_EQ(state.requests.at(11).state, RequestState::Rejected);
  EXPECT_EQ(state.requests.at(10).state, RequestState::CarriedOver);

  rep = run_interval(state, {}, sc);
  EXPECT_EQ(rep.carried_in, (std::vector<RequestId>{10}));
  EXPECT_TRUE(std::find(rep.carried.begin(), rep.carried.end(), 10) != rep.carried.end());
}

TEST(RunInterval, OversizedArrivalIsSplit) {
  auto big = trip(10, 2, 5, 0, 7);
  big.fare = 7000;
  const auto sc = line_scenario({big});
  auto state = initial_state(sc);
  run_interval(state, arrivals_of(sc, 0), sc);
  ASSERT_EQ(state.requests.size(), 2u);
  EXPECT_EQ(state.requests.at(10).seats, 5);
  EXPECT_EQ(state.requests.at(11).seats, 2);
  EXPECT_EQ(state.requests.at(11).split_from, 10);
}

TEST(RunHorizon, ZeroFaresEarnNothing) {
  auto sc = generate_scenario(5);
  for (auto& a : sc.arrivals) a.request.fare = 0;
  const auto res = run_horizon(sc);
  for (const auto& rep : res.reports) {
    EXPECT_TRUE(rep.newly_admitted.empty());
    EXPECT_EQ(rep.cumulative_profit, 0);
  }
}

TEST(RunHorizon, SingleIntervalMatchesRunInterval) {
  GeneratorParams p;
  p.requests = 8;
  p.arrival_span = 180.0;
  const auto sc = generate_scenario(2, p);
  ASSERT_EQ(sc.horizon, 1u);
  const auto res = run_horizon(sc);
  auto state = initial_state(sc);
  const auto rep = run_interval(state, arrivals_of(sc, 0), sc);
  ASSERT_EQ(res.reports.size(), 1u);
  EXPECT_EQ(res.reports[0].admitted, rep.admitted);
  EXPECT_EQ(res.reports[0].schedules, rep.schedules);
  EXPECT_EQ(res.final_state.ledger, state.ledger);
}

class HorizonProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(HorizonProperties, LedgerConservationCommitmentAndValidity) {
  const auto sc = rechunk(generate_scenario(GetParam()), GetParam() % 2 ? 20 : 10, 1800.0);
  const auto res = run_horizon(sc);
  const auto again = run_horizon(sc);

  Cents previous = 0;
  std::map<RequestId, VehicleId> carrier;
  for (std::size_t n = 0; n < res.reports.size(); ++n) {
    const auto& rep = res.reports[n];
    EXPECT_GE(rep.profit, 0);
    EXPECT_GE(rep.cumulative_profit, previous);
    previous = rep.cumulative_profit;
    EXPECT_EQ(report_violations(rep, sc.network), 0u);

    std::set<RequestId> pool;
    for (const auto& r : rep.pool) pool.insert(r.id);
    std::multiset<RequestId> parts(rep.admitted.begin(), rep.admitted.end());
    parts.insert(rep.carried.begin(), rep.carried.end());
    parts.insert(rep.excluded.begin(), rep.excluded.end());
    EXPECT_EQ(parts, std::multiset<RequestId>(pool.begin(), pool.end()));

    for (const auto& r : rep.pool) {
      if (r.state != RequestState::InService) continue;
      auto [it, fresh] = carrier.emplace(r.id, *r.assigned_vehicle);
      EXPECT_EQ(it->second, *r.assigned_vehicle) << "request " << r.id << " changed vehicle";
      const auto& s = rep.schedules.at(it->second);
      EXPECT_TRUE(std::any_of(s.stops.begin(), s.stops.end(),
                              [&](const ScheduledStop& st) { return st.request == r.id; }));
      (void)fresh;
    }

    EXPECT_EQ(rep.admitted, again.reports[n].admitted);
    EXPECT_EQ(rep.schedules, again.reports[n].schedules);
    EXPECT_EQ(rep.cumulative_profit, again.reports[n].cumulative_profit);
  }

  const auto& st = res.final_state;
  EXPECT_EQ(st.ledger.profit, st.ledger.revenue - st.ledger.cost);
  EXPECT_EQ(st.requests.size(), sc.arrivals.size());
  std::map<RequestId, int> on_board;
  for (const auto& k : st.vehicles) {
    for (auto id : k.in_service) ++on_board[id];
  }
  for (const auto& [id, r] : st.requests) {
    if (r.state == RequestState::InService) EXPECT_EQ(on_board[id], 1) << "request " << id;
    const bool pending = std::find(st.pending.begin(), st.pending.end(), id) != st.pending.end();
    EXPECT_EQ(pending, r.state == RequestState::New || r.state == RequestState::CarriedOver);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, HorizonProperties, ::testing::Range<std::uint64_t>(1, 7));

namespace {

/// One vehicle at vertex 1 holding request 10 (pickup 3 at t=1000), parked
/// at vertex 3 after the first interval.
struct Waiting {
  Scenario sc;
  SystemState state;

  explicit Waiting(int seats = 1, bool second = false) {
    std::vector<Request> rs{trip(10, 3, 4, 1000, seats)};
    if (second) rs.push_back(trip(12, 4, 5, 1100));
    sc = line_scenario(rs, 3);
    state = initial_state(sc);
    run_interval(state, arrivals_of(sc, 0), sc);
  }
};

}  // namespace

TEST(TrafficUpdate, UnusedEdgeOnlyChangesTheNetwork) {
  Waiting w;
  ASSERT_EQ(w.state.vehicles[0].next_vertex, 3);
  const auto before = w.state;
  const auto impact = apply_traffic_update(w.state, 1, 2, 500.0, w.sc);
  EXPECT_EQ(impact.vehicles.at(1), TrafficCase::Unused);
  EXPECT_EQ(w.state.requests, before.requests);
  EXPECT_EQ(w.state.vehicles, before.vehicles);
  EXPECT_EQ(w.state.ledger, before.ledger);
  EXPECT_NE(w.state.network.fingerprint(), before.network.fingerprint());
}

TEST(TrafficUpdate, UnservedRouteSendsRequestsBackAsNew) {
  Waiting w;
  const Cents revenue_before = w.state.ledger.revenue;
  const auto impact = apply_traffic_update(w.state, 3, 4, 500.0, w.sc);
  EXPECT_EQ(impact.vehicles.at(1), TrafficCase::Replan);
  EXPECT_EQ(impact.demoted, (std::vector<RequestId>{10}));
  EXPECT_EQ(w.state.requests.at(10).state, RequestState::New);
  EXPECT_EQ(w.state.pending, (std::vector<RequestId>{10}));
  EXPECT_TRUE(w.state.vehicles[0].assigned_unserved.empty());
  EXPECT_TRUE(w.state.plans.empty());
  EXPECT_EQ(w.state.ledger.revenue, revenue_before - 5000);
  EXPECT_EQ(w.state.ledger.cost, 32);  // the two miles already driven to vertex 3

  const auto rep = run_interval(w.state, {}, w.sc);
  EXPECT_EQ(rep.newly_admitted, (std::vector<RequestId>{10}));
}

TEST(TrafficUpdate, OnBoardRouteKeepsScheduleAndCompensates) {
  auto sc = line_scenario({trip(10, 2, 5, 0)}, 3);
  auto state = initial_state(sc);
  run_interval(state, arrivals_of(sc, 0), sc);
  ASSERT_EQ(state.requests.at(10).state, RequestState::InService);
  const auto plan = state.plans.at(1).schedule;
  const auto impact = apply_traffic_update(state, 4, 5, 400.0, sc);
  EXPECT_EQ(impact.vehicles.at(1), TrafficCase::Compensate);
  EXPECT_EQ(impact.compensated, (std::vector<RequestId>{10}));
  EXPECT_TRUE(state.requests.at(10).compensation);
  EXPECT_EQ(state.plans.at(1).schedule, plan);

  EXPECT_NO_THROW(run_interval(state, {}, sc));
}

TEST(TrafficUpdate, UnknownEdgeIsAnInputError) {
  Waiting w;
  EXPECT_THROW(apply_traffic_update(w.state, 1, 3, 10.0, w.sc), InputError);
}

TEST(NoShow, ZeroAbsentChangesNothing) {
  Waiting w(4);
  const auto before = w.state;
  apply_no_show(w.state, 10, 0, w.sc);
  EXPECT_EQ(w.state.requests, before.requests);
  EXPECT_EQ(w.state.plans.at(1).schedule, before.plans.at(1).schedule);
}

TEST(NoShow, PartialAbsenceFreesSeatsAlongTheRide) {
  Waiting w(4);
  const auto before = w.state.plans.at(1).schedule;
  apply_no_show(w.state, 10, 2, w.sc);
  EXPECT_EQ(w.state.requests.at(10).seats, 2);
  const auto& after = w.state.plans.at(1).schedule;
  ASSERT_EQ(after.stops.size(), before.stops.size());
  for (std::size_t i = 0; i < after.stops.size(); ++i) {
    EXPECT_DOUBLE_EQ(after.stops[i].time, before.stops[i].time);
    const bool riding = before.stops[i].kind == StopKind::Pickup;
    EXPECT_EQ(after.stops[i].occupancy, before.stops[i].occupancy - (riding ? 2 : 0)) << "stop " << i;
  }
  for (const auto& e : plan_violations(w.state, 1)) ADD_FAILURE() << e;
}

TEST(NoShow, FullAbsenceDropsStopsAndResettles) {
  Waiting w(1, true);
  ASSERT_TRUE(w.state.vehicles[0].assigned_unserved.contains(12));
  const Cents cost_before = w.state.ledger.cost;
  apply_no_show(w.state, 10, 1, w.sc);
  EXPECT_EQ(w.state.requests.at(10).state, RequestState::CompletedUnserved);
  EXPECT_FALSE(w.state.vehicles[0].assigned_unserved.contains(10));
  for (const auto& st : w.state.plans.at(1).schedule.stops) EXPECT_NE(st.request, 10);
  for (const auto& e : plan_violations(w.state, 1)) ADD_FAILURE() << e;
  EXPECT_LE(w.state.ledger.cost, cost_before);
  EXPECT_EQ(w.state.ledger.profit, w.state.ledger.revenue - w.state.ledger.cost);

  Waiting alone(1);
  apply_no_show(alone.state, 10, 1, alone.sc);
  EXPECT_TRUE(alone.state.plans.empty());
  EXPECT_EQ(alone.state.ledger.cost, 32);
}

TEST(NoShow, TooManyAbsentOrNotWaiting) {
  Waiting w(2);
  EXPECT_THROW(apply_no_show(w.state, 10, 3, w.sc), InputError);
  EXPECT_THROW(apply_no_show(w.state, 99, 1, w.sc), InputError);
  auto sc = line_scenario({trip(10, 2, 5, 0)}, 3);
  auto state = initial_state(sc);
  run_interval(state, arrivals_of(sc, 0), sc);
  EXPECT_THROW(apply_no_show(state, 10, 1, sc), InputError);
}
