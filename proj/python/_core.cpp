#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include "fleet_dispatch/admission.hpp"
#include "fleet_dispatch/fleet_scheduler.hpp"
#include "fleet_dispatch/io.hpp"
#include "fleet_dispatch/simulator.hpp"
#include "fleet_dispatch/validator.hpp"
#include "fleet_dispatch/vehicle_scheduler.hpp"

namespace py = pybind11;
using namespace fleet;

namespace {

RunOptions run_options(const std::string& mode, std::size_t workers) {
  RunOptions o;
  o.mode = execution_mode_from_string(mode);
  o.workers = workers;
  return o;
}

FleetOptions fleet_options(const Scenario& sc, const std::string& mode, std::size_t workers) {
  FleetOptions o;
  o.mode = execution_mode_from_string(mode);
  o.workers = workers;
  o.cents_per_mile = sc.fuel_cents_per_mile;
  return o;
}

ReducedNetwork reduce_for(const RoadNetwork& net, const Vehicle& k, const std::vector<Request>& reqs) {
  std::vector<VertexId> keys{k.next_vertex};
  for (const auto& r : reqs) {
    keys.push_back(r.pickup);
    keys.push_back(r.dropoff);
  }
  return reduce(net, keys);
}

template <class T>
std::string repr_json(const T& value) {
  return Json(value).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fleet scheduling and admission control for shared autonomous vehicles";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<InfeasibleRouteError>(m, "InfeasibleRouteError", PyExc_RuntimeError);
  py::register_exception<ConstraintViolated>(m, "ConstraintViolated", PyExc_RuntimeError);
  py::register_exception<OracleCapExceeded>(m, "OracleCapExceeded", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::enum_<RequestState>(m, "RequestState")
      .value("New", RequestState::New)
      .value("CarriedOver", RequestState::CarriedOver)
      .value("AssignedUnserved", RequestState::AssignedUnserved)
      .value("InService", RequestState::InService)
      .value("Completed", RequestState::Completed)
      .value("CompletedUnserved", RequestState::CompletedUnserved)
      .value("Rejected", RequestState::Rejected);

  py::enum_<StopKind>(m, "StopKind")
      .value("Start", StopKind::Start)
      .value("Pickup", StopKind::Pickup)
      .value("Dropoff", StopKind::Dropoff)
      .value("Refuel", StopKind::Refuel);

  py::class_<Edge>(m, "Edge")
      .def(py::init([](VertexId from, VertexId to, double miles, Seconds time) { return Edge{from, to, miles, time}; }),
           py::arg("source"), py::arg("target"), py::arg("miles"), py::arg("time"))
      .def_readwrite("source", &Edge::from)
      .def_readwrite("target", &Edge::to)
      .def_readwrite("miles", &Edge::cost)
      .def_readwrite("time", &Edge::time)
      .def("__repr__", &repr_json<Edge>);

  py::class_<RoadNetwork>(m, "RoadNetwork")
      .def(py::init<std::vector<VertexId>, std::vector<Edge>, std::vector<VertexId>>(), py::arg("vertices"),
           py::arg("edges"), py::arg("refuel_stations"))
      .def_property_readonly("vertices", &RoadNetwork::vertices)
      .def_property_readonly("edges", &RoadNetwork::edges)
      .def_property_readonly("refuel_stations", &RoadNetwork::refuel_stations);

  m.def(
      "shortest_path",
      [](const RoadNetwork& net, VertexId from, VertexId to) -> std::optional<py::tuple> {
        auto p = shortest_path(net, from, to);
        if (!p) return std::nullopt;
        return py::make_tuple(p->path, p->cost.miles(), p->time);
      },
      py::arg("network"), py::arg("source"), py::arg("target"),
      "(path, miles, seconds) of the cheapest path, or None.");

  py::class_<Request>(m, "Request")
      .def(py::init<>())
      .def(py::init([](RequestId id, VertexId pickup, VertexId dropoff, Seconds max_ride,
                       std::optional<Seconds> earliest, std::optional<Seconds> latest, int seats, Cents fare) {
             Request r;
             r.id = id;
             r.pickup = pickup;
             r.dropoff = dropoff;
             r.max_ride = max_ride;
             r.earliest = earliest;
             r.latest = latest;
             r.seats = seats;
             r.fare = fare;
             validate(r);
             return r;
           }),
           py::arg("id"), py::arg("pickup"), py::arg("dropoff"), py::arg("max_ride"),
           py::arg("earliest") = py::none(), py::arg("latest") = py::none(), py::arg("seats") = 1,
           py::arg("fare") = 0)
      .def_readwrite("id", &Request::id)
      .def_readwrite("pickup", &Request::pickup)
      .def_readwrite("dropoff", &Request::dropoff)
      .def_readwrite("max_ride", &Request::max_ride)
      .def_readwrite("earliest", &Request::earliest)
      .def_readwrite("latest", &Request::latest)
      .def_readwrite("seats", &Request::seats)
      .def_readwrite("fare", &Request::fare)
      .def_readwrite("state", &Request::state)
      .def_readwrite("assigned_vehicle", &Request::assigned_vehicle)
      .def_readwrite("split_from", &Request::split_from)
      .def_readwrite("compensation", &Request::compensation)
      .def(py::self == py::self)
      .def("__repr__", &repr_json<Request>);

  py::class_<Vehicle>(m, "Vehicle")
      .def(py::init<>())
      .def(py::init([](VehicleId id, VertexId next_vertex, int capacity, Seconds max_operation,
                       Seconds time_to_next) {
             Vehicle k;
             k.id = id;
             k.next_vertex = next_vertex;
             k.capacity = capacity;
             k.max_operation = max_operation;
             k.time_to_next = time_to_next;
             validate(k);
             return k;
           }),
           py::arg("id"), py::arg("next_vertex"), py::arg("capacity"), py::arg("max_operation"),
           py::arg("time_to_next") = 0.0)
      .def_readwrite("id", &Vehicle::id)
      .def_readwrite("next_vertex", &Vehicle::next_vertex)
      .def_readwrite("time_to_next", &Vehicle::time_to_next)
      .def_readwrite("max_operation", &Vehicle::max_operation)
      .def_readwrite("capacity", &Vehicle::capacity)
      .def_readwrite("in_service", &Vehicle::in_service)
      .def_readwrite("assigned_unserved", &Vehicle::assigned_unserved)
      .def(py::self == py::self)
      .def("__repr__", &repr_json<Vehicle>);

  py::class_<ScheduledStop>(m, "ScheduledStop")
      .def_readonly("vertex", &ScheduledStop::vertex)
      .def_readonly("kind", &ScheduledStop::kind)
      .def_readonly("request", &ScheduledStop::request)
      .def_readonly("time", &ScheduledStop::time)
      .def_readonly("occupancy", &ScheduledStop::occupancy)
      .def("__repr__", &repr_json<ScheduledStop>);

  py::class_<Schedule>(m, "Schedule")
      .def_readonly("vehicle", &Schedule::vehicle)
      .def_readonly("stops", &Schedule::stops)
      .def_readonly("end_station", &Schedule::end_station)
      .def_readonly("route", &Schedule::route)
      .def_property_readonly("miles", [](const Schedule& s) { return s.distance.miles(); })
      .def_property_readonly("distance_micro", [](const Schedule& s) { return s.distance.micro(); })
      .def(py::self == py::self)
      .def("__repr__", &repr_json<Schedule>);

  py::class_<FleetResult>(m, "FleetResult")
      .def_readonly("schedules", &FleetResult::schedules)
      .def_readonly("total_cost", &FleetResult::total_cost)
      .def_property_readonly("total_miles", [](const FleetResult& r) { return r.total_distance.miles(); })
      .def(py::self == py::self);

  m.def(
      "solve_vehicle",
      [](const RoadNetwork& net, const Vehicle& k, const std::vector<Request>& reqs) {
        return solve_vehicle(k, reqs, reduce_for(net, k, reqs));
      },
      py::arg("network"), py::arg("vehicle"), py::arg("requests"),
      "Cheapest schedule for one vehicle serving every request, or None.");

  m.def(
      "validate_schedule",
      [](const RoadNetwork& net, const Schedule& s, const Vehicle& k, const std::vector<Request>& reqs) {
        return validate_schedule(s, k, reqs, reduce_for(net, k, reqs));
      },
      py::arg("network"), py::arg("schedule"), py::arg("vehicle"), py::arg("requests"),
      "Violation messages; empty when the schedule is valid.");

  py::class_<GAConfig>(m, "GAConfig")
      .def(py::init<>())
      .def_readwrite("n_pop", &GAConfig::n_pop)
      .def_readwrite("x_rate", &GAConfig::x_rate)
      .def_readwrite("mu", &GAConfig::mu)
      .def_readwrite("gamma", &GAConfig::gamma)
      .def_readwrite("generations", &GAConfig::generations)
      .def_readwrite("seed", &GAConfig::seed)
      .def_readwrite("discount", &GAConfig::discount)
      .def("validate", &GAConfig::validate)
      .def("__repr__", &repr_json<GAConfig>);

  py::class_<Arrival>(m, "Arrival")
      .def(py::init([](Request r, std::size_t interval) { return Arrival{std::move(r), interval}; }),
           py::arg("request"), py::arg("interval"))
      .def_readwrite("request", &Arrival::request)
      .def_readwrite("interval", &Arrival::interval);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("seed", &Scenario::seed)
      .def_readwrite("network", &Scenario::network)
      .def_readwrite("vehicles", &Scenario::vehicles)
      .def_readwrite("arrivals", &Scenario::arrivals)
      .def_readwrite("interval_seconds", &Scenario::interval_seconds)
      .def_readwrite("horizon", &Scenario::horizon)
      .def_readwrite("ga", &Scenario::ga)
      .def_readwrite("fuel_cents_per_mile", &Scenario::fuel_cents_per_mile)
      .def_readwrite("discount", &Scenario::discount)
      .def_readwrite("refuel_operation", &Scenario::refuel_operation)
      .def("validate", &Scenario::validate)
      .def("to_json", [](const Scenario& sc) { return dump(scenario_to_json(sc)); })
      .def_static(
          "from_json", [](const std::string& text) { return scenario_from_json(Json::parse(text)); },
          py::arg("text"))
      .def_static(
          "load", [](const std::string& path) { return load_scenario(path); }, py::arg("path"));

  py::class_<GeneratorParams>(m, "GeneratorParams")
      .def(py::init<>())
      .def_readwrite("requests", &GeneratorParams::requests)
      .def_readwrite("vehicles", &GeneratorParams::vehicles)
      .def_readwrite("vertices", &GeneratorParams::vertices)
      .def_readwrite("stations", &GeneratorParams::stations)
      .def_readwrite("area_miles", &GeneratorParams::area_miles)
      .def_readwrite("pace", &GeneratorParams::pace)
      .def_readwrite("arrival_span", &GeneratorParams::arrival_span)
      .def_readwrite("interval", &GeneratorParams::interval)
      .def_readwrite("strata", &GeneratorParams::strata)
      .def_readwrite("window", &GeneratorParams::window)
      .def_readwrite("capacity", &GeneratorParams::capacity)
      .def_readwrite("fare_base", &GeneratorParams::fare_base)
      .def_readwrite("fare_per_mile", &GeneratorParams::fare_per_mile)
      .def_readwrite("ga", &GeneratorParams::ga);

  m.def("generate_scenario", &generate_scenario, py::arg("seed"), py::arg("params") = GeneratorParams{});
  m.def("rechunk", &rechunk, py::arg("scenario"), py::arg("intervals"), py::arg("span"));

  m.def(
      "solve_assignment",
      [](const Scenario& sc, const std::map<RequestId, VehicleId>& assignment, const std::string& mode,
         std::size_t workers) {
        const auto frame = scenario_frame(sc);
        FleetScheduler scheduler(frame.network, frame.vehicles, frame.pool, fleet_options(sc, mode, workers));
        py::gil_scoped_release release;
        return scheduler.solve(assignment);
      },
      py::arg("scenario"), py::arg("assignment"), py::arg("mode") = "cumulative", py::arg("workers") = 1,
      "Schedules for {request: vehicle} over the scenario's first decision, or None if infeasible.");

  m.def(
      "brute_force_fleet",
      [](const Scenario& sc, std::size_t cap) {
        const auto frame = scenario_frame(sc);
        Assignment best;
        auto result = brute_force_fleet(frame.pool, frame.vehicles, *frame.network, cap,
                                        fleet_options(sc, "cumulative", 1), &best);
        return std::make_pair(result, best);
      },
      py::arg("scenario"), py::arg("cap") = kDefaultOracleCap);

  py::class_<TracePoint>(m, "TracePoint")
      .def_readonly("best", &TracePoint::best)
      .def_readonly("mean", &TracePoint::mean);

  py::class_<AdmissionOutcome>(m, "AdmissionOutcome")
      .def_readonly("profit", &AdmissionOutcome::profit)
      .def_readonly("result", &AdmissionOutcome::result)
      .def_readonly("admitted", &AdmissionOutcome::admitted)
      .def_readonly("rejected", &AdmissionOutcome::rejected)
      .def_readonly("trace", &AdmissionOutcome::trace)
      .def("to_json", [](const AdmissionOutcome& o) { return dump(outcome_to_json(o)); });

  m.def(
      "admit",
      [](const Scenario& sc, std::optional<GAConfig> ga, const std::string& mode, std::size_t workers) {
        auto ctx = scenario_admission(sc, run_options(mode, workers));
        GAConfig cfg = ga.value_or(sc.ga);
        py::gil_scoped_release release;
        return run_admission(*ctx, cfg);
      },
      py::arg("scenario"), py::arg("ga") = py::none(), py::arg("mode") = "cumulative", py::arg("workers") = 1,
      "Runs the genetic admission control over the scenario's first decision.");

  m.def(
      "brute_force_admission",
      [](const Scenario& sc, std::size_t cap) {
        auto ctx = scenario_admission(sc, {});
        return brute_force_admission(*ctx, cap);
      },
      py::arg("scenario"), py::arg("cap") = kDefaultOracleCap);

  py::class_<Ledger>(m, "Ledger")
      .def_readonly("revenue", &Ledger::revenue)
      .def_readonly("cost", &Ledger::cost)
      .def_readonly("profit", &Ledger::profit)
      .def_readonly("admitted", &Ledger::admitted);

  py::class_<IntervalReport>(m, "IntervalReport")
      .def_readonly("interval", &IntervalReport::interval)
      .def_readonly("clock", &IntervalReport::clock)
      .def_readonly("admitted", &IntervalReport::admitted)
      .def_readonly("newly_admitted", &IntervalReport::newly_admitted)
      .def_readonly("carried", &IntervalReport::carried)
      .def_readonly("excluded", &IntervalReport::excluded)
      .def_readonly("demoted", &IntervalReport::demoted)
      .def_readonly("profit", &IntervalReport::profit)
      .def_readonly("cumulative_profit", &IntervalReport::cumulative_profit)
      .def_readonly("cumulative_admitted", &IntervalReport::cumulative_admitted)
      .def_readonly("schedules", &IntervalReport::schedules)
      .def_readonly("vehicles", &IntervalReport::vehicles)
      .def_readonly("pool", &IntervalReport::pool)
      .def_readonly("trace", &IntervalReport::trace)
      .def("to_json", [](const IntervalReport& r) { return dump(Json(r)); })
      .def_static(
          "from_json", [](const std::string& text) { return Json::parse(text).get<IntervalReport>(); },
          py::arg("text"));

  m.def(
      "run_horizon",
      [](const Scenario& sc, const std::string& mode, std::size_t workers) {
        HorizonResult result;
        {
          py::gil_scoped_release release;
          result = run_horizon(sc, run_options(mode, workers));
        }
        return std::make_pair(result.reports, result.final_state.ledger);
      },
      py::arg("scenario"), py::arg("mode") = "cumulative", py::arg("workers") = 1,
      "Per-interval reports and the final ledger.");

  m.def("horizon_csv", &horizon_csv, py::arg("reports"));
  m.attr("FORMAT_VERSION") = kFormatVersion;
}
