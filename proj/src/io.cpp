#include "fleet_dispatch/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace fleet {

namespace {

template <typename T>
void put_optional(Json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

template <typename T>
std::optional<T> get_optional(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

void check_version(const Json& j, std::string_view what) {
  if (!j.is_object() || !j.contains("format_version")) {
    throw InputError(std::string(what) + ": missing format_version");
  }
  const int v = j.at("format_version").get<int>();
  if (v != kFormatVersion) {
    throw InputError(std::string(what) + ": unsupported format_version " + std::to_string(v));
  }
}

Json stamped(std::string_view kind) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = kind;
  return j;
}

/// nlohmann reports missing keys and wrong types with its own exceptions.
template <typename F>
auto guarded(std::string_view what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

void to_json(Json& j, const Edge& e) {
  j = Json{{"from", e.from}, {"to", e.to}, {"cost", e.cost}, {"time", e.time}};
}

void from_json(const Json& j, Edge& e) {
  e.from = j.at("from").get<VertexId>();
  e.to = j.at("to").get<VertexId>();
  e.cost = j.at("cost").get<double>();
  e.time = j.at("time").get<Seconds>();
}

void to_json(Json& j, const RoadNetwork& net) {
  j = Json{{"vertices", net.vertices()},
           {"refuel_stations", net.refuel_stations()},
           {"edges", net.edges()}};
}

void from_json(const Json& j, RoadNetwork& net) {
  net = RoadNetwork(j.at("vertices").get<std::vector<VertexId>>(),
                    j.at("edges").get<std::vector<Edge>>(),
                    j.at("refuel_stations").get<std::vector<VertexId>>());
}

void to_json(Json& j, const Request& r) {
  j = Json{{"id", r.id}, {"pickup", r.pickup}, {"dropoff", r.dropoff}, {"max_ride", r.max_ride}};
  put_optional(j, "earliest", r.earliest);
  put_optional(j, "latest", r.latest);
  j["seats"] = r.seats;
  j["fare"] = r.fare;
  j["state"] = to_string(r.state);
  put_optional(j, "assigned_vehicle", r.assigned_vehicle);
  put_optional(j, "split_from", r.split_from);
  j["compensation"] = r.compensation;
}

void from_json(const Json& j, Request& r) {
  r = Request{};
  r.id = j.at("id").get<RequestId>();
  r.pickup = j.at("pickup").get<VertexId>();
  r.dropoff = j.at("dropoff").get<VertexId>();
  r.max_ride = j.at("max_ride").get<Seconds>();
  r.earliest = get_optional<Seconds>(j, "earliest");
  r.latest = get_optional<Seconds>(j, "latest");
  r.seats = j.value("seats", 1);
  r.fare = j.value("fare", Cents{0});
  if (j.contains("state")) r.state = request_state_from_string(j.at("state").get<std::string>());
  r.assigned_vehicle = get_optional<VehicleId>(j, "assigned_vehicle");
  r.split_from = get_optional<RequestId>(j, "split_from");
  r.compensation = j.value("compensation", false);
}

void to_json(Json& j, const Vehicle& k) {
  j = Json{{"id", k.id},
           {"next_vertex", k.next_vertex},
           {"time_to_next", k.time_to_next},
           {"max_operation", k.max_operation},
           {"capacity", k.capacity},
           {"in_service", k.in_service},
           {"assigned_unserved", k.assigned_unserved}};
}

void from_json(const Json& j, Vehicle& k) {
  k = Vehicle{};
  k.id = j.at("id").get<VehicleId>();
  k.next_vertex = j.at("next_vertex").get<VertexId>();
  k.time_to_next = j.value("time_to_next", 0.0);
  k.max_operation = j.at("max_operation").get<Seconds>();
  k.capacity = j.at("capacity").get<int>();
  if (j.contains("in_service")) k.in_service = j.at("in_service").get<std::set<RequestId>>();
  if (j.contains("assigned_unserved")) {
    k.assigned_unserved = j.at("assigned_unserved").get<std::set<RequestId>>();
  }
}

void to_json(Json& j, const ScheduledStop& s) {
  j = Json{{"vertex", s.vertex}, {"kind", to_string(s.kind)}};
  put_optional(j, "request", s.request);
  j["time"] = s.time;
  j["occupancy"] = s.occupancy;
}

void from_json(const Json& j, ScheduledStop& s) {
  s.vertex = j.at("vertex").get<VertexId>();
  s.kind = stop_kind_from_string(j.at("kind").get<std::string>());
  s.request = get_optional<RequestId>(j, "request");
  s.time = j.at("time").get<Seconds>();
  s.occupancy = j.at("occupancy").get<int>();
}

void to_json(Json& j, const Schedule& s) {
  j = Json{{"vehicle", s.vehicle}, {"stops", s.stops}};
  put_optional(j, "end_station", s.end_station);
  j["distance_micro"] = s.distance.micro();
  j["route"] = s.route;
}

void from_json(const Json& j, Schedule& s) {
  s = Schedule{};
  s.vehicle = j.at("vehicle").get<VehicleId>();
  s.stops = j.at("stops").get<std::vector<ScheduledStop>>();
  s.end_station = get_optional<VertexId>(j, "end_station");
  s.distance = Distance::from_micro(j.at("distance_micro").get<std::int64_t>());
  s.route = j.at("route").get<std::vector<VertexId>>();
}

void to_json(Json& j, const GAConfig& c) {
  j = Json{{"n-pop", c.n_pop},         {"x-rate", c.x_rate}, {"mu", c.mu},
           {"gamma", c.gamma},         {"generations", c.generations},
           {"seed", c.seed},           {"discount", c.discount}};
}

void from_json(const Json& j, GAConfig& c) {
  c = GAConfig{};
  c.n_pop = j.value("n-pop", c.n_pop);
  c.x_rate = j.value("x-rate", c.x_rate);
  c.mu = j.value("mu", c.mu);
  c.gamma = j.value("gamma", c.gamma);
  c.generations = j.value("generations", c.generations);
  c.seed = j.value("seed", c.seed);
  c.discount = j.value("discount", c.discount);
}

void to_json(Json& j, const TracePoint& t) { j = Json{{"best", t.best}, {"mean", t.mean}}; }

void from_json(const Json& j, TracePoint& t) {
  t.best = j.at("best").get<Cents>();
  t.mean = j.at("mean").get<double>();
}

void to_json(Json& j, const IntervalReport& r) {
  j = stamped("interval_report");
  j["interval"] = r.interval;
  j["clock"] = r.clock;
  j["admitted"] = r.admitted;
  j["newly_admitted"] = r.newly_admitted;
  j["carried"] = r.carried;
  j["carried_in"] = r.carried_in;
  j["excluded"] = r.excluded;
  j["demoted"] = r.demoted;
  j["profit_cents"] = r.profit;
  j["cumulative_profit_cents"] = r.cumulative_profit;
  j["cumulative_admitted"] = r.cumulative_admitted;
  Json schedules = Json::array();
  for (const auto& [id, s] : r.schedules) schedules.push_back(s);
  j["schedules"] = std::move(schedules);
  j["vehicles"] = r.vehicles;
  j["pool"] = r.pool;
  j["trace"] = r.trace;
}

void from_json(const Json& j, IntervalReport& r) {
  check_version(j, "interval report");
  r = IntervalReport{};
  r.interval = j.at("interval").get<std::size_t>();
  r.clock = j.at("clock").get<Seconds>();
  r.admitted = j.at("admitted").get<std::vector<RequestId>>();
  r.newly_admitted = j.at("newly_admitted").get<std::vector<RequestId>>();
  r.carried = j.at("carried").get<std::vector<RequestId>>();
  r.carried_in = j.at("carried_in").get<std::vector<RequestId>>();
  r.excluded = j.at("excluded").get<std::vector<RequestId>>();
  r.demoted = j.at("demoted").get<std::vector<RequestId>>();
  r.profit = j.at("profit_cents").get<Cents>();
  r.cumulative_profit = j.at("cumulative_profit_cents").get<Cents>();
  r.cumulative_admitted = j.at("cumulative_admitted").get<std::size_t>();
  for (const auto& s : j.at("schedules")) {
    auto schedule = s.get<Schedule>();
    r.schedules[schedule.vehicle] = std::move(schedule);
  }
  r.vehicles = j.at("vehicles").get<std::vector<Vehicle>>();
  r.pool = j.at("pool").get<std::vector<Request>>();
  r.trace = j.at("trace").get<std::vector<TracePoint>>();
}

Json scenario_to_json(const Scenario& sc) {
  Json j = stamped("scenario");
  j["seed"] = sc.seed;
  j["network"] = sc.network;
  j["vehicles"] = sc.vehicles;
  Json arrivals = Json::array();
  for (const auto& a : sc.arrivals) arrivals.push_back(Json{{"interval", a.interval}, {"request", a.request}});
  j["arrivals"] = std::move(arrivals);
  j["interval_seconds"] = sc.interval_seconds;
  j["horizon"] = sc.horizon;
  j["ga"] = sc.ga;
  j["fuel_cents_per_mile"] = sc.fuel_cents_per_mile;
  j["discount"] = sc.discount;
  j["refuel_operation"] = sc.refuel_operation;
  return j;
}

Scenario scenario_from_json(const Json& j, const std::filesystem::path& base_dir) {
  check_version(j, "scenario");
  return guarded("scenario", [&] {
    Scenario sc;
    sc.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("network")) {
      sc.network = j.at("network").get<RoadNetwork>();
    } else if (j.contains("network_file")) {
      std::filesystem::path ref = j.at("network_file").get<std::string>();
      if (ref.is_relative()) ref = base_dir / ref;
      const Json net = read_json(ref);
      sc.network = (net.contains("network") ? net.at("network") : net).get<RoadNetwork>();
    } else {
      throw InputError("scenario: needs either network or network_file");
    }
    sc.vehicles = j.at("vehicles").get<std::vector<Vehicle>>();
    for (const auto& a : j.at("arrivals")) {
      sc.arrivals.push_back(Arrival{a.at("request").get<Request>(), a.at("interval").get<std::size_t>()});
    }
    sc.interval_seconds = j.value("interval_seconds", sc.interval_seconds);
    sc.horizon = j.value("horizon", sc.horizon);
    if (j.contains("ga")) sc.ga = j.at("ga").get<GAConfig>();
    sc.fuel_cents_per_mile = j.value("fuel_cents_per_mile", sc.fuel_cents_per_mile);
    sc.discount = j.value("discount", sc.discount);
    sc.refuel_operation = j.value("refuel_operation", sc.refuel_operation);
    sc.validate();
    return sc;
  });
}

Json fleet_result_to_json(const FleetResult& result, double cents_per_mile) {
  Json j = stamped("schedules");
  Json schedules = Json::array();
  for (const auto& [id, s] : result.schedules) {
    Json entry = s;
    entry["cost_cents"] = cost_in_cents(s.distance, cents_per_mile);
    schedules.push_back(std::move(entry));
  }
  j["schedules"] = std::move(schedules);
  j["total_distance_micro"] = result.total_distance.micro();
  j["total_cost_cents"] = result.total_cost;
  return j;
}

Json outcome_to_json(const AdmissionOutcome& outcome) {
  Json j = stamped("admission");
  j["profit_cents"] = outcome.profit;
  j["admitted"] = outcome.admitted;
  j["rejected"] = outcome.rejected;
  j["admit"] = outcome.best.admit;
  j["vehicle_index"] = outcome.best.vehicle;
  Json schedules = Json::array();
  for (const auto& [id, s] : outcome.result.schedules) schedules.push_back(s);
  j["schedules"] = std::move(schedules);
  j["total_cost_cents"] = outcome.result.total_cost;
  j["trace"] = outcome.trace;
  return j;
}

Assignment assignment_from_json(const Json& j) {
  check_version(j, "assignment");
  return guarded("assignment", [&] {
    Assignment out;
    for (const auto& entry : j.at("assignment")) {
      const auto vehicle = entry.at("vehicle").get<VehicleId>();
      for (auto id : entry.at("requests").get<std::vector<RequestId>>()) {
        if (!out.emplace(id, vehicle).second) {
          throw InputError("assignment: request " + std::to_string(id) + " listed twice");
        }
      }
    }
    return out;
  });
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

Json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(read_json(path), path.parent_path());
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot replace " + path.string());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string horizon_csv(const std::vector<IntervalReport>& reports) {
  std::string out = "interval,admitted,carried,profit_cents,cumulative_profit_cents,cumulative_admitted\n";
  for (const auto& r : reports) {
    out += std::to_string(r.interval) + "," + std::to_string(r.newly_admitted.size()) + "," +
           std::to_string(r.carried.size()) + "," + std::to_string(r.profit) + "," +
           std::to_string(r.cumulative_profit) + "," + std::to_string(r.cumulative_admitted) + "\n";
  }
  return out;
}

std::string trace_csv(const std::vector<TraceRun>& runs, std::optional<Cents> optimum) {
  std::string out = "run,seed,generation,best,mean";
  out += optimum ? ",normalized\n" : "\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t g = 0; g < runs[i].trace.size(); ++g) {
      const auto& t = runs[i].trace[g];
      out += std::to_string(i) + "," + std::to_string(runs[i].seed) + "," + std::to_string(g) + "," +
             std::to_string(t.best) + "," + format_double(t.mean);
      if (optimum) {
        const double norm = *optimum != 0 ? static_cast<double>(t.best) / static_cast<double>(*optimum) : 1.0;
        out += "," + format_double(norm);
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace fleet
