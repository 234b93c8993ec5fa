#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "fleet_dispatch/admission.hpp"
#include "fleet_dispatch/fleet_scheduler.hpp"
#include "fleet_dispatch/io.hpp"
#include "fleet_dispatch/simulator.hpp"

namespace fs = std::filesystem;
using namespace fleet;

namespace {

enum Exit { kOk = 0, kUsage = 2, kInfeasible = 3, kIo = 4 };

struct Infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  fs::path out = ".";
  std::string mode = "cumulative";
};

/// GA flags shared by every subcommand that runs admission.
struct GAFlags {
  std::optional<std::size_t> n_pop;
  std::optional<double> x_rate;
  std::optional<double> mu;
  std::optional<double> gamma;
  std::optional<std::size_t> generations;
  std::optional<double> discount;

  void add(CLI::App* app) {
    app->add_option("--n-pop", n_pop, "population size");
    app->add_option("--x-rate", x_rate, "surviving fraction");
    app->add_option("--mu", mu, "mutation rate");
    app->add_option("--gamma", gamma, "random replacement probability");
    app->add_option("--generations", generations, "generation count");
    app->add_option("--discount", discount, "fare discount for revenue");
  }

  void apply(Scenario& sc) const {
    if (n_pop) sc.ga.n_pop = *n_pop;
    if (x_rate) sc.ga.x_rate = *x_rate;
    if (mu) sc.ga.mu = *mu;
    if (gamma) sc.ga.gamma = *gamma;
    if (generations) sc.ga.generations = *generations;
    if (discount) sc.discount = *discount;
    sc.ga.discount = sc.discount;
    sc.ga.validate();
  }
};

RunOptions run_options(const Globals& g) {
  RunOptions o;
  o.mode = execution_mode_from_string(g.mode);
  o.workers = g.workers;
  if (o.workers < 1) throw InputError("--workers must be at least 1");
  return o;
}

fs::path output(const Globals& g, const std::string& name) {
  std::error_code ec;
  fs::create_directories(g.out, ec);
  if (ec) throw IoError("cannot create " + g.out.string());
  return g.out / name;
}

std::size_t default_workers() {
  if (const char* env = std::getenv("FLEET_DISPATCH_WORKERS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring FLEET_DISPATCH_WORKERS=" << env << "\n";
  }
  return 1;
}

int cmd_gen(const Globals& g, GeneratorParams params, const GAFlags& ga, const std::string& name) {
  Scenario sc = generate_scenario(g.seed.value_or(1), params);
  ga.apply(sc);
  write_atomic(output(g, name), dump(scenario_to_json(sc)));
  std::cout << "scenario: " << sc.arrivals.size() << " requests, " << sc.vehicles.size() << " vehicles, "
            << sc.network.vertices().size() << " vertices, horizon " << sc.horizon << ", seed "
            << sc.seed << "\n";
  return kOk;
}

int cmd_schedule(const Globals& g, const fs::path& scenario_path, const std::optional<fs::path>& assignment_path,
                 bool oracle, std::size_t cap, bool timing) {
  const Scenario sc = load_scenario(scenario_path);
  const DecisionFrame frame = scenario_frame(sc);
  const RunOptions run = run_options(g);
  FleetOptions options;
  options.mode = run.mode;
  options.workers = run.workers;
  options.cents_per_mile = sc.fuel_cents_per_mile;

  Assignment assignment;
  std::optional<FleetResult> result;
  Infeasibility why;
  if (oracle) {
    result = brute_force_fleet(frame.pool, frame.vehicles, *frame.network, cap, options, &assignment);
  } else {
    if (!assignment_path) throw InputError("schedule needs --assignment or --oracle");
    assignment = assignment_from_json(read_json(*assignment_path));
    FleetScheduler scheduler(frame.network, frame.vehicles, frame.pool, options);
    result = scheduler.solve(assignment, &why);
  }

  Json doc = result ? fleet_result_to_json(*result, sc.fuel_cents_per_mile) : Json{};
  if (!result) {
    doc["format_version"] = kFormatVersion;
    doc["kind"] = "schedules";
    doc["feasible"] = false;
    doc["failing_vehicle"] = why.vehicle;
    doc["failing_requests"] = why.requests;
  } else {
    doc["feasible"] = true;
  }
  doc["clock"] = frame.clock;
  doc["mode"] = g.mode;
  Json pairs = Json::array();
  for (auto [r, k] : assignment) pairs.push_back(Json{{"request", r}, {"vehicle", k}});
  doc["assignment"] = std::move(pairs);
  write_atomic(output(g, "schedules.json"), dump(doc));

  if (timing && !oracle) {
    for (auto mode : {ExecutionMode::Cumulative, ExecutionMode::Distributed}) {
      FleetOptions o = options;
      o.mode = mode;
      FleetScheduler scheduler(frame.network, frame.vehicles, frame.pool, o);
      const auto t0 = std::chrono::steady_clock::now();
      scheduler.solve(assignment);
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      std::cout << "timing " << to_string(mode) << ": " << ms << " ms (" << o.workers << " workers)\n";
    }
  }
  if (!result && oracle) throw Infeasible("no assignment serves every request");
  if (!result) {
    std::string ids;
    for (auto id : why.requests) ids += " " + std::to_string(id);
    throw Infeasible("vehicle " + std::to_string(why.vehicle) + " cannot serve requests" + ids);
  }
  std::cout << "schedules: " << result->schedules.size() << " vehicles, cost " << result->total_cost
            << " cents\n";
  return kOk;
}

int cmd_admit(const Globals& g, const fs::path& scenario_path, const GAFlags& ga, std::size_t repeats,
              bool oracle, std::size_t cap) {
  Scenario sc = load_scenario(scenario_path);
  ga.apply(sc);
  if (repeats < 1) throw InputError("--repeats must be at least 1");
  auto ctx = scenario_admission(sc, run_options(g));

  std::optional<Cents> optimum;
  Json doc = Json{{"format_version", kFormatVersion}, {"kind", "admission_runs"}};
  if (oracle) {
    const auto best = brute_force_admission(*ctx, cap);
    optimum = best.profit;
    doc["oracle"] = outcome_to_json(best);
  }
  const std::uint64_t first = g.seed.value_or(sc.ga.seed);
  Json runs = Json::array();
  std::vector<TraceRun> traces;
  for (std::size_t i = 0; i < repeats; ++i) {
    GAConfig cfg = sc.ga;
    cfg.seed = first + i;
    const auto outcome = run_admission(*ctx, cfg);
    Json run = outcome_to_json(outcome);
    run["seed"] = cfg.seed;
    runs.push_back(std::move(run));
    traces.push_back(TraceRun{cfg.seed, outcome.trace});
    std::cout << "seed " << cfg.seed << ": profit " << outcome.profit << " cents, admitted "
              << outcome.admitted.size() << "/" << ctx->pool().size();
    if (optimum) std::cout << ", optimum " << *optimum;
    std::cout << "\n";
  }
  doc["runs"] = std::move(runs);
  write_atomic(output(g, "admission.json"), dump(doc));
  write_atomic(output(g, "trace.csv"), trace_csv(traces, optimum));
  return kOk;
}

int cmd_simulate(const Globals& g, const fs::path& scenario_path, const GAFlags& ga, const std::string& preset,
                 std::optional<std::size_t> intervals) {
  Scenario sc = load_scenario(scenario_path);
  ga.apply(sc);
  if (g.seed) sc.ga.seed = *g.seed;
  const Seconds span = sc.interval_seconds * static_cast<double>(sc.horizon);
  if (preset == "10x10") intervals = 10;
  if (preset == "20x5") intervals = 20;
  if (intervals) sc = rechunk(std::move(sc), *intervals, span);

  const auto result = run_horizon(sc, run_options(g));
  for (const auto& rep : result.reports) {
    char name[32];
    std::snprintf(name, sizeof name, "interval_%03zu.json", rep.interval);
    write_atomic(output(g, name), dump(Json(rep)));
  }
  write_atomic(output(g, "horizon.csv"), horizon_csv(result.reports));
  const auto& ledger = result.final_state.ledger;
  std::cout << "simulated " << result.reports.size() << " intervals: admitted " << ledger.admitted
            << ", profit " << ledger.profit << " cents\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ride-sharing fleet scheduling and admission control"};
  app.require_subcommand(1);
  Globals g;
  g.workers = default_workers();
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--workers", g.workers, "worker threads for distributed scheduling")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();

  GAFlags ga;

  auto* gen = app.add_subcommand("gen", "generate a synthetic scenario");
  GeneratorParams params;
  std::string gen_name = "scenario.json";
  gen->add_option("--requests", params.requests)->capture_default_str();
  gen->add_option("--vehicles", params.vehicles)->capture_default_str();
  gen->add_option("--vertices", params.vertices)->capture_default_str();
  gen->add_option("--stations", params.stations)->capture_default_str();
  gen->add_option("--area", params.area_miles, "side of the city square in miles")->capture_default_str();
  gen->add_option("--pace", params.pace, "seconds per mile")->capture_default_str();
  gen->add_option("--span", params.arrival_span, "arrival period in seconds")->capture_default_str();
  gen->add_option("--interval", params.interval, "interval duration in seconds")->capture_default_str();
  gen->add_option("--window", params.window, "pickup window width in seconds")->capture_default_str();
  gen->add_option("--capacity", params.capacity)->capture_default_str();
  gen->add_option("--fare-base", params.fare_base, "cents")->capture_default_str();
  gen->add_option("--fare-per-mile", params.fare_per_mile, "cents")->capture_default_str();
  gen->add_option("--fuel", params.fuel_cents_per_mile, "cents per mile")->capture_default_str();
  gen->add_option("--name", gen_name, "file name inside --out")->capture_default_str();
  ga.add(gen);

  auto* sched = app.add_subcommand("schedule", "solve schedules for a fixed assignment");
  fs::path scenario_path;
  std::optional<fs::path> assignment_path;
  bool oracle = false;
  bool timing = false;
  std::size_t cap = kDefaultOracleCap;
  sched->add_option("--scenario", scenario_path)->required();
  sched->add_option("--assignment", assignment_path);
  sched->add_flag("--oracle", oracle, "search every assignment (small pools only)");
  sched->add_option("--oracle-cap", cap)->capture_default_str();
  sched->add_flag("--timing", timing, "print wall-clock time per execution mode");
  sched->add_option("--mode", g.mode)->check(CLI::IsMember({"cumulative", "distributed"}))->capture_default_str();

  auto* admit = app.add_subcommand("admit", "run admission control on a scenario's pool");
  std::size_t repeats = 1;
  admit->add_option("--scenario", scenario_path)->required();
  admit->add_option("--repeats", repeats)->capture_default_str();
  admit->add_flag("--oracle", oracle, "also compute the exhaustive optimum");
  admit->add_option("--oracle-cap", cap)->capture_default_str();
  admit->add_option("--mode", g.mode)->check(CLI::IsMember({"cumulative", "distributed"}))->capture_default_str();
  ga.add(admit);

  auto* sim = app.add_subcommand("simulate", "run the operating loop over the horizon");
  std::string preset;
  std::optional<std::size_t> intervals;
  sim->add_option("--scenario", scenario_path)->required();
  sim->add_option("--preset", preset, "10x10 or 20x5")->check(CLI::IsMember({"10x10", "20x5"}));
  sim->add_option("--intervals", intervals, "re-split the arrivals into this many intervals");
  sim->add_option("--mode", g.mode)->check(CLI::IsMember({"cumulative", "distributed"}))->capture_default_str();
  ga.add(sim);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_gen(g, params, ga, gen_name);
    if (*sched) return cmd_schedule(g, scenario_path, assignment_path, oracle, cap, timing);
    if (*admit) return cmd_admit(g, scenario_path, ga, repeats, oracle, cap);
    if (*sim) return cmd_simulate(g, scenario_path, ga, preset, intervals);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const InfeasibleRouteError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const ConstraintViolated& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const OracleCapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
