#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fleet_dispatch/admission.hpp"
#include "fleet_dispatch/fleet_scheduler.hpp"
#include "fleet_dispatch/simulator.hpp"

namespace fleet {

/// Every file written or read carries this in `format_version`.
inline constexpr int kFormatVersion = 1;

/// A file could not be read, parsed or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

void to_json(Json& j, const Edge& e);
void from_json(const Json& j, Edge& e);
void to_json(Json& j, const RoadNetwork& net);
void from_json(const Json& j, RoadNetwork& net);
void to_json(Json& j, const Request& r);
void from_json(const Json& j, Request& r);
void to_json(Json& j, const Vehicle& k);
void from_json(const Json& j, Vehicle& k);
void to_json(Json& j, const ScheduledStop& s);
void from_json(const Json& j, ScheduledStop& s);
void to_json(Json& j, const Schedule& s);
void from_json(const Json& j, Schedule& s);
void to_json(Json& j, const GAConfig& c);
void from_json(const Json& j, GAConfig& c);
void to_json(Json& j, const TracePoint& t);
void from_json(const Json& j, TracePoint& t);
void to_json(Json& j, const IntervalReport& r);
void from_json(const Json& j, IntervalReport& r);

/// Whole-document helpers; all of them stamp or check format_version.
Json scenario_to_json(const Scenario& sc);
/// A `network_file` entry is resolved against base_dir.
Scenario scenario_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json fleet_result_to_json(const FleetResult& result, double cents_per_mile);
Json outcome_to_json(const AdmissionOutcome& outcome);
/// {"assignment": [{"vehicle": v, "requests": [...]}, ...]}
Assignment assignment_from_json(const Json& j);

/// Throws IoError when the file is missing or not valid JSON.
Json read_json(const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames over the target.
void write_atomic(const std::filesystem::path& path, std::string_view content);
/// Two-space indented JSON with a trailing newline.
std::string dump(const Json& j);

/// interval,admitted,carried,profit_cents,cumulative_profit_cents,cumulative_admitted
std::string horizon_csv(const std::vector<IntervalReport>& reports);

struct TraceRun {
  std::uint64_t seed = 0;
  std::vector<TracePoint> trace;
};
/// run,seed,generation,best,mean and, with an optimum, normalized.
std::string trace_csv(const std::vector<TraceRun>& runs, std::optional<Cents> optimum = std::nullopt);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

}  // namespace fleet
