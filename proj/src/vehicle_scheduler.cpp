#include "fleet_dispatch/vehicle_scheduler.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <unordered_map>

namespace fleet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Job {
  const Request* request = nullptr;
  std::size_t pickup_key = 0;
  std::size_t dropoff_key = 0;
  bool on_board = false;
  Seconds earliest = -kInf;
  Seconds latest = kInf;
};

struct CompactStop {
  std::size_t key = 0;
  StopKind kind = StopKind::Start;
  int job = -1;
};

class Instance {
 public:
  Instance(const Vehicle& k, std::span<const Request> reqs, const ReducedNetwork& rn)
      : vehicle(k), network(rn) {
    start_key = require_key(k.next_vertex);
    std::unordered_map<RequestId, int> seen;
    for (const auto& r : reqs) {
      if (!seen.emplace(r.id, static_cast<int>(jobs.size())).second) {
        throw InputError("request " + std::to_string(r.id) + " listed twice");
      }
      Job job;
      job.request = &r;
      job.on_board = k.in_service.contains(r.id);
      job.pickup_key = job.on_board ? start_key : require_key(r.pickup);
      job.dropoff_key = require_key(r.dropoff);
      if (r.earliest) job.earliest = *r.earliest;
      if (r.latest) job.latest = *r.latest;
      if (job.on_board) initial_load += r.seats;
      jobs.push_back(job);
    }
    for (auto id : k.in_service) {
      if (!seen.contains(id)) {
        throw InputError("on-board request " + std::to_string(id) + " of vehicle " +
                         std::to_string(k.id) + " missing from the request set");
      }
    }
    by_id = std::move(seen);
    for (auto s : rn.refuel_stations()) station_keys.push_back(require_key(s));
  }

  std::size_t require_key(VertexId v) const {
    auto idx = network.key_index(v);
    if (!idx) throw InputError("vertex " + std::to_string(v) + " is not in the reduced network");
    return *idx;
  }

  int job_of(RequestId id) const {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw InputError("stop references request " + std::to_string(id) + " outside the set");
    }
    return it->second;
  }

  // Full earliest-time settlement of a compact prefix, including pickup
  // delays forced by ride limits. Rounds are bounded by the stop count, as
  // each round can only activate one more ride constraint along any chain.
  bool settle(std::span<const CompactStop> stops, std::vector<Seconds>& times) const {
    const std::size_t n = stops.size();
    std::vector<Seconds> lower(n, -kInf);
    std::vector<Seconds> leg_time(n, 0.0);
    std::vector<int> pickup_pos(jobs.size(), -1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = stops[i];
      if (i > 0) {
        const auto* leg = network.leg_at(stops[i - 1].key, s.key);
        if (!leg) return false;
        leg_time[i] = leg->time;
      }
      if (s.kind == StopKind::Pickup) {
        pickup_pos[s.job] = static_cast<int>(i);
        lower[i] = jobs[s.job].earliest;
      }
    }
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].on_board) pickup_pos[j] = 0;
    }

    times.assign(n, 0.0);
    for (std::size_t round = 0; round <= n; ++round) {
      for (std::size_t i = 0; i < n; ++i) {
        times[i] = i == 0 ? vehicle.time_to_next : std::max(times[i - 1] + leg_time[i], lower[i]);
        if (times[i] > vehicle.max_operation + kTimeTolerance) return false;
        if (stops[i].kind == StopKind::Pickup &&
            times[i] > jobs[stops[i].job].latest + kTimeTolerance) {
          return false;
        }
      }
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (stops[i].kind != StopKind::Dropoff) continue;
        const int p = pickup_pos[stops[i].job];
        if (p < 0) return false;
        const Seconds limit = jobs[stops[i].job].request->max_ride;
        if (times[i] - times[p] > limit + kTimeTolerance) {
          if (p == 0) return false;  // on board: the ride clock cannot be delayed
          lower[p] = std::max(lower[p], times[i] - limit);
          changed = true;
        }
      }
      if (!changed) return true;
    }
    return false;
  }

  CompactStop compact(const Stop& s) const {
    CompactStop c;
    c.kind = s.kind;
    c.key = require_key(s.vertex);
    if (s.kind == StopKind::Pickup || s.kind == StopKind::Dropoff) {
      if (!s.request) throw InputError("pickup/dropoff stop without a request");
      c.job = job_of(*s.request);
    }
    return c;
  }

  std::vector<CompactStop> compact(const StopSequence& seq) const {
    if (seq.empty() || seq.front().kind != StopKind::Start ||
        seq.front().vertex != vehicle.next_vertex) {
      throw InputError("stop sequence must begin with the vehicle's start vertex");
    }
    std::vector<CompactStop> out;
    out.reserve(seq.size());
    for (const auto& s : seq) out.push_back(compact(s));
    return out;
  }

  const Vehicle& vehicle;
  const ReducedNetwork& network;
  std::size_t start_key = 0;
  std::vector<Job> jobs;
  std::unordered_map<RequestId, int> by_id;
  std::vector<std::size_t> station_keys;
  int initial_load = 0;
};

struct Candidate {
  Stop stop;
  CompactStop compact;
};

class Search {
 public:
  Search(const Instance& inst, const SolveOptions& options, SolveStats* stats)
      : inst_(inst), options_(options), stats_(stats) {}

  std::optional<std::vector<CompactStop>> run() {
    if (inst_.vehicle.time_to_next > inst_.vehicle.max_operation + kTimeTolerance) {
      return std::nullopt;
    }
    picked_.assign(inst_.jobs.size(), false);
    dropped_.assign(inst_.jobs.size(), false);
    remaining_ = 0;
    for (std::size_t j = 0; j < inst_.jobs.size(); ++j) {
      picked_[j] = inst_.jobs[j].on_board;
      remaining_ += inst_.jobs[j].on_board ? 1 : 2;
    }
    stops_.push_back(CompactStop{inst_.start_key, StopKind::Start, -1});
    visit({inst_.vehicle.time_to_next}, inst_.initial_load, Distance{});
    if (!best_) return std::nullopt;
    return best_;
  }

 private:
  void visit(const std::vector<Seconds>& times, int load, Distance cost) {
    if (stats_) ++stats_->nodes;
    const std::size_t here = stops_.back().key;

    if (options_.prune && best_) {
      const auto to_station = inst_.network.nearest_station_cost(here);
      if (!to_station || cost + *to_station >= best_cost_) return;
    }

    if (remaining_ == 0) {
      finish(times, cost);
      return;
    }

    std::vector<Candidate> next;
    for (std::size_t j = 0; j < inst_.jobs.size(); ++j) {
      const auto& job = inst_.jobs[j];
      const int ji = static_cast<int>(j);
      if (!picked_[j]) {
        next.push_back({Stop{job.request->pickup, StopKind::Pickup, job.request->id},
                        CompactStop{job.pickup_key, StopKind::Pickup, ji}});
      } else if (!dropped_[j]) {
        next.push_back({Stop{job.request->dropoff, StopKind::Dropoff, job.request->id},
                        CompactStop{job.dropoff_key, StopKind::Dropoff, ji}});
      }
    }
    std::sort(next.begin(), next.end(),
              [](const Candidate& a, const Candidate& b) { return a.stop < b.stop; });

    for (const auto& cand : next) {
      const auto* leg = inst_.network.leg_at(here, cand.compact.key);
      if (!leg) continue;
      const auto& job = inst_.jobs[cand.compact.job];
      const int seats = job.request->seats;

      int new_load = load;
      if (cand.compact.kind == StopKind::Pickup) {
        new_load += seats;
        if (new_load > inst_.vehicle.capacity) continue;
      } else {
        new_load -= seats;
        if (new_load < 0) continue;
      }

      std::vector<Seconds> new_times = times;
      Seconds t = times.back() + leg->time;
      if (cand.compact.kind == StopKind::Pickup) {
        t = std::max(t, job.earliest);
        if (t > job.latest + kTimeTolerance) continue;
      }
      if (t > inst_.vehicle.max_operation + kTimeTolerance) continue;
      new_times.push_back(t);

      stops_.push_back(cand.compact);
      bool feasible = true;
      if (cand.compact.kind == StopKind::Dropoff) {
        const Seconds pickup_time = job.on_board ? times.front() : times[pickup_pos(cand.compact.job)];
        if (t - pickup_time > job.request->max_ride + kTimeTolerance) {
          feasible = !job.on_board && inst_.settle(stops_, new_times);
        }
      }
      if (feasible) {
        if (cand.compact.kind == StopKind::Pickup) {
          picked_[cand.compact.job] = true;
        } else {
          dropped_[cand.compact.job] = true;
        }
        --remaining_;
        visit(new_times, new_load, cost + leg->cost);
        ++remaining_;
        if (cand.compact.kind == StopKind::Pickup) {
          picked_[cand.compact.job] = false;
        } else {
          dropped_[cand.compact.job] = false;
        }
      }
      stops_.pop_back();
    }
  }

  std::size_t pickup_pos(int job) const {
    for (std::size_t i = 0; i < stops_.size(); ++i) {
      if (stops_[i].kind == StopKind::Pickup && stops_[i].job == job) return i;
    }
    return 0;
  }

  void finish(const std::vector<Seconds>& times, Distance cost) {
    const std::size_t here = stops_.back().key;
    std::vector<std::pair<VertexId, std::size_t>> stations;
    for (auto key : inst_.station_keys) {
      stations.emplace_back(inst_.network.key_vertices()[key], key);
    }
    std::sort(stations.begin(), stations.end());
    for (const auto& [vertex, key] : stations) {
      const auto* leg = inst_.network.leg_at(here, key);
      if (!leg) continue;
      if (times.back() + leg->time > inst_.vehicle.max_operation + kTimeTolerance) continue;
      const Distance total = cost + leg->cost;
      if (stats_) ++stats_->complete_routes;
      if (!best_ || total < best_cost_) {
        best_cost_ = total;
        best_ = stops_;
        best_->push_back(CompactStop{key, StopKind::Refuel, -1});
      }
    }
  }

  const Instance& inst_;
  SolveOptions options_;
  SolveStats* stats_;
  std::vector<CompactStop> stops_;
  std::vector<bool> picked_;
  std::vector<bool> dropped_;
  int remaining_ = 0;
  std::optional<std::vector<CompactStop>> best_;
  Distance best_cost_;
};

StopSequence expand_compact(const Instance& inst, std::span<const CompactStop> stops) {
  StopSequence seq;
  for (const auto& c : stops) {
    Stop s;
    s.vertex = inst.network.key_vertices()[c.key];
    s.kind = c.kind;
    if (c.job >= 0) s.request = inst.jobs[c.job].request->id;
    seq.push_back(s);
  }
  return seq;
}

}  // namespace

std::optional<std::vector<Seconds>> settle_times(const StopSequence& seq, const Vehicle& k,
                                                 const ReducedNetwork& rn,
                                                 std::span<const Request> reqs) {
  Instance inst(k, reqs, rn);
  auto stops = inst.compact(seq);
  std::vector<Seconds> times;
  if (!inst.settle(stops, times)) return std::nullopt;
  return times;
}

std::optional<std::vector<int>> settle_occupancy(const StopSequence& seq, const Vehicle& k,
                                                 std::span<const Request> reqs) {
  std::unordered_map<RequestId, const Request*> by_id;
  int load = 0;
  for (const auto& r : reqs) {
    by_id[r.id] = &r;
    if (k.in_service.contains(r.id)) load += r.seats;
  }
  if (load > k.capacity) return std::nullopt;
  std::vector<int> out;
  out.reserve(seq.size());
  for (const auto& s : seq) {
    if (s.kind == StopKind::Pickup || s.kind == StopKind::Dropoff) {
      auto it = s.request ? by_id.find(*s.request) : by_id.end();
      if (it == by_id.end()) throw InputError("stop references an unknown request");
      load += s.kind == StopKind::Pickup ? it->second->seats : -it->second->seats;
      if (load < 0 || load > k.capacity) return std::nullopt;
    }
    out.push_back(load);
  }
  return out;
}

std::optional<Schedule> build_schedule(const StopSequence& seq, const Vehicle& k,
                                       const ReducedNetwork& rn, std::span<const Request> reqs) {
  Instance inst(k, reqs, rn);
  auto stops = inst.compact(seq);
  std::vector<Seconds> times;
  if (!inst.settle(stops, times)) return std::nullopt;
  auto loads = settle_occupancy(seq, k, reqs);
  if (!loads) return std::nullopt;

  Schedule out;
  out.vehicle = k.id;
  std::vector<VertexId> key_route;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    out.stops.push_back(ScheduledStop{seq[i].vertex, seq[i].kind, seq[i].request, times[i], (*loads)[i]});
    key_route.push_back(seq[i].vertex);
    if (i > 0) out.distance += rn.leg(seq[i - 1].vertex, seq[i].vertex)->cost;
  }
  if (seq.back().kind == StopKind::Refuel) out.end_station = seq.back().vertex;
  out.route = expand_route(rn, key_route);
  return out;
}

std::optional<Schedule> solve_vehicle(const Vehicle& k, std::span<const Request> reqs,
                                      const ReducedNetwork& rn, const SolveOptions& options,
                                      SolveStats* stats) {
  Instance inst(k, reqs, rn);
  if (reqs.empty()) {
    Schedule empty;
    empty.vehicle = k.id;
    return empty;
  }
  Search search(inst, options, stats);
  auto best = search.run();
  if (!best) return std::nullopt;
  return build_schedule(expand_compact(inst, *best), k, rn, reqs);
}

}  // namespace fleet
