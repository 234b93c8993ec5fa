#include "fleet_dispatch/fleet_scheduler.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace fleet {

std::string_view to_string(ExecutionMode m) {
  return m == ExecutionMode::Cumulative ? "cumulative" : "distributed";
}

ExecutionMode execution_mode_from_string(std::string_view s) {
  if (s == "cumulative") return ExecutionMode::Cumulative;
  if (s == "distributed") return ExecutionMode::Distributed;
  throw InputError("unknown execution mode '" + std::string(s) + "'");
}

namespace {

// Coordinator -> vehicle worker.
struct AssignRequests {
  std::uint64_t ticket = 0;
  std::size_t slot = 0;
  std::size_t vehicle = 0;
  std::vector<std::size_t> requests;
};

// Vehicle worker -> coordinator.
struct CostReport {
  std::uint64_t ticket = 0;
  std::size_t slot = 0;
  std::size_t vehicle = 0;
  std::optional<Schedule> schedule;
  std::exception_ptr error;
};

}  // namespace

struct FleetScheduler::Cache {
  mutable std::mutex mutex;
  std::map<std::pair<std::size_t, std::vector<std::size_t>>, std::optional<Schedule>> entries;
};

class FleetScheduler::WorkerPool {
 public:
  WorkerPool(const FleetScheduler& owner, std::size_t count) : owner_(owner) {
    for (std::size_t i = 0; i < count; ++i) inboxes_.push_back(std::make_unique<Inbox>());
    for (std::size_t i = 0; i < count; ++i) threads_.emplace_back([this, i] { run(i); });
  }

  ~WorkerPool() {
    for (auto& inbox : inboxes_) {
      std::lock_guard lock(inbox->mutex);
      inbox->stop = true;
      inbox->ready.notify_all();
    }
    for (auto& t : threads_) t.join();
  }

  std::size_t size() const { return inboxes_.size(); }

  void send(std::size_t worker, AssignRequests message) {
    auto& inbox = *inboxes_[worker];
    std::lock_guard lock(inbox.mutex);
    inbox.queue.push_back(std::move(message));
    inbox.ready.notify_one();
  }

  CostReport receive() {
    std::unique_lock lock(out_mutex_);
    out_ready_.wait(lock, [&] { return !outbox_.empty(); });
    CostReport report = std::move(outbox_.front());
    outbox_.pop_front();
    return report;
  }

 private:
  struct Inbox {
    std::mutex mutex;
    std::condition_variable ready;
    std::deque<AssignRequests> queue;
    bool stop = false;
  };

  void run(std::size_t worker) {
    auto& inbox = *inboxes_[worker];
    for (;;) {
      AssignRequests message;
      {
        std::unique_lock lock(inbox.mutex);
        inbox.ready.wait(lock, [&] { return inbox.stop || !inbox.queue.empty(); });
        if (inbox.queue.empty()) return;
        message = std::move(inbox.queue.front());
        inbox.queue.pop_front();
      }
      CostReport report{message.ticket, message.slot, message.vehicle, std::nullopt, nullptr};
      try {
        report.schedule = owner_.solve_one(message.vehicle, message.requests);
      } catch (...) {
        report.error = std::current_exception();
      }
      std::lock_guard lock(out_mutex_);
      outbox_.push_back(std::move(report));
      out_ready_.notify_one();
    }
  }

  const FleetScheduler& owner_;
  std::vector<std::unique_ptr<Inbox>> inboxes_;
  std::vector<std::thread> threads_;
  std::mutex out_mutex_;
  std::condition_variable out_ready_;
  std::deque<CostReport> outbox_;
};

FleetScheduler::FleetScheduler(std::shared_ptr<const ReducedNetwork> rn,
                               std::vector<Vehicle> vehicles, std::vector<Request> requests,
                               FleetOptions options)
    : network_(std::move(rn)),
      vehicles_(std::move(vehicles)),
      requests_(std::move(requests)),
      options_(std::move(options)),
      cache_(std::make_unique<Cache>()) {
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    if (!vehicle_index_.emplace(vehicles_[i].id, i).second) {
      throw InputError("duplicate vehicle id " + std::to_string(vehicles_[i].id));
    }
  }
  for (std::size_t i = 0; i < requests_.size(); ++i) {
    if (!request_index_.emplace(requests_[i].id, i).second) {
      throw InputError("duplicate request id " + std::to_string(requests_[i].id));
    }
  }
  if (options_.mode == ExecutionMode::Distributed) {
    if (options_.workers < 1) throw InputError("distributed mode needs at least one worker");
    pool_ = std::make_unique<WorkerPool>(*this, options_.workers);
  }
}

FleetScheduler::~FleetScheduler() = default;

std::size_t FleetScheduler::vehicle_index(VehicleId id) const {
  auto it = vehicle_index_.find(id);
  if (it == vehicle_index_.end()) throw InputError("unknown vehicle " + std::to_string(id));
  return it->second;
}

std::size_t FleetScheduler::request_index(RequestId id) const {
  auto it = request_index_.find(id);
  if (it == request_index_.end()) throw InputError("unknown request " + std::to_string(id));
  return it->second;
}

std::size_t FleetScheduler::cache_size() const {
  std::lock_guard lock(cache_->mutex);
  return cache_->entries.size();
}

std::optional<Schedule> FleetScheduler::solve_one(std::size_t vehicle,
                                                  const std::vector<std::size_t>& group) const {
  std::pair<std::size_t, std::vector<std::size_t>> key;
  if (options_.memoize) {
    key = {vehicle, group};
    std::lock_guard lock(cache_->mutex);
    if (auto it = cache_->entries.find(key); it != cache_->entries.end()) return it->second;
  }
  std::vector<Request> reqs;
  reqs.reserve(group.size());
  for (auto idx : group) reqs.push_back(requests_[idx]);
  auto result = solve_vehicle(vehicles_[vehicle], reqs, *network_);
  if (options_.memoize) {
    std::lock_guard lock(cache_->mutex);
    cache_->entries.emplace(std::move(key), result);
  }
  return result;
}

std::vector<std::optional<FleetResult>> FleetScheduler::solve_batch(
    const std::vector<Groups>& batch, std::vector<Infeasibility>* why) {
  for (const auto& groups : batch) {
    if (groups.size() != vehicles_.size()) {
      throw InputError("one request group per vehicle expected");
    }
  }
  const std::uint64_t ticket = ++next_ticket_;
  const std::size_t n_vehicles = vehicles_.size();

  // results[b * n_vehicles + v]
  std::vector<std::optional<Schedule>> results(batch.size() * n_vehicles);
  std::vector<bool> failed(batch.size(), false);

  std::size_t pending = 0;
  std::vector<std::pair<std::size_t, std::size_t>> local;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (std::size_t v = 0; v < n_vehicles; ++v) {
      if (batch[b][v].empty()) continue;
      if (pool_ && !options_.unavailable.contains(vehicles_[v].id)) {
        pool_->send(v % pool_->size(), AssignRequests{ticket, b * n_vehicles + v, v, batch[b][v]});
        ++pending;
      } else {
        local.emplace_back(b, v);
      }
    }
  }

  for (auto [b, v] : local) {
    if (!pool_ && failed[b]) continue;  // serial mode stops at the first infeasible vehicle
    auto& slot = results[b * n_vehicles + v];
    slot = solve_one(v, batch[b][v]);
    if (!slot) failed[b] = true;
  }
  std::exception_ptr error;
  while (pending > 0) {
    CostReport report = pool_->receive();
    if (report.ticket != ticket) continue;
    --pending;
    if (report.error && !error) error = report.error;
    results[report.slot] = std::move(report.schedule);
  }
  if (error) std::rethrow_exception(error);

  std::vector<std::optional<FleetResult>> out(batch.size());
  if (why) why->assign(batch.size(), Infeasibility{});
  for (std::size_t b = 0; b < batch.size(); ++b) {
    bool ok = true;
    for (std::size_t v = 0; v < n_vehicles && ok; ++v) {
      if (batch[b][v].empty() || results[b * n_vehicles + v]) continue;
      ok = false;
      if (why) {
        auto& w = (*why)[b];
        w.vehicle = vehicles_[v].id;
        for (auto idx : batch[b][v]) w.requests.push_back(requests_[idx].id);
      }
    }
    if (!ok) continue;
    FleetResult result;
    for (std::size_t v = 0; v < n_vehicles; ++v) {
      if (batch[b][v].empty()) continue;
      auto& schedule = *results[b * n_vehicles + v];
      result.total_distance += schedule.distance;
      result.total_cost += cost_in_cents(schedule.distance, options_.cents_per_mile);
      result.schedules.emplace(vehicles_[v].id, std::move(schedule));
    }
    out[b] = std::move(result);
  }
  return out;
}

std::optional<FleetResult> FleetScheduler::solve_groups(const Groups& groups, Infeasibility* why) {
  std::vector<Infeasibility> reasons;
  auto out = solve_batch({groups}, why ? &reasons : nullptr);
  if (why && !out[0]) *why = reasons[0];
  return std::move(out[0]);
}

std::optional<FleetResult> FleetScheduler::solve(const Assignment& assignment, Infeasibility* why) {
  std::vector<std::vector<std::size_t>> groups(vehicles_.size());
  for (const auto& [rid, vid] : assignment) {
    const std::size_t r = request_index(rid);
    const std::size_t v = vehicle_index(vid);
    const auto& req = requests_[r];
    if (req.vehicle_forced() && req.assigned_vehicle != vid) {
      throw InputError("request " + std::to_string(rid) + " is on board vehicle " +
                       std::to_string(req.assigned_vehicle.value_or(-1)) + " and cannot move");
    }
    groups[v].push_back(r);
  }
  for (const auto& k : vehicles_) {
    for (auto rid : k.in_service) {
      auto it = assignment.find(rid);
      if (it == assignment.end() || it->second != k.id) {
        throw InputError("on-board request " + std::to_string(rid) + " must stay with vehicle " +
                         std::to_string(k.id));
      }
    }
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  return solve_groups(groups, why);
}

std::optional<FleetResult> solve_assignment(const Assignment& assignment,
                                            std::span<const Vehicle> vehicles,
                                            std::span<const Request> requests,
                                            const ReducedNetwork& rn, const FleetOptions& options) {
  std::shared_ptr<const ReducedNetwork> view(std::shared_ptr<const ReducedNetwork>{}, &rn);
  FleetScheduler scheduler(view, {vehicles.begin(), vehicles.end()},
                           {requests.begin(), requests.end()}, options);
  return scheduler.solve(assignment);
}

std::optional<FleetResult> brute_force_fleet(std::span<const Request> requests,
                                             std::span<const Vehicle> vehicles,
                                             const ReducedNetwork& rn, std::size_t cap,
                                             const FleetOptions& options,
                                             Assignment* best_assignment) {
  if (requests.size() > cap) {
    throw OracleCapExceeded("brute-force scheduling is capped at " + std::to_string(cap) +
                            " requests, got " + std::to_string(requests.size()));
  }
  std::vector<Request> reqs(requests.begin(), requests.end());
  std::sort(reqs.begin(), reqs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::vector<Vehicle> fleet(vehicles.begin(), vehicles.end());
  std::sort(fleet.begin(), fleet.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  if (fleet.empty()) return reqs.empty() ? std::optional<FleetResult>(FleetResult{}) : std::nullopt;

  FleetOptions opts = options;
  opts.memoize = true;
  std::shared_ptr<const ReducedNetwork> view(std::shared_ptr<const ReducedNetwork>{}, &rn);
  FleetScheduler scheduler(view, fleet, reqs, opts);

  // Candidate vehicles per request, in id order.
  std::vector<std::vector<std::size_t>> choices(reqs.size());
  for (std::size_t r = 0; r < reqs.size(); ++r) {
    for (std::size_t v = 0; v < fleet.size(); ++v) {
      if (!reqs[r].vehicle_forced() || reqs[r].assigned_vehicle == fleet[v].id) {
        choices[r].push_back(v);
      }
    }
    if (choices[r].empty()) return std::nullopt;
  }

  std::optional<FleetResult> best;
  Assignment best_pick;
  std::vector<std::size_t> odometer(reqs.size(), 0);
  for (;;) {
    Assignment assignment;
    for (std::size_t r = 0; r < reqs.size(); ++r) assignment[reqs[r].id] = fleet[choices[r][odometer[r]]].id;
    bool forced_ok = true;
    for (const auto& k : fleet) {
      for (auto rid : k.in_service) {
        auto it = assignment.find(rid);
        if (it == assignment.end() || it->second != k.id) forced_ok = false;
      }
    }
    if (forced_ok) {
      auto result = scheduler.solve(assignment);
      if (result && (!best || result->total_distance < best->total_distance)) {
        best = std::move(result);
        best_pick = assignment;
      }
    }
    std::size_t pos = reqs.size();
    while (pos > 0) {
      --pos;
      if (++odometer[pos] < choices[pos].size()) break;
      odometer[pos] = 0;
      if (pos == 0) {
        pos = reqs.size() + 1;
        break;
      }
    }
    if (reqs.empty() || pos == reqs.size() + 1) break;
  }
  if (best && best_assignment) *best_assignment = best_pick;
  return best;
}

bool is_admissible(const Request& r, const Vehicle& k, std::span<const Request> pool,
                   const ReducedNetwork& rn) {
  if (r.vehicle_forced() && r.assigned_vehicle != k.id) return false;
  std::vector<Request> reqs;
  if (!k.in_service.contains(r.id)) reqs.push_back(r);
  for (auto id : k.in_service) {
    auto it = std::find_if(pool.begin(), pool.end(), [&](const Request& q) { return q.id == id; });
    if (it == pool.end()) {
      throw InputError("on-board request " + std::to_string(id) + " of vehicle " +
                       std::to_string(k.id) + " missing from the pool");
    }
    reqs.push_back(*it);
  }
  return solve_vehicle(k, reqs, rn).has_value();
}

bool TabuLists::allows(RequestId r, VehicleId k) const {
  auto it = tabu.find(r);
  return it == tabu.end() || !it->second.contains(k);
}

TabuLists build_tabu_lists(std::span<const Request> requests, std::span<const Vehicle> vehicles,
                           const ReducedNetwork& rn) {
  TabuLists out;
  for (const auto& r : requests) {
    auto& list = out.tabu[r.id];
    for (const auto& k : vehicles) {
      if (!is_admissible(r, k, requests, rn)) list.insert(k.id);
    }
    if (list.size() == vehicles.size()) out.non_admissible.insert(r.id);
  }
  return out;
}

}  // namespace fleet
