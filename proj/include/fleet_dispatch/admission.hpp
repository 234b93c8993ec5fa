#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "fleet_dispatch/fleet_scheduler.hpp"
#include "fleet_dispatch/random.hpp"

namespace fleet {

struct GAConfig {
  std::size_t n_pop = 16;
  double x_rate = 0.5;   // surviving fraction
  double mu = 0.15;      // mutation rate
  double gamma = 0.5;    // random replacement probability
  std::size_t generations = 40;
  std::uint64_t seed = 1;
  double discount = 0.5;

  void validate() const;  // throws InputError
};

/// Ticket price booked for an admitted request: fare scaled by
/// (1 - discount), rounded half up to whole cents.
Cents revenue(const Request& r, double discount);

/// Profit in cents, or infeasible. Infeasible orders below every value.
class Fitness {
 public:
  static Fitness infeasible() { return Fitness(); }
  static Fitness of(Cents profit) { return Fitness(profit); }

  bool feasible() const { return value_.has_value(); }
  Cents value() const;  // throws std::logic_error when infeasible

  std::strong_ordering operator<=>(const Fitness& o) const;
  bool operator==(const Fitness& o) const = default;

 private:
  Fitness() = default;
  explicit Fitness(Cents v) : value_(v) {}
  std::optional<Cents> value_;
};

/// Admit flags plus a vehicle index per request (-1 when not admitted).
struct Chromosome {
  std::vector<std::uint8_t> admit;
  std::vector<int> vehicle;

  std::size_t size() const { return admit.size(); }
  auto operator<=>(const Chromosome&) const = default;
};

struct AdmissionOptions {
  ExecutionMode mode = ExecutionMode::Cumulative;
  std::size_t workers = 1;
  double cents_per_mile = 16.0;
  double discount = 0.5;
  std::set<VehicleId> unavailable;
  bool memoize = true;
};

/// Everything fitness evaluation needs for one admission round: the pool,
/// the fleet, tabu lists and a scheduler bound to them.
///
/// A request whose state is assigned-unserved or in-service carries a
/// forced bit. In-service requests also keep their vehicle; other forced
/// requests start on their previous vehicle (assigned_vehicle).
class AdmissionContext {
 public:
  AdmissionContext(std::shared_ptr<const ReducedNetwork> rn, std::vector<Request> pool,
                   std::vector<Vehicle> vehicles, AdmissionOptions options = {});

  const std::vector<Request>& pool() const { return scheduler_->requests(); }
  const std::vector<Vehicle>& vehicles() const { return scheduler_->vehicles(); }
  const ReducedNetwork& network() const { return scheduler_->network(); }
  const TabuLists& tabu() const { return tabu_; }
  FleetScheduler& scheduler() { return *scheduler_; }

  bool forced(std::size_t r) const { return forced_[r]; }
  /// Vehicle index fixed for r, or -1.
  int pinned_vehicle(std::size_t r) const { return pinned_[r]; }
  bool allows(std::size_t r, std::size_t v) const { return allowed_[r][v]; }
  /// Vehicle indices allowed for r, ascending.
  const std::vector<int>& candidates(std::size_t r) const { return candidates_[r]; }
  bool non_admissible(std::size_t r) const { return candidates_[r].empty(); }
  Cents revenue_of(std::size_t r) const { return revenue_[r]; }

  /// Forced bits only, each on its previous vehicle.
  Chromosome base() const;
  /// Throws InputError if c breaks its structural invariants.
  void check(const Chromosome& c) const;

  Fitness evaluate(const Chromosome& c, FleetResult* result = nullptr);
  std::vector<Fitness> evaluate_all(std::span<const Chromosome> cs,
                                    std::vector<std::optional<FleetResult>>* results = nullptr);

 private:
  std::optional<FleetScheduler::Groups> groups_of(const Chromosome& c) const;

  std::unique_ptr<FleetScheduler> scheduler_;
  TabuLists tabu_;
  std::vector<bool> forced_;
  std::vector<int> pinned_;
  std::vector<int> previous_;
  std::vector<std::vector<bool>> allowed_;
  std::vector<std::vector<int>> candidates_;
  std::vector<Cents> revenue_;
};

struct TracePoint {
  Cents best = 0;
  double mean = 0.0;
};

struct AdmissionOutcome {
  Chromosome best;
  Cents profit = 0;
  FleetResult result;
  std::vector<RequestId> admitted;
  std::vector<RequestId> rejected;
  std::vector<TracePoint> trace;  // generations 0..G
};

using Population = std::vector<Chromosome>;

/// A chromosome with the forced bits and, when possible, one random
/// admissible free request. Always finite fitness.
Chromosome random_chromosome(AdmissionContext& ctx, Rng& rng);

Population init_population(AdmissionContext& ctx, const GAConfig& cfg, Rng& rng);

/// Sorts by fitness, best first; ties by chromosome order.
void sort_population(Population& pop, std::vector<Fitness>& fit);

/// Selection weight per rank: rank n of m gets (m - n + 1) / sum, tied
/// fitness values share the mean weight of their ranks. fit must be sorted.
std::vector<double> rank_weights(std::span<const Fitness> fit);

std::size_t survivor_count(std::size_t n_pop, double x_rate);

struct Selection {
  std::size_t survivors = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// Keeps the top ceil(x_rate * n) of a sorted population and draws
/// enough parent pairs to refill it; the two parents of a pair differ
/// whenever more than one survivor exists.
Selection select_survivors_and_pair(std::span<const Fitness> sorted_fit, double x_rate, Rng& rng);

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b,
                                            const AdmissionContext& ctx, Rng& rng);

/// round(mu * (n_pop - 1) * pool size), halves rounded up.
std::size_t mutation_count(const GAConfig& cfg, std::size_t pool_size);

/// Toggles free bits outside the elite (index 0), then replaces each
/// non-elite chromosome by a random one with probability gamma.
void mutate(Population& pop, AdmissionContext& ctx, const GAConfig& cfg, Rng& rng);

AdmissionOutcome run_admission(AdmissionContext& ctx, const GAConfig& cfg);

/// Exhaustive maximum over every admit/vehicle choice. Equal profits keep
/// the first choice found, rejecting before admitting and lower vehicle
/// indices first, in pool order.
AdmissionOutcome brute_force_admission(AdmissionContext& ctx,
                                       std::size_t cap = kDefaultOracleCap);

}  // namespace fleet
