#include "fleet_dispatch/admission.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fleet {

namespace {

std::size_t weighted_index(Rng& rng, std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = unit(rng) * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last = i;
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return last;
}

}  // namespace

void GAConfig::validate() const {
  if (n_pop < 2 || n_pop % 2 != 0) throw InputError("n-pop must be an even number >= 2");
  if (!(x_rate > 0.0 && x_rate < 1.0)) throw InputError("x-rate must lie in (0, 1)");
  if (!(mu >= 0.0 && mu <= 1.0)) throw InputError("mu must lie in [0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InputError("gamma must lie in [0, 1]");
  if (generations < 1) throw InputError("generations must be >= 1");
  if (!(discount >= 0.0 && discount <= 1.0)) throw InputError("discount must lie in [0, 1]");
}

Cents revenue(const Request& r, double discount) {
  if (!(discount >= 0.0 && discount <= 1.0)) throw InputError("discount must lie in [0, 1]");
  return static_cast<Cents>(std::floor(static_cast<double>(r.fare) * (1.0 - discount) + 0.5));
}

Cents Fitness::value() const {
  if (!value_) throw std::logic_error("infeasible fitness has no value");
  return *value_;
}

std::strong_ordering Fitness::operator<=>(const Fitness& o) const {
  if (feasible() != o.feasible()) {
    return feasible() ? std::strong_ordering::greater : std::strong_ordering::less;
  }
  if (!feasible()) return std::strong_ordering::equal;
  return *value_ <=> *o.value_;
}

AdmissionContext::AdmissionContext(std::shared_ptr<const ReducedNetwork> rn,
                                   std::vector<Request> pool, std::vector<Vehicle> vehicles,
                                   AdmissionOptions options) {
  FleetOptions fleet_options;
  fleet_options.mode = options.mode;
  fleet_options.workers = options.workers;
  fleet_options.cents_per_mile = options.cents_per_mile;
  fleet_options.unavailable = options.unavailable;
  fleet_options.memoize = options.memoize;
  scheduler_ = std::make_unique<FleetScheduler>(std::move(rn), std::move(vehicles),
                                                std::move(pool), std::move(fleet_options));

  const auto& reqs = scheduler_->requests();
  const auto& fleet = scheduler_->vehicles();
  tabu_ = build_tabu_lists(reqs, fleet, scheduler_->network());

  const std::size_t n = reqs.size();
  forced_.resize(n);
  pinned_.assign(n, -1);
  previous_.assign(n, -1);
  allowed_.assign(n, std::vector<bool>(fleet.size(), false));
  candidates_.resize(n);
  revenue_.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& req = reqs[r];
    forced_[r] = req.admission_forced();
    revenue_[r] = revenue(req, options.discount);
    if (req.assigned_vehicle && forced_[r]) {
      previous_[r] = static_cast<int>(scheduler_->vehicle_index(*req.assigned_vehicle));
      if (req.vehicle_forced()) pinned_[r] = previous_[r];
    } else if (req.vehicle_forced()) {
      throw InputError("on-board request " + std::to_string(req.id) + " has no vehicle");
    }
    for (std::size_t v = 0; v < fleet.size(); ++v) {
      const bool ok = tabu_.allows(req.id, fleet[v].id) &&
                      (pinned_[r] < 0 || pinned_[r] == static_cast<int>(v));
      allowed_[r][v] = ok;
      if (ok) candidates_[r].push_back(static_cast<int>(v));
    }
  }
}

Chromosome AdmissionContext::base() const {
  const std::size_t n = pool().size();
  Chromosome c{std::vector<std::uint8_t>(n, 0), std::vector<int>(n, -1)};
  for (std::size_t r = 0; r < n; ++r) {
    if (!forced_[r]) continue;
    c.admit[r] = 1;
    if (pinned_[r] >= 0) {
      c.vehicle[r] = pinned_[r];
    } else if (previous_[r] >= 0 && allowed_[r][previous_[r]]) {
      c.vehicle[r] = previous_[r];
    } else if (!candidates_[r].empty()) {
      c.vehicle[r] = candidates_[r].front();
    } else {
      c.vehicle[r] = previous_[r] >= 0 ? previous_[r] : 0;
    }
  }
  return c;
}

void AdmissionContext::check(const Chromosome& c) const {
  const std::size_t n = pool().size();
  const int n_vehicles = static_cast<int>(vehicles().size());
  if (c.admit.size() != n || c.vehicle.size() != n) {
    throw InputError("chromosome length does not match the pool");
  }
  for (std::size_t r = 0; r < n; ++r) {
    const auto id = std::to_string(pool()[r].id);
    if (forced_[r] && !c.admit[r]) throw InputError("forced request " + id + " not admitted");
    if (c.admit[r] && (c.vehicle[r] < 0 || c.vehicle[r] >= n_vehicles)) {
      throw InputError("admitted request " + id + " has no valid vehicle");
    }
    if (!c.admit[r] && c.vehicle[r] != -1) {
      throw InputError("request " + id + " is not admitted but has a vehicle");
    }
  }
}

std::optional<FleetScheduler::Groups> AdmissionContext::groups_of(const Chromosome& c) const {
  check(c);
  FleetScheduler::Groups groups(vehicles().size());
  for (std::size_t r = 0; r < c.size(); ++r) {
    if (!c.admit[r]) continue;
    if (!allowed_[r][c.vehicle[r]]) return std::nullopt;
    groups[c.vehicle[r]].push_back(r);
  }
  return groups;
}

Fitness AdmissionContext::evaluate(const Chromosome& c, FleetResult* result) {
  std::vector<std::optional<FleetResult>> results;
  auto fit = evaluate_all(std::span<const Chromosome>(&c, 1), result ? &results : nullptr);
  if (result && results[0]) *result = std::move(*results[0]);
  return fit[0];
}

std::vector<Fitness> AdmissionContext::evaluate_all(
    std::span<const Chromosome> cs, std::vector<std::optional<FleetResult>>* results) {
  std::vector<Fitness> out(cs.size(), Fitness::infeasible());
  if (results) results->assign(cs.size(), std::nullopt);
  std::vector<FleetScheduler::Groups> batch;
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    auto groups = groups_of(cs[i]);
    if (!groups) continue;
    batch.push_back(std::move(*groups));
    owner.push_back(i);
  }
  auto solved = scheduler_->solve_batch(batch);
  for (std::size_t b = 0; b < solved.size(); ++b) {
    if (!solved[b]) continue;
    const auto& c = cs[owner[b]];
    Cents income = 0;
    for (std::size_t r = 0; r < c.size(); ++r) {
      if (c.admit[r]) income += revenue_[r];
    }
    out[owner[b]] = Fitness::of(income - solved[b]->total_cost);
    if (results) (*results)[owner[b]] = std::move(solved[b]);
  }
  return out;
}

Chromosome random_chromosome(AdmissionContext& ctx, Rng& rng) {
  Chromosome c = ctx.base();
  const std::size_t n = c.size();

  // Forced requests that may change vehicle get a fresh draw half the time.
  Chromosome moved = c;
  bool any_moved = false;
  for (std::size_t r = 0; r < n; ++r) {
    if (!ctx.forced(r) || ctx.pinned_vehicle(r) >= 0) continue;
    const auto& cand = ctx.candidates(r);
    if (cand.size() < 2 || unit(rng) >= 0.5) continue;
    moved.vehicle[r] = cand[uniform_index(rng, cand.size())];
    any_moved = any_moved || moved.vehicle[r] != c.vehicle[r];
  }
  if (any_moved && ctx.evaluate(moved).feasible()) c = std::move(moved);

  std::vector<std::pair<std::size_t, int>> pairs;
  for (std::size_t r = 0; r < n; ++r) {
    if (ctx.forced(r)) continue;
    for (int v : ctx.candidates(r)) pairs.emplace_back(r, v);
  }
  while (!pairs.empty()) {
    const std::size_t pick = uniform_index(rng, pairs.size());
    auto [r, v] = pairs[pick];
    Chromosome trial = c;
    trial.admit[r] = 1;
    trial.vehicle[r] = v;
    if (ctx.evaluate(trial).feasible()) return trial;
    pairs.erase(pairs.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return c;
}

Population init_population(AdmissionContext& ctx, const GAConfig& cfg, Rng& rng) {
  Population pop;
  pop.reserve(cfg.n_pop);
  for (std::size_t i = 0; i < cfg.n_pop; ++i) pop.push_back(random_chromosome(ctx, rng));
  return pop;
}

void sort_population(Population& pop, std::vector<Fitness>& fit) {
  std::vector<std::size_t> order(pop.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (fit[a] != fit[b]) return fit[a] > fit[b];
    return pop[a] < pop[b];
  });
  Population sorted_pop;
  std::vector<Fitness> sorted_fit;
  for (auto i : order) {
    sorted_pop.push_back(std::move(pop[i]));
    sorted_fit.push_back(fit[i]);
  }
  pop = std::move(sorted_pop);
  fit = std::move(sorted_fit);
}

std::vector<double> rank_weights(std::span<const Fitness> fit) {
  const std::size_t m = fit.size();
  std::vector<double> w(m);
  const double sum = static_cast<double>(m * (m + 1)) / 2.0;
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j < m && fit[j] == fit[i]) ++j;
    // ranks i+1..j share the mean of their raw weights m-n+1
    double share = 0.0;
    for (std::size_t n = i + 1; n <= j; ++n) share += static_cast<double>(m - n + 1);
    share /= static_cast<double>(j - i);
    for (std::size_t n = i; n < j; ++n) w[n] = share / sum;
    i = j;
  }
  return w;
}

std::size_t survivor_count(std::size_t n_pop, double x_rate) {
  auto s = static_cast<std::size_t>(std::ceil(x_rate * static_cast<double>(n_pop) - 1e-9));
  return std::clamp<std::size_t>(s, 1, n_pop);
}

Selection select_survivors_and_pair(std::span<const Fitness> sorted_fit, double x_rate, Rng& rng) {
  Selection sel;
  const std::size_t n = sorted_fit.size();
  sel.survivors = survivor_count(n, x_rate);
  const std::size_t children = n - sel.survivors;
  const std::size_t pairs = (children + 1) / 2;
  const auto weights = rank_weights(sorted_fit.subspan(0, sel.survivors));
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t i = weighted_index(rng, weights);
    std::size_t j = i;
    if (sel.survivors > 1) {
      auto rest = weights;
      rest[i] = 0.0;
      j = weighted_index(rng, rest);
    }
    sel.pairs.emplace_back(i, j);
  }
  return sel;
}

namespace {

Chromosome adopt(const Chromosome& self, const Chromosome& other, const AdmissionContext& ctx,
                 Rng& rng) {
  Chromosome child = self;
  std::set<int> mine(self.vehicle.begin(), self.vehicle.end());
  std::vector<int> fresh;
  for (std::size_t r = 0; r < other.size(); ++r) {
    if (other.admit[r] && !mine.contains(other.vehicle[r])) fresh.push_back(other.vehicle[r]);
  }
  std::sort(fresh.begin(), fresh.end());
  fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
  if (fresh.empty()) return child;
  const int k = fresh[uniform_index(rng, fresh.size())];
  for (std::size_t r = 0; r < child.size(); ++r) {
    if (ctx.forced(r) || child.admit[r] || !ctx.allows(r, static_cast<std::size_t>(k))) continue;
    child.admit[r] = 1;
    child.vehicle[r] = k;
  }
  return child;
}

}  // namespace

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b,
                                            const AdmissionContext& ctx, Rng& rng) {
  Chromosome ca = adopt(a, b, ctx, rng);
  Chromosome cb = adopt(b, a, ctx, rng);
  return {std::move(ca), std::move(cb)};
}

std::size_t mutation_count(const GAConfig& cfg, std::size_t pool_size) {
  const double raw = cfg.mu * static_cast<double>(cfg.n_pop - 1) * static_cast<double>(pool_size);
  return static_cast<std::size_t>(std::floor(raw + 0.5 + 1e-9));
}

void mutate(Population& pop, AdmissionContext& ctx, const GAConfig& cfg, Rng& rng) {
  if (pop.size() < 2) return;
  std::vector<std::size_t> free_bits;
  for (std::size_t r = 0; r < ctx.pool().size(); ++r) {
    if (!ctx.forced(r) && !ctx.non_admissible(r)) free_bits.push_back(r);
  }
  if (!free_bits.empty()) {
    const std::size_t positions = (pop.size() - 1) * free_bits.size();
    const std::size_t toggles = mutation_count(cfg, ctx.pool().size());
    for (std::size_t t = 0; t < toggles; ++t) {
      const std::size_t p = uniform_index(rng, positions);
      auto& c = pop[1 + p / free_bits.size()];
      const std::size_t r = free_bits[p % free_bits.size()];
      if (c.admit[r]) {
        c.admit[r] = 0;
        c.vehicle[r] = -1;
      } else {
        const auto& cand = ctx.candidates(r);
        c.admit[r] = 1;
        c.vehicle[r] = cand[uniform_index(rng, cand.size())];
      }
    }
  }
  for (std::size_t i = 1; i < pop.size(); ++i) {
    if (unit(rng) < cfg.gamma) pop[i] = random_chromosome(ctx, rng);
  }
}

namespace {

TracePoint trace_point(std::span<const Fitness> fit) {
  TracePoint p;
  p.best = fit.front().value();
  double total = 0.0;
  for (const auto& f : fit) total += static_cast<double>(f.value());
  p.mean = total / static_cast<double>(fit.size());
  return p;
}

AdmissionOutcome finish(AdmissionContext& ctx, Chromosome best) {
  AdmissionOutcome out;
  const Fitness fit = ctx.evaluate(best, &out.result);
  out.profit = fit.value();
  out.best = std::move(best);
  for (std::size_t r = 0; r < out.best.size(); ++r) {
    (out.best.admit[r] ? out.admitted : out.rejected).push_back(ctx.pool()[r].id);
  }
  return out;
}

Fitness require_base(AdmissionContext& ctx) {
  const Fitness f = ctx.evaluate(ctx.base());
  if (!f.feasible()) throw ConstraintViolated("previously admitted requests can no longer be served");
  return f;
}

}  // namespace

AdmissionOutcome run_admission(AdmissionContext& ctx, const GAConfig& cfg) {
  cfg.validate();
  const Fitness base_fit = require_base(ctx);
  Rng rng(cfg.seed);

  Population pop = init_population(ctx, cfg, rng);
  std::vector<Fitness> fit = ctx.evaluate_all(pop);
  sort_population(pop, fit);
  std::vector<TracePoint> trace{trace_point(fit)};

  for (std::size_t g = 1; g <= cfg.generations; ++g) {
    const Population backup = pop;
    const std::vector<Fitness> backup_fit = fit;

    const Selection sel = select_survivors_and_pair(fit, cfg.x_rate, rng);
    Population next(pop.begin(), pop.begin() + static_cast<std::ptrdiff_t>(sel.survivors));
    for (auto [i, j] : sel.pairs) {
      auto [a, b] = crossover(pop[i], pop[j], ctx, rng);
      if (next.size() < cfg.n_pop) next.push_back(std::move(a));
      if (next.size() < cfg.n_pop) next.push_back(std::move(b));
    }
    mutate(next, ctx, cfg, rng);

    std::vector<Fitness> next_fit = ctx.evaluate_all(next);
    for (std::size_t s = 0; s < next.size(); ++s) {
      if (next_fit[s].feasible()) continue;
      next[s] = backup[s];
      next_fit[s] = backup_fit[s];
    }
    pop = std::move(next);
    fit = std::move(next_fit);
    sort_population(pop, fit);
    trace.push_back(trace_point(fit));
  }

  Chromosome best = base_fit > fit.front() ? ctx.base() : pop.front();
  AdmissionOutcome out = finish(ctx, std::move(best));
  out.trace = std::move(trace);
  return out;
}

AdmissionOutcome brute_force_admission(AdmissionContext& ctx, std::size_t cap) {
  const std::size_t n = ctx.pool().size();
  if (n > cap) {
    throw OracleCapExceeded("brute-force admission is capped at " + std::to_string(cap) +
                            " requests, got " + std::to_string(n));
  }
  require_base(ctx);

  std::vector<std::vector<int>> options(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (!ctx.forced(r)) options[r].push_back(-1);
    for (int v : ctx.candidates(r)) options[r].push_back(v);
  }

  Chromosome best = ctx.base();
  std::optional<Fitness> best_fit;
  std::vector<std::size_t> odometer(n, 0);
  const bool empty_choice =
      std::any_of(options.begin(), options.end(), [](const auto& o) { return o.empty(); });
  bool done = empty_choice;
  constexpr std::size_t kBatch = 256;
  Population batch;
  auto flush = [&] {
    const auto fits = ctx.evaluate_all(batch);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (fits[i].feasible() && (!best_fit || fits[i] > *best_fit)) {
        best_fit = fits[i];
        best = batch[i];
      }
    }
    batch.clear();
  };
  while (!done) {
    Chromosome c{std::vector<std::uint8_t>(n, 0), std::vector<int>(n, -1)};
    for (std::size_t r = 0; r < n; ++r) {
      const int v = options[r][odometer[r]];
      c.admit[r] = v >= 0;
      c.vehicle[r] = v;
    }
    batch.push_back(std::move(c));
    if (batch.size() == kBatch) flush();
    // last request varies fastest, so enumeration follows pool order
    std::size_t pos = n;
    done = true;
    while (pos > 0) {
      --pos;
      if (++odometer[pos] < options[pos].size()) {
        done = false;
        break;
      }
      odometer[pos] = 0;
    }
  }
  flush();
  return finish(ctx, std::move(best));
}

}  // namespace fleet
