#include <gtest/gtest.h>

#include <map>

#include "admission_fixture.hpp"
#include "fleet_dispatch/admission.hpp"
#include "fleet_dispatch/simulator.hpp"
#include "fleet_dispatch/validator.hpp"

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

Vehicle vehicle(VehicleId id, VertexId at, Seconds lead = 0) {
  Vehicle k;
  k.id = id;
  k.next_vertex = at;
  k.time_to_next = lead;
  k.max_operation = 10000;
  k.capacity = 5;
  return k;
}

Request ride(RequestId id, VertexId s, VertexId d, Cents fare) {
  Request r;
  r.id = id;
  r.pickup = s;
  r.dropoff = d;
  r.max_ride = 1000;
  r.earliest = 0;
  r.latest = 5000;
  r.fare = fare;
  return r;
}

AdmissionContext context(std::vector<Request> rs, std::vector<Vehicle> ks) {
  auto net = line5();
  return AdmissionContext(std::make_shared<const ReducedNetwork>(reduce(net, net.vertices())),
                          std::move(rs), std::move(ks));
}

Chromosome chromo(std::vector<std::uint8_t> z, std::vector<int> k) { return Chromosome{z, k}; }

}  // namespace

TEST(Revenue, HalfFareRoundedHalfUp) {
  Request r;
  r.fare = 1000;
  EXPECT_EQ(revenue(r, 0.5), 500);
  EXPECT_EQ(revenue(r, 0.0), 1000);
  r.fare = 999;
  EXPECT_EQ(revenue(r, 0.5), 500);
  EXPECT_THROW(revenue(r, 1.5), InputError);
}

TEST(FitnessValue, InfeasibleOrdersBelowEverything) {
  EXPECT_LT(Fitness::infeasible(), Fitness::of(-1000000));
  EXPECT_LT(Fitness::of(3), Fitness::of(4));
  EXPECT_EQ(Fitness::infeasible(), Fitness::infeasible());
  EXPECT_THROW(Fitness::infeasible().value(), std::logic_error);
}

TEST(GAConfigCheck, RejectsBadParameters) {
  GAConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.n_pop = 3;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = {};
  cfg.x_rate = 1.0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = {};
  cfg.generations = 0;
  EXPECT_THROW(cfg.validate(), InputError);
}

TEST(Evaluate, Examples) {
  auto k2 = vehicle(2, 1, 4000);
  auto ctx = context({ride(10, 2, 3, 1000)}, {vehicle(1, 1), k2});
  EXPECT_EQ(ctx.evaluate(chromo({0}, {-1})), Fitness::of(0));

  FleetResult res;
  auto f = ctx.evaluate(chromo({1}, {0}), &res);
  const Cents solo = cost_in_cents(Distance::from_miles(4.0), 16.0);  // 1->2->3->5
  EXPECT_EQ(f, Fitness::of(500 - solo));
  EXPECT_EQ(res.total_cost, solo);

  // vehicle 2 cannot arrive inside the window
  auto ctx2 = context({[] {
                         auto r = ride(10, 2, 3, 1000);
                         r.latest = 300;
                         return r;
                       }()},
                      {vehicle(1, 1), k2});
  EXPECT_FALSE(ctx2.allows(0, 1));
  EXPECT_FALSE(ctx2.evaluate(chromo({1}, {1})).feasible());
  EXPECT_THROW(ctx2.evaluate(chromo({0}, {1})), InputError);
  EXPECT_THROW(ctx2.evaluate(chromo({1, 0}, {0, -1})), InputError);
}

TEST(InitPopulation, SingleRequestAdmittedOnEveryAllowedVehicle) {
  auto ctx = context({ride(10, 2, 3, 1000)}, {vehicle(1, 1), vehicle(2, 4), vehicle(3, 5)});
  GAConfig cfg;
  Rng rng(3);
  auto pop = init_population(ctx, cfg, rng);
  ASSERT_EQ(pop.size(), 16u);
  std::set<int> used;
  for (const auto& c : pop) {
    EXPECT_EQ(c.admit[0], 1);
    used.insert(c.vehicle[0]);
  }
  EXPECT_EQ(used.size(), 3u);
}

TEST(InitPopulation, EmptyPoolAndNonAdmissibleBits) {
  auto empty = context({}, {vehicle(1, 1)});
  GAConfig cfg;
  Rng rng(1);
  for (const auto& c : init_population(empty, cfg, rng)) EXPECT_EQ(c.size(), 0u);

  std::vector<Request> rs;
  for (int i = 0; i < 5; ++i) rs.push_back(ride(10 + i, 1 + i % 4, 2 + i % 4, 800));
  rs[2].latest = 1;
  rs[2].pickup = 5;
  rs[2].dropoff = 4;
  auto ctx = context(rs, {vehicle(1, 1), vehicle(2, 2)});
  ASSERT_TRUE(ctx.non_admissible(2));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng r(seed);
    for (const auto& c : init_population(ctx, cfg, r)) {
      EXPECT_EQ(c.admit[2], 0);
      EXPECT_TRUE(ctx.evaluate(c).feasible());
      EXPECT_EQ(std::count(c.admit.begin(), c.admit.end(), 1), 1);
    }
  }
}

TEST(Selection, CountsAndEqualWeights) {
  std::vector<Fitness> fit(4, Fitness::of(5));
  Rng rng(1);
  auto sel = select_survivors_and_pair(fit, 0.5, rng);
  EXPECT_EQ(sel.survivors, 2u);
  ASSERT_EQ(sel.pairs.size(), 1u);
  EXPECT_NE(sel.pairs[0].first, sel.pairs[0].second);
  auto w = rank_weights(fit);
  for (double x : w) EXPECT_DOUBLE_EQ(x, 0.25);
  EXPECT_EQ(survivor_count(16, 0.5), 8u);
  EXPECT_EQ(survivor_count(6, 0.3), 2u);
}

TEST(Selection, RankWeightsAndDrawFrequencies) {
  std::vector<Fitness> fit{Fitness::of(9), Fitness::of(7), Fitness::of(7), Fitness::of(1)};
  auto w = rank_weights(fit);
  EXPECT_DOUBLE_EQ(w[0], 0.4);
  EXPECT_DOUBLE_EQ(w[1], 0.25);
  EXPECT_DOUBLE_EQ(w[2], 0.25);
  EXPECT_DOUBLE_EQ(w[3], 0.1);

  // Eight distinct fitness values, four survivors, rank weights 4:3:2:1.
  std::vector<Fitness> pop;
  for (int i = 8; i > 0; --i) pop.push_back(Fitness::of(i));
  Rng rng(42);
  std::vector<int> first(4, 0);
  const int draws = 10000;
  int made = 0;
  while (made < draws) {
    auto sel = select_survivors_and_pair(pop, 0.5, rng);
    for (auto [i, j] : sel.pairs) {
      if (made == draws) break;
      ASSERT_LT(i, 4u);
      ASSERT_NE(i, j);
      ++first[i];
      ++made;
    }
  }
  for (int i = 0; i < 4; ++i) {
    const double expected = (4.0 - i) / 10.0;
    EXPECT_NEAR(first[i] / static_cast<double>(draws), expected, 0.02) << "rank " << i;
  }
  EXPECT_GT(first[0], first[1]);
}

TEST(Crossover, Examples) {
  auto ctx = context({ride(10, 2, 3, 900), ride(11, 3, 4, 900), ride(12, 1, 2, 900)},
                     {vehicle(1, 1), vehicle(2, 2)});
  Rng rng(5);
  auto a = chromo({1, 0, 0}, {0, -1, -1});
  auto b = chromo({0, 1, 0}, {-1, 0, -1});
  auto [ca, cb] = crossover(a, b, ctx, rng);
  EXPECT_EQ(ca, a);
  EXPECT_EQ(cb, b);

  auto none = chromo({0, 0, 0}, {-1, -1, -1});
  auto uses2 = chromo({0, 1, 0}, {-1, 1, -1});
  auto [child, other] = crossover(none, uses2, ctx, rng);
  EXPECT_EQ(child, chromo({1, 1, 1}, {1, 1, 1}));
  EXPECT_EQ(other, uses2);
}

TEST(Crossover, AllExtraRequestsTabuGivesNothing) {
  auto late = vehicle(2, 5, 3000);
  auto r0 = ride(10, 2, 3, 900);
  r0.latest = 200;
  auto r1 = ride(11, 4, 5, 900);
  auto ctx = context({r0, r1}, {vehicle(1, 1), late});
  ASSERT_FALSE(ctx.allows(0, 1));
  Rng rng(1);
  auto a = chromo({0, 0}, {-1, -1});
  auto b = chromo({0, 1}, {-1, 1});
  auto a2 = chromo({0, 1}, {-1, 0});
  auto [child, _] = crossover(a2, b, ctx, rng);
  EXPECT_EQ(child, a2);
  (void)a;
}

TEST(Mutation, CountAndDisabledOperators) {
  GAConfig cfg;
  EXPECT_EQ(mutation_count(cfg, 10), 23u);
  EXPECT_EQ(mutation_count(cfg, 0), 0u);

  auto ctx = context({ride(10, 2, 3, 900), ride(11, 3, 4, 900)}, {vehicle(1, 1)});
  cfg.mu = 0;
  cfg.gamma = 0;
  cfg.n_pop = 4;
  Rng rng(2);
  auto pop = init_population(ctx, cfg, rng);
  auto before = pop;
  mutate(pop, ctx, cfg, rng);
  EXPECT_EQ(pop, before);
}

TEST(Mutation, EliteAndForbiddenBitsUntouched) {
  std::vector<Request> rs{ride(10, 2, 3, 900), ride(11, 3, 4, 900), ride(12, 5, 4, 900)};
  rs[2].latest = 1;
  auto ctx = context(rs, {vehicle(1, 1), vehicle(2, 2)});
  GAConfig cfg;
  cfg.mu = 1.0;
  cfg.gamma = 0.3;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    auto pop = init_population(ctx, cfg, rng);
    const auto elite = pop[0];
    mutate(pop, ctx, cfg, rng);
    EXPECT_EQ(pop[0], elite);
    for (const auto& c : pop) {
      EXPECT_EQ(c.admit[2], 0);
      for (std::size_t r = 0; r < c.size(); ++r) {
        if (c.admit[r]) EXPECT_TRUE(ctx.allows(r, c.vehicle[r]));
      }
    }
  }
}

TEST(RunAdmission, ForcedOnlyPoolIsReadmitted) {
  auto k = vehicle(1, 2);
  k.assigned_unserved = {10, 11};
  auto r0 = ride(10, 2, 3, 700);
  auto r1 = ride(11, 3, 4, 700);
  for (auto* r : {&r0, &r1}) {
    r->state = RequestState::AssignedUnserved;
    r->assigned_vehicle = 1;
  }
  auto ctx = context({r0, r1}, {k, vehicle(2, 5)});
  GAConfig cfg;
  cfg.generations = 5;
  auto out = run_admission(ctx, cfg);
  EXPECT_EQ(out.best.admit, (std::vector<std::uint8_t>{1, 1}));
  EXPECT_EQ(out.profit, ctx.evaluate(out.best).value());
  EXPECT_GE(Fitness::of(out.profit), ctx.evaluate(ctx.base()));
  EXPECT_EQ(out.admitted, (std::vector<RequestId>{10, 11}));
  EXPECT_EQ(out.trace.size(), 6u);
}

TEST(RunAdmission, InServiceKeepsItsVehicle) {
  auto k = vehicle(1, 3);
  k.in_service = {10};
  auto r0 = ride(10, 3, 4, 700);
  r0.state = RequestState::InService;
  r0.assigned_vehicle = 1;
  r0.earliest.reset();
  r0.latest.reset();
  auto ctx = context({r0, ride(11, 2, 4, 900)}, {vehicle(2, 3), k});
  EXPECT_EQ(ctx.pinned_vehicle(0), 1);
  EXPECT_EQ(ctx.candidates(0), (std::vector<int>{1}));
  GAConfig cfg;
  cfg.generations = 5;
  auto out = run_admission(ctx, cfg);
  EXPECT_EQ(out.best.vehicle[0], 1);
  auto bf = brute_force_admission(ctx);
  EXPECT_EQ(bf.best.vehicle[0], 1);
}

TEST(RunAdmission, NonAdmissibleOnlyPool) {
  auto r = ride(10, 4, 3, 5000);
  r.latest = 1;
  auto ctx = context({r}, {vehicle(1, 1)});
  auto out = run_admission(ctx, GAConfig{});
  EXPECT_EQ(out.profit, 0);
  EXPECT_EQ(out.rejected, (std::vector<RequestId>{10}));
  EXPECT_TRUE(out.result.schedules.empty());
}

TEST(RunAdmission, DeterministicPerSeed) {
  auto inst = sample::random_instance(9, sample::admission_shape(4, 3));
  auto a = sample::admission_context(inst);
  auto b = sample::admission_context(inst);
  GAConfig cfg;
  cfg.seed = 17;
  auto x = run_admission(*a, cfg);
  auto y = run_admission(*b, cfg);
  EXPECT_EQ(x.best, y.best);
  EXPECT_EQ(x.profit, y.profit);
  ASSERT_EQ(x.trace.size(), y.trace.size());
  for (std::size_t i = 0; i < x.trace.size(); ++i) {
    EXPECT_EQ(x.trace[i].best, y.trace[i].best);
    EXPECT_EQ(x.trace[i].mean, y.trace[i].mean);
  }
}

TEST(RunAdmission, ConvergesNearBruteForceOnGeneratedCities) {
  double normalized = 0.0;
  int runs = 0;
  for (std::uint64_t c = 0; c < 3; ++c) {
    GeneratorParams params;
    params.requests = 3;
    params.arrival_span = 180.0;
    params.strata = 1;
    auto ctx = scenario_admission(generate_scenario(31 + c, params));
    const auto best = brute_force_admission(*ctx).profit;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      GAConfig cfg;
      cfg.seed = seed;
      auto out = run_admission(*ctx, cfg);
      EXPECT_LE(out.profit, best);
      for (std::size_t g = 1; g < out.trace.size(); ++g) EXPECT_GE(out.trace[g].best, out.trace[g - 1].best);
      normalized += best > 0 ? static_cast<double>(out.profit) / static_cast<double>(best) : 1.0;
      ++runs;
    }
  }
  EXPECT_GE(normalized / runs, 0.99);
}

TEST(BruteForceAdmission, Examples) {
  auto empty = context({}, {vehicle(1, 1)});
  EXPECT_EQ(brute_force_admission(empty).profit, 0);

  // solo cost 1->2->3->5 is 4 miles, 64 cents
  auto cheap = context({ride(10, 2, 3, 100)}, {vehicle(1, 1)});
  auto lose = brute_force_admission(cheap);
  EXPECT_EQ(lose.profit, 0);
  EXPECT_EQ(lose.rejected, (std::vector<RequestId>{10}));

  auto rich = context({ride(10, 2, 3, 1000)}, {vehicle(1, 1)});
  auto win = brute_force_admission(rich);
  EXPECT_EQ(win.profit, 500 - 64);
  EXPECT_EQ(win.admitted, (std::vector<RequestId>{10}));

  std::vector<Request> many;
  for (int i = 0; i < 6; ++i) many.push_back(ride(10 + i, 1, 2, 100));
  auto big = context(many, {vehicle(1, 1)});
  EXPECT_THROW(brute_force_admission(big), OracleCapExceeded);
}

TEST(AdmissionProperties, NonnegativeProfitAndValidSchedules) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto inst = sample::random_instance(seed, sample::admission_shape(1 + seed % 4, 2));
    for (auto& r : inst.requests) r.fare = static_cast<Cents>((seed * 37 + r.id * 11) % 300);
    auto ctx = sample::admission_context(inst);
    auto bf = brute_force_admission(*ctx);
    GAConfig cfg;
    cfg.generations = 10;
    cfg.seed = seed;
    auto ga = run_admission(*ctx, cfg);
    EXPECT_GE(bf.profit, 0);
    EXPECT_GE(ga.profit, 0);
    EXPECT_LE(ga.profit, bf.profit);
    for (const auto* out : {&bf, &ga}) {
      for (const auto& [vid, schedule] : out->result.schedules) {
        const auto v = ctx->scheduler().vehicle_index(vid);
        std::vector<Request> mine;
        for (std::size_t r = 0; r < out->best.size(); ++r) {
          if (out->best.admit[r] && out->best.vehicle[r] == static_cast<int>(v)) mine.push_back(ctx->pool()[r]);
        }
        EXPECT_TRUE(validate_schedule(schedule, ctx->vehicles()[v], mine, ctx->network()).empty());
      }
    }
  }
}

TEST(AdmissionProperties, MorePoolNeverLessProfit) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = sample::random_instance(seed, sample::admission_shape(4, 2));
    auto big = sample::admission_context(inst);
    auto small_inst = inst;
    small_inst.requests.pop_back();
    auto small = sample::admission_context(small_inst);
    EXPECT_LE(brute_force_admission(*small).profit, brute_force_admission(*big).profit) << seed;
  }
}

TEST(AdmissionProperties, SubChromosomesStayFeasible) {
  auto inst = sample::random_instance(4, sample::admission_shape(5, 3));
  auto ctx = sample::admission_context(inst);
  GAConfig cfg;
  Rng rng(8);
  int checked = 0;
  for (int t = 0; t < 40; ++t) {
    auto c = random_chromosome(*ctx, rng);
    Population tmp{c, c};
    mutate(tmp, *ctx, cfg, rng);
    auto full = tmp[1];
    if (!ctx->evaluate(full).feasible()) continue;
    for (std::size_t r = 0; r < full.size(); ++r) {
      auto sub = full;
      sub.admit[r] = 0;
      sub.vehicle[r] = -1;
      EXPECT_TRUE(ctx->evaluate(sub).feasible());
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}
