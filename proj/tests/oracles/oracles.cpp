#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

namespace fleet::oracle {

std::optional<Path> enumerate_paths(const RoadNetwork& net, VertexId from, VertexId to) {
  std::optional<Path> best;
  Path cur;
  cur.path.push_back(from);
  std::set<VertexId> used{from};
  std::function<void()> dfs = [&] {
    const VertexId at = cur.path.back();
    if (at == to) {
      if (!best || cur.cost < best->cost || (cur.cost == best->cost && cur.path < best->path)) {
        best = cur;
      }
      return;
    }
    for (const auto& e : net.edges()) {
      if (e.from != at || used.contains(e.to)) continue;
      const auto c = Distance::from_miles(e.cost);
      used.insert(e.to);
      cur.path.push_back(e.to);
      cur.cost += c;
      cur.time += e.time;
      dfs();
      cur.time -= e.time;
      cur.cost = cur.cost - c;
      cur.path.pop_back();
      used.erase(e.to);
    }
  };
  dfs();
  return best;
}

Distances::Distances(const RoadNetwork& net) {
  for (auto v : net.vertices()) index_.emplace(v, index_.size());
  n_ = index_.size();
  d_.assign(n_ * n_, std::nullopt);
  for (std::size_t i = 0; i < n_; ++i) d_[i * n_ + i] = std::pair{Distance{}, 0.0};
  for (const auto& e : net.edges()) {
    auto& slot = d_[index_[e.from] * n_ + index_[e.to]];
    const auto c = Distance::from_miles(e.cost);
    if (e.from == e.to) continue;
    if (!slot || c < slot->first) slot = std::pair{c, e.time};
  }
  for (std::size_t m = 0; m < n_; ++m) {
    for (std::size_t i = 0; i < n_; ++i) {
      const auto& im = d_[i * n_ + m];
      if (!im) continue;
      for (std::size_t j = 0; j < n_; ++j) {
        const auto& mj = d_[m * n_ + j];
        if (!mj) continue;
        auto& ij = d_[i * n_ + j];
        const Distance c = im->first + mj->first;
        if (!ij || c < ij->first) ij = std::pair{c, im->second + mj->second};
      }
    }
  }
}

std::optional<std::pair<Distance, Seconds>> Distances::leg(VertexId a, VertexId b) const {
  return d_[index_.at(a) * n_ + index_.at(b)];
}

namespace {

const Request& find(std::span<const Request> reqs, RequestId id) {
  return *std::find_if(reqs.begin(), reqs.end(), [&](const Request& r) { return r.id == id; });
}

}  // namespace

bool timetable_feasible(const StopSequence& seq, const Vehicle& k, std::span<const Request> reqs,
                        const Distances& d) {
  // Node 0 is the time origin; stop i is node i + 1. w[a][b] bounds t_b - t_a.
  const std::size_t n = seq.size() + 1;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> w(n * n, inf);
  for (std::size_t i = 0; i < n; ++i) w[i * n + i] = 0.0;
  auto bound = [&](std::size_t a, std::size_t b, double v) { w[a * n + b] = std::min(w[a * n + b], v); };

  bound(0, 1, k.time_to_next);
  bound(1, 0, -k.time_to_next);
  std::map<RequestId, std::size_t> picked;
  for (auto id : k.in_service) picked[id] = 1;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const std::size_t node = i + 1;
    bound(0, node, k.max_operation);
    if (i > 0) {
      auto leg = d.leg(seq[i - 1].vertex, seq[i].vertex);
      if (!leg) return false;
      bound(node, node - 1, -leg->second);
      if (seq[i].kind != StopKind::Pickup) bound(node - 1, node, leg->second);
    }
    if (seq[i].kind == StopKind::Pickup) {
      const auto& r = find(reqs, *seq[i].request);
      if (r.earliest) bound(node, 0, -*r.earliest);
      if (r.latest) bound(0, node, *r.latest);
      picked[r.id] = node;
    } else if (seq[i].kind == StopKind::Dropoff) {
      const auto& r = find(reqs, *seq[i].request);
      if (!picked.contains(r.id)) return false;
      bound(picked[r.id], node, r.max_ride);
    }
  }
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double via = w[i * n + m] + w[m * n + j];
        if (via < w[i * n + j]) w[i * n + j] = via;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i * n + i] < -1e-6) return false;
  }
  return true;
}

bool load_feasible(const StopSequence& seq, const Vehicle& k, std::span<const Request> reqs) {
  int load = 0;
  for (auto id : k.in_service) load += find(reqs, id).seats;
  if (load > k.capacity) return false;
  for (const auto& s : seq) {
    if (s.kind == StopKind::Pickup) load += find(reqs, *s.request).seats;
    if (s.kind == StopKind::Dropoff) load -= find(reqs, *s.request).seats;
    if (load < 0 || load > k.capacity) return false;
  }
  return load == 0;
}

namespace {

// Calls visit(seq, cost, served) for every complete route of k serving some
// subset of reqs that includes everything on board.
void each_route(const Vehicle& k, std::span<const Request> reqs, const Distances& d,
                const std::vector<VertexId>& stations, bool all_required,
                const std::function<void(const StopSequence&, Distance, unsigned)>& visit) {
  const std::size_t n = reqs.size();
  std::vector<int> state(n, 0);  // 0 untouched, 1 on board, 2 done
  unsigned must = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (k.in_service.contains(reqs[i].id)) {
      state[i] = 1;
      must |= 1u << i;
    }
  }
  StopSequence seq{Stop{k.next_vertex, StopKind::Start, std::nullopt}};
  std::function<void(Distance, unsigned)> dfs = [&](Distance cost, unsigned served) {
    const bool empty = std::none_of(state.begin(), state.end(), [](int s) { return s == 1; });
    const bool complete = !all_required || std::all_of(state.begin(), state.end(), [](int s) { return s == 2; });
    if (empty && complete && served != 0) {
      for (auto st : stations) {
        auto leg = d.leg(seq.back().vertex, st);
        if (!leg) continue;
        seq.push_back(Stop{st, StopKind::Refuel, std::nullopt});
        visit(seq, cost + leg->first, served);
        seq.pop_back();
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (state[i] == 2) continue;
      const bool pickup = state[i] == 0;
      const VertexId v = pickup ? reqs[i].pickup : reqs[i].dropoff;
      auto leg = d.leg(seq.back().vertex, v);
      if (!leg) continue;
      seq.push_back(Stop{v, pickup ? StopKind::Pickup : StopKind::Dropoff, reqs[i].id});
      state[i] += 1;
      dfs(cost + leg->first, served | (1u << i));
      state[i] -= 1;
      seq.pop_back();
    }
  };
  (void)must;
  dfs(Distance{}, 0);
}

}  // namespace

std::optional<Route> enumerate_vehicle(const Vehicle& k, std::span<const Request> reqs,
                                       const RoadNetwork& net) {
  if (reqs.empty()) return Route{};
  Distances d(net);
  std::optional<Route> best;
  each_route(k, reqs, d, net.refuel_stations(), true,
             [&](const StopSequence& seq, Distance cost, unsigned) {
               if (best && (cost > best->cost || (cost == best->cost && !(seq < best->seq)))) return;
               if (!load_feasible(seq, k, reqs) || !timetable_feasible(seq, k, reqs, d)) return;
               best = Route{cost, seq};
             });
  return best;
}

std::optional<Joint> joint_routes(std::span<const Vehicle> vehicles, std::span<const Request> reqs,
                                  const RoadNetwork& net, double cents_per_mile) {
  Distances d(net);
  const unsigned full = (1u << reqs.size()) - 1;
  // best[v][mask]: cheapest route of vehicle v serving exactly mask
  std::vector<std::map<unsigned, Route>> best(vehicles.size());
  std::vector<unsigned> must(vehicles.size(), 0);
  for (std::size_t v = 0; v < vehicles.size(); ++v) {
    const auto& k = vehicles[v];
    for (std::size_t i = 0; i < reqs.size(); ++i) {
      if (k.in_service.contains(reqs[i].id)) must[v] |= 1u << i;
    }
    if (must[v] == 0) best[v][0] = Route{};
    each_route(k, reqs, d, net.refuel_stations(), false,
               [&](const StopSequence& seq, Distance cost, unsigned served) {
                 if ((served & must[v]) != must[v]) return;
                 auto it = best[v].find(served);
                 if (it != best[v].end() && cost >= it->second.cost) return;
                 if (!load_feasible(seq, k, reqs) || !timetable_feasible(seq, k, reqs, d)) return;
                 best[v][served] = Route{cost, seq};
               });
  }
  std::optional<Joint> out;
  Joint cur;
  std::function<void(std::size_t, unsigned)> combine = [&](std::size_t v, unsigned used) {
    if (v == vehicles.size()) {
      if (used == full && (!out || cur.distance < out->distance)) out = cur;
      return;
    }
    for (const auto& [mask, route] : best[v]) {
      if (mask & used) continue;
      const Joint saved = cur;
      cur.distance += route.cost;
      if (mask != 0) {
        cur.cost += static_cast<Cents>(std::llround(route.cost.miles() * cents_per_mile));
        cur.routes[vehicles[v].id] = route;
      }
      combine(v + 1, used | mask);
      cur = saved;
    }
  };
  combine(0, 0);
  return out;
}

}  // namespace fleet::oracle
