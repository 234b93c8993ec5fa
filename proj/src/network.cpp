#include "fleet_dispatch/network.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <queue>
#include <set>
#include <string>

namespace fleet {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // splitmix64 finalizer over a running FNV-style accumulator
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

std::uint64_t bits_of(double x) {
  std::uint64_t out = 0;
  static_assert(sizeof(out) == sizeof(x));
  std::memcpy(&out, &x, sizeof(out));
  return out;
}

struct Label {
  bool reached = false;
  Distance cost;
  Seconds time = 0.0;
  std::vector<std::size_t> path;
};

// Dijkstra over vertex indices. Because vertices are sorted, comparing index
// sequences is the same as comparing id sequences.
std::vector<Label> single_source(const RoadNetwork& net, std::size_t source) {
  const std::size_t n = net.vertices().size();
  std::vector<Label> labels(n);
  std::vector<bool> done(n, false);
  labels[source].reached = true;
  labels[source].path = {source};

  using Entry = std::pair<std::int64_t, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  queue.emplace(0, source);

  std::vector<std::size_t> candidate;
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (done[u] || d != labels[u].cost.micro()) continue;
    done[u] = true;
    for (const auto& arc : net.out_arcs(u)) {
      if (done[arc.to]) continue;
      const Distance nd = labels[u].cost + arc.cost;
      Label& target = labels[arc.to];
      bool better = !target.reached || nd < target.cost;
      if (!better && nd == target.cost) {
        candidate = labels[u].path;
        candidate.push_back(arc.to);
        better = std::lexicographical_compare(candidate.begin(), candidate.end(),
                                              target.path.begin(), target.path.end());
        if (better) {
          target.path = candidate;
          target.time = labels[u].time + arc.time;
        }
        continue;
      }
      if (better) {
        target.reached = true;
        target.cost = nd;
        target.time = labels[u].time + arc.time;
        target.path = labels[u].path;
        target.path.push_back(arc.to);
        queue.emplace(nd.micro(), arc.to);
      }
    }
  }
  return labels;
}

PathResult to_result(const RoadNetwork& net, const Label& label) {
  PathResult out{label.cost, label.time, {}};
  out.path.reserve(label.path.size());
  for (auto idx : label.path) out.path.push_back(net.vertices()[idx]);
  return out;
}

}  // namespace

RoadNetwork::RoadNetwork(std::vector<VertexId> vertices, std::vector<Edge> edges,
                         std::vector<VertexId> refuel_stations)
    : vertices_(std::move(vertices)),
      edges_(std::move(edges)),
      refuel_stations_(std::move(refuel_stations)) {
  std::sort(vertices_.begin(), vertices_.end());
  if (std::adjacent_find(vertices_.begin(), vertices_.end()) != vertices_.end()) {
    throw InputError("duplicate vertex id");
  }
  for (const auto& e : edges_) {
    if (!has_vertex(e.from) || !has_vertex(e.to)) {
      throw InputError("edge (" + std::to_string(e.from) + "," + std::to_string(e.to) +
                       ") references an unknown vertex");
    }
    if (!(e.cost > 0.0) || Distance::from_miles(e.cost).micro() <= 0 || !(e.time > 0.0)) {
      throw InputError("edge (" + std::to_string(e.from) + "," + std::to_string(e.to) +
                       ") must have positive cost and time");
    }
  }
  std::sort(refuel_stations_.begin(), refuel_stations_.end());
  refuel_stations_.erase(std::unique(refuel_stations_.begin(), refuel_stations_.end()),
                         refuel_stations_.end());
  if (refuel_stations_.empty()) throw InputError("at least one refuel station is required");
  for (auto s : refuel_stations_) {
    if (!has_vertex(s)) throw InputError("refuel station " + std::to_string(s) + " is not a vertex");
  }
  rebuild_adjacency();
}

bool RoadNetwork::has_vertex(VertexId v) const {
  return std::binary_search(vertices_.begin(), vertices_.end(), v);
}

bool RoadNetwork::has_edge(VertexId from, VertexId to) const {
  return std::any_of(edges_.begin(), edges_.end(),
                     [&](const Edge& e) { return e.from == from && e.to == to; });
}

std::size_t RoadNetwork::index_of(VertexId v) const {
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), v);
  if (it == vertices_.end() || *it != v) throw InputError("unknown vertex " + std::to_string(v));
  return static_cast<std::size_t>(it - vertices_.begin());
}

void RoadNetwork::set_travel_time(VertexId from, VertexId to, Seconds time) {
  if (!(time > 0.0)) throw InputError("travel time must be positive");
  bool found = false;
  for (auto& e : edges_) {
    if (e.from == from && e.to == to) {
      e.time = time;
      found = true;
    }
  }
  if (!found) {
    throw InputError("unknown edge (" + std::to_string(from) + "," + std::to_string(to) + ")");
  }
  rebuild_adjacency();
}

std::uint64_t RoadNetwork::fingerprint() const {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  h = mix(h, vertices_.size());
  for (auto v : vertices_) h = mix(h, static_cast<std::uint64_t>(v));
  h = mix(h, edges_.size());
  for (const auto& e : edges_) {
    h = mix(h, static_cast<std::uint64_t>(e.from));
    h = mix(h, static_cast<std::uint64_t>(e.to));
    h = mix(h, bits_of(e.cost));
    h = mix(h, bits_of(e.time));
  }
  for (auto s : refuel_stations_) h = mix(h, static_cast<std::uint64_t>(s));
  return h;
}

void RoadNetwork::rebuild_adjacency() {
  adjacency_.assign(vertices_.size(), {});
  for (const auto& e : edges_) {
    adjacency_[index_of(e.from)].push_back(
        Arc{index_of(e.to), Distance::from_miles(e.cost), e.time});
  }
  for (auto& arcs : adjacency_) {
    std::stable_sort(arcs.begin(), arcs.end(),
                     [](const Arc& a, const Arc& b) { return a.to < b.to; });
  }
}

std::optional<PathResult> shortest_path(const RoadNetwork& net, VertexId from, VertexId to) {
  const std::size_t s = net.index_of(from);
  const std::size_t t = net.index_of(to);
  auto labels = single_source(net, s);
  if (!labels[t].reached) return std::nullopt;
  return to_result(net, labels[t]);
}

std::optional<std::size_t> ReducedNetwork::key_index(VertexId v) const {
  auto it = index_.find(v);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const PathResult* ReducedNetwork::leg(VertexId from, VertexId to) const {
  auto a = key_index(from);
  auto b = key_index(to);
  if (!a || !b) {
    throw InputError("vertex " + std::to_string(a ? to : from) + " is not a key vertex");
  }
  return leg_at(*a, *b);
}

std::size_t ReducedNetwork::pair_count() const {
  std::size_t count = 0;
  const std::size_t n = keys_.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && legs_[i * n + j]) ++count;
    }
  }
  return count;
}

ReducedNetwork reduce(const RoadNetwork& net, std::span<const VertexId> key_vertices) {
  std::set<VertexId> keys(key_vertices.begin(), key_vertices.end());
  for (auto v : keys) {
    if (!net.has_vertex(v)) throw InputError("key vertex " + std::to_string(v) + " not in network");
  }
  keys.insert(net.refuel_stations().begin(), net.refuel_stations().end());

  ReducedNetwork rn;
  rn.keys_.assign(keys.begin(), keys.end());
  rn.stations_ = net.refuel_stations();
  const std::size_t n = rn.keys_.size();
  for (std::size_t i = 0; i < n; ++i) rn.index_[rn.keys_[i]] = i;
  rn.legs_.resize(n * n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto labels = single_source(net, net.index_of(rn.keys_[i]));
    for (std::size_t j = 0; j < n; ++j) {
      const auto& label = labels[net.index_of(rn.keys_[j])];
      if (label.reached) rn.legs_[i * n + j] = to_result(net, label);
    }
  }

  rn.nearest_station_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto s : rn.stations_) {
      const auto* l = rn.leg_at(i, rn.index_.at(s));
      if (l && (!rn.nearest_station_[i] || l->cost < *rn.nearest_station_[i])) {
        rn.nearest_station_[i] = l->cost;
      }
    }
  }
  return rn;
}

std::vector<VertexId> expand_route(const ReducedNetwork& rn, std::span<const VertexId> key_route) {
  std::vector<VertexId> out;
  if (key_route.empty()) return out;
  out.push_back(key_route.front());
  for (std::size_t i = 1; i < key_route.size(); ++i) {
    const auto* l = rn.leg(key_route[i - 1], key_route[i]);
    if (!l) {
      throw InfeasibleRouteError("no path from " + std::to_string(key_route[i - 1]) + " to " +
                                 std::to_string(key_route[i]));
    }
    out.insert(out.end(), l->path.begin() + 1, l->path.end());
  }
  return out;
}

std::shared_ptr<const ReducedNetwork> ReductionCache::get(const RoadNetwork& net,
                                                          std::span<const VertexId> key_vertices) {
  std::vector<VertexId> keys(key_vertices.begin(), key_vertices.end());
  keys.insert(keys.end(), net.refuel_stations().begin(), net.refuel_stations().end());
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  auto key = std::make_pair(net.fingerprint(), keys);
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  auto built = std::make_shared<const ReducedNetwork>(reduce(net, keys));
  std::lock_guard lock(mutex_);
  return entries_.emplace(std::move(key), std::move(built)).first->second;
}

std::size_t ReductionCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

namespace {

const RoadNetwork::Arc& cheapest_arc(const RoadNetwork& net, VertexId from, VertexId to) {
  const std::size_t target = net.index_of(to);
  const RoadNetwork::Arc* best = nullptr;
  for (const auto& arc : net.out_arcs(net.index_of(from))) {
    if (arc.to == target && (!best || arc.cost < best->cost)) best = &arc;
  }
  if (!best) {
    throw InfeasibleRouteError("no edge " + std::to_string(from) + " -> " + std::to_string(to));
  }
  return *best;
}

}  // namespace

std::vector<Seconds> path_arrival_times(const RoadNetwork& net, std::span<const VertexId> path) {
  std::vector<Seconds> out;
  if (path.empty()) return out;
  out.push_back(0.0);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    out.push_back(out.back() + cheapest_arc(net, path[i], path[i + 1]).time);
  }
  return out;
}

Distance path_cost(const RoadNetwork& net, std::span<const VertexId> path) {
  Distance total;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) total += cheapest_arc(net, path[i], path[i + 1]).cost;
  return total;
}

}  // namespace fleet
