#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "fleet_dispatch/core.hpp"

namespace fleet {

struct Edge {
  VertexId from = 0;
  VertexId to = 0;
  double cost = 0.0;  // miles
  Seconds time = 0.0;
};

/// Directed road graph with per-edge cost and travel time.
///
/// Vertices are kept sorted so vertex order is id order; parallel edges are
/// allowed and simply compete in shortest-path search.
class RoadNetwork {
 public:
  RoadNetwork() = default;
  RoadNetwork(std::vector<VertexId> vertices, std::vector<Edge> edges,
              std::vector<VertexId> refuel_stations);

  const std::vector<VertexId>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<VertexId>& refuel_stations() const { return refuel_stations_; }

  bool has_vertex(VertexId v) const;
  bool has_edge(VertexId from, VertexId to) const;
  std::size_t index_of(VertexId v) const;  // throws InputError

  /// Replace the travel time of every (from, to) edge.
  void set_travel_time(VertexId from, VertexId to, Seconds time);

  /// Stable content hash over vertices, edges and stations.
  std::uint64_t fingerprint() const;

  struct Arc {
    std::size_t to;
    Distance cost;
    Seconds time;
  };
  const std::vector<Arc>& out_arcs(std::size_t index) const { return adjacency_[index]; }

 private:
  void rebuild_adjacency();

  std::vector<VertexId> vertices_;
  std::vector<Edge> edges_;
  std::vector<VertexId> refuel_stations_;
  std::vector<std::vector<Arc>> adjacency_;
};

struct PathResult {
  Distance cost;
  Seconds time = 0.0;
  std::vector<VertexId> path;
};

/// Minimum-cost path; equal-cost paths resolve to the lexicographically
/// smallest vertex sequence. Time is summed along the chosen path.
std::optional<PathResult> shortest_path(const RoadNetwork& net, VertexId from, VertexId to);

/// Cumulative travel time at each vertex of a road path, starting at 0.
/// Each hop uses the first cheapest edge, as shortest_path does.
std::vector<Seconds> path_arrival_times(const RoadNetwork& net, std::span<const VertexId> path);

/// Cost of a road path by the same hop rule.
Distance path_cost(const RoadNetwork& net, std::span<const VertexId> path);

/// Shortest-path closure of the road graph over a set of key vertices.
class ReducedNetwork {
 public:
  const std::vector<VertexId>& key_vertices() const { return keys_; }
  const std::vector<VertexId>& refuel_stations() const { return stations_; }

  bool is_key(VertexId v) const { return index_.contains(v); }
  std::optional<std::size_t> key_index(VertexId v) const;

  /// Leg between two keys; i == j yields the zero leg. Null if unreachable.
  const PathResult* leg(VertexId from, VertexId to) const;
  const PathResult* leg_at(std::size_t from, std::size_t to) const {
    const auto& slot = legs_[from * keys_.size() + to];
    return slot ? &*slot : nullptr;
  }

  /// Number of stored ordered pairs, excluding the diagonal.
  std::size_t pair_count() const;

  /// Cost to the cheapest reachable refuel station, if any.
  std::optional<Distance> nearest_station_cost(std::size_t from) const {
    return nearest_station_[from];
  }

  friend ReducedNetwork reduce(const RoadNetwork& net, std::span<const VertexId> key_vertices);

 private:
  std::vector<VertexId> keys_;
  std::vector<VertexId> stations_;
  std::unordered_map<VertexId, std::size_t> index_;
  std::vector<std::optional<PathResult>> legs_;
  std::vector<std::optional<Distance>> nearest_station_;
};

/// Builds the closure over key_vertices plus every refuel station.
ReducedNetwork reduce(const RoadNetwork& net, std::span<const VertexId> key_vertices);

/// Expands a key route into the full road route, sharing junction vertices.
std::vector<VertexId> expand_route(const ReducedNetwork& rn, std::span<const VertexId> key_route);

/// Memoizes reductions by (network fingerprint, key set).
class ReductionCache {
 public:
  std::shared_ptr<const ReducedNetwork> get(const RoadNetwork& net,
                                            std::span<const VertexId> key_vertices);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::uint64_t, std::vector<VertexId>>, std::shared_ptr<const ReducedNetwork>>
      entries_;
};

}  // namespace fleet
