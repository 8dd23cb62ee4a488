#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sfcsim/types.hpp"

namespace sfc {

// Bandwidth is kept in integer kbps so reserve/release pairs cancel exactly.
using Kbps = std::int64_t;

inline Kbps mbps_to_kbps(double mbps) { return static_cast<Kbps>(mbps * 1000.0 + 0.5); }
inline double kbps_to_mbps(Kbps kbps) { return static_cast<double>(kbps) / 1000.0; }

inline constexpr double kFiberKmPerSecond = 2.0e5;
inline constexpr Kbps kDefaultLinkCapacity = 500'000;  // 500 Mbps

struct NodeSpec {
  DcId id = 0;
  double x_km = 0;
  double y_km = 0;
};

struct EdgeSpec {
  DcId a = 0;
  DcId b = 0;
  Kbps capacity = kDefaultLinkCapacity;
  std::optional<double> length_km;  // overrides the Euclidean distance
};

struct PathResult {
  std::vector<DcId> hops;
  double length_km = 0;

  DcId src() const { return hops.front(); }
  DcId dest() const { return hops.back(); }
  bool operator==(const PathResult&) const = default;
};

/// Undirected DC graph with per-edge residual bandwidth.
///
/// Node ids are dense: 0..n-1. Each undirected edge owns a single residual
/// shared by both directions.
class NetworkGraph {
 public:
  struct Edge {
    DcId a;
    DcId b;
    Kbps capacity;
    Kbps residual;
    double length_km;
  };

  NetworkGraph() = default;
  NetworkGraph(std::vector<NodeSpec> nodes, const std::vector<EdgeSpec>& edges);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // Euclidean distance of node coordinates (the W matrix).
  double dist(DcId m, DcId n) const;
  // Edge index or -1.
  int edge_index(DcId m, DcId n) const;
  Kbps residual(DcId m, DcId n) const;

  /// Minimum-length simple path whose every edge has residual >= req_bw.
  /// Ties go to the lexicographically smallest hop sequence. Does not reserve.
  /// Throws std::out_of_range for unknown ids.
  std::optional<PathResult> select_min_path(DcId src, DcId dest, Kbps req_bw, bool prune = true) const;

  void reserve_bw(const PathResult& path, Kbps bw);
  void release_bw(const PathResult& path, Kbps bw);

  // Sum over edges of capacity - residual.
  Kbps reserved_total() const;
  bool at_full_capacity() const { return reserved_total() == 0; }

 private:
  void check_node(DcId id) const;
  std::vector<int> path_edges(const PathResult& path) const;

  std::vector<NodeSpec> nodes_;
  std::vector<Edge> edges_;
  // adjacency_[m] = (neighbor, edge index) sorted by neighbor
  std::vector<std::vector<std::pair<DcId, int>>> adjacency_;
};

/// ceil(length / c) in 0.01 ms steps.
Steps propagation_steps(const PathResult& path, double fiber_km_per_s = kFiberKmPerSecond);

/// Nodes on a circle, each pair linked with probability edge_prob; a ring is
/// always included so the graph stays connected.
std::pair<std::vector<NodeSpec>, std::vector<EdgeSpec>> circle_topology(int n, double radius_km, double edge_prob,
                                                                        std::uint64_t seed,
                                                                        Kbps capacity = kDefaultLinkCapacity);

// Lengths within this relative tolerance are treated as equal.
bool same_length(double a, double b);

}  // namespace sfc
