#include "sfcsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <string>

namespace sfc {

bool same_length(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

NetworkGraph::NetworkGraph(std::vector<NodeSpec> nodes, const std::vector<EdgeSpec>& edges)
    : nodes_(std::move(nodes)), adjacency_(nodes_.size()) {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].id != static_cast<DcId>(i)) throw ConfigError("node ids must be 0..n-1 in order");
  for (const auto& e : edges) {
    check_node(e.a);
    check_node(e.b);
    if (e.a == e.b) throw ConfigError("self-loop on node " + std::to_string(e.a));
    if (edge_index(e.a, e.b) >= 0)
      throw ConfigError("duplicate edge " + std::to_string(e.a) + "-" + std::to_string(e.b));
    if (e.capacity < 0) throw ConfigError("negative link capacity");
    const double len = e.length_km.value_or(dist(e.a, e.b));
    if (len < 0) throw ConfigError("negative link length");
    const int idx = static_cast<int>(edges_.size());
    edges_.push_back({std::min(e.a, e.b), std::max(e.a, e.b), e.capacity, e.capacity, len});
    adjacency_[e.a].emplace_back(e.b, idx);
    adjacency_[e.b].emplace_back(e.a, idx);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

void NetworkGraph::check_node(DcId id) const {
  if (id < 0 || id >= num_nodes()) throw std::out_of_range("unknown dc_id " + std::to_string(id));
}

double NetworkGraph::dist(DcId m, DcId n) const {
  check_node(m);
  check_node(n);
  if (m == n) return 0.0;
  return std::hypot(nodes_[m].x_km - nodes_[n].x_km, nodes_[m].y_km - nodes_[n].y_km);
}

int NetworkGraph::edge_index(DcId m, DcId n) const {
  for (const auto& [v, e] : adjacency_[m])
    if (v == n) return e;
  return -1;
}

Kbps NetworkGraph::residual(DcId m, DcId n) const {
  const int e = edge_index(m, n);
  if (e < 0) throw std::out_of_range("no edge " + std::to_string(m) + "-" + std::to_string(n));
  return edges_[e].residual;
}

std::optional<PathResult> NetworkGraph::select_min_path(DcId src, DcId dest, Kbps req_bw, bool prune) const {
  check_node(src);
  check_node(dest);
  if (src == dest) return PathResult{{src}, 0.0};

  const int n = num_nodes();
  double bound = std::numeric_limits<double>::infinity();
  if (prune) {
    // Dijkstra on the bandwidth-feasible subgraph gives a tight starting bound.
    std::vector<double> d(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, DcId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    d[src] = 0;
    pq.emplace(0.0, src);
    while (!pq.empty()) {
      auto [du, u] = pq.top();
      pq.pop();
      if (du > d[u]) continue;
      for (const auto& [v, e] : adjacency_[u]) {
        if (edges_[e].residual < req_bw) continue;
        const double nd = du + edges_[e].length_km;
        if (nd < d[v]) {
          d[v] = nd;
          pq.emplace(nd, v);
        }
      }
    }
    if (!std::isfinite(d[dest])) return std::nullopt;
    bound = d[dest] + 1e-9 * std::max(1.0, d[dest]);
  }

  std::optional<PathResult> best;
  std::vector<DcId> stack{src};
  std::vector<char> on_path(n, 0);
  on_path[src] = 1;

  // Neighbors are visited in ascending id order, so complete paths are found in
  // lexicographic order and the first path at the minimum length wins ties.
  auto dfs = [&](auto&& self, DcId u, double len) -> void {
    if (u == dest) {
      if (!best || (len < best->length_km && !same_length(len, best->length_km))) best = PathResult{stack, len};
      return;
    }
    for (const auto& [v, e] : adjacency_[u]) {
      if (on_path[v] || edges_[e].residual < req_bw) continue;
      const double next = len + edges_[e].length_km;
      if (prune) {
        if (next > bound) continue;
        if (best && next > best->length_km && !same_length(next, best->length_km)) continue;
      }
      on_path[v] = 1;
      stack.push_back(v);
      self(self, v, next);
      stack.pop_back();
      on_path[v] = 0;
    }
  };
  dfs(dfs, src, 0.0);
  return best;
}

std::vector<int> NetworkGraph::path_edges(const PathResult& path) const {
  std::vector<int> out;
  for (std::size_t i = 0; i + 1 < path.hops.size(); ++i) {
    check_node(path.hops[i]);
    check_node(path.hops[i + 1]);
    const int e = edge_index(path.hops[i], path.hops[i + 1]);
    if (e < 0) throw InvariantViolation("path uses a missing edge");
    out.push_back(e);
  }
  return out;
}

void NetworkGraph::reserve_bw(const PathResult& path, Kbps bw) {
  const auto es = path_edges(path);
  for (int e : es)
    if (edges_[e].residual < bw)
      throw InvariantViolation("insufficient residual bandwidth on edge " + std::to_string(edges_[e].a) + "-" +
                               std::to_string(edges_[e].b));
  for (int e : es) edges_[e].residual -= bw;
}

void NetworkGraph::release_bw(const PathResult& path, Kbps bw) {
  const auto es = path_edges(path);
  for (int e : es)
    if (edges_[e].residual + bw > edges_[e].capacity)
      throw InvariantViolation("bandwidth release exceeds capacity on edge " + std::to_string(edges_[e].a) + "-" +
                               std::to_string(edges_[e].b));
  for (int e : es) edges_[e].residual += bw;
}

Kbps NetworkGraph::reserved_total() const {
  Kbps total = 0;
  for (const auto& e : edges_) total += e.capacity - e.residual;
  return total;
}

Steps propagation_steps(const PathResult& path, double fiber_km_per_s) {
  constexpr double kStepsPerSecond = 1000.0 * kStepsPerMs;
  const double steps = path.length_km * kStepsPerSecond / fiber_km_per_s;
  // Guard against representation noise turning an exact integer into the next one.
  return static_cast<Steps>(std::ceil(steps - 1e-9));
}

std::pair<std::vector<NodeSpec>, std::vector<EdgeSpec>> circle_topology(int n, double radius_km, double edge_prob,
                                                                        std::uint64_t seed, Kbps capacity) {
  std::vector<NodeSpec> nodes;
  std::vector<EdgeSpec> edges;
  const double two_pi = 2.0 * std::acos(-1.0);
  for (int i = 0; i < n; ++i) {
    const double a = two_pi * i / n;
    nodes.push_back({i, radius_km * std::cos(a), radius_km * std::sin(a)});
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool ring = (j == i + 1) || (i == 0 && j == n - 1 && n > 2);
      const double draw = u(rng);
      if (ring || draw < edge_prob) edges.push_back({i, j, capacity, {}});
    }
  }
  return {std::move(nodes), std::move(edges)};
}

}  // namespace sfc
