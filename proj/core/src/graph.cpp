#include "dcmesh/graph.hpp"

#include <algorithm>
#include <queue>
#include <random>
#include <string>

#include "dcmesh/types.hpp"

namespace dcmesh {

Graph::Graph(std::size_t n, const std::vector<Edge>& edges)
    : n_(n), adj_(n), inc_(n) {
  require(n >= 1, "graph needs at least one node");
  edges_.reserve(edges.size());
  for (auto [a, b] : edges) {
    require(a < n && b < n, "edge endpoint out of range");
    require(a != b, "self-loop (" + std::to_string(a) + "," +
                        std::to_string(b) + ") not allowed");
    edges_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  for (auto [a, b] : edges_) {
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }
  for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
  for (std::size_t i = 0; i < n_; ++i) {
    inc_[i].reserve(adj_[i].size());
    for (std::size_t j : adj_[i]) {
      const Edge key{std::min(i, j), std::max(i, j)};
      auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
      inc_[i].push_back(static_cast<std::size_t>(it - edges_.begin()));
    }
  }
}

Graph Graph::complete(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Graph(n, e);
}

Graph Graph::path(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph(n, e);
}

std::span<const std::size_t> Graph::neighbors(std::size_t i) const {
  require(i < n_, "node index " + std::to_string(i) + " out of range");
  return adj_[i];
}

std::span<const std::size_t> Graph::incident_edges(std::size_t i) const {
  require(i < n_, "node index " + std::to_string(i) + " out of range");
  return inc_[i];
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[i] = adj_[i].size();
  return d;
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) return false;
  return std::binary_search(adj_[i].begin(), adj_[i].end(), j);
}

bool is_connected(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (n <= 1) return true;
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v : g.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == n;
}

Graph random_connected_graph(std::size_t n, double edge_prob,
                             std::uint64_t seed) {
  require(n >= 2, "random_connected_graph needs n >= 2");
  require(edge_prob > 0.0 && edge_prob <= 1.0, "edge_prob must lie in (0, 1]");
  constexpr int kMaxAttempts = 1000;

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(edge_prob);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<Graph::Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (coin(rng)) edges.emplace_back(i, j);
    Graph g(n, edges);
    if (is_connected(g)) return g;
  }
  throw Error("no connected graph found in " + std::to_string(kMaxAttempts) +
              " attempts (n=" + std::to_string(n) +
              ", edge_prob=" + std::to_string(edge_prob) + ")");
}

}  // namespace dcmesh
