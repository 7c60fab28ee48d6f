#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dcmesh {

/// Undirected, unweighted agent network. Nodes are 0-based. Immutable after
/// construction, so a single instance may be shared across threads.
class Graph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  Graph() = default;

  /// Builds a graph on `n` nodes. Each edge may be given in either
  /// orientation; duplicates collapse. Self-loops and out-of-range
  /// endpoints throw dcmesh::Error.
  Graph(std::size_t n, const std::vector<Edge>& edges);

  static Graph complete(std::size_t n);
  static Graph path(std::size_t n);

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }

  /// Edges as (i, j) with i < j, sorted lexicographically. The position of
  /// an edge in this list is its edge id.
  const std::vector<Edge>& edges() const { return edges_; }

  /// Sorted neighbor list of node i. Throws on out-of-range i.
  std::span<const std::size_t> neighbors(std::size_t i) const;

  /// Edge ids incident to node i, aligned with neighbors(i).
  std::span<const std::size_t> incident_edges(std::size_t i) const;

  std::size_t degree(std::size_t i) const { return neighbors(i).size(); }
  std::vector<std::size_t> degrees() const;

  bool has_edge(std::size_t i, std::size_t j) const;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::vector<std::size_t>> inc_;
};

bool is_connected(const Graph& g);

/// Erdos-Renyi G(n, edge_prob) resampled until connected (at most 1000
/// attempts). Deterministic for a fixed seed.
Graph random_connected_graph(std::size_t n, double edge_prob,
                             std::uint64_t seed);

}  // namespace dcmesh
