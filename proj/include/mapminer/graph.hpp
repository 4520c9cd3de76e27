#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mapminer/mapbuilder.hpp"

namespace mapminer {

/// Simple undirected graph: no self-edges, no multi-edges.
class UndirectedGraph {
 public:
  explicit UndirectedGraph(std::size_t n = 0);
  /// Self-edges are dropped, duplicates collapsed.
  UndirectedGraph(std::size_t n, const std::vector<std::pair<int, int>>& edges);

  /// {u, v} is present iff u->v or v->u is in the map (self-loops dropped).
  static UndirectedGraph from_pseudo_map(const PseudoMap& map);

  std::size_t size() const { return n_; }
  std::size_t edge_count() const { return m_; }
  bool adjacent(int u, int v) const { return adj_[index(u, v)] != 0; }
  /// Sorted ascending.
  const std::vector<int>& neighbors(int v) const { return neighbors_[static_cast<std::size_t>(v)]; }
  std::size_t degree(int v) const { return neighbors(v).size(); }

  void add_edge(int u, int v);
  std::vector<std::pair<int, int>> edges() const;  // u < v, lexicographic

 private:
  std::size_t index(int u, int v) const { return static_cast<std::size_t>(u) * n_ + static_cast<std::size_t>(v); }

  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<char> adj_;
  std::vector<std::vector<int>> neighbors_;
};

/// Hop distances from `source`; -1 marks unreachable nodes.
std::vector<int> bfs_distances(const UndirectedGraph& g, int source);

}  // namespace mapminer
