#include "mapminer/graph.hpp"

#include <algorithm>
#include <queue>

#include <fmt/format.h>

#include "mapminer/error.hpp"

namespace mapminer {

UndirectedGraph::UndirectedGraph(std::size_t n) : n_(n), adj_(n * n, 0), neighbors_(n) {}

UndirectedGraph::UndirectedGraph(std::size_t n, const std::vector<std::pair<int, int>>& edges)
    : UndirectedGraph(n) {
  for (const auto& [u, v] : edges) add_edge(u, v);
}

UndirectedGraph UndirectedGraph::from_pseudo_map(const PseudoMap& map) {
  UndirectedGraph g(map.n_nodes);
  for (const auto& e : map.edges) g.add_edge(e.source, e.target);
  return g;
}

void UndirectedGraph::add_edge(int u, int v) {
  if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n_ || static_cast<std::size_t>(v) >= n_) {
    throw DomainError(fmt::format("edge {{{}, {}}} is outside the {} nodes", u, v, n_));
  }
  if (u == v || adj_[index(u, v)]) return;
  adj_[index(u, v)] = adj_[index(v, u)] = 1;
  auto insert_sorted = [](std::vector<int>& list, int x) { list.insert(std::lower_bound(list.begin(), list.end(), x), x); };
  insert_sorted(neighbors_[static_cast<std::size_t>(u)], v);
  insert_sorted(neighbors_[static_cast<std::size_t>(v)], u);
  ++m_;
}

std::vector<std::pair<int, int>> UndirectedGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(m_);
  for (std::size_t u = 0; u < n_; ++u) {
    for (int v : neighbors_[u]) {
      if (static_cast<int>(u) < v) out.emplace_back(static_cast<int>(u), v);
    }
  }
  return out;
}

std::vector<int> bfs_distances(const UndirectedGraph& g, int source) {
  std::vector<int> dist(g.size(), -1);
  std::queue<int> frontier;
  dist[static_cast<std::size_t>(source)] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : g.neighbors(u)) {
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

}  // namespace mapminer
