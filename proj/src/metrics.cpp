#include "mapminer/metrics.hpp"

#include <algorithm>

#include "mapminer/error.hpp"

namespace mapminer {

std::vector<NodeMetrics> node_metrics(const UndirectedGraph& g) {
  std::vector<NodeMetrics> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int v = static_cast<int>(i);
    auto& m = out[i];
    m.node = v;
    const auto& nbrs = g.neighbors(v);
    const std::size_t deg = nbrs.size();

    if (deg >= 2) {
      std::size_t links = 0;
      for (std::size_t a = 0; a < deg; ++a) {
        for (std::size_t b = a + 1; b < deg; ++b) links += g.adjacent(nbrs[a], nbrs[b]);
      }
      m.clustering_coefficient = 2.0 * static_cast<double>(links) / static_cast<double>(deg * (deg - 1));
    }

    const auto dist = bfs_distances(g, v);
    std::size_t reachable = 0;
    long total = 0;
    for (std::size_t w = 0; w < dist.size(); ++w) {
      if (w == i || dist[w] < 0) continue;
      ++reachable;
      total += dist[w];
      m.eccentricity = std::max(m.eccentricity, dist[w]);
    }
    if (total > 0) m.closeness_centrality = static_cast<double>(reachable) / static_cast<double>(total);

    if (deg > 0) {
      std::size_t sum = 0;
      for (int w : nbrs) sum += g.degree(w);
      m.neighborhood_connectivity = static_cast<double>(sum) / static_cast<double>(deg);
    }
  }
  return out;
}

NetworkMetrics network_metrics(const UndirectedGraph& g) {
  const std::size_t n = g.size();
  if (n < 2) throw DomainError("network metrics need at least two nodes");
  NetworkMetrics out;
  const double nd = static_cast<double>(n);
  out.density = 2.0 * static_cast<double>(g.edge_count()) / (nd * (nd - 1.0));

  std::size_t max_degree = 0;
  for (std::size_t v = 0; v < n; ++v) max_degree = std::max(max_degree, g.degree(static_cast<int>(v)));
  if (n > 2) {
    std::size_t spread = 0;
    for (std::size_t v = 0; v < n; ++v) spread += max_degree - g.degree(static_cast<int>(v));
    out.degree_centralization = static_cast<double>(spread) / ((nd - 1.0) * (nd - 2.0));
  }

  long total = 0;
  std::size_t pairs = 0;
  for (std::size_t v = 0; v < n; ++v) {
    const auto dist = bfs_distances(g, static_cast<int>(v));
    for (std::size_t w = 0; w < n; ++w) {
      if (w == v || dist[w] < 0) continue;
      total += dist[w];
      ++pairs;
      out.diameter = std::max(out.diameter, dist[w]);
    }
  }
  if (pairs > 0) out.characteristic_path_length = static_cast<double>(total) / static_cast<double>(pairs);
  return out;
}

nlohmann::ordered_json metrics_to_json(const std::vector<NodeMetrics>& nodes, const NetworkMetrics& network) {
  nlohmann::ordered_json doc;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& m : nodes) {
    rows.push_back({{"node", m.node},
                    {"clustering_coefficient", m.clustering_coefficient},
                    {"closeness_centrality", m.closeness_centrality},
                    {"eccentricity", m.eccentricity},
                    {"neighborhood_connectivity", m.neighborhood_connectivity}});
  }
  doc["nodes"] = std::move(rows);
  doc["network"] = {{"diameter", network.diameter},
                    {"density", network.density},
                    {"degree_centralization", network.degree_centralization},
                    {"characteristic_path_length", network.characteristic_path_length}};
  return doc;
}

}  // namespace mapminer
