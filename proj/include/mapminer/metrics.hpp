#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "mapminer/graph.hpp"

namespace mapminer {

// Unweighted, undirected conventions. On disconnected graphs closeness and
// eccentricity only consider the nodes reachable from v.
struct NodeMetrics {
  int node = 0;
  double clustering_coefficient = 0.0;  // 0 when degree < 2
  double closeness_centrality = 0.0;    // reachable / sum of distances; 0 when isolated
  int eccentricity = 0;
  double neighborhood_connectivity = 0.0;  // mean neighbour degree
};

struct NetworkMetrics {
  int diameter = 0;
  double density = 0.0;
  double degree_centralization = 0.0;
  double characteristic_path_length = 0.0;  // mean over finite pairs
};

std::vector<NodeMetrics> node_metrics(const UndirectedGraph& g);

/// Throws DomainError for graphs with fewer than two nodes.
NetworkMetrics network_metrics(const UndirectedGraph& g);

nlohmann::ordered_json metrics_to_json(const std::vector<NodeMetrics>& nodes, const NetworkMetrics& network);

}  // namespace mapminer
