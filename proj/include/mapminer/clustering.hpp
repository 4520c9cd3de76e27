#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mapminer/graph.hpp"
#include "mapminer/mapbuilder.hpp"

namespace mapminer {

using NodeSet = std::vector<int>;  // sorted ascending

/// All maximal cliques (Bron-Kerbosch with Tomita pivoting), each sorted,
/// listed in lexicographic order. Isolated nodes are singleton cliques.
std::vector<NodeSet> maximal_cliques(const UndirectedGraph& g);

/// Overlapping cover of a graph's nodes.
struct Cover {
  std::vector<NodeSet> communities;     // named C1.. in this order
  std::vector<int> membership_count;    // O_v per node
  std::vector<int> outliers;            // nodes in no community
  double eq = 0.0;                      // extended modularity of `communities`
  std::vector<double> dendrogram_eq;    // EQ at each merge level, level 0 = seeds
  std::size_t selected_level = 0;

  static std::string name(std::size_t index) { return "C" + std::to_string(index + 1); }
};

/// EQ = 1/(2m) sum_c sum_{v,w in c} (A_vw - k_v k_w / 2m) / (O_v O_w).
/// Zero for an edgeless graph or an empty cover.
double extended_modularity(const std::vector<NodeSet>& communities, const UndirectedGraph& g);

/// EAGLE: maximal cliques of at least `clique_size_threshold` nodes seed the
/// communities (other nodes start as singletons), the densest adjacent pair
/// is merged repeatedly, the dendrogram is cut at the EQ maximum and
/// communities below `complex_size_threshold` are dropped as outliers.
Cover eagle_cluster(const UndirectedGraph& g, std::size_t clique_size_threshold = 3,
                    std::size_t complex_size_threshold = 2);

struct IntentionEdge {
  int source = 0;  // community index
  int target = 0;
  std::vector<int> strategies;  // sorted strategy ids of the projected edges
  double weight = 0.0;          // summed transition probabilities
  std::size_t edge_count = 0;
  bool internal = false;        // source == target
};

/// Coarse map: one intention per community plus Start/Stop attachments.
struct IntentionMap {
  std::vector<NodeSet> intentions;
  std::vector<int> start_intentions;  // communities holding the start node
  std::vector<int> stop_intentions;
  std::vector<IntentionEdge> edges;   // sorted by (source, target)
  std::size_t dropped_edges = 0;      // pseudo-map edges touching an outlier
};

IntentionMap build_intention_map(const PseudoMap& pmap, const Cover& cover, std::optional<int> start,
                                 std::optional<int> stop);

nlohmann::ordered_json cover_to_json(const Cover& cover);
nlohmann::ordered_json intention_map_to_json(const IntentionMap& map);
std::string intention_map_to_dot(const IntentionMap& map);

}  // namespace mapminer
