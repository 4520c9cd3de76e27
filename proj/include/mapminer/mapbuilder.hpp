#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mapminer/hmm.hpp"

namespace mapminer {

/// A retained transition source -> target. The edge carries the strategy of
/// its target state (S_{target}), which is what achieves the target
/// sub-intention.
struct MapEdge {
  int source = 0;
  int target = 0;
  double weight = 0.0;
  int strategy = 0;

  friend bool operator==(const MapEdge&, const MapEdge&) = default;
};

/// Sub-intentions I0..I{N-1}, one per hidden state.
struct PseudoMap {
  std::size_t n_nodes = 0;
  std::vector<MapEdge> edges;  // row-major (source, target) order
  double epsilon = 0.0;

  std::vector<std::size_t> in_degree(bool count_self_loops = true) const;
  std::vector<std::size_t> out_degree(bool count_self_loops = true) const;
};

/// Keeps every entry >= epsilon that is also positive, in row-major order.
std::vector<MapEdge> prune_transitions(const Matrix& trans, double epsilon = 0.15);

PseudoMap build_pseudo_map(std::vector<MapEdge> edges, std::size_t n_states, double epsilon = 0.0);

struct StartStopOverrides {
  std::optional<int> start;
  std::optional<int> stop;
};

struct StartStopReport {
  std::vector<int> start_candidates;  // in-degree 0, self-loops ignored
  std::vector<int> stop_candidates;   // out-degree 0, self-loops ignored
  std::optional<int> selected_start;
  std::optional<int> selected_stop;
  bool start_overridden = false;
  bool stop_overridden = false;
  /// Largest outgoing non-self weight per node, for spotting weak sinks.
  std::vector<double> max_out_weight;
};

StartStopReport find_start_stop(const PseudoMap& map, const StartStopOverrides& overrides = {});

/// Graphviz rendering: node width grows with in-degree, pen width with the
/// transition probability.
std::string pseudo_map_to_dot(const PseudoMap& map, const StartStopReport* start_stop = nullptr);
std::string pseudo_map_to_graphml(const PseudoMap& map);
nlohmann::ordered_json pseudo_map_to_json(const PseudoMap& map, const StartStopReport* start_stop = nullptr);
/// Reads the document written by pseudo_map_to_json. Throws ValidationError.
PseudoMap pseudo_map_from_json(const nlohmann::json& doc);

}  // namespace mapminer
