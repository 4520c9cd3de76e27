#include "mapminer/mapbuilder.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "mapminer/error.hpp"

namespace mapminer {

std::vector<std::size_t> PseudoMap::in_degree(bool count_self_loops) const {
  std::vector<std::size_t> deg(n_nodes, 0);
  for (const auto& e : edges) {
    if (count_self_loops || e.source != e.target) ++deg[static_cast<std::size_t>(e.target)];
  }
  return deg;
}

std::vector<std::size_t> PseudoMap::out_degree(bool count_self_loops) const {
  std::vector<std::size_t> deg(n_nodes, 0);
  for (const auto& e : edges) {
    if (count_self_loops || e.source != e.target) ++deg[static_cast<std::size_t>(e.source)];
  }
  return deg;
}

std::vector<MapEdge> prune_transitions(const Matrix& trans, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw DomainError(fmt::format("epsilon {} is outside [0, 1)", epsilon));
  std::vector<MapEdge> edges;
  for (std::size_t i = 0; i < trans.rows(); ++i) {
    for (std::size_t j = 0; j < trans.cols(); ++j) {
      const double w = trans(i, j);
      if (w >= epsilon && w > 0.0) edges.push_back({static_cast<int>(i), static_cast<int>(j), w, static_cast<int>(j)});
    }
  }
  return edges;
}

PseudoMap build_pseudo_map(std::vector<MapEdge> edges, std::size_t n_states, double epsilon) {
  for (auto& e : edges) {
    if (e.source < 0 || e.target < 0 || static_cast<std::size_t>(e.source) >= n_states ||
        static_cast<std::size_t>(e.target) >= n_states) {
      throw DomainError(fmt::format("edge {}->{} is outside the {} states", e.source, e.target, n_states));
    }
    e.strategy = e.target;
  }
  std::stable_sort(edges.begin(), edges.end(), [](const MapEdge& a, const MapEdge& b) {
    return std::pair(a.source, a.target) < std::pair(b.source, b.target);
  });
  return PseudoMap{n_states, std::move(edges), epsilon};
}

StartStopReport find_start_stop(const PseudoMap& map, const StartStopOverrides& overrides) {
  const auto check = [&](const std::optional<int>& node, const char* what) {
    if (node && (*node < 0 || static_cast<std::size_t>(*node) >= map.n_nodes)) {
      throw DomainError(fmt::format("{} override {} is outside [0, {})", what, *node, map.n_nodes));
    }
  };
  check(overrides.start, "start");
  check(overrides.stop, "stop");

  const auto in = map.in_degree(false);
  const auto out = map.out_degree(false);
  StartStopReport report;
  report.max_out_weight.assign(map.n_nodes, 0.0);
  for (const auto& e : map.edges) {
    if (e.source == e.target) continue;
    auto& w = report.max_out_weight[static_cast<std::size_t>(e.source)];
    w = std::max(w, e.weight);
  }
  for (std::size_t v = 0; v < map.n_nodes; ++v) {
    if (in[v] == 0) report.start_candidates.push_back(static_cast<int>(v));
    if (out[v] == 0) report.stop_candidates.push_back(static_cast<int>(v));
  }
  if (overrides.start) {
    report.selected_start = overrides.start;
    report.start_overridden = true;
  } else if (!report.start_candidates.empty()) {
    report.selected_start = report.start_candidates.front();
  }
  if (overrides.stop) {
    report.selected_stop = overrides.stop;
    report.stop_overridden = true;
  } else if (!report.stop_candidates.empty()) {
    report.selected_stop = report.stop_candidates.front();
  }
  return report;
}

std::string pseudo_map_to_dot(const PseudoMap& map, const StartStopReport* start_stop) {
  const auto in = map.in_degree(true);
  std::string out = "digraph pseudo_map {\n  rankdir=LR;\n  node [shape=circle, fixedsize=true];\n";
  for (std::size_t v = 0; v < map.n_nodes; ++v) {
    const double width = 0.5 + 0.25 * static_cast<double>(in[v]);
    std::string extra;
    if (start_stop && start_stop->selected_start == static_cast<int>(v)) extra += ", style=filled, fillcolor=palegreen";
    if (start_stop && start_stop->selected_stop == static_cast<int>(v)) extra += ", peripheries=2";
    out += fmt::format("  I{} [label=\"I{}\", width={:.2f}{}];\n", v, v, width, extra);
  }
  for (const auto& e : map.edges) {
    out += fmt::format("  I{} -> I{} [label=\"S{} ({:.2f})\", weight={:.6f}, penwidth={:.2f}];\n", e.source, e.target,
                       e.strategy + 1, e.weight, e.weight, 1.0 + 4.0 * e.weight);
  }
  out += "}\n";
  return out;
}

std::string pseudo_map_to_graphml(const PseudoMap& map) {
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
      "  <key id=\"label\" for=\"edge\" attr.name=\"label\" attr.type=\"string\"/>\n"
      "  <graph id=\"pseudo_map\" edgedefault=\"directed\">\n";
  for (std::size_t v = 0; v < map.n_nodes; ++v) out += fmt::format("    <node id=\"I{}\"/>\n", v);
  for (std::size_t i = 0; i < map.edges.size(); ++i) {
    const auto& e = map.edges[i];
    out += fmt::format(
        "    <edge id=\"e{}\" source=\"I{}\" target=\"I{}\">\n"
        "      <data key=\"weight\">{:.17g}</data>\n"
        "      <data key=\"label\">S{}</data>\n"
        "    </edge>\n",
        i, e.source, e.target, e.weight, e.strategy + 1);
  }
  out += "  </graph>\n</graphml>\n";
  return out;
}

nlohmann::ordered_json pseudo_map_to_json(const PseudoMap& map, const StartStopReport* start_stop) {
  nlohmann::ordered_json doc;
  doc["n_nodes"] = map.n_nodes;
  doc["epsilon"] = map.epsilon;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : map.edges) {
    edges.push_back({{"source", e.source}, {"target", e.target}, {"weight", e.weight}, {"strategy", e.strategy}});
  }
  doc["edges"] = std::move(edges);
  if (start_stop) {
    nlohmann::ordered_json ss;
    ss["start_candidates"] = start_stop->start_candidates;
    ss["stop_candidates"] = start_stop->stop_candidates;
    ss["selected_start"] = start_stop->selected_start ? nlohmann::ordered_json(*start_stop->selected_start) : nlohmann::ordered_json(nullptr);
    ss["selected_stop"] = start_stop->selected_stop ? nlohmann::ordered_json(*start_stop->selected_stop) : nlohmann::ordered_json(nullptr);
    ss["start_overridden"] = start_stop->start_overridden;
    ss["stop_overridden"] = start_stop->stop_overridden;
    ss["max_out_weight"] = start_stop->max_out_weight;
    doc["start_stop"] = std::move(ss);
  }
  return doc;
}

PseudoMap pseudo_map_from_json(const nlohmann::json& doc) {
  try {
    const auto n = doc.at("n_nodes").get<std::size_t>();
    std::vector<MapEdge> edges;
    for (const auto& e : doc.at("edges")) {
      edges.push_back({e.at("source").get<int>(), e.at("target").get<int>(), e.at("weight").get<double>(), 0});
    }
    return build_pseudo_map(std::move(edges), n, doc.value("epsilon", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed pseudo-map document: ") + e.what());
  } catch (const DomainError& e) {
    throw ValidationError(e.what());
  }
}

}  // namespace mapminer
