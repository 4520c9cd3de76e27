#include "mapminer/clustering.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "mapminer/error.hpp"

namespace mapminer {
namespace {

void bron_kerbosch(const UndirectedGraph& g, NodeSet& clique, std::vector<int> candidates, std::vector<int> excluded,
                   std::vector<NodeSet>& out) {
  if (candidates.empty()) {
    if (excluded.empty()) {
      NodeSet c = clique;
      std::sort(c.begin(), c.end());
      out.push_back(std::move(c));
    }
    return;
  }
  // Pivot: the node of P u X with most neighbours in P.
  int pivot = -1;
  std::size_t best = 0;
  for (const auto* set : {&candidates, &excluded}) {
    for (int u : *set) {
      std::size_t count = 0;
      for (int v : candidates) count += g.adjacent(u, v);
      if (pivot < 0 || count > best) {
        pivot = u;
        best = count;
      }
    }
  }
  std::vector<int> branch;
  for (int v : candidates) {
    if (!g.adjacent(pivot, v)) branch.push_back(v);
  }
  for (int v : branch) {
    std::vector<int> next_candidates, next_excluded;
    for (int u : candidates) {
      if (g.adjacent(u, v)) next_candidates.push_back(u);
    }
    for (int u : excluded) {
      if (g.adjacent(u, v)) next_excluded.push_back(u);
    }
    clique.push_back(v);
    bron_kerbosch(g, clique, std::move(next_candidates), std::move(next_excluded), out);
    clique.pop_back();
    candidates.erase(std::find(candidates.begin(), candidates.end(), v));
    excluded.push_back(v);
  }
}

NodeSet set_union(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool intersects(const NodeSet& a, const NodeSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) {
      ++i;
    } else {
      ++j;
    }
  }
  return false;
}

std::size_t internal_edges(const UndirectedGraph& g, const NodeSet& s) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) count += g.adjacent(s[i], s[j]);
  }
  return count;
}

bool touching(const UndirectedGraph& g, const NodeSet& a, const NodeSet& b) {
  if (intersects(a, b)) return true;
  for (int u : a) {
    for (int v : b) {
      if (g.adjacent(u, v)) return true;
    }
  }
  return false;
}

std::vector<int> membership(const std::vector<NodeSet>& communities, std::size_t n) {
  std::vector<int> counts(n, 0);
  for (const auto& c : communities) {
    for (int v : c) ++counts[static_cast<std::size_t>(v)];
  }
  return counts;
}

}  // namespace

std::vector<NodeSet> maximal_cliques(const UndirectedGraph& g) {
  std::vector<NodeSet> out;
  if (g.size() == 0) return out;
  std::vector<int> all(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) all[v] = static_cast<int>(v);
  NodeSet clique;
  bron_kerbosch(g, clique, std::move(all), {}, out);
  std::sort(out.begin(), out.end());
  return out;
}

double extended_modularity(const std::vector<NodeSet>& communities, const UndirectedGraph& g) {
  if (g.edge_count() == 0 || communities.empty()) return 0.0;
  const double two_m = 2.0 * static_cast<double>(g.edge_count());
  const auto counts = membership(communities, g.size());
  double total = 0.0;
  for (const auto& c : communities) {
    for (int v : c) {
      const double kv = static_cast<double>(g.degree(v));
      const double ov = counts[static_cast<std::size_t>(v)];
      for (int w : c) {
        const double kw = static_cast<double>(g.degree(w));
        const double ow = counts[static_cast<std::size_t>(w)];
        total += ((g.adjacent(v, w) ? 1.0 : 0.0) - kv * kw / two_m) / (ov * ow);
      }
    }
  }
  return total / two_m;
}

Cover eagle_cluster(const UndirectedGraph& g, std::size_t clique_size_threshold, std::size_t complex_size_threshold) {
  const std::size_t n = g.size();
  Cover cover;
  if (g.edge_count() == 0) {
    cover.membership_count.assign(n, 0);
    for (std::size_t v = 0; v < n; ++v) cover.outliers.push_back(static_cast<int>(v));
    cover.dendrogram_eq.push_back(0.0);
    return cover;
  }

  // Seeds: large maximal cliques plus a singleton for every node they miss.
  std::vector<NodeSet> communities;
  std::vector<bool> covered(n, false);
  for (auto& clique : maximal_cliques(g)) {
    if (clique.size() < clique_size_threshold) continue;
    for (int v : clique) covered[static_cast<std::size_t>(v)] = true;
    communities.push_back(std::move(clique));
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!covered[v]) communities.push_back({static_cast<int>(v)});
  }
  std::sort(communities.begin(), communities.end());

  // Agglomerative merging. The list stays sorted, so scanning pairs by index
  // visits them in lexicographic order and the first maximum wins ties.
  std::vector<std::vector<NodeSet>> levels{communities};
  cover.dendrogram_eq.push_back(extended_modularity(communities, g));
  while (communities.size() > 1) {
    std::size_t best_i = 0, best_j = 0;
    std::size_t best_edges = 0, best_pairs = 0;
    bool found = false;
    for (std::size_t i = 0; i < communities.size(); ++i) {
      for (std::size_t j = i + 1; j < communities.size(); ++j) {
        if (!touching(g, communities[i], communities[j])) continue;
        const NodeSet u = set_union(communities[i], communities[j]);
        const std::size_t edges = internal_edges(g, u);
        const std::size_t pairs = u.size() * (u.size() - 1) / 2;
        // edges / pairs > best_edges / best_pairs, exactly.
        if (!found || edges * best_pairs > best_edges * pairs) {
          found = true;
          best_i = i;
          best_j = j;
          best_edges = edges;
          best_pairs = pairs;
        }
      }
    }
    if (!found) break;
    NodeSet merged = set_union(communities[best_i], communities[best_j]);
    communities.erase(communities.begin() + static_cast<std::ptrdiff_t>(best_j));
    communities.erase(communities.begin() + static_cast<std::ptrdiff_t>(best_i));
    if (std::find(communities.begin(), communities.end(), merged) == communities.end()) {
      communities.insert(std::lower_bound(communities.begin(), communities.end(), merged), std::move(merged));
    }
    levels.push_back(communities);
    cover.dendrogram_eq.push_back(extended_modularity(communities, g));
  }

  for (std::size_t level = 1; level < levels.size(); ++level) {
    if (cover.dendrogram_eq[level] > cover.dendrogram_eq[cover.selected_level]) cover.selected_level = level;
  }

  for (auto& c : levels[cover.selected_level]) {
    if (c.size() >= complex_size_threshold) cover.communities.push_back(std::move(c));
  }
  std::stable_sort(cover.communities.begin(), cover.communities.end(), [](const NodeSet& a, const NodeSet& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  cover.membership_count = membership(cover.communities, n);
  for (std::size_t v = 0; v < n; ++v) {
    if (cover.membership_count[v] == 0) cover.outliers.push_back(static_cast<int>(v));
  }
  cover.eq = extended_modularity(cover.communities, g);
  return cover;
}

IntentionMap build_intention_map(const PseudoMap& pmap, const Cover& cover, std::optional<int> start,
                                 std::optional<int> stop) {
  const std::size_t n = pmap.n_nodes;
  std::vector<std::vector<int>> owners(n);
  for (std::size_t c = 0; c < cover.communities.size(); ++c) {
    for (int v : cover.communities[c]) {
      if (v < 0 || static_cast<std::size_t>(v) >= n) {
        throw DomainError(fmt::format("cover node {} is outside the pseudo-map's {} nodes", v, n));
      }
      owners[static_cast<std::size_t>(v)].push_back(static_cast<int>(c));
    }
  }
  const auto check = [&](std::optional<int> node, const char* what) {
    if (node && (*node < 0 || static_cast<std::size_t>(*node) >= n)) {
      throw DomainError(fmt::format("{} node {} is outside the pseudo-map", what, *node));
    }
  };
  check(start, "start");
  check(stop, "stop");

  IntentionMap out;
  out.intentions = cover.communities;
  if (start) out.start_intentions = owners[static_cast<std::size_t>(*start)];
  if (stop) out.stop_intentions = owners[static_cast<std::size_t>(*stop)];

  std::map<std::pair<int, int>, IntentionEdge> aggregated;
  for (const auto& e : pmap.edges) {
    const auto& from = owners[static_cast<std::size_t>(e.source)];
    const auto& to = owners[static_cast<std::size_t>(e.target)];
    if (from.empty() || to.empty()) {
      ++out.dropped_edges;
      continue;
    }
    for (int a : from) {
      for (int b : to) {
        auto& agg = aggregated[{a, b}];
        agg.source = a;
        agg.target = b;
        agg.internal = a == b;
        agg.weight += e.weight;
        ++agg.edge_count;
        auto it = std::lower_bound(agg.strategies.begin(), agg.strategies.end(), e.strategy);
        if (it == agg.strategies.end() || *it != e.strategy) agg.strategies.insert(it, e.strategy);
      }
    }
  }
  for (auto& [key, edge] : aggregated) out.edges.push_back(std::move(edge));
  return out;
}

nlohmann::ordered_json cover_to_json(const Cover& cover) {
  nlohmann::ordered_json doc;
  doc["communities"] = cover.communities;
  doc["outliers"] = cover.outliers;
  doc["eq"] = cover.eq;
  doc["membership_count"] = cover.membership_count;
  doc["dendrogram_eq"] = cover.dendrogram_eq;
  doc["selected_level"] = cover.selected_level;
  return doc;
}

nlohmann::ordered_json intention_map_to_json(const IntentionMap& map) {
  nlohmann::ordered_json doc;
  auto intentions = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < map.intentions.size(); ++i) {
    intentions.push_back({{"name", Cover::name(i)}, {"sub_intentions", map.intentions[i]}});
  }
  doc["intentions"] = std::move(intentions);
  doc["start_intentions"] = map.start_intentions;
  doc["stop_intentions"] = map.stop_intentions;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : map.edges) {
    edges.push_back({{"source", Cover::name(static_cast<std::size_t>(e.source))},
                     {"target", Cover::name(static_cast<std::size_t>(e.target))},
                     {"strategies", e.strategies},
                     {"weight", e.weight},
                     {"edge_count", e.edge_count},
                     {"internal", e.internal}});
  }
  doc["edges"] = std::move(edges);
  doc["dropped_edges"] = map.dropped_edges;
  return doc;
}

std::string intention_map_to_dot(const IntentionMap& map) {
  std::string out = "digraph intention_map {\n  rankdir=LR;\n  Start [shape=box];\n  Stop [shape=box];\n";
  for (std::size_t i = 0; i < map.intentions.size(); ++i) {
    std::string members;
    for (int v : map.intentions[i]) members += fmt::format("{}I{}", members.empty() ? "" : " ", v);
    out += fmt::format("  {} [shape=ellipse, label=\"{}\\n{}\"];\n", Cover::name(i), Cover::name(i), members);
  }
  for (int c : map.start_intentions) out += fmt::format("  Start -> {};\n", Cover::name(static_cast<std::size_t>(c)));
  for (int c : map.stop_intentions) out += fmt::format("  {} -> Stop;\n", Cover::name(static_cast<std::size_t>(c)));
  for (const auto& e : map.edges) {
    std::string labels;
    for (int s : e.strategies) labels += fmt::format("{}S{}", labels.empty() ? "" : ",", s + 1);
    out += fmt::format("  {} -> {} [label=\"{}\", penwidth={:.2f}{}];\n", Cover::name(static_cast<std::size_t>(e.source)),
                       Cover::name(static_cast<std::size_t>(e.target)), labels, 1.0 + e.weight,
                       e.internal ? ", style=dashed" : "");
  }
  out += "}\n";
  return out;
}

}  // namespace mapminer
