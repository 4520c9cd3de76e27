#pragma once

#include <utility>
#include <vector>

#include "mapminer/hmm.hpp"

namespace fixture {

// 12-state transition matrix whose entries >= 0.15 form a digraph where
// nodes 6, 8, 9 and 10 receive no edges from other nodes, node 8 has a
// self-loop and node 11 has a single outgoing edge of weight 0.15. Every
// other entry is positive but below 0.15.
inline mapminer::Matrix twelve_state_transitions() {
  const std::vector<std::pair<int, int>> kept = {
      {0, 1}, {1, 5}, {2, 3}, {2, 7}, {3, 1}, {4, 5}, {5, 7}, {6, 0},
      {6, 2}, {7, 11}, {8, 2}, {8, 8}, {9, 3}, {10, 4},
  };
  mapminer::Matrix t(12, 12);
  for (int i = 0; i < 12; ++i) {
    std::vector<int> out;
    for (const auto& [s, d] : kept) {
      if (s == i) out.push_back(d);
    }
    const double kept_mass = i == 11 ? 0.15 : 0.6;
    if (i == 11) out.push_back(0);
    const double rest = (1.0 - kept_mass) / static_cast<double>(12 - out.size());
    for (int j = 0; j < 12; ++j) t(i, j) = rest;
    for (int j : out) t(i, j) = kept_mass / static_cast<double>(out.size());
  }
  return t;
}

}  // namespace fixture
