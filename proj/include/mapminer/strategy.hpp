#pragma once

#include <string>
#include <vector>

#include "mapminer/hmm.hpp"

namespace mapminer {

struct ActivityWeight {
  std::string activity;
  double probability = 0.0;
};

/// One hidden state read as a strategy: the activities it emits.
struct Strategy {
  int id = 0;  // state index; displayed as S{id + 1}
  std::vector<ActivityWeight> activities;  // descending probability
  double pi_value = 0.0;
  /// Emission mass of the activities below the display threshold.
  double filtered_mass = 0.0;
  /// Sum of the full, unfiltered emission row.
  double row_sum = 0.0;

  std::string name() const { return "S" + std::to_string(id + 1); }
};

struct StrategyTable {
  std::vector<Strategy> strategies;
  double display_threshold = 0.0;
};

/// Lists, per state, the activities with emission probability at or above
/// `display_threshold`. Throws DomainError when the vocabulary size differs
/// from the model's symbol count.
StrategyTable extract_strategies(const HmmModel& model, const Vocabulary& vocabulary,
                                 double display_threshold = 0.005);

/// Aligned text table with the columns S, pi, Activities, Distribution.
/// Probabilities are rounded to two decimals.
std::string format_strategy_table(const StrategyTable& table);

}  // namespace mapminer
