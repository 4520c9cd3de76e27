#include "mapminer/strategy.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>

#include "mapminer/error.hpp"

namespace mapminer {

StrategyTable extract_strategies(const HmmModel& model, const Vocabulary& vocabulary, double display_threshold) {
  if (vocabulary.size() != model.n_symbols()) {
    throw DomainError(fmt::format("vocabulary has {} labels but the model emits {} symbols", vocabulary.size(),
                                  model.n_symbols()));
  }
  if (!(display_threshold >= 0.0)) throw DomainError("display threshold must be non-negative");

  StrategyTable table;
  table.display_threshold = display_threshold;
  table.strategies.reserve(model.n_states());
  for (std::size_t i = 0; i < model.n_states(); ++i) {
    Strategy s;
    s.id = static_cast<int>(i);
    s.pi_value = model.pi()[i];
    const auto row = model.emit().row(i);
    std::vector<std::size_t> listed;
    for (std::size_t k = 0; k < row.size(); ++k) {
      s.row_sum += row[k];
      if (row[k] >= display_threshold && row[k] > 0.0) {
        listed.push_back(k);
      } else {
        s.filtered_mass += row[k];
      }
    }
    std::stable_sort(listed.begin(), listed.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    for (std::size_t k : listed) s.activities.push_back({vocabulary.label(static_cast<int>(k)), row[k]});
    table.strategies.push_back(std::move(s));
  }
  return table;
}

std::string format_strategy_table(const StrategyTable& table) {
  std::vector<std::array<std::string, 4>> rows;
  rows.push_back({"S", "pi", "Activities", "Distribution"});
  for (const auto& s : table.strategies) {
    std::string names, dist = "[";
    for (std::size_t i = 0; i < s.activities.size(); ++i) {
      if (i > 0) {
        names += ", ";
        dist += ", ";
      }
      names += s.activities[i].activity;
      dist += fmt::format("{:.2f}", s.activities[i].probability);
    }
    dist += "]";
    rows.push_back({s.name(), fmt::format("{:.2f}", s.pi_value), names, dist});
  }
  std::array<std::size_t, 4> widths{};
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < 4; ++c) widths[c] = std::max(widths[c], r[c].size());
  }
  std::string out;
  for (const auto& r : rows) {
    out += fmt::format("{:<{}}  {:>{}}  {:<{}}  {}\n", r[0], widths[0], r[1], widths[1], r[2], widths[2], r[3]);
  }
  return out;
}

}  // namespace mapminer
