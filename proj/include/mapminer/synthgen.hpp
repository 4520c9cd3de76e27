#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mapminer/eventlog.hpp"
#include "mapminer/hmm.hpp"

namespace mapminer {

/// Ground-truth HMM plus the settings needed to sample a log from it.
struct GroundTruthSpec {
  HmmModel model;
  std::vector<std::string> labels;  // one activity label per symbol
  std::size_t n_cases = 1;
  LengthLaw length_law;
  std::uint64_t seed = 42;
};

/// Throws ValidationError on a malformed or inconsistent document.
GroundTruthSpec ground_truth_from_json(const nlohmann::json& doc);
nlohmann::ordered_json ground_truth_to_json(const GroundTruthSpec& spec);

struct GeneratedLog {
  EventLog log;
  std::vector<SampledCase> samples;  // hidden states and symbols in spec label ids
};

/// Case ids C000001.., timestamps one minute apart from 2013-01-01 00:00,
/// group "00".
GeneratedLog generate_log(const GroundTruthSpec& spec);

/// Row-wise L1 distances between a planted and a learned model after the
/// best state matching. Emission columns are aligned by label.
struct RecoveryReport {
  std::vector<int> permutation;  // permutation[truth state] = learned state
  std::vector<double> trans_l1;  // per truth row
  std::vector<double> emit_l1;
  double max_trans_l1 = 0.0;
  double max_emit_l1 = 0.0;
};

/// Exhaustive matching for up to 8 states, assignment on emission distance
/// beyond that.
RecoveryReport compare_models(const HmmModel& truth, const std::vector<std::string>& truth_labels,
                              const HmmModel& learned, const std::vector<std::string>& learned_labels);
RecoveryReport compare_models(const HmmModel& truth, const HmmModel& learned);

nlohmann::ordered_json recovery_to_json(const RecoveryReport& report);

}  // namespace mapminer
