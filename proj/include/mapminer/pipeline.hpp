#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mapminer/clustering.hpp"
#include "mapminer/eventlog.hpp"
#include "mapminer/hmm.hpp"
#include "mapminer/mapbuilder.hpp"
#include "mapminer/metrics.hpp"
#include "mapminer/strategy.hpp"

namespace mapminer {

struct PipelineConfig {
  std::optional<std::size_t> n_states;  // unset: round(M / 3)
  double epsilon = 0.15;
  int bw_iterations = 50;
  double bw_tolerance = 1e-6;
  std::size_t clique_size_threshold = 3;
  std::size_t complex_size_threshold = 2;
  double display_threshold = 0.005;
  std::uint64_t seed = 42;
  KMeansFeature kmeans_feature = KMeansFeature::kContext;
  ColumnSchema schema;
  StartStopOverrides overrides;
  unsigned threads = 0;  // execution detail, not part of the hash
};

/// Throws ValidationError when a setting is out of range.
void validate(const PipelineConfig& config);
nlohmann::ordered_json config_to_json(const PipelineConfig& config);
/// 16 hex digits of FNV-1a over the canonical config JSON.
std::string config_hash(const PipelineConfig& config);

std::size_t default_state_count(std::size_t n_symbols);

/// K-Means initialization followed by Baum-Welch, as configured.
TrainingResult train_model(const std::vector<Sequence>& sequences, std::size_t n_states, std::size_t n_symbols,
                           const PipelineConfig& config);

nlohmann::ordered_json histogram_to_json(const std::vector<HistogramRow>& rows);
nlohmann::ordered_json training_report_to_json(const TrainingReport& report);
nlohmann::ordered_json strategies_to_json(const StrategyTable& table);

/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json(const std::filesystem::path& path);

struct PipelineRequest {
  std::string input;
  std::filesystem::path output_dir;
  std::optional<std::string> ground_truth;  // synth spec for recovery scoring
  bool force = false;
};

/// Runs every stage and writes the artifacts plus manifest.json into the
/// output directory. Refuses to replace a manifest written under a different
/// config hash unless `force` is set. Returns the manifest.
nlohmann::ordered_json run_pipeline(const PipelineConfig& config, const PipelineRequest& request);

}  // namespace mapminer
