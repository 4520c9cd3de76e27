#include "mapminer/pipeline.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "mapminer/error.hpp"
#include "mapminer/synthgen.hpp"

namespace mapminer {
namespace {

const char* feature_name(KMeansFeature f) {
  switch (f) {
    case KMeansFeature::kOneHot: return "one-hot";
    case KMeansFeature::kOneHotPosition: return "one-hot+position";
    case KMeansFeature::kContext: return "context";
  }
  return "context";
}

template <typename T>
nlohmann::ordered_json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

void validate(const PipelineConfig& c) {
  if (c.n_states && *c.n_states == 0) throw ValidationError("states must be at least 1");
  if (!(c.epsilon >= 0.0 && c.epsilon < 1.0)) throw ValidationError("epsilon must lie in [0, 1)");
  if (c.bw_iterations < 0) throw ValidationError("iterations must be non-negative");
  if (std::isnan(c.bw_tolerance)) throw ValidationError("tolerance must be a number");
  if (c.clique_size_threshold < 1) throw ValidationError("clique-size threshold must be at least 1");
  if (c.complex_size_threshold < 1) throw ValidationError("complex-size threshold must be at least 1");
  if (!(c.display_threshold >= 0.0 && c.display_threshold <= 1.0)) {
    throw ValidationError("display threshold must lie in [0, 1]");
  }
  if (c.schema.timestamp_format.empty()) throw ValidationError("timestamp format must not be empty");
}

nlohmann::ordered_json config_to_json(const PipelineConfig& c) {
  nlohmann::ordered_json doc;
  doc["n_states"] = optional_json(c.n_states);
  doc["epsilon"] = c.epsilon;
  doc["bw_iterations"] = c.bw_iterations;
  doc["bw_tolerance"] = c.bw_tolerance;
  doc["clique_size_threshold"] = c.clique_size_threshold;
  doc["complex_size_threshold"] = c.complex_size_threshold;
  doc["display_threshold"] = c.display_threshold;
  doc["seed"] = c.seed;
  doc["kmeans_feature"] = feature_name(c.kmeans_feature);
  doc["schema"] = {{"case_id", c.schema.case_id},
                   {"timestamp", c.schema.timestamp},
                   {"activity", c.schema.activity},
                   {"group", c.schema.group},
                   {"delimiter", std::string(1, c.schema.delimiter)},
                   {"timestamp_format", c.schema.timestamp_format}};
  doc["start_override"] = optional_json(c.overrides.start);
  doc["stop_override"] = optional_json(c.overrides.stop);
  return doc;
}

std::string config_hash(const PipelineConfig& config) {
  const std::string text = config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::size_t default_state_count(std::size_t n_symbols) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(n_symbols) / 3.0)));
}

TrainingResult train_model(const std::vector<Sequence>& sequences, std::size_t n_states, std::size_t n_symbols,
                           const PipelineConfig& config) {
  KMeansOptions kmeans;
  kmeans.feature = config.kmeans_feature;
  const auto initial = kmeans_init(sequences, n_states, n_symbols, config.seed, kmeans);
  BaumWelchOptions bw;
  bw.max_iterations = config.bw_iterations;
  bw.tolerance = config.bw_tolerance;
  bw.threads = config.threads;
  return baum_welch(initial, sequences, bw);
}

nlohmann::ordered_json histogram_to_json(const std::vector<HistogramRow>& rows) {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& r : rows) doc.push_back({{"activity", r.activity}, {"count", r.count}, {"cumulative", r.cumulative}});
  return doc;
}

nlohmann::ordered_json training_report_to_json(const TrainingReport& report) {
  nlohmann::ordered_json doc;
  doc["iterations_run"] = report.iterations_run;
  doc["log_likelihood_per_iteration"] = report.log_likelihood_per_iteration;
  doc["converged_early"] = report.converged_early;
  doc["degenerate_states"] = report.degenerate_states;
  return doc;
}

nlohmann::ordered_json strategies_to_json(const StrategyTable& table) {
  nlohmann::ordered_json doc;
  doc["display_threshold"] = table.display_threshold;
  auto list = nlohmann::ordered_json::array();
  for (const auto& s : table.strategies) {
    auto acts = nlohmann::ordered_json::array();
    for (const auto& a : s.activities) acts.push_back({{"activity", a.activity}, {"probability", a.probability}});
    list.push_back({{"id", s.name()},
                    {"state", s.id},
                    {"pi", s.pi_value},
                    {"activities", std::move(acts)},
                    {"filtered_mass", s.filtered_mass},
                    {"row_sum", s.row_sum}});
  }
  doc["strategies"] = std::move(list);
  return doc;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

nlohmann::ordered_json run_pipeline(const PipelineConfig& config, const PipelineRequest& request) {
  validate(config);
  const std::string hash = config_hash(config);
  const auto& dir = request.output_dir;
  const auto manifest_path = dir / "manifest.json";
  if (std::filesystem::exists(manifest_path) && !request.force) {
    const auto previous = read_json(manifest_path);
    if (previous.value("config_hash", std::string{}) != hash) {
      throw Error(fmt::format("'{}' was written with config {}, not {}; pass --force to overwrite",
                              manifest_path.string(), previous.value("config_hash", std::string{"?"}), hash));
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + dir.string() + "': " + ec.message());

  const auto log = parse_log_file(request.input, config.schema);
  const auto& vocab = log.vocabulary();
  const auto sequences = encode_cases(log);
  const std::size_t n_states = config.n_states.value_or(default_state_count(vocab.size()));

  nlohmann::ordered_json artifacts;
  const auto emit_json = [&](const std::string& name, nlohmann::ordered_json doc) {
    nlohmann::ordered_json wrapped;
    wrapped["config_hash"] = hash;
    for (auto& [k, v] : doc.items()) wrapped[k] = std::move(v);
    write_json(dir / name, wrapped);
    artifacts[std::filesystem::path(name).stem().string()] = name;
  };
  const auto emit_text = [&](const std::string& name, const std::string& key, const std::string& text) {
    write_text(dir / name, text);
    artifacts[key] = name;
  };

  emit_json("histogram.json", {{"activities", histogram_to_json(activity_histogram(log))}});

  const auto trained = train_model(sequences, n_states, vocab.size(), config);
  {
    auto model_doc = nlohmann::ordered_json::parse(serialize_model(trained.model, vocab.labels()));
    emit_json("model.json", std::move(model_doc));
  }
  emit_json("training.json", training_report_to_json(trained.report));

  const auto table = extract_strategies(trained.model, vocab, config.display_threshold);
  emit_json("strategies.json", strategies_to_json(table));

  const auto pmap = build_pseudo_map(prune_transitions(trained.model.trans(), config.epsilon), n_states, config.epsilon);
  const auto start_stop = find_start_stop(pmap, config.overrides);
  emit_json("pseudo_map.json", pseudo_map_to_json(pmap, &start_stop));
  emit_text("pseudo_map.dot", "pseudo_map_dot",
            "// config_hash " + hash + "\n" + pseudo_map_to_dot(pmap, &start_stop));
  {
    auto graphml = pseudo_map_to_graphml(pmap);
    graphml.insert(graphml.find('\n') + 1, "<!-- config_hash " + hash + " -->\n");
    emit_text("pseudo_map.graphml", "pseudo_map_graphml", graphml);
  }

  const auto graph = UndirectedGraph::from_pseudo_map(pmap);
  const auto cover = eagle_cluster(graph, config.clique_size_threshold, config.complex_size_threshold);
  emit_json("cover.json", cover_to_json(cover));
  const auto imap = build_intention_map(pmap, cover, start_stop.selected_start, start_stop.selected_stop);
  emit_json("intention_map.json", intention_map_to_json(imap));
  emit_text("intention_map.dot", "intention_map_dot", "// config_hash " + hash + "\n" + intention_map_to_dot(imap));

  if (graph.size() >= 2) {
    emit_json("metrics.json", metrics_to_json(node_metrics(graph), network_metrics(graph)));
  } else {
    emit_json("metrics.json", {{"nodes", metrics_to_json(node_metrics(graph), {})["nodes"]}, {"network", nullptr}});
  }

  nlohmann::ordered_json manifest;
  manifest["config_hash"] = hash;
  manifest["config"] = config_to_json(config);
  manifest["input"] = request.input;
  manifest["n_cases"] = log.cases().size();
  manifest["n_events"] = log.event_count();
  manifest["n_symbols"] = vocab.size();
  manifest["n_states"] = n_states;
  manifest["log_likelihood"] = trained.report.log_likelihood_per_iteration;
  manifest["converged_early"] = trained.report.converged_early;
  manifest["artifacts"] = artifacts;

  if (request.ground_truth) {
    const auto truth = ground_truth_from_json(read_json(*request.ground_truth));
    if (truth.model.n_states() == n_states) {
      manifest["recovery"] =
          recovery_to_json(compare_models(truth.model, truth.labels, trained.model, vocab.labels()));
    } else {
      manifest["recovery"] = {{"error", fmt::format("ground truth has {} states, trained model has {}",
                                                    truth.model.n_states(), n_states)}};
    }
  }
  write_json(manifest_path, manifest);
  return manifest;
}

}  // namespace mapminer
