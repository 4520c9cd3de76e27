#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mapminer/error.hpp"
#include "mapminer/pipeline.hpp"
#include "mapminer/synthgen.hpp"

namespace mapminer::cli {
namespace {

constexpr int kOk = 0;
constexpr int kDataError = 1;
constexpr int kUsageError = 2;

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("MAPMINER_OUTPUT_DIR"); env && *env) return env;
  return "mapminer_out";
}

struct SchemaFlags {
  std::string delimiter = ";";
  ColumnSchema schema;

  void attach(CLI::App* app) {
    app->add_option("--delimiter", delimiter, "Field delimiter (one character)")->capture_default_str();
    app->add_option("--case-column", schema.case_id, "Case id column")->capture_default_str();
    app->add_option("--time-column", schema.timestamp, "Timestamp column")->capture_default_str();
    app->add_option("--activity-column", schema.activity, "Activity column")->capture_default_str();
    app->add_option("--group-column", schema.group, "Group column")->capture_default_str();
    app->add_option("--time-format", schema.timestamp_format, "Timestamp pattern (d M yyyy H mm ss)")
        ->capture_default_str();
  }

  ColumnSchema resolve() const {
    if (delimiter.size() != 1) throw ValidationError("--delimiter must be a single character");
    ColumnSchema s = schema;
    s.delimiter = delimiter.front();
    return s;
  }
};

std::string nodes_to_string(const std::vector<int>& nodes) {
  std::string s;
  for (int v : nodes) s += fmt::format("{}{}", s.empty() ? "" : ", ", v);
  return s.empty() ? "-" : s;
}

StartStopOverrides overrides_from(int start, int stop) {
  StartStopOverrides o;
  if (start >= 0) o.start = start;
  if (stop >= 0) o.stop = stop;
  return o;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Intention mining: learn strategies and intention maps from event logs", "mapminer"};
  app.require_subcommand(1);

  PipelineConfig config;
  SchemaFlags schema_flags;
  std::string input, output, json_path, model_path, map_path, spec_path, report_path, ground_truth;
  std::string output_dir;
  std::size_t states = 0;
  int start = -1, stop = -1;
  std::size_t top = 0;
  bool force = false;

  auto* ingest = app.add_subcommand("ingest", "Parse a log and write the encoded cases");
  ingest->add_option("--input", input, "Delimited event log")->required();
  ingest->add_option("--output", output, "Encoded cases JSON");
  schema_flags.attach(ingest);

  auto* stats = app.add_subcommand("stats", "Activity frequency table");
  stats->add_option("--input", input, "Delimited event log")->required();
  stats->add_option("--json", json_path, "Also write the histogram as JSON");
  stats->add_option("--top", top, "Only print the first N rows");
  schema_flags.attach(stats);

  auto* train = app.add_subcommand("train", "K-Means initialization plus Baum-Welch");
  train->add_option("--input", input, "Delimited event log")->required();
  train->add_option("--output", output, "Model JSON")->required();
  train->add_option("--report", report_path, "Training report JSON");
  train->add_option("--states", states, "Hidden states (default round(M/3))");
  train->add_option("--iterations", config.bw_iterations, "Baum-Welch iteration budget")->capture_default_str();
  train->add_option("--tolerance", config.bw_tolerance, "Early-stop log-likelihood gain")->capture_default_str();
  train->add_option("--seed", config.seed, "K-Means seed")->capture_default_str();
  train->add_option("--threads", config.threads, "E-step threads (0 = all cores)");
  schema_flags.attach(train);

  auto* strategies = app.add_subcommand("strategies", "Strategy table from a trained model");
  strategies->add_option("--model", model_path, "Model JSON with vocabulary")->required();
  strategies->add_option("--threshold", config.display_threshold, "Display threshold")->capture_default_str();
  strategies->add_option("--json", json_path, "Also write the table as JSON");

  auto* map = app.add_subcommand("map", "Prune transitions and build the pseudo-map");
  map->add_option("--model", model_path, "Model JSON")->required();
  map->add_option("--epsilon", config.epsilon, "Pruning threshold")->capture_default_str();
  map->add_option("--start", start, "Start sub-intention override");
  map->add_option("--stop", stop, "Stop sub-intention override");
  map->add_option("--output-dir", output_dir, "Artifact directory");

  auto* cluster = app.add_subcommand("cluster", "EAGLE clustering of a pseudo-map");
  cluster->add_option("--map", map_path, "pseudo_map.json")->required();
  cluster->add_option("--clique", config.clique_size_threshold, "Clique-size threshold")->capture_default_str();
  cluster->add_option("--complex", config.complex_size_threshold, "Complex-size threshold")->capture_default_str();
  cluster->add_option("--start", start, "Start sub-intention override");
  cluster->add_option("--stop", stop, "Stop sub-intention override");
  cluster->add_option("--json", json_path, "Cover JSON");
  cluster->add_option("--intention-map", output, "Intention map JSON");

  auto* metrics = app.add_subcommand("metrics", "Node and network statistics of a pseudo-map");
  metrics->add_option("--map", map_path, "pseudo_map.json")->required();
  metrics->add_option("--json", json_path, "Metrics JSON");

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage and write a manifest");
  pipeline->add_option("--input", input, "Delimited event log")->required();
  pipeline->add_option("--output-dir", output_dir, "Artifact directory (default $MAPMINER_OUTPUT_DIR)");
  pipeline->add_option("--states", states, "Hidden states (default round(M/3))");
  pipeline->add_option("--epsilon", config.epsilon, "Pruning threshold")->capture_default_str();
  pipeline->add_option("--iterations", config.bw_iterations, "Baum-Welch iteration budget")->capture_default_str();
  pipeline->add_option("--tolerance", config.bw_tolerance, "Early-stop log-likelihood gain")->capture_default_str();
  pipeline->add_option("--clique", config.clique_size_threshold, "Clique-size threshold")->capture_default_str();
  pipeline->add_option("--complex", config.complex_size_threshold, "Complex-size threshold")->capture_default_str();
  pipeline->add_option("--threshold", config.display_threshold, "Strategy display threshold")->capture_default_str();
  pipeline->add_option("--seed", config.seed, "K-Means seed")->capture_default_str();
  pipeline->add_option("--start", start, "Start sub-intention override");
  pipeline->add_option("--stop", stop, "Stop sub-intention override");
  pipeline->add_option("--ground-truth", ground_truth, "Synth spec to score model recovery against");
  pipeline->add_option("--threads", config.threads, "E-step threads (0 = all cores)");
  pipeline->add_flag("--force", force, "Overwrite a manifest written with another config");
  schema_flags.attach(pipeline);

  auto* synth = app.add_subcommand("synth", "Sample an event log from a ground-truth HMM");
  synth->add_option("--spec", spec_path, "Ground-truth spec JSON")->required();
  synth->add_option("--output", output, "Delimited log to write")->required();
  schema_flags.attach(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    err << "run 'mapminer --help' for usage\n";
    return kUsageError;
  }

  if (states > 0) config.n_states = states;
  config.overrides = overrides_from(start, stop);

  try {
    config.schema = schema_flags.resolve();
    validate(config);

    if (ingest->parsed()) {
      const auto log = parse_log_file(input, config.schema);
      out << fmt::format("{} cases, {} events, {} distinct activities\n", log.cases().size(), log.event_count(),
                         log.vocabulary().size());
      if (!output.empty()) {
        nlohmann::ordered_json doc;
        doc["source"] = input;
        doc["n_cases"] = log.cases().size();
        doc["n_events"] = log.event_count();
        doc["vocabulary"] = log.vocabulary().labels();
        auto cases = nlohmann::ordered_json::array();
        const auto encoded = encode_cases(log);
        for (std::size_t i = 0; i < encoded.size(); ++i) {
          cases.push_back({{"id", log.cases()[i].case_id}, {"symbols", encoded[i]}});
        }
        doc["cases"] = std::move(cases);
        write_json(output, doc);
      }
    } else if (stats->parsed()) {
      const auto log = parse_log_file(input, config.schema);
      const auto rows = activity_histogram(log);
      std::size_t width = 8;
      for (const auto& r : rows) width = std::max(width, r.activity.size());
      out << fmt::format("{:<{}}  {:>10}  {:>10}\n", "Activity", width, "Count", "Cumulative");
      const std::size_t shown = top > 0 ? std::min(top, rows.size()) : rows.size();
      for (std::size_t i = 0; i < shown; ++i) {
        out << fmt::format("{:<{}}  {:>10}  {:>10.4f}\n", rows[i].activity, width, rows[i].count, rows[i].cumulative);
      }
      out << fmt::format("{} cases, {} events, {} distinct activities\n", log.cases().size(), log.event_count(),
                         rows.size());
      if (!json_path.empty()) write_json(json_path, histogram_to_json(rows));
    } else if (train->parsed()) {
      const auto log = parse_log_file(input, config.schema);
      const auto sequences = encode_cases(log);
      const std::size_t n = config.n_states.value_or(default_state_count(log.vocabulary().size()));
      const auto trained = train_model(sequences, n, log.vocabulary().size(), config);
      write_text(output, serialize_model(trained.model, log.vocabulary().labels()));
      if (!report_path.empty()) write_json(report_path, training_report_to_json(trained.report));
      const auto& ll = trained.report.log_likelihood_per_iteration;
      out << fmt::format("{} states, {} iterations, final log-likelihood {:.6f}{}\n", n, trained.report.iterations_run,
                         ll.empty() ? 0.0 : ll.back(), trained.report.converged_early ? " (converged)" : "");
    } else if (strategies->parsed()) {
      std::ifstream in(model_path, std::ios::binary);
      if (!in) throw Error("cannot open '" + model_path + "'");
      std::stringstream buf;
      buf << in.rdbuf();
      const auto doc = deserialize_model(buf.str());
      if (!doc.vocabulary) throw ValidationError("'" + model_path + "' has no vocabulary");
      const auto table = extract_strategies(doc.model, Vocabulary(*doc.vocabulary), config.display_threshold);
      out << format_strategy_table(table);
      if (!json_path.empty()) write_json(json_path, strategies_to_json(table));
    } else if (map->parsed()) {
      std::ifstream in(model_path, std::ios::binary);
      if (!in) throw Error("cannot open '" + model_path + "'");
      std::stringstream buf;
      buf << in.rdbuf();
      const auto model = deserialize_model(buf.str()).model;
      const auto pmap = build_pseudo_map(prune_transitions(model.trans(), config.epsilon), model.n_states(),
                                         config.epsilon);
      const auto report = find_start_stop(pmap, config.overrides);
      const std::filesystem::path dir = output_dir.empty() ? default_output_dir() : std::filesystem::path(output_dir);
      std::filesystem::create_directories(dir);
      write_json(dir / "pseudo_map.json", pseudo_map_to_json(pmap, &report));
      write_text(dir / "pseudo_map.dot", pseudo_map_to_dot(pmap, &report));
      write_text(dir / "pseudo_map.graphml", pseudo_map_to_graphml(pmap));
      out << fmt::format("{} nodes, {} edges at epsilon {}\n", pmap.n_nodes, pmap.edges.size(), config.epsilon);
      out << "start candidates: " << nodes_to_string(report.start_candidates) << "\n";
      out << "stop candidates:  " << nodes_to_string(report.stop_candidates) << "\n";
      out << "wrote " << (dir / "pseudo_map.json").string() << "\n";
    } else if (cluster->parsed()) {
      const auto pmap = pseudo_map_from_json(read_json(map_path));
      const auto graph = UndirectedGraph::from_pseudo_map(pmap);
      const auto cover = eagle_cluster(graph, config.clique_size_threshold, config.complex_size_threshold);
      out << fmt::format("{:<6}  {}\n", "Node", "Cluster");
      for (std::size_t v = 0; v < pmap.n_nodes; ++v) {
        std::string names;
        for (std::size_t c = 0; c < cover.communities.size(); ++c) {
          const auto& members = cover.communities[c];
          if (std::binary_search(members.begin(), members.end(), static_cast<int>(v))) {
            names += (names.empty() ? "" : ", ") + Cover::name(c);
          }
        }
        out << fmt::format("{:<6}  {}\n", v, names.empty() ? "outlier" : names);
      }
      out << fmt::format("{} intentions, EQ {:.4f}\n", cover.communities.size(), cover.eq);
      if (!json_path.empty()) write_json(json_path, cover_to_json(cover));
      if (!output.empty()) {
        const auto report = find_start_stop(pmap, config.overrides);
        write_json(output, intention_map_to_json(
                               build_intention_map(pmap, cover, report.selected_start, report.selected_stop)));
      }
    } else if (metrics->parsed()) {
      const auto pmap = pseudo_map_from_json(read_json(map_path));
      const auto graph = UndirectedGraph::from_pseudo_map(pmap);
      const auto nodes = node_metrics(graph);
      const auto network = network_metrics(graph);
      out << fmt::format("{:<6}  {:>6}  {:>6}  {:>4}  {:>6}\n", "Node", "CC", "CL", "EC", "NC");
      for (const auto& m : nodes) {
        out << fmt::format("{:<6}  {:>6.2f}  {:>6.2f}  {:>4}  {:>6.2f}\n", m.node, m.clustering_coefficient,
                           m.closeness_centrality, m.eccentricity, m.neighborhood_connectivity);
      }
      out << fmt::format("diameter {}, density {:.3f}, centralization {:.3f}, characteristic path length {:.3f}\n",
                         network.diameter, network.density, network.degree_centralization,
                         network.characteristic_path_length);
      if (!json_path.empty()) write_json(json_path, metrics_to_json(nodes, network));
    } else if (pipeline->parsed()) {
      PipelineRequest request;
      request.input = input;
      request.output_dir = output_dir.empty() ? default_output_dir() : std::filesystem::path(output_dir);
      request.force = force;
      if (!ground_truth.empty()) request.ground_truth = ground_truth;
      const auto manifest = run_pipeline(config, request);
      out << fmt::format("{} cases, {} events, {} activities, {} states\n", manifest["n_cases"].get<std::size_t>(),
                         manifest["n_events"].get<std::size_t>(), manifest["n_symbols"].get<std::size_t>(),
                         manifest["n_states"].get<std::size_t>());
      if (manifest.contains("recovery") && manifest["recovery"].contains("max_trans_l1")) {
        out << fmt::format("recovery: max row L1 trans {:.4f}, emit {:.4f}\n",
                           manifest["recovery"]["max_trans_l1"].get<double>(),
                           manifest["recovery"]["max_emit_l1"].get<double>());
      }
      out << "wrote " << (request.output_dir / "manifest.json").string() << "\n";
    } else if (synth->parsed()) {
      const auto spec = ground_truth_from_json(read_json(spec_path));
      const auto generated = generate_log(spec);
      std::ofstream file(output, std::ios::binary);
      if (!file) throw Error("cannot write '" + output + "'");
      write_log(file, generated.log, config.schema);
      if (!file) throw Error("failed writing '" + output + "'");
      out << fmt::format("{} cases, {} events written to {}\n", generated.log.cases().size(),
                         generated.log.event_count(), output);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

}  // namespace mapminer::cli
