#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "mapminer/clustering.hpp"
#include "mapminer/error.hpp"
#include "mapminer/pipeline.hpp"
#include "mapminer/synthgen.hpp"

namespace py = pybind11;
using namespace mapminer;

namespace {

using Rows = std::vector<std::vector<double>>;

HmmModel make_model(const std::vector<double>& pi, const Rows& trans, const Rows& emit) {
  return HmmModel(pi, Matrix::from_rows(trans), Matrix::from_rows(emit));
}

py::dict model_dict(const HmmModel& m) {
  py::dict d;
  d["pi"] = m.pi();
  d["trans"] = m.trans().to_rows();
  d["emit"] = m.emit().to_rows();
  return d;
}

// Round-trips through the text form so Python gets plain dicts and lists.
py::object to_python(const nlohmann::ordered_json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

UndirectedGraph make_graph(std::size_t n, const std::vector<std::pair<int, int>>& edges) {
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n) {
      throw DomainError("edge endpoint outside the node range");
    }
  }
  return UndirectedGraph(n, edges);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Process-map mining from event logs with hidden Markov models";
  py::register_exception<Error>(m, "MapMinerError", PyExc_ValueError);

  m.def(
      "forward",
      [](const std::vector<double>& pi, const Rows& trans, const Rows& emit, const std::vector<int>& seq) {
        return forward(make_model(pi, trans, emit), seq).log_likelihood;
      },
      py::arg("pi"), py::arg("trans"), py::arg("emit"), py::arg("sequence"), "Log-likelihood of one sequence.");

  m.def(
      "viterbi",
      [](const std::vector<double>& pi, const Rows& trans, const Rows& emit, const std::vector<int>& seq) {
        const auto r = viterbi(make_model(pi, trans, emit), seq);
        return py::make_tuple(r.path, r.log_probability);
      },
      py::arg("pi"), py::arg("trans"), py::arg("emit"), py::arg("sequence"),
      "Most likely state path and its log-probability.");

  m.def(
      "train",
      [](const std::vector<Sequence>& sequences, std::size_t n_states, std::size_t n_symbols, int iterations,
         double tolerance, std::uint64_t seed) {
        PipelineConfig config;
        config.bw_iterations = iterations;
        config.bw_tolerance = tolerance;
        config.seed = seed;
        TrainingResult result = [&] {
          py::gil_scoped_release release;
          return train_model(sequences, n_states, n_symbols, config);
        }();
        auto d = model_dict(result.model);
        d["log_likelihood"] = result.report.log_likelihood_per_iteration;
        d["converged"] = result.report.converged_early;
        return d;
      },
      py::arg("sequences"), py::arg("n_states"), py::arg("n_symbols"), py::arg("iterations") = 50,
      py::arg("tolerance") = 1e-6, py::arg("seed") = 42, "K-Means initialization followed by Baum-Welch.");

  m.def(
      "sample",
      [](const std::vector<double>& pi, const Rows& trans, const Rows& emit, std::size_t n_cases, std::size_t length,
         std::uint64_t seed) { return sample(make_model(pi, trans, emit), n_cases, LengthLaw::fixed(length), seed); },
      py::arg("pi"), py::arg("trans"), py::arg("emit"), py::arg("n_cases"), py::arg("length"), py::arg("seed"),
      "Fixed-length symbol sequences drawn from a model.");

  m.def(
      "prune_transitions",
      [](const Rows& trans, double epsilon) {
        std::vector<std::tuple<int, int, double>> out;
        for (const auto& e : prune_transitions(Matrix::from_rows(trans), epsilon)) {
          out.emplace_back(e.source, e.target, e.weight);
        }
        return out;
      },
      py::arg("trans"), py::arg("epsilon") = 0.15, "Transitions with probability at least epsilon.");

  m.def(
      "maximal_cliques",
      [](std::size_t n, const std::vector<std::pair<int, int>>& edges) { return maximal_cliques(make_graph(n, edges)); },
      py::arg("n_nodes"), py::arg("edges"));

  m.def(
      "eagle_cluster",
      [](std::size_t n, const std::vector<std::pair<int, int>>& edges, std::size_t clique, std::size_t complex) {
        return to_python(cover_to_json(eagle_cluster(make_graph(n, edges), clique, complex)));
      },
      py::arg("n_nodes"), py::arg("edges"), py::arg("clique_size") = 3, py::arg("complex_size") = 2,
      "Overlapping communities as a cover document.");

  m.def(
      "extended_modularity",
      [](const std::vector<NodeSet>& communities, std::size_t n, const std::vector<std::pair<int, int>>& edges) {
        return extended_modularity(communities, make_graph(n, edges));
      },
      py::arg("communities"), py::arg("n_nodes"), py::arg("edges"));

  m.def(
      "network_metrics",
      [](std::size_t n, const std::vector<std::pair<int, int>>& edges) {
        const auto g = make_graph(n, edges);
        return to_python(metrics_to_json(node_metrics(g), network_metrics(g)));
      },
      py::arg("n_nodes"), py::arg("edges"), "Per-node and network metrics document.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full = {"mapminer"};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : full) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a command-line invocation; returns (exit code, stdout, stderr).");
}
