#include "mapminer/synthgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "mapminer/error.hpp"

namespace mapminer {
namespace {

constexpr std::size_t kExhaustiveLimit = 8;

// Minimum-cost assignment (Hungarian method, potentials form). Returns
// assignment[row] = column for a square cost matrix.
std::vector<int> solve_assignment(const Matrix& cost) {
  const std::size_t n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), way_cost(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(way_cost.begin(), way_cost.end(), inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < way_cost[j]) {
          way_cost[j] = cur;
          way[j] = j0;
        }
        if (way_cost[j] < delta) {
          delta = way_cost[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          way_cost[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, 0);
  for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = static_cast<int>(j - 1);
  return assignment;
}

double l1(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

}  // namespace

GroundTruthSpec ground_truth_from_json(const nlohmann::json& doc) {
  try {
    auto model_doc = deserialize_model(doc.at("model").dump());
    std::vector<std::string> labels;
    if (doc.contains("labels")) {
      labels = doc.at("labels").get<std::vector<std::string>>();
    } else if (model_doc.vocabulary) {
      labels = *model_doc.vocabulary;
    } else {
      throw ValidationError("ground truth needs 'labels' or a model vocabulary");
    }
    if (labels.size() != model_doc.model.n_symbols()) {
      throw ValidationError(fmt::format("{} labels for {} symbols", labels.size(), model_doc.model.n_symbols()));
    }
    Vocabulary check(labels);  // rejects duplicates
    for (const auto& l : labels) {
      if (l.empty() || l.find_first_not_of(" \t") == std::string::npos) throw ValidationError("empty activity label");
    }

    LengthLaw law;
    const auto& length = doc.at("length");
    const auto kind = length.at("kind").get<std::string>();
    if (kind == "fixed") {
      law = LengthLaw::fixed(length.at("length").get<std::size_t>());
    } else if (kind == "geometric") {
      law = LengthLaw::geometric(length.at("p").get<double>(), length.at("max").get<std::size_t>());
      if (!(law.p > 0.0 && law.p <= 1.0)) throw ValidationError("geometric p must lie in (0, 1]");
    } else {
      throw ValidationError("length.kind must be 'fixed' or 'geometric'");
    }
    if (law.length == 0) throw ValidationError("case length must be positive");

    const auto n_cases = doc.at("n_cases").get<std::size_t>();
    if (n_cases == 0) throw ValidationError("n_cases must be at least 1");
    return GroundTruthSpec{std::move(model_doc.model), std::move(labels), n_cases, law,
                           doc.value("seed", std::uint64_t{42})};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed ground-truth document: ") + e.what());
  } catch (const DomainError& e) {
    throw ValidationError(e.what());
  }
}

nlohmann::ordered_json ground_truth_to_json(const GroundTruthSpec& spec) {
  nlohmann::ordered_json doc;
  doc["model"] = nlohmann::ordered_json::parse(serialize_model(spec.model));
  doc["labels"] = spec.labels;
  doc["n_cases"] = spec.n_cases;
  if (spec.length_law.kind == LengthLaw::Kind::kFixed) {
    doc["length"] = {{"kind", "fixed"}, {"length", spec.length_law.length}};
  } else {
    doc["length"] = {{"kind", "geometric"}, {"p", spec.length_law.p}, {"max", spec.length_law.length}};
  }
  doc["seed"] = spec.seed;
  return doc;
}

GeneratedLog generate_log(const GroundTruthSpec& spec) {
  if (spec.labels.size() != spec.model.n_symbols()) {
    throw DomainError(fmt::format("{} labels for {} symbols", spec.labels.size(), spec.model.n_symbols()));
  }
  if (spec.n_cases == 0) throw DomainError("n_cases must be at least 1");
  auto samples = sample_with_states(spec.model, spec.n_cases, spec.length_law, spec.seed);

  using namespace std::chrono;
  const Timestamp base = sys_days{year{2013} / January / 1};
  std::vector<Case> cases;
  cases.reserve(samples.size());
  for (std::size_t c = 0; c < samples.size(); ++c) {
    Case out{fmt::format("C{:06d}", c + 1), {}};
    const auto& symbols = samples[c].symbols;
    out.events.reserve(symbols.size());
    for (std::size_t t = 0; t < symbols.size(); ++t) {
      out.events.push_back({out.case_id, base + minutes{static_cast<long>(t)},
                            spec.labels[static_cast<std::size_t>(symbols[t])], "00"});
    }
    cases.push_back(std::move(out));
  }
  return {EventLog(std::move(cases), SourceMeta{ColumnSchema{}, "synthetic", 0}), std::move(samples)};
}

RecoveryReport compare_models(const HmmModel& truth, const std::vector<std::string>& truth_labels,
                              const HmmModel& learned, const std::vector<std::string>& learned_labels) {
  const std::size_t n = truth.n_states();
  if (learned.n_states() != n) {
    throw DomainError(fmt::format("cannot match {} learned states to {} planted states", learned.n_states(), n));
  }
  if (truth_labels.size() != truth.n_symbols() || learned_labels.size() != learned.n_symbols()) {
    throw DomainError("label lists do not match the models' symbol counts");
  }

  // Emission rows over the union of both label sets, in truth order first.
  std::vector<std::string> columns = truth_labels;
  const Vocabulary truth_vocab(truth_labels);
  for (const auto& l : learned_labels) {
    if (!truth_vocab.contains(l)) columns.push_back(l);
  }
  const Vocabulary all(columns);
  Matrix truth_emit(n, columns.size(), 0.0), learned_emit(n, columns.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < truth_labels.size(); ++k) truth_emit(i, k) = truth.emit()(i, k);
    for (std::size_t k = 0; k < learned_labels.size(); ++k) {
      learned_emit(i, static_cast<std::size_t>(all.id(learned_labels[k]))) = learned.emit()(i, k);
    }
  }

  const auto evaluate = [&](const std::vector<int>& perm) {
    RecoveryReport r;
    r.permutation = perm;
    for (std::size_t i = 0; i < n; ++i) {
      const auto li = static_cast<std::size_t>(perm[i]);
      double t = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        t += std::abs(truth.trans()(i, j) - learned.trans()(li, static_cast<std::size_t>(perm[j])));
      }
      r.trans_l1.push_back(t);
      r.emit_l1.push_back(l1(truth_emit.row(i), learned_emit.row(li)));
      r.max_trans_l1 = std::max(r.max_trans_l1, t);
      r.max_emit_l1 = std::max(r.max_emit_l1, r.emit_l1.back());
    }
    return r;
  };
  const auto total = [](const RecoveryReport& r) {
    return std::accumulate(r.trans_l1.begin(), r.trans_l1.end(), 0.0) +
           std::accumulate(r.emit_l1.begin(), r.emit_l1.end(), 0.0);
  };

  if (n <= kExhaustiveLimit) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    RecoveryReport best = evaluate(perm);
    double best_total = total(best);
    while (std::next_permutation(perm.begin(), perm.end())) {
      auto r = evaluate(perm);
      const double t = total(r);
      if (t < best_total) {
        best_total = t;
        best = std::move(r);
      }
    }
    return best;
  }
  Matrix cost(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost(i, j) = l1(truth_emit.row(i), learned_emit.row(j));
  }
  return evaluate(solve_assignment(cost));
}

RecoveryReport compare_models(const HmmModel& truth, const HmmModel& learned) {
  if (truth.n_symbols() != learned.n_symbols()) throw DomainError("models emit different symbol counts");
  std::vector<std::string> labels(truth.n_symbols());
  for (std::size_t k = 0; k < labels.size(); ++k) labels[k] = std::to_string(k);
  return compare_models(truth, labels, learned, labels);
}

nlohmann::ordered_json recovery_to_json(const RecoveryReport& report) {
  nlohmann::ordered_json doc;
  doc["permutation"] = report.permutation;
  doc["trans_l1"] = report.trans_l1;
  doc["emit_l1"] = report.emit_l1;
  doc["max_trans_l1"] = report.max_trans_l1;
  doc["max_emit_l1"] = report.max_emit_l1;
  return doc;
}

}  // namespace mapminer
