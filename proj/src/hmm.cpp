#include "mapminer/hmm.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mapminer/error.hpp"
#include "random.hpp"

namespace mapminer {
namespace {

void check_distribution(std::span<const double> row, double tolerance, const std::string& what) {
  double sum = 0.0;
  for (double v : row) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw ValidationError(fmt::format("{} has an entry outside [0, 1]: {}", what, v));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw ValidationError(fmt::format("{} sums to {:.17g}, not 1", what, sum));
  }
}

void check_sequence(const HmmModel& model, std::span<const int> sequence) {
  if (sequence.empty()) throw DomainError("empty observation sequence");
  for (std::size_t t = 0; t < sequence.size(); ++t) {
    if (sequence[t] < 0 || static_cast<std::size_t>(sequence[t]) >= model.n_symbols()) {
      throw DomainError(fmt::format("symbol {} at position {} is outside [0, {})", sequence[t], t,
                                    model.n_symbols()));
    }
  }
}

}  // namespace

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw DomainError("ragged matrix rows");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r].assign(row(r).begin(), row(r).end());
  return out;
}

HmmModel::HmmModel(std::vector<double> pi, Matrix trans, Matrix emit, double tolerance)
    : pi_(std::move(pi)), trans_(std::move(trans)), emit_(std::move(emit)) {
  const std::size_t n = pi_.size();
  if (n == 0) throw ValidationError("model needs at least one state");
  if (trans_.rows() != n || trans_.cols() != n) {
    throw ValidationError(fmt::format("transition matrix is {}x{}, expected {}x{}", trans_.rows(),
                                      trans_.cols(), n, n));
  }
  if (emit_.rows() != n || emit_.cols() == 0) {
    throw ValidationError(fmt::format("emission matrix is {}x{}, expected {} rows and at least one column",
                                      emit_.rows(), emit_.cols(), n));
  }
  check_distribution(pi_, tolerance, "pi");
  for (std::size_t i = 0; i < n; ++i) {
    check_distribution(trans_.row(i), tolerance, fmt::format("trans row {}", i));
    check_distribution(emit_.row(i), tolerance, fmt::format("emit row {}", i));
  }
}

HmmModel init_uniform(std::size_t n_states, std::size_t n_symbols) {
  if (n_states == 0 || n_symbols == 0) throw DomainError("init_uniform needs N >= 1 and M >= 1");
  const double ps = 1.0 / static_cast<double>(n_states);
  const double pk = 1.0 / static_cast<double>(n_symbols);
  return HmmModel(std::vector<double>(n_states, ps), Matrix(n_states, n_states, ps),
                  Matrix(n_states, n_symbols, pk));
}

ForwardResult forward(const HmmModel& model, std::span<const int> sequence) {
  check_sequence(model, sequence);
  const std::size_t n = model.n_states();
  const std::size_t len = sequence.size();
  const auto& trans = model.trans();
  const auto& emit = model.emit();

  ForwardResult out{0.0, Matrix(len, n), std::vector<double>(len, 0.0)};
  for (std::size_t t = 0; t < len; ++t) {
    const auto k = static_cast<std::size_t>(sequence[t]);
    auto row = out.alphas.row(t);
    for (std::size_t j = 0; j < n; ++j) {
      double prior = 0.0;
      if (t == 0) {
        prior = model.pi()[j];
      } else {
        const auto prev = out.alphas.row(t - 1);
        for (std::size_t i = 0; i < n; ++i) prior += prev[i] * trans(i, j);
      }
      row[j] = prior * emit(j, k);
    }
    double scale = 0.0;
    for (double v : row) scale += v;
    out.scales[t] = scale;
    if (scale <= 0.0) {
      out.log_likelihood = -std::numeric_limits<double>::infinity();
      return out;
    }
    for (double& v : row) v /= scale;
    out.log_likelihood += std::log(scale);
  }
  return out;
}

Matrix backward(const HmmModel& model, std::span<const int> sequence, std::span<const double> scales) {
  check_sequence(model, sequence);
  const std::size_t n = model.n_states();
  const std::size_t len = sequence.size();
  if (scales.size() != len) throw DomainError("scale vector length differs from sequence length");
  const auto& trans = model.trans();
  const auto& emit = model.emit();

  Matrix betas(len, n, 0.0);
  for (double& v : betas.row(len - 1)) v = 1.0;
  std::vector<double> weighted(n);
  for (std::size_t t = len - 1; t-- > 0;) {
    const double scale = scales[t + 1];
    if (scale <= 0.0) break;
    const auto k = static_cast<std::size_t>(sequence[t + 1]);
    const auto next = betas.row(t + 1);
    for (std::size_t j = 0; j < n; ++j) weighted[j] = emit(j, k) * next[j];
    auto row = betas.row(t);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += trans(i, j) * weighted[j];
      row[i] = acc / scale;
    }
  }
  return betas;
}

Matrix backward(const HmmModel& model, std::span<const int> sequence) {
  return backward(model, sequence, forward(model, sequence).scales);
}

Matrix posteriors(const HmmModel& model, std::span<const int> sequence) {
  const auto fwd = forward(model, sequence);
  if (!std::isfinite(fwd.log_likelihood)) throw DomainError("sequence has zero probability under the model");
  const auto betas = backward(model, sequence, fwd.scales);
  Matrix gamma(sequence.size(), model.n_states());
  for (std::size_t t = 0; t < sequence.size(); ++t) {
    double norm = 0.0;
    for (std::size_t i = 0; i < model.n_states(); ++i) {
      gamma(t, i) = fwd.alphas(t, i) * betas(t, i);
      norm += gamma(t, i);
    }
    for (std::size_t i = 0; i < model.n_states(); ++i) gamma(t, i) /= norm;
  }
  return gamma;
}

ViterbiResult viterbi(const HmmModel& model, std::span<const int> sequence) {
  check_sequence(model, sequence);
  const std::size_t n = model.n_states();
  const std::size_t len = sequence.size();
  const auto safe_log = [](double p) { return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(); };

  Matrix log_trans(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) log_trans(i, j) = safe_log(model.trans()(i, j));
  }
  std::vector<double> score(n), next(n);
  std::vector<int> back(len * n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    score[j] = safe_log(model.pi()[j]) + safe_log(model.emit()(j, static_cast<std::size_t>(sequence[0])));
  }
  for (std::size_t t = 1; t < len; ++t) {
    const auto k = static_cast<std::size_t>(sequence[t]);
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t best = 0;
      double best_score = score[0] + log_trans(0, j);
      for (std::size_t i = 1; i < n; ++i) {
        const double s = score[i] + log_trans(i, j);
        if (s > best_score) {
          best_score = s;
          best = i;
        }
      }
      back[t * n + j] = static_cast<int>(best);
      next[j] = best_score + safe_log(model.emit()(j, k));
    }
    std::swap(score, next);
  }

  ViterbiResult out;
  std::size_t state = 0;
  out.log_probability = score[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (score[i] > out.log_probability) {
      out.log_probability = score[i];
      state = i;
    }
  }
  out.path.assign(len, 0);
  for (std::size_t t = len; t-- > 0;) {
    out.path[t] = static_cast<int>(state);
    if (t > 0) state = static_cast<std::size_t>(back[t * n + state]);
  }
  return out;
}

std::vector<SampledCase> sample_with_states(const HmmModel& model, std::size_t n_cases, const LengthLaw& law,
                                            std::uint64_t seed) {
  if (law.length == 0) throw DomainError("length law needs a positive length");
  if (law.kind == LengthLaw::Kind::kGeometric && !(law.p > 0.0 && law.p <= 1.0)) {
    throw DomainError("geometric length law needs p in (0, 1]");
  }
  detail::Rng rng(seed);
  std::vector<SampledCase> out;
  out.reserve(n_cases);
  for (std::size_t c = 0; c < n_cases; ++c) {
    std::size_t length = law.length;
    if (law.kind == LengthLaw::Kind::kGeometric) {
      length = 1;
      while (length < law.length && rng.uniform() >= law.p) ++length;
    }
    SampledCase sc;
    sc.states.reserve(length);
    sc.symbols.reserve(length);
    auto state = rng.categorical(model.pi());
    for (std::size_t t = 0; t < length; ++t) {
      if (t > 0) state = rng.categorical(model.trans().row(state));
      sc.states.push_back(static_cast<int>(state));
      sc.symbols.push_back(static_cast<int>(rng.categorical(model.emit().row(state))));
    }
    out.push_back(std::move(sc));
  }
  return out;
}

std::vector<Sequence> sample(const HmmModel& model, std::size_t n_cases, const LengthLaw& law, std::uint64_t seed) {
  auto cases = sample_with_states(model, n_cases, law, seed);
  std::vector<Sequence> out;
  out.reserve(cases.size());
  for (auto& c : cases) out.push_back(std::move(c.symbols));
  return out;
}

std::string serialize_model(const HmmModel& model, const std::optional<std::vector<std::string>>& vocabulary) {
  nlohmann::ordered_json doc;
  doc["n_states"] = model.n_states();
  doc["n_symbols"] = model.n_symbols();
  doc["pi"] = model.pi();
  doc["trans"] = model.trans().to_rows();
  doc["emit"] = model.emit().to_rows();
  if (vocabulary) {
    if (vocabulary->size() != model.n_symbols()) {
      throw DomainError("vocabulary size differs from the model's symbol count");
    }
    nlohmann::ordered_json vocab = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < vocabulary->size(); ++i) vocab[(*vocabulary)[i]] = i;
    doc["vocabulary"] = std::move(vocab);
  }
  return doc.dump(2) + "\n";
}

ModelDocument deserialize_model(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("model document is not valid JSON: ") + e.what());
  }
  try {
    const auto n = doc.at("n_states").get<std::size_t>();
    const auto m = doc.at("n_symbols").get<std::size_t>();
    auto pi = doc.at("pi").get<std::vector<double>>();
    const auto trans = Matrix::from_rows(doc.at("trans").get<std::vector<std::vector<double>>>());
    const auto emit = Matrix::from_rows(doc.at("emit").get<std::vector<std::vector<double>>>());
    if (pi.size() != n || emit.cols() != m) {
      throw ValidationError("declared n_states/n_symbols do not match the arrays");
    }
    ModelDocument out{HmmModel(std::move(pi), trans, emit, HmmModel::kDefaultTolerance), std::nullopt};
    if (doc.contains("vocabulary")) {
      std::vector<std::string> labels(m);
      std::vector<bool> seen(m, false);
      for (const auto& [label, id_json] : doc.at("vocabulary").items()) {
        const auto id = id_json.get<std::size_t>();
        if (id >= m || seen[id]) throw ValidationError("vocabulary ids must be a permutation of [0, n_symbols)");
        seen[id] = true;
        labels[id] = label;
      }
      if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw ValidationError("vocabulary does not cover every symbol");
      }
      out.vocabulary = std::move(labels);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model document: ") + e.what());
  } catch (const DomainError& e) {
    throw ValidationError(e.what());
  }
}

}  // namespace mapminer
