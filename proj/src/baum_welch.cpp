#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <fmt/format.h>

#include "mapminer/error.hpp"
#include "mapminer/hmm.hpp"

namespace mapminer {
namespace {

// Sequences are accumulated in fixed-size chunks and the chunk totals are
// reduced in chunk order, so the result is independent of the thread count.
constexpr std::size_t kChunkSize = 64;

struct Accumulator {
  std::vector<double> pi;
  Matrix trans;
  Matrix emit;
  double log_likelihood = 0.0;

  Accumulator(std::size_t n, std::size_t m) : pi(n, 0.0), trans(n, n, 0.0), emit(n, m, 0.0) {}

  void add(const Accumulator& other) {
    for (std::size_t i = 0; i < pi.size(); ++i) pi[i] += other.pi[i];
    for (std::size_t i = 0; i < trans.rows(); ++i) {
      for (std::size_t j = 0; j < trans.cols(); ++j) trans(i, j) += other.trans(i, j);
      for (std::size_t k = 0; k < emit.cols(); ++k) emit(i, k) += other.emit(i, k);
    }
    log_likelihood += other.log_likelihood;
  }
};

void accumulate_sequence(const HmmModel& model, std::span<const int> seq, std::size_t index, Accumulator& acc) {
  const std::size_t n = model.n_states();
  const auto fwd = forward(model, seq);
  if (!std::isfinite(fwd.log_likelihood)) {
    throw DomainError(fmt::format("sequence {} has zero probability under the model", index));
  }
  const auto betas = backward(model, seq, fwd.scales);
  const auto& trans = model.trans();
  const auto& emit = model.emit();

  std::vector<double> weighted(n);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const auto k = static_cast<std::size_t>(seq[t]);
    for (std::size_t i = 0; i < n; ++i) {
      const double gamma = fwd.alphas(t, i) * betas(t, i);
      acc.emit(i, k) += gamma;
      if (t == 0) acc.pi[i] += gamma;
    }
    if (t + 1 == seq.size()) break;
    const auto next_symbol = static_cast<std::size_t>(seq[t + 1]);
    const double scale = fwd.scales[t + 1];
    for (std::size_t j = 0; j < n; ++j) weighted[j] = emit(j, next_symbol) * betas(t + 1, j);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = fwd.alphas(t, i) / scale;
      for (std::size_t j = 0; j < n; ++j) acc.trans(i, j) += a * trans(i, j) * weighted[j];
    }
  }
  acc.log_likelihood += fwd.log_likelihood;
}

Accumulator expectation(const HmmModel& model, std::span<const Sequence> sequences, unsigned threads) {
  const std::size_t n = model.n_states();
  const std::size_t m = model.n_symbols();
  const std::size_t chunks = (sequences.size() + kChunkSize - 1) / kChunkSize;
  std::vector<Accumulator> partial(chunks, Accumulator(n, m));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  const auto work = [&] {
    try {
      for (std::size_t c; (c = next.fetch_add(1)) < chunks && !failed.load();) {
        const std::size_t end = std::min(sequences.size(), (c + 1) * kChunkSize);
        for (std::size_t s = c * kChunkSize; s < end; ++s) accumulate_sequence(model, sequences[s], s, partial[c]);
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, chunks));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  Accumulator total(n, m);
  for (const auto& p : partial) total.add(p);
  return total;
}

// Normalizes `row` in place. Rows with no mass get `floor` smoothing and
// report true.
bool normalize_row(std::span<double> row, double floor) {
  double sum = 0.0;
  for (double v : row) sum += v;
  if (sum > 0.0 && std::isfinite(sum)) {
    for (double& v : row) v /= sum;
    return false;
  }
  for (double& v : row) v = std::max(v, 0.0) + floor;
  sum = 0.0;
  for (double v : row) sum += v;
  for (double& v : row) v /= sum;
  return true;
}

}  // namespace

TrainingResult baum_welch(const HmmModel& model, std::span<const Sequence> sequences,
                          const BaumWelchOptions& options) {
  if (sequences.empty()) throw DomainError("baum_welch needs at least one sequence");
  if (options.max_iterations < 0) throw DomainError("max_iterations must be non-negative");
  if (!(options.floor > 0.0)) throw DomainError("floor must be positive");
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    if (sequences[s].empty()) throw DomainError(fmt::format("sequence {} is empty", s));
    for (std::size_t t = 0; t < sequences[s].size(); ++t) {
      const int k = sequences[s][t];
      if (k < 0 || static_cast<std::size_t>(k) >= model.n_symbols()) {
        throw DomainError(fmt::format("symbol {} at sequence {} position {} is outside [0, {})", k, s, t,
                                      model.n_symbols()));
      }
    }
  }
  const unsigned threads = options.threads > 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n = model.n_states();

  HmmModel current = model;
  TrainingReport report;
  std::vector<bool> degenerate(n, false);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    auto acc = expectation(current, sequences, threads);
    report.log_likelihood_per_iteration.push_back(acc.log_likelihood);
    ++report.iterations_run;
    if (iter > 0) {
      const auto& ll = report.log_likelihood_per_iteration;
      if (ll[ll.size() - 1] - ll[ll.size() - 2] < options.tolerance) {
        report.converged_early = true;
        break;
      }
    }

    normalize_row(acc.pi, options.floor);
    for (std::size_t i = 0; i < n; ++i) {
      const bool t_flag = normalize_row(acc.trans.row(i), options.floor);
      const bool e_flag = normalize_row(acc.emit.row(i), options.floor);
      if (t_flag || e_flag) degenerate[i] = true;
    }
    current = HmmModel(std::move(acc.pi), std::move(acc.trans), std::move(acc.emit), 1e-9);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (degenerate[i]) report.degenerate_states.push_back(static_cast<int>(i));
  }
  return {std::move(current), std::move(report)};
}

}  // namespace mapminer
