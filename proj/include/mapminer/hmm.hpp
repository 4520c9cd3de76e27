#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mapminer/eventlog.hpp"

namespace mapminer {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);
  std::vector<std::vector<double>> to_rows() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Discrete-emission HMM: initial distribution, transition matrix
/// (trans(i,j) = P(j | i)) and emission matrix (emit(i,k) = P(k | i)).
/// Construction validates shapes and stochasticity.
class HmmModel {
 public:
  static constexpr double kDefaultTolerance = 1e-6;

  HmmModel(std::vector<double> pi, Matrix trans, Matrix emit, double tolerance = kDefaultTolerance);

  std::size_t n_states() const { return pi_.size(); }
  std::size_t n_symbols() const { return emit_.cols(); }
  const std::vector<double>& pi() const { return pi_; }
  const Matrix& trans() const { return trans_; }
  const Matrix& emit() const { return emit_; }

  friend bool operator==(const HmmModel&, const HmmModel&) = default;

 private:
  std::vector<double> pi_;
  Matrix trans_;
  Matrix emit_;
};

HmmModel init_uniform(std::size_t n_states, std::size_t n_symbols);

enum class KMeansFeature {
  kOneHot,           // symbol indicator only
  kOneHotPosition,   // plus weighted normalized position in the case
  kContext,          // plus weighted mean indicator of the neighbouring events
};

struct KMeansOptions {
  KMeansFeature feature = KMeansFeature::kContext;
  double position_weight = 0.1;
  double context_weight = 4.0;
  int context_radius = 2;  // neighbours on each side
  double smoothing = 1e-3;
  int max_iterations = 100;
  int restarts = 5;  // k-means++ runs, lowest within-cluster sum of squares kept
};

/// Estimates an initial model from a hard K-Means clustering of the events.
HmmModel kmeans_init(std::span<const Sequence> sequences, std::size_t n_states, std::size_t n_symbols,
                     std::uint64_t seed, const KMeansOptions& options = {});

struct ForwardResult {
  double log_likelihood = 0.0;
  Matrix alphas;               // T x N, each row normalized to sum 1
  std::vector<double> scales;  // per-step normalizers; sum of logs = log-likelihood
};

/// Scaled forward pass. An impossible sequence yields -inf with the table
/// truncated at the first zero-probability step.
ForwardResult forward(const HmmModel& model, std::span<const int> sequence);

/// Scaled backward table matching `forward` (beta rows at the last step are 1).
Matrix backward(const HmmModel& model, std::span<const int> sequence, std::span<const double> scales);
Matrix backward(const HmmModel& model, std::span<const int> sequence);

/// Posterior state probabilities gamma(t, i).
Matrix posteriors(const HmmModel& model, std::span<const int> sequence);

struct ViterbiResult {
  std::vector<int> path;
  double log_probability = -std::numeric_limits<double>::infinity();
};

/// Most likely state path; ties resolve to the lowest state index.
ViterbiResult viterbi(const HmmModel& model, std::span<const int> sequence);

struct BaumWelchOptions {
  int max_iterations = 50;
  /// Stop once the total log-likelihood improves by less than this.
  double tolerance = 1e-6;
  /// Smoothing used when a state gets no expected occupancy.
  double floor = 1e-12;
  /// 0 = hardware concurrency. Results do not depend on this value.
  unsigned threads = 0;
};

struct TrainingReport {
  int iterations_run = 0;
  std::vector<double> log_likelihood_per_iteration;
  bool converged_early = false;
  std::vector<int> degenerate_states;  // states re-normalized with the floor
};

struct TrainingResult {
  HmmModel model;
  TrainingReport report;
};

/// Multi-sequence Baum-Welch. Entry k of the log-likelihood trace is the
/// likelihood of the model entering iteration k.
TrainingResult baum_welch(const HmmModel& model, std::span<const Sequence> sequences,
                          const BaumWelchOptions& options = {});

/// Length distribution for sampled cases.
struct LengthLaw {
  enum class Kind { kFixed, kGeometric };
  Kind kind = Kind::kFixed;
  std::size_t length = 1;  // fixed length, or the cap for geometric
  double p = 0.5;          // geometric success probability, lengths start at 1

  static LengthLaw fixed(std::size_t length) { return {Kind::kFixed, length, 0.5}; }
  static LengthLaw geometric(double p, std::size_t max_length) { return {Kind::kGeometric, max_length, p}; }
};

struct SampledCase {
  std::vector<int> states;
  Sequence symbols;
};

std::vector<SampledCase> sample_with_states(const HmmModel& model, std::size_t n_cases, const LengthLaw& law,
                                            std::uint64_t seed);
std::vector<Sequence> sample(const HmmModel& model, std::size_t n_cases, const LengthLaw& law,
                             std::uint64_t seed);

/// A model plus the optional activity labels it was trained on.
struct ModelDocument {
  HmmModel model;
  std::optional<std::vector<std::string>> vocabulary;
};

std::string serialize_model(const HmmModel& model, const std::optional<std::vector<std::string>>& vocabulary = {});
/// Throws ValidationError on malformed or non-stochastic documents.
ModelDocument deserialize_model(const std::string& text);

}  // namespace mapminer
