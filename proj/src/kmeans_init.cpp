#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mapminer/error.hpp"
#include "mapminer/hmm.hpp"
#include "random.hpp"

namespace mapminer {
namespace {

// Each event becomes a sparse vector over [0, M) symbol indicator,
// [M, 2M) mean indicator of the neighbours within the context window, and a
// final normalized-position coordinate.
struct SparseFeatures {
  std::vector<std::size_t> offsets{0};
  std::vector<std::pair<std::size_t, double>> entries;
  std::vector<double> norms;

  std::size_t size() const { return norms.size(); }
  std::span<const std::pair<std::size_t, double>> operator[](std::size_t i) const {
    return {entries.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
};

SparseFeatures build_features(std::span<const Sequence> sequences, std::size_t m, const KMeansOptions& options) {
  const double context = options.feature == KMeansFeature::kContext ? options.context_weight : 0.0;
  const double position = options.feature == KMeansFeature::kOneHot ? 0.0 : options.position_weight;
  const std::size_t radius = static_cast<std::size_t>(std::max(options.context_radius, 1));
  SparseFeatures f;
  std::vector<std::pair<std::size_t, double>> row;
  for (const auto& seq : sequences) {
    for (std::size_t t = 0; t < seq.size(); ++t) {
      row.clear();
      row.emplace_back(static_cast<std::size_t>(seq[t]), 1.0);
      if (context > 0.0) {
        const std::size_t lo = t >= radius ? t - radius : 0;
        const std::size_t hi = std::min(seq.size() - 1, t + radius);
        const std::size_t count = hi - lo;
        for (std::size_t u = lo; u <= hi; ++u) {
          if (u == t) continue;
          const std::size_t d = m + static_cast<std::size_t>(seq[u]);
          auto it = std::find_if(row.begin() + 1, row.end(), [&](const auto& e) { return e.first == d; });
          if (it == row.end()) {
            row.emplace_back(d, context / static_cast<double>(count));
          } else {
            it->second += context / static_cast<double>(count);
          }
        }
      }
      if (position > 0.0 && seq.size() > 1) {
        row.emplace_back(2 * m, position * static_cast<double>(t) / static_cast<double>(seq.size() - 1));
      }
      double norm = 0.0;
      for (const auto& [d, v] : row) norm += v * v;
      f.entries.insert(f.entries.end(), row.begin(), row.end());
      f.offsets.push_back(f.entries.size());
      f.norms.push_back(norm);
    }
  }
  return f;
}

}  // namespace

HmmModel kmeans_init(std::span<const Sequence> sequences, std::size_t n_states, std::size_t n_symbols,
                     std::uint64_t seed, const KMeansOptions& options) {
  if (sequences.empty()) throw DomainError("kmeans_init needs at least one sequence");
  if (n_states == 0 || n_symbols == 0) throw DomainError("kmeans_init needs N >= 1 and M >= 1");
  if (!(options.smoothing > 0.0)) throw DomainError("kmeans_init smoothing must be positive");

  std::size_t total = 0;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    if (seq.empty()) throw DomainError(fmt::format("sequence {} is empty", s));
    for (std::size_t t = 0; t < seq.size(); ++t) {
      if (seq[t] < 0 || static_cast<std::size_t>(seq[t]) >= n_symbols) {
        throw DomainError(fmt::format("symbol {} at sequence {} position {} is outside [0, {})", seq[t], s, t,
                                      n_symbols));
      }
    }
    total += seq.size();
  }
  if (n_states > total) {
    throw DomainError(fmt::format("{} states requested but only {} observations", n_states, total));
  }

  const auto points = build_features(sequences, n_symbols, options);
  const std::size_t dims = 2 * n_symbols + 1;
  const auto& norms = points.norms;
  const auto dot = [&](std::size_t point, std::span<const double> centroid) {
    double acc = 0.0;
    for (const auto& [d, v] : points[point]) acc += v * centroid[d];
    return acc;
  };

  Matrix centroids(n_states, dims, 0.0);
  std::vector<double> centroid_norms(n_states, 0.0);
  const auto set_centroid_to_point = [&](std::size_t c, std::size_t p) {
    for (double& v : centroids.row(c)) v = 0.0;
    for (const auto& [d, v] : points[p]) centroids(c, d) += v;
    double acc = 0.0;
    for (double v : centroids.row(c)) acc += v * v;
    centroid_norms[c] = acc;
  };
  const auto distance = [&](std::size_t point, std::size_t c) {
    const double d = norms[point] - 2.0 * dot(point, centroids.row(c)) + centroid_norms[c];
    return std::max(d, 0.0);
  };

  // k-means++ seeding then Lloyd, restarted from one random stream; the run
  // with the lowest within-cluster sum of squares is kept.
  detail::Rng rng(seed);
  std::vector<std::size_t> assignment;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < std::max(options.restarts, 1); ++restart) {
    std::vector<std::size_t> run_assignment;
    set_centroid_to_point(0, rng.index(points.size()));
    std::vector<double> nearest(points.size(), std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < n_states; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        nearest[i] = std::min(nearest[i], distance(i, c - 1));
        total += nearest[i];
      }
      const std::size_t pick = total > 0.0 ? rng.categorical(nearest) : rng.index(points.size());
      set_centroid_to_point(c, pick);
    }

    // Lloyd iterations.
    run_assignment.assign(points.size(), n_states);
    std::vector<double> assigned_distance(points.size(), 0.0);
    for (int iter = 0; iter < std::max(options.max_iterations, 1); ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t best = 0;
        double best_d = distance(i, 0);
        for (std::size_t c = 1; c < n_states; ++c) {
          const double d = distance(i, c);
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
        assigned_distance[i] = best_d;
        if (run_assignment[i] != best) {
          run_assignment[i] = best;
          changed = true;
        }
      }

      std::vector<std::size_t> sizes(n_states, 0);
      for (std::size_t a : run_assignment) ++sizes[a];
      // An empty cluster takes the point farthest from its own centroid.
      for (std::size_t c = 0; c < n_states; ++c) {
        if (sizes[c] > 0) continue;
        std::size_t far = points.size();
        for (std::size_t i = 0; i < points.size(); ++i) {
          if (sizes[run_assignment[i]] <= 1) continue;
          if (far == points.size() || assigned_distance[i] > assigned_distance[far]) far = i;
        }
        if (far == points.size()) break;
        --sizes[run_assignment[far]];
        run_assignment[far] = c;
        assigned_distance[far] = 0.0;
        ++sizes[c];
        changed = true;
      }
      if (!changed) break;

      centroids = Matrix(n_states, dims, 0.0);
      for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t c = run_assignment[i];
        for (const auto& [d, v] : points[i]) centroids(c, d) += v;
      }
      for (std::size_t c = 0; c < n_states; ++c) {
        double acc = 0.0;
        for (double& v : centroids.row(c)) {
          if (sizes[c] > 0) v /= static_cast<double>(sizes[c]);
          acc += v * v;
        }
        centroid_norms[c] = acc;
      }
    }
    double sse = 0.0;
    for (double d : assigned_distance) sse += d;
    if (sse < best_sse) {
      best_sse = sse;
      assignment = std::move(run_assignment);
    }
  }

  // Hard counts from the clustering, smoothed so no parameter is zero.
  const double alpha = options.smoothing;
  std::vector<double> pi(n_states, alpha);
  Matrix trans(n_states, n_states, alpha);
  Matrix emit(n_states, n_symbols, alpha);
  std::size_t i = 0;
  for (const auto& seq : sequences) {
    for (std::size_t t = 0; t < seq.size(); ++t, ++i) {
      const std::size_t c = assignment[i];
      emit(c, static_cast<std::size_t>(seq[t])) += 1.0;
      if (t == 0) pi[c] += 1.0;
      if (t + 1 < seq.size()) trans(c, assignment[i + 1]) += 1.0;
    }
  }
  const auto normalize = [](std::span<double> row) {
    double sum = 0.0;
    for (double v : row) sum += v;
    for (double& v : row) v /= sum;
  };
  normalize(pi);
  for (std::size_t s = 0; s < n_states; ++s) {
    normalize(trans.row(s));
    normalize(emit.row(s));
  }
  return HmmModel(std::move(pi), std::move(trans), std::move(emit));
}

}  // namespace mapminer
