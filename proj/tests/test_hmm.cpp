#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mapminer/error.hpp"
#include "mapminer/hmm.hpp"
#include "oracles.hpp"

using namespace mapminer;

namespace {

HmmModel deterministic_chain() {
  return HmmModel({1.0, 0.0}, Matrix::from_rows({{0, 1}, {1, 0}}), Matrix::from_rows({{1, 0}, {0, 1}}));
}

double row_sum(std::span<const double> row) { return std::accumulate(row.begin(), row.end(), 0.0); }

}  // namespace

TEST_CASE("init_uniform") {
  const auto m = init_uniform(2, 2);
  CHECK(m.pi() == std::vector<double>{0.5, 0.5});
  CHECK(m.trans() == Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}));
  CHECK(m.emit() == Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}));

  const auto single = init_uniform(1, 3);
  CHECK(single.pi() == std::vector<double>{1.0});
  CHECK(single.trans()(0, 0) == 1.0);
  for (double v : single.emit().row(0)) CHECK(v == doctest::Approx(1.0 / 3.0));

  const auto big = init_uniform(12, 39);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(std::abs(row_sum(big.trans().row(i)) - 1.0) <= 1e-12);
    CHECK(std::abs(row_sum(big.emit().row(i)) - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(init_uniform(0, 3), DomainError);
  CHECK_THROWS_AS(init_uniform(3, 0), DomainError);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(HmmModel({1.0}, Matrix::from_rows({{1.0}}), Matrix::from_rows({{0.5, 0.4}})), ValidationError);
  CHECK_THROWS_AS(HmmModel({0.5, 0.5}, Matrix::from_rows({{1.0}}), Matrix::from_rows({{1.0}, {1.0}})),
                  ValidationError);
  CHECK_THROWS_AS(HmmModel({1.2, -0.2}, Matrix::from_rows({{1, 0}, {0, 1}}), Matrix::from_rows({{1.0}, {1.0}})),
                  ValidationError);
}

TEST_CASE("forward") {
  SUBCASE("deterministic chain") {
    const auto r = forward(deterministic_chain(), std::vector<int>{0, 1, 0});
    CHECK(r.log_likelihood == doctest::Approx(0.0));
  }
  SUBCASE("uniform model") {
    const auto r = forward(init_uniform(2, 2), std::vector<int>{1, 0, 1});
    CHECK(std::exp(r.log_likelihood) == doctest::Approx(0.125).epsilon(1e-14));
  }
  SUBCASE("brute-force path sum") {
    std::mt19937_64 rng(5);
    const auto model = oracle::random_model(rng, 3, 4);
    const auto seq = oracle::random_sequence(rng, 5, 4);
    const double expected = oracle::likelihood(model, seq);
    const double got = std::exp(forward(model, seq).log_likelihood);
    CHECK(std::abs(got - expected) <= 1e-10 * expected);
  }
  SUBCASE("long sequences do not underflow") {
    std::mt19937_64 rng(9);
    const auto model = oracle::random_model(rng, 4, 6);
    const auto seq = oracle::random_sequence(rng, 20000, 6);
    const double ll = forward(model, seq).log_likelihood;
    CHECK(std::isfinite(ll));
    CHECK(ll < -1000.0);
  }
  SUBCASE("impossible sequence") {
    CHECK(forward(deterministic_chain(), std::vector<int>{1}).log_likelihood ==
          -std::numeric_limits<double>::infinity());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(forward(init_uniform(2, 2), std::vector<int>{}), DomainError);
    try {
      forward(init_uniform(2, 2), std::vector<int>{0, 1, 2});
      FAIL("expected a domain error");
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()).find("position 2") != std::string::npos);
    }
  }
}

TEST_CASE("forward is invariant under state relabeling") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 3;
    const auto model = oracle::random_model(rng, n, 4);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pi(n);
    Matrix trans(n, n), emit(n, 4);
    for (std::size_t i = 0; i < n; ++i) {
      pi[i] = model.pi()[perm[i]];
      for (std::size_t j = 0; j < n; ++j) trans(i, j) = model.trans()(perm[i], perm[j]);
      for (std::size_t k = 0; k < 4; ++k) emit(i, k) = model.emit()(perm[i], k);
    }
    const HmmModel relabeled(pi, trans, emit);
    const auto seq = oracle::random_sequence(rng, 12, 4);
    CHECK(std::abs(forward(model, seq).log_likelihood - forward(relabeled, seq).log_likelihood) <= 1e-12);
  }
}

TEST_CASE("backward") {
  SUBCASE("length one") {
    std::mt19937_64 rng(1);
    const auto betas = backward(oracle::random_model(rng, 3, 3), std::vector<int>{2});
    for (double v : betas.row(0)) CHECK(v == 1.0);
  }
  SUBCASE("deterministic chain posteriors are 0/1") {
    const auto gamma = posteriors(deterministic_chain(), std::vector<int>{0, 1, 0});
    for (std::size_t t = 0; t < 3; ++t) {
      CHECK(gamma(t, t % 2) == doctest::Approx(1.0));
      CHECK(gamma(t, 1 - t % 2) == doctest::Approx(0.0));
    }
  }
  SUBCASE("alpha-beta consistency on random models") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      const auto model = oracle::random_model(rng, 1 + rng() % 4, 1 + rng() % 5);
      const auto seq = oracle::random_sequence(rng, 1 + rng() % 8, model.n_symbols());
      const auto fwd = forward(model, seq);
      const auto betas = backward(model, seq, fwd.scales);
      // Scaled tables satisfy sum_i alpha_t(i) beta_t(i) = 1 at every t, i.e.
      // every step reproduces the same sequence likelihood.
      for (std::size_t t = 0; t < seq.size(); ++t) {
        double s = 0.0;
        for (std::size_t i = 0; i < model.n_states(); ++i) s += fwd.alphas(t, i) * betas(t, i);
        CHECK(std::abs(s - 1.0) <= 1e-9);
      }
      const double expected = oracle::likelihood(model, seq);
      CHECK(std::abs(std::exp(fwd.log_likelihood) - expected) <= 1e-9 * expected);
    }
  }
}

TEST_CASE("viterbi") {
  SUBCASE("deterministic chain") {
    const auto r = viterbi(deterministic_chain(), std::vector<int>{0, 1, 0});
    CHECK(r.path == std::vector<int>{0, 1, 0});
    CHECK(r.log_probability == doctest::Approx(0.0));
  }
  SUBCASE("uniform model picks the lowest indices") {
    const auto r = viterbi(init_uniform(3, 2), std::vector<int>{0, 1, 1, 0});
    CHECK(r.path == std::vector<int>{0, 0, 0, 0});
  }
  SUBCASE("brute-force argmax") {
    std::mt19937_64 rng(8);
    const auto model = oracle::random_model(rng, 3, 4);
    const auto seq = oracle::random_sequence(rng, 6, 4);
    const auto [path, score] = oracle::best_path(model, seq);
    const auto r = viterbi(model, seq);
    CHECK(r.path == path);
    CHECK(r.log_probability == doctest::Approx(score).epsilon(1e-12));
  }
}

TEST_CASE("sample") {
  SUBCASE("deterministic chain") {
    for (const auto& s : sample(deterministic_chain(), 5, LengthLaw::fixed(4), 1)) {
      CHECK(s == Sequence{0, 1, 0, 1});
    }
  }
  SUBCASE("single-state frequencies") {
    const HmmModel m({1.0}, Matrix::from_rows({{1.0}}), Matrix::from_rows({{0.25, 0.75}}));
    const auto draws = sample(m, 100000, LengthLaw::fixed(1), 99);
    double ones = 0;
    for (const auto& s : draws) ones += s[0];
    CHECK(std::abs(ones / 100000.0 - 0.75) <= 0.01);
  }
  SUBCASE("determinism and lengths") {
    std::mt19937_64 rng(4);
    const auto model = oracle::random_model(rng, 3, 5);
    const auto law = LengthLaw::geometric(0.2, 12);
    const auto a = sample(model, 200, law, 5);
    CHECK(a == sample(model, 200, law, 5));
    CHECK(a != sample(model, 200, law, 6));
    for (const auto& s : a) {
      CHECK(s.size() >= 1);
      CHECK(s.size() <= 12);
    }
    CHECK(sample(model, 0, law, 5).empty());
  }
}

TEST_CASE("model JSON") {
  SUBCASE("uniform round trip") {
    const auto m = init_uniform(2, 2);
    CHECK(deserialize_model(serialize_model(m)).model == m);
  }
  SUBCASE("vocabulary round trip") {
    const auto doc = deserialize_model(serialize_model(init_uniform(2, 3), std::vector<std::string>{"a", "b", "c"}));
    REQUIRE(doc.vocabulary);
    CHECK(*doc.vocabulary == std::vector<std::string>{"a", "b", "c"});
  }
  SUBCASE("bad row sum") {
    const std::string text =
        R"({"n_states":2,"n_symbols":2,"pi":[0.5,0.5],"trans":[[0.5,0.4],[0.5,0.5]],"emit":[[0.5,0.5],[0.5,0.5]]})";
    CHECK_THROWS_AS(deserialize_model(text), ValidationError);
  }
  SUBCASE("malformed documents") {
    CHECK_THROWS_AS(deserialize_model("{"), ValidationError);
    CHECK_THROWS_AS(deserialize_model(R"({"n_states":1})"), ValidationError);
    CHECK_THROWS_AS(deserialize_model(
                        R"({"n_states":1,"n_symbols":1,"pi":[1],"trans":[[1]],"emit":[[1]],"vocabulary":{"a":3}})"),
                    ValidationError);
  }
  SUBCASE("trained model round trip keeps likelihoods bit-exact") {
    std::mt19937_64 rng(12);
    const auto truth = oracle::random_model(rng, 12, 39);
    const auto data = sample(truth, 60, LengthLaw::fixed(15), 3);
    BaumWelchOptions opts;
    opts.max_iterations = 5;
    const auto trained = baum_welch(kmeans_init(data, 12, 39, 1), data, opts).model;
    const auto back = deserialize_model(serialize_model(trained)).model;
    CHECK(back == trained);
    CHECK(std::abs(forward(back, data[0]).log_likelihood - forward(trained, data[0]).log_likelihood) <= 1e-15);
  }
}

TEST_CASE("kmeans_init") {
  SUBCASE("separated symbol sets") {
    // Cases use either {0,1} or {2,3} exclusively, so neighbour context ties
    // 0 to 1 and 2 to 3.
    std::vector<Sequence> data;
    std::mt19937_64 rng(2);
    for (int c = 0; c < 200; ++c) {
      const int base = c % 2 == 0 ? 0 : 2;
      Sequence s;
      for (int t = 0; t < 10; ++t) s.push_back(base + static_cast<int>(rng() % 2));
      data.push_back(s);
    }
    const auto m = kmeans_init(data, 2, 4, 42);
    for (std::size_t i = 0; i < 2; ++i) {
      const double low = m.emit()(i, 0) + m.emit()(i, 1);
      CHECK(std::max(low, 1.0 - low) >= 0.99);
    }
    CHECK((m.emit()(0, 0) + m.emit()(0, 1) > 0.5) != (m.emit()(1, 0) + m.emit()(1, 1) > 0.5));
  }
  SUBCASE("single state uses smoothed global frequencies") {
    const std::vector<Sequence> data = {{0, 0, 1}, {2, 0}};
    const auto m = kmeans_init(data, 1, 3, 1);
    CHECK(m.trans()(0, 0) == 1.0);
    const double alpha = KMeansOptions{}.smoothing;
    CHECK(m.emit()(0, 0) == doctest::Approx((3 + alpha) / (5 + 3 * alpha)));
    CHECK(m.emit()(0, 2) == doctest::Approx((1 + alpha) / (5 + 3 * alpha)));
  }
  SUBCASE("no zero parameters and determinism") {
    std::mt19937_64 rng(30);
    const auto data = sample(oracle::random_model(rng, 4, 6), 50, LengthLaw::fixed(8), 1);
    for (auto feature : {KMeansFeature::kOneHot, KMeansFeature::kOneHotPosition, KMeansFeature::kContext}) {
      KMeansOptions opts;
      opts.feature = feature;
      const auto a = kmeans_init(data, 4, 6, 77, opts);
      CHECK(a == kmeans_init(data, 4, 6, 77, opts));
      for (std::size_t i = 0; i < 4; ++i) {
        for (double v : a.trans().row(i)) CHECK(v > 0.0);
        for (double v : a.emit().row(i)) CHECK(v > 0.0);
      }
    }
  }
  SUBCASE("more states than distinct points still yields a valid model") {
    const std::vector<Sequence> data = {{0, 0, 0, 0, 0}};
    const auto m = kmeans_init(data, 4, 2, 3, KMeansOptions{KMeansFeature::kOneHot});
    CHECK(m.n_states() == 4);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(kmeans_init(std::vector<Sequence>{}, 2, 2, 1), DomainError);
    CHECK_THROWS_AS(kmeans_init(std::vector<Sequence>{{0, 1}}, 3, 2, 1), DomainError);
    CHECK_THROWS_AS(kmeans_init(std::vector<Sequence>{{0, 5}}, 1, 2, 1), DomainError);
  }
}
