#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "permtest/engine.hpp"
#include "permtest/simstudy.hpp"

using namespace permtest;
using Catch::Approx;

namespace {

Dataset random_linear(std::mt19937_64& gen, int n, int d, double beta) {
  const Matrix x = oracle::random_matrix(gen, n, d);
  Vector y = oracle::random_vector(gen, n);
  y += beta * x.col(0);
  return validate_dataset(x, y);
}

bool is_identity(const Permutation& p) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] != i) return false;
  return true;
}

}  // namespace

TEST_CASE("sample_permutations covers S_2 uniformly", "[engine][permutations]") {
  const auto plan = sample_permutations(2, 10000, RngPolicy(12345));
  REQUIRE(plan.size() == 10000);
  const auto identities = std::count_if(plan.permutations.begin(), plan.permutations.end(), is_identity);
  CHECK(std::abs(identities / 10000.0 - 0.5) <= 0.015);
}

TEST_CASE("sample_permutations returns bijections, deterministically", "[engine][permutations]") {
  const auto plan = sample_permutations(5, 500, RngPolicy(3));
  for (auto p : plan.permutations) {
    std::sort(p.begin(), p.end());
    CHECK(p == Permutation{0, 1, 2, 3, 4});
  }
  CHECK(sample_permutations(5, 500, RngPolicy(3)).permutations == plan.permutations);
  CHECK(sample_permutations(5, 500, RngPolicy(4)).permutations != plan.permutations);
  // Prefix stability: permutation b depends only on its own stream.
  const auto shorter = sample_permutations(5, 100, RngPolicy(3));
  CHECK(std::equal(shorter.permutations.begin(), shorter.permutations.end(), plan.permutations.begin()));
}

TEST_CASE("sample_permutations is uniform over S_4", "[engine][permutations]") {
  const auto plan = sample_permutations(4, 24000, RngPolicy(77));
  std::map<Permutation, int> counts;
  for (const auto& p : plan.permutations) counts[p]++;
  REQUIRE(counts.size() == 24);
  // Pearson chi-square with 23 degrees of freedom; 0.999 quantile is 49.7.
  double chi2 = 0;
  for (const auto& [p, c] : counts) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  CHECK(chi2 < 49.7);
}

TEST_CASE("exhaustive_permutations enumerates S_n in lexicographic order", "[engine][permutations]") {
  const auto plan = exhaustive_permutations(4);
  REQUIRE(plan.size() == 24);
  CHECK(std::is_sorted(plan.permutations.begin(), plan.permutations.end()));
  CHECK(std::adjacent_find(plan.permutations.begin(), plan.permutations.end()) == plan.permutations.end());
  CHECK(is_identity(plan.permutations.front()));
  CHECK_THROWS_AS(exhaustive_permutations(9), Error);
}

TEST_CASE("empirical_quantile follows the ceil(level * B) order statistic", "[engine][quantile]") {
  std::vector<double> ints(200);
  std::iota(ints.begin(), ints.end(), 1.0);
  CHECK(empirical_quantile(ints, 0.95) == 190.0);
  CHECK(empirical_quantile(std::vector<double>{4.2}, 0.01) == 4.2);
  CHECK(empirical_quantile(std::vector<double>{4.2}, 0.99) == 4.2);
  CHECK(quantile_index(200, 0.95) == 190);
  CHECK(quantile_index(10, 0.001) == 1);
}

TEST_CASE("empirical_quantile agrees with a full-sort oracle", "[engine][quantile][oracle]") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> level(0.001, 0.999);
  std::uniform_int_distribution<int> size(1, 400);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto v = oracle::to_std(oracle::random_vector(gen, size(gen)));
    const double l = level(gen);
    REQUIRE(empirical_quantile(v, l) == oracle::sorted_quantile(v, l));
  }
}

TEST_CASE("exhaustive_reference basics", "[engine][exhaustive]") {
  Matrix x(3, 1);
  x << 0.5, -1.0, 2.0;
  Vector y(3);
  y << 1, 2, 4;
  const auto ref = exhaustive_reference(validate_dataset(x, y), RegressorSpec::ols(), GofStatistic::r_squared());
  CHECK(ref.size() == 6);

  Matrix same = Matrix::Constant(5, 2, 1.5);
  Vector y5(5);
  y5 << 3, 1, 4, 1, 5;
  const auto flat = exhaustive_reference(validate_dataset(same, y5), RegressorSpec::ols(), GofStatistic::r_squared());
  REQUIRE(flat.size() == 120);
  for (double v : flat) CHECK(v == Approx(flat.front()).margin(1e-12));

  CHECK_THROWS_AS(exhaustive_reference(validate_dataset(Matrix::Ones(9, 1), Vector::LinSpaced(9, 0, 1)),
                                       RegressorSpec::ols(), GofStatistic::r_squared()),
                  Error);
}

TEST_CASE("Sampled reference is consistent with the exhaustive one", "[engine][exhaustive][oracle]") {
  std::mt19937_64 gen(5);
  const Dataset data = random_linear(gen, 5, 1, 0.7);
  const auto full = exhaustive_reference(data, RegressorSpec::ols(), GofStatistic::r_squared());
  const TestConfig config{0.05, 20000, 8, false};
  const auto sampled = run_permutation_test(data, RegressorSpec::ols(), GofStatistic::r_squared(), config).reference;

  const double mean_full = std::accumulate(full.begin(), full.end(), 0.0) / full.size();
  double var_full = 0;
  for (double v : full) var_full += (v - mean_full) * (v - mean_full);
  var_full /= full.size();
  const double mean_sampled = std::accumulate(sampled.begin(), sampled.end(), 0.0) / sampled.size();
  CHECK(std::abs(mean_sampled - mean_full) <= 3 * std::sqrt(var_full / sampled.size()));
}

TEST_CASE("Exhaustive and sampled p-values agree at n = 6", "[engine][exhaustive][oracle]") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Dataset data = random_linear(gen, 6, 1, 0.5 * trial);
    const auto exact = run_permutation_test(data, RegressorSpec::ols(), GofStatistic::r_squared(),
                                            TestConfig{0.05, 200, 1, true});
    const auto sampled = run_permutation_test(data, RegressorSpec::ols(), GofStatistic::r_squared(),
                                              TestConfig{0.05, 5000, 1, false});
    CHECK(exact.reference.size() == 720);
    CHECK(std::abs(exact.p_value - sampled.p_value) <= 0.02);
  }
}

TEST_CASE("Constant responses are rejected", "[engine]") {
  const Dataset data = validate_dataset(Matrix::Random(10, 2), Vector::Constant(10, 3.0));
  try {
    run_permutation_test(data, RegressorSpec::ols(), GofStatistic::r_squared(), TestConfig{});
    FAIL("expected DegenerateResponse");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateResponse);
  }
}

TEST_CASE("Exhaustive mode is limited to n <= 8", "[engine]") {
  std::mt19937_64 gen(1);
  const Dataset data = random_linear(gen, 9, 1, 0.0);
  CHECK_THROWS_AS(run_permutation_test(data, RegressorSpec::ols(), GofStatistic::r_squared(),
                                       TestConfig{0.05, 200, 0, true}),
                  Error);
}

TEST_CASE("Outcome fields are mutually consistent", "[engine][property]") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset data = random_linear(gen, 20 + trial, 2, 0.1 * (trial % 5));
    const TestConfig config{0.01 + 0.01 * (trial % 10), static_cast<std::size_t>(50 + trial), std::uint64_t(trial),
                            false};
    const auto outcome = run_permutation_test(data, RegressorSpec::ols(), GofStatistic::r_squared(), config);
    CHECK(outcome.reference.size() == config.n_permutations);
    CHECK(outcome_is_consistent(outcome));
    CHECK(outcome.q == oracle::sorted_quantile(outcome.reference, 1 - config.alpha));
    CHECK(outcome.reject == (outcome.r0 > outcome.q));
    CHECK(outcome.p_value > 0.0);
    CHECK(outcome.p_value <= 1.0);
  }
}

TEST_CASE("Permuted fits can beat the observed fit on the small quadratic example",
          "[engine][mlp][scenario]") {
  // Ten observations of Y = X1^2 + X2^2 + noise with a 30-30-30 network.
  int replicates_with_exceedance = 0;
  for (std::uint64_t r = 0; r < 10; ++r) {
    ScenarioSpec spec;
    spec.scenario = Scenario::QuadExample;
    spec.n = 10;
    spec.seed = 1000 + r;
    const auto outcome =
        run_permutation_test(generate(spec), RegressorSpec::mlp(), GofStatistic::r_squared(), TestConfig{0.05, 200, r});
    const auto above = std::count_if(outcome.reference.begin(), outcome.reference.end(),
                                     [&](double v) { return v > outcome.r0; });
    if (above >= 1) ++replicates_with_exceedance;
  }
  CHECK(replicates_with_exceedance >= 1);
}

TEST_CASE("Thread count does not change the outcome", "[engine][determinism]") {
  std::mt19937_64 gen(6);
  const Dataset data = random_linear(gen, 30, 2, 0.3);
  const TestConfig config{0.05, 64, 17, false};
  SECTION("OLS") {
    const auto one = run_permutation_test(data, RegressorSpec::ols(), GofStatistic::r_squared(), config, 1);
    const auto four = run_permutation_test(data, RegressorSpec::ols(), GofStatistic::r_squared(), config, 4);
    CHECK(one == four);
  }
  SECTION("MLP") {
    const auto spec = RegressorSpec::mlp({8, 8}, 40, 0.05);
    const auto one = run_permutation_test(data, spec, GofStatistic::r_squared(), config, 1);
    const auto three = run_permutation_test(data, spec, GofStatistic::r_squared(), config, 3);
    CHECK(one == three);
  }
}

TEST_CASE("Model-free T* statistic matches a standalone straight-line permutation test",
          "[engine][pesarin][oracle]") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset data = random_linear(gen, 40, 1, 0.05 * trial);
    const TestConfig config{0.05, 300, std::uint64_t(trial) + 100, false};
    const auto outcome = run_permutation_test(data, RegressorSpec::ols(), GofStatistic::pesarin(), config);
    CHECK(outcome.model_name == "none");

    // Straight-line version: same permutations, sum of x_i * y_tau(i), sort-based quantile.
    const auto x = oracle::to_std(data.predictors().col(0));
    const auto y = oracle::to_std(data.responses());
    double t0 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) t0 += x[i] * y[i];
    std::vector<double> ref;
    for (const auto& perm : sample_permutations(x.size(), config.n_permutations, RngPolicy(config.master_seed))
                                .permutations) {
      double t = 0;
      for (std::size_t i = 0; i < x.size(); ++i) t += x[i] * y[perm[i]];
      ref.push_back(t);
    }
    const double q = oracle::sorted_quantile(ref, 1 - config.alpha);
    CHECK(outcome.reject == (t0 > q));
    CHECK(outcome.r0 == Approx(t0).epsilon(1e-12));
  }
}

TEST_CASE("Model-free statistic requires a single predictor", "[engine][pesarin]") {
  std::mt19937_64 gen(9);
  const Dataset data = random_linear(gen, 10, 2, 0.0);
  CHECK_THROWS_AS(run_permutation_test(data, RegressorSpec::ols(), GofStatistic::pesarin(), TestConfig{}), Error);
}

TEST_CASE("Engine accepts negative R^2 from an underfit network", "[engine][mlp]") {
  std::mt19937_64 gen(10);
  const Dataset data = random_linear(gen, 25, 2, 0.0);
  const auto spec = RegressorSpec::mlp({16}, 1, 1e-9);
  const auto outcome = run_permutation_test(data, spec, GofStatistic::r_squared(), TestConfig{0.05, 30, 2});
  CHECK(outcome.r0 < 0.0);
  CHECK(outcome_is_consistent(outcome));
}

TEST_CASE("Diverged permuted fits enter the reference as -inf", "[engine][mlp]") {
  std::mt19937_64 gen(14);
  const Dataset data = random_linear(gen, 20, 2, 0.0);
  const double first = data.responses()(0);
  // Stands in for a training run that blows up on every reordered sample.
  GofStatistic fragile = GofStatistic::r_squared();
  fragile.evaluate = [first](const Vector& yhat, const Vector& y) {
    if (y(0) != first) throw Error(ErrorKind::DivergedTraining, "simulated");
    return r_squared(yhat, y);
  };
  const auto outcome = run_permutation_test(data, RegressorSpec::ols(), fragile, TestConfig{0.05, 100, 4});
  const auto kept = std::count_if(outcome.reference.begin(), outcome.reference.end(),
                                  [](double v) { return std::isfinite(v); });
  CHECK(outcome.diverged + kept == 100);
  CHECK(outcome.diverged > 80);
  for (double v : outcome.reference) CHECK((std::isfinite(v) || v == -std::numeric_limits<double>::infinity()));
  CHECK(outcome_is_consistent(outcome));
}

TEST_CASE("A diverging observed fit aborts the run", "[engine][mlp]") {
  std::mt19937_64 gen(14);
  const Dataset data = random_linear(gen, 20, 2, 0.0);
  const auto spec = RegressorSpec::mlp({30, 30, 30}, 500, 50.0);
  try {
    run_permutation_test(data, spec, GofStatistic::r_squared(), TestConfig{0.05, 10, 0});
    FAIL("expected DivergedTraining");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivergedTraining);
  }
}

TEST_CASE("OLS rejection rate under independence stays within 3 sigma of alpha",
          "[engine][calibration]") {
  const int reps = 1000;
  int rejections = 0;
  for (int r = 0; r < reps; ++r) {
    ScenarioSpec spec;
    spec.scenario = Scenario::NullUniform;
    spec.n = 100;
    spec.seed = 50000 + r;
    const auto outcome = run_permutation_test(generate(spec), RegressorSpec::ols(), GofStatistic::r_squared(),
                                              TestConfig{0.05, 200, std::uint64_t(r)});
    rejections += outcome.reject;
  }
  const double rate = rejections / double(reps);
  const double sigma = std::sqrt(0.05 * 0.95 / reps);
  CHECK(rate >= 0.05 - 3 * sigma);
  CHECK(rate <= 0.05 + 3 * sigma);
}
