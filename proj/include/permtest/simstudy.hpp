#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "permtest/core.hpp"
#include "permtest/models.hpp"
#include "permtest/stats.hpp"

namespace permtest {

// Synthetic laws (d = number of predictor columns):
//   null_uniform          d=2  X1, X2 ~ N(0,1), Y ~ U[0,1], all independent
//   quad_example          d=2  X1, X2 ~ N(0,1), Y = X1^2 + X2^2 + e, e ~ N(0, noise_sd)
//   log_quad              d=2  X1 ~ N(1,1), X2 ~ N(0,1), Y = log|X1| + X2^2 + e, e ~ N(0, noise_sd)
//   log_quad_mean_sweep   d=2  X1 ~ N(a,1), X2 ~ N(0, sd2), Y = log|X1| + X2^2 + e, e ~ N(0, noise_sd)
//   bivariate_normal      d=1  (X, Y) standard bivariate normal with correlation rho
//   lognormal_univariate  d=1  X ~ N(5,1), Y = log|X| + e, e ~ N(0, noise_sd)
//   null_bivariate        d=1  X, Y ~ N(0,1) independent
// The second argument of N(., .) is a standard deviation.
enum class Scenario {
  NullUniform,
  QuadExample,
  LogQuad,
  LogQuadMeanSweep,
  BivariateNormal,
  LognormalUnivariate,
  NullBivariate,
};

std::string to_string(Scenario scenario);
/// Throws UnknownScenario.
Scenario scenario_from_string(std::string_view name);

/// Unset fields take the scenario's default; setting a field the scenario
/// does not use is an InvalidParams error.
struct ScenarioParams {
  std::optional<double> a;
  std::optional<double> rho;
  std::optional<double> sd2;
  std::optional<double> noise_sd;

  friend bool operator==(const ScenarioParams&, const ScenarioParams&) = default;
};

struct ScenarioSpec {
  Scenario scenario = Scenario::NullUniform;
  std::size_t n = 100;
  ScenarioParams params;
  std::uint64_t seed = 0;
};

/// Throws InvalidParams for parameters outside the scenario's signature or
/// out of range (rho outside [0,1], non-positive sd, n < 2).
void validate_scenario(const ScenarioSpec& spec);

/// Deterministic given spec.seed.
Dataset generate(const ScenarioSpec& spec);

enum class SweepParameter { A, Rho, Sd2, NoiseSd, N };

std::string to_string(SweepParameter parameter);
SweepParameter sweep_parameter_from_string(std::string_view name);

/// Evenly spaced grid over the default range (a: 0..10, rho: 0..1,
/// n: 10..1000, sd2 and noise_sd: 0.1..1) with `points` values.
std::vector<double> default_grid(SweepParameter parameter, std::size_t points);

struct SweepDesign {
  ScenarioSpec base;  // base.seed is unused; replicate seeds derive from the test config
  SweepParameter parameter = SweepParameter::Rho;
  std::vector<double> grid;

  ScenarioSpec at(std::size_t grid_index) const;
};

/// One competitor in a sweep: either the model-based permutation test or a
/// rank-correlation independence test on predictor column `column`.
struct TestMethod {
  enum class Kind { Permutation, Rank };

  Kind kind = Kind::Permutation;
  RegressorSpec spec;
  GofStatistic statistic = GofStatistic::r_squared();
  RankMethod rank = RankMethod::Spearman;
  std::size_t column = 0;

  static TestMethod permutation(RegressorSpec spec, GofStatistic statistic);
  static TestMethod rank_test(RankMethod method, std::size_t column);

  std::string label() const;
  bool rejects(const Dataset& data, const TestConfig& config) const;
};

struct SweepResult {
  std::string label;
  std::string scenario;
  std::string parameter;
  std::vector<double> grid;
  std::vector<double> rejection_rate;
  std::size_t replications = 0;
  TestConfig config;
  std::vector<std::vector<bool>> outcomes;  // [grid index][replicate]

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// Replicate (g, r) uses data seed derive(g, r, "data") and test seed
/// derive(g, r, "test") from config.master_seed.
std::uint64_t replicate_seed(std::uint64_t master_seed, std::size_t grid_index, std::size_t replicate,
                             std::string_view purpose);

SweepResult rejection_rate_sweep(const SweepDesign& design, const TestMethod& method, const TestConfig& config,
                                 std::size_t replications, std::size_t threads = 1);

/// Every method sees the identical dataset and test seed at each
/// (grid point, replicate).
std::vector<SweepResult> compare_tests(const SweepDesign& design, const std::vector<TestMethod>& methods,
                                       const TestConfig& config, std::size_t replications, std::size_t threads = 1);

}  // namespace permtest
