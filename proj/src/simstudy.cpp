#include "permtest/simstudy.hpp"

#include <cmath>

#include "parallel.hpp"
#include "permtest/engine.hpp"

namespace permtest {

namespace {

struct Signature {
  bool a = false, rho = false, sd2 = false, noise_sd = false;
};

Signature signature_of(Scenario s) {
  switch (s) {
    case Scenario::QuadExample:
    case Scenario::LogQuad:
    case Scenario::LognormalUnivariate: return {false, false, false, true};
    case Scenario::LogQuadMeanSweep: return {true, false, true, true};
    case Scenario::BivariateNormal: return {false, true, false, false};
    case Scenario::NullUniform:
    case Scenario::NullBivariate: return {};
  }
  return {};
}

double noise_default(Scenario s) {
  switch (s) {
    case Scenario::QuadExample: return 0.01;
    case Scenario::LogQuadMeanSweep: return 0.1;
    default: return 1.0;
  }
}

}  // namespace

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::NullUniform: return "null_uniform";
    case Scenario::QuadExample: return "quad_example";
    case Scenario::LogQuad: return "log_quad";
    case Scenario::LogQuadMeanSweep: return "log_quad_mean_sweep";
    case Scenario::BivariateNormal: return "bivariate_normal";
    case Scenario::LognormalUnivariate: return "lognormal_univariate";
    case Scenario::NullBivariate: return "null_bivariate";
  }
  return "unknown";
}

Scenario scenario_from_string(std::string_view name) {
  for (auto s : {Scenario::NullUniform, Scenario::QuadExample, Scenario::LogQuad, Scenario::LogQuadMeanSweep,
                 Scenario::BivariateNormal, Scenario::LognormalUnivariate, Scenario::NullBivariate}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorKind::UnknownScenario, "no scenario named '" + std::string(name) + "'");
}

void validate_scenario(const ScenarioSpec& spec) {
  const Signature sig = signature_of(spec.scenario);
  const auto& p = spec.params;
  const std::string name = to_string(spec.scenario);
  auto reject_extra = [&](bool allowed, const std::optional<double>& value, const char* field) {
    if (value && !allowed) throw Error(ErrorKind::InvalidParams, name + " takes no parameter '" + field + "'");
    if (value && !std::isfinite(*value)) throw Error(ErrorKind::InvalidParams, std::string(field) + " must be finite");
  };
  reject_extra(sig.a, p.a, "a");
  reject_extra(sig.rho, p.rho, "rho");
  reject_extra(sig.sd2, p.sd2, "sd2");
  reject_extra(sig.noise_sd, p.noise_sd, "noise_sd");
  if (p.rho && (*p.rho < 0.0 || *p.rho > 1.0)) throw Error(ErrorKind::InvalidParams, "rho must lie in [0, 1]");
  if (p.sd2 && !(*p.sd2 > 0.0)) throw Error(ErrorKind::InvalidParams, "sd2 must be positive");
  if (p.noise_sd && !(*p.noise_sd > 0.0)) throw Error(ErrorKind::InvalidParams, "noise_sd must be positive");
  if (spec.n < 2) throw Error(ErrorKind::InvalidParams, "n must be at least 2");
}

Dataset generate(const ScenarioSpec& spec) {
  validate_scenario(spec);
  RandomStream rng(mix64(spec.seed ^ hash_tag("scenario")));
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto& p = spec.params;
  const double noise = p.noise_sd.value_or(noise_default(spec.scenario));

  const bool univariate = spec.scenario == Scenario::BivariateNormal ||
                          spec.scenario == Scenario::LognormalUnivariate ||
                          spec.scenario == Scenario::NullBivariate;
  Matrix x(n, univariate ? 1 : 2);
  Vector y(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    switch (spec.scenario) {
      case Scenario::NullUniform:
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        y(i) = rng.uniform();
        break;
      case Scenario::QuadExample:
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        y(i) = x(i, 0) * x(i, 0) + x(i, 1) * x(i, 1) + noise * rng.normal();
        break;
      case Scenario::LogQuad:
        x(i, 0) = 1.0 + rng.normal();
        x(i, 1) = rng.normal();
        y(i) = std::log(std::abs(x(i, 0))) + x(i, 1) * x(i, 1) + noise * rng.normal();
        break;
      case Scenario::LogQuadMeanSweep:
        x(i, 0) = p.a.value_or(0.0) + rng.normal();
        x(i, 1) = p.sd2.value_or(0.1) * rng.normal();
        y(i) = std::log(std::abs(x(i, 0))) + x(i, 1) * x(i, 1) + noise * rng.normal();
        break;
      case Scenario::BivariateNormal: {
        const double rho = p.rho.value_or(0.0);
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        x(i, 0) = z1;
        y(i) = rho * z1 + std::sqrt(1.0 - rho * rho) * z2;
        break;
      }
      case Scenario::LognormalUnivariate:
        x(i, 0) = 5.0 + rng.normal();
        y(i) = std::log(std::abs(x(i, 0))) + noise * rng.normal();
        break;
      case Scenario::NullBivariate:
        x(i, 0) = rng.normal();
        y(i) = rng.normal();
        break;
    }
  }
  return validate_dataset(std::move(x), std::move(y));
}

std::string to_string(SweepParameter parameter) {
  switch (parameter) {
    case SweepParameter::A: return "a";
    case SweepParameter::Rho: return "rho";
    case SweepParameter::Sd2: return "sd2";
    case SweepParameter::NoiseSd: return "noise_sd";
    case SweepParameter::N: return "n";
  }
  return "unknown";
}

SweepParameter sweep_parameter_from_string(std::string_view name) {
  for (auto p : {SweepParameter::A, SweepParameter::Rho, SweepParameter::Sd2, SweepParameter::NoiseSd,
                 SweepParameter::N}) {
    if (to_string(p) == name) return p;
  }
  throw Error(ErrorKind::InvalidParams, "unknown sweep parameter '" + std::string(name) + "'");
}

std::vector<double> default_grid(SweepParameter parameter, std::size_t points) {
  if (points < 1) throw Error(ErrorKind::InvalidParams, "grid needs at least one point");
  double lo = 0.0, hi = 1.0;
  switch (parameter) {
    case SweepParameter::A: hi = 10.0; break;
    case SweepParameter::Rho: break;
    case SweepParameter::N: lo = 10.0; hi = 1000.0; break;
    case SweepParameter::Sd2:
    case SweepParameter::NoiseSd: lo = 0.1; break;
  }
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    if (parameter == SweepParameter::N) grid[i] = std::round(grid[i]);
  }
  return grid;
}

ScenarioSpec SweepDesign::at(std::size_t grid_index) const {
  ScenarioSpec spec = base;
  const double value = grid.at(grid_index);
  switch (parameter) {
    case SweepParameter::A: spec.params.a = value; break;
    case SweepParameter::Rho: spec.params.rho = value; break;
    case SweepParameter::Sd2: spec.params.sd2 = value; break;
    case SweepParameter::NoiseSd: spec.params.noise_sd = value; break;
    case SweepParameter::N:
      if (!(value >= 2.0) || value != std::floor(value)) {
        throw Error(ErrorKind::InvalidParams, "sample-size grid values must be integers >= 2");
      }
      spec.n = static_cast<std::size_t>(value);
      break;
  }
  return spec;
}

TestMethod TestMethod::permutation(RegressorSpec spec, GofStatistic statistic) {
  TestMethod m;
  m.kind = Kind::Permutation;
  m.spec = std::move(spec);
  m.statistic = std::move(statistic);
  return m;
}

TestMethod TestMethod::rank_test(RankMethod method, std::size_t column) {
  TestMethod m;
  m.kind = Kind::Rank;
  m.rank = method;
  m.column = column;
  return m;
}

std::string TestMethod::label() const {
  if (kind == Kind::Rank) return to_string(rank) + "(x" + std::to_string(column + 1) + ")";
  if (statistic.input == GofStatistic::Input::Predictors) return statistic.name;
  return statistic.name + "/" + spec.name();
}

bool TestMethod::rejects(const Dataset& data, const TestConfig& config) const {
  if (kind == Kind::Rank) {
    if (column >= data.d()) throw Error(ErrorKind::DimensionMismatch, "rank test column out of range");
    return rank_independence_test(data.predictors().col(static_cast<Eigen::Index>(column)), data.responses(), rank,
                                  config)
        .reject;
  }
  return run_permutation_test(data, spec, statistic, config).reject;
}

std::uint64_t replicate_seed(std::uint64_t master_seed, std::size_t grid_index, std::size_t replicate,
                             std::string_view purpose) {
  const RngPolicy policy(master_seed);
  return policy.derive(mix64(grid_index) ^ static_cast<std::uint64_t>(replicate), purpose);
}

std::vector<SweepResult> compare_tests(const SweepDesign& design, const std::vector<TestMethod>& methods,
                                       const TestConfig& config, std::size_t replications, std::size_t threads) {
  validate_config(config);
  if (replications < 1) throw Error(ErrorKind::InvalidParams, "need at least one replication");
  if (design.grid.empty()) throw Error(ErrorKind::InvalidParams, "empty sweep grid");
  if (methods.empty()) throw Error(ErrorKind::InvalidParams, "no test methods given");
  for (std::size_t g = 0; g < design.grid.size(); ++g) validate_scenario(design.at(g));

  const std::size_t points = design.grid.size();
  // Flat [method][grid][replicate] so workers write disjoint slots.
  std::vector<char> decisions(methods.size() * points * replications, 0);

  detail::parallel_for(points * replications, threads, [&](std::size_t task) {
    const std::size_t g = task / replications;
    const std::size_t r = task % replications;
    ScenarioSpec scenario = design.at(g);
    scenario.seed = replicate_seed(config.master_seed, g, r, "data");
    const Dataset data = generate(scenario);
    TestConfig local = config;
    local.master_seed = replicate_seed(config.master_seed, g, r, "test");
    for (std::size_t m = 0; m < methods.size(); ++m) {
      decisions[(m * points + g) * replications + r] = methods[m].rejects(data, local) ? 1 : 0;
    }
  });

  std::vector<SweepResult> results;
  results.reserve(methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m) {
    SweepResult res;
    res.label = methods[m].label();
    res.scenario = to_string(design.base.scenario);
    res.parameter = to_string(design.parameter);
    res.grid = design.grid;
    res.replications = replications;
    res.config = config;
    res.outcomes.assign(points, std::vector<bool>(replications));
    res.rejection_rate.resize(points);
    for (std::size_t g = 0; g < points; ++g) {
      std::size_t hits = 0;
      for (std::size_t r = 0; r < replications; ++r) {
        const bool rejected = decisions[(m * points + g) * replications + r] != 0;
        res.outcomes[g][r] = rejected;
        hits += rejected;
      }
      res.rejection_rate[g] = static_cast<double>(hits) / static_cast<double>(replications);
    }
    results.push_back(std::move(res));
  }
  return results;
}

SweepResult rejection_rate_sweep(const SweepDesign& design, const TestMethod& method, const TestConfig& config,
                                 std::size_t replications, std::size_t threads) {
  return compare_tests(design, {method}, config, replications, threads).front();
}

}  // namespace permtest
