#include "permtest/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parallel.hpp"

namespace permtest {

std::size_t quantile_index(std::size_t count, double level) {
  if (count == 0) throw Error(ErrorKind::TooSmall, "quantile of an empty sample");
  // The slack keeps products such as 0.95 * 200 from rounding up past an
  // integer they equal in exact arithmetic.
  const double raw = std::ceil(level * static_cast<double>(count) - 1e-9);
  const double clamped = std::clamp(raw, 1.0, static_cast<double>(count));
  return static_cast<std::size_t>(clamped);
}

double empirical_quantile(std::span<const double> sample, double level) {
  const std::size_t k = quantile_index(sample.size(), level);
  std::vector<double> copy(sample.begin(), sample.end());
  std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(k - 1), copy.end());
  return copy[k - 1];
}

double evaluate_statistic(const RegressorSpec& spec, const GofStatistic& statistic, const Matrix& x,
                          const Vector& y, RandomStream fit_stream) {
  if (statistic.input == GofStatistic::Input::Predictors) {
    if (x.cols() != 1) {
      throw Error(ErrorKind::DimensionMismatch, statistic.name + " needs exactly one predictor column");
    }
    return statistic.evaluate(x.col(0), y);
  }
  const FittedModel model = fit(spec, x, y, fit_stream);
  return statistic.evaluate(predict(model, x), y);
}

namespace {

void check_inputs(const Dataset& data, const RegressorSpec& spec, const GofStatistic& statistic) {
  spec.validate();
  if (!statistic.evaluate) throw Error(ErrorKind::InvalidConfig, "statistic has no evaluator");
  const Vector& y = data.responses();
  if (y.minCoeff() == y.maxCoeff()) throw Error(ErrorKind::DegenerateResponse, "responses are constant");
  if (statistic.input == GofStatistic::Input::Predictors && data.d() != 1) {
    throw Error(ErrorKind::DimensionMismatch, statistic.name + " needs exactly one predictor column");
  }
}

std::vector<double> reference_for(const Dataset& data, const RegressorSpec& spec, const GofStatistic& statistic,
                                  const PermutationPlan& plan, const RngPolicy& rng, std::size_t threads) {
  std::vector<double> reference(plan.size());
  detail::parallel_for(plan.size(), threads, [&](std::size_t b) {
    const Vector permuted = apply_permutation(data.responses(), plan.permutations[b]);
    try {
      reference[b] = evaluate_statistic(spec, statistic, data.predictors(), permuted, rng.stream(b, "fit"));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DivergedTraining) throw;
      reference[b] = -std::numeric_limits<double>::infinity();
    }
  });
  return reference;
}

}  // namespace

TestOutcome run_permutation_test(const Dataset& data, const RegressorSpec& spec, const GofStatistic& statistic,
                                 const TestConfig& config, std::size_t threads) {
  validate_config(config);
  check_inputs(data, spec, statistic);
  const PermutationPlan plan = plan_for(data.n(), config);
  const RngPolicy rng(config.master_seed);

  TestOutcome outcome;
  outcome.statistic_name = statistic.name;
  outcome.model_name = statistic.input == GofStatistic::Input::Predictors ? "none" : spec.name();
  outcome.config = config;
  outcome.r0 = evaluate_statistic(spec, statistic, data.predictors(), data.responses(), rng.stream(0, "observed-fit"));
  outcome.reference = reference_for(data, spec, statistic, plan, rng, threads);
  outcome.diverged = static_cast<std::size_t>(
      std::count_if(outcome.reference.begin(), outcome.reference.end(), [](double v) { return std::isinf(v); }));

  outcome.q = empirical_quantile(outcome.reference, 1.0 - config.alpha);
  outcome.reject = outcome.r0 > outcome.q;
  const auto at_least = std::count_if(outcome.reference.begin(), outcome.reference.end(),
                                      [&](double v) { return v >= outcome.r0; });
  outcome.p_value = static_cast<double>(1 + at_least) / static_cast<double>(outcome.reference.size() + 1);
  return outcome;
}

std::vector<double> exhaustive_reference(const Dataset& data, const RegressorSpec& spec,
                                         const GofStatistic& statistic, std::uint64_t master_seed,
                                         std::size_t threads) {
  if (data.n() > kMaxExhaustiveN) {
    throw Error(ErrorKind::TooLarge, "exhaustive enumeration limited to n <= " + std::to_string(kMaxExhaustiveN));
  }
  check_inputs(data, spec, statistic);
  return reference_for(data, spec, statistic, exhaustive_permutations(data.n()), RngPolicy(master_seed), threads);
}

bool outcome_is_consistent(const TestOutcome& outcome) {
  if (outcome.reference.empty()) return false;
  const double q = empirical_quantile(outcome.reference, 1.0 - outcome.config.alpha);
  const auto at_least = std::count_if(outcome.reference.begin(), outcome.reference.end(),
                                      [&](double v) { return v >= outcome.r0; });
  const double p = static_cast<double>(1 + at_least) / static_cast<double>(outcome.reference.size() + 1);
  return q == outcome.q && p == outcome.p_value && outcome.reject == (outcome.r0 > q);
}

}  // namespace permtest
