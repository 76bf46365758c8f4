#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "permtest/core.hpp"
#include "permtest/models.hpp"
#include "permtest/permutations.hpp"
#include "permtest/stats.hpp"

namespace permtest {

/// 1-based order-statistic index ceil(level * B), clamped to [1, B].
std::size_t quantile_index(std::size_t count, double level);

/// Order statistic of the sample at quantile_index(size, level).
double empirical_quantile(std::span<const double> sample, double level);

/// Fits spec to (x, y) and evaluates the statistic on that fit. Model-free
/// statistics skip the fit and read the single predictor column.
double evaluate_statistic(const RegressorSpec& spec, const GofStatistic& statistic, const Matrix& x,
                          const Vector& y, RandomStream fit_stream);

/// The permutation test for "the model class fits nothing but noise":
///  1. fit on the observed pairing, r0 = statistic;
///  2. refit from scratch on every permuted pairing (x_i, y_tau(i)) with
///     unchanged hyperparameters;
///  3. reject iff r0 > q, the (1 - alpha) order statistic of step 2.
/// The result depends only on the arguments, never on `threads`.
/// A permuted MLP fit that diverges contributes -inf; an observed fit that
/// diverges throws DivergedTraining.
TestOutcome run_permutation_test(const Dataset& data, const RegressorSpec& spec, const GofStatistic& statistic,
                                 const TestConfig& config, std::size_t threads = 1);

/// Statistic for all n! permutations of the responses, lexicographic order.
/// Fit seeds follow the same per-index policy as run_permutation_test.
std::vector<double> exhaustive_reference(const Dataset& data, const RegressorSpec& spec,
                                         const GofStatistic& statistic, std::uint64_t master_seed = 0,
                                         std::size_t threads = 1);

/// reject and p_value recomputed from r0, reference and config alone.
bool outcome_is_consistent(const TestOutcome& outcome);

}  // namespace permtest
