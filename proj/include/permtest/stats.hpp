#pragma once

#include <functional>
#include <string>

#include "permtest/core.hpp"

namespace permtest {

/// Goodness-of-fit functional. Larger values mean a better fit; the engine
/// rejects when the observed value is above the reference quantile.
struct GofStatistic {
  enum class Input {
    Predictions,  // evaluate(yhat, y): needs a fitted model
    Predictors,   // evaluate(x, y): model-free, single predictor column
  };

  std::string name;
  Input input = Input::Predictions;
  std::function<double(const Vector&, const Vector&)> evaluate;

  static GofStatistic r_squared();
  /// Sum of x_i * y_i over a single predictor.
  static GofStatistic pesarin();
  /// Negated mean absolute error of the fit.
  static GofStatistic absolute_risk();
  /// Negated mean Huber loss with threshold delta.
  static GofStatistic huber_risk(double delta = 1.0);
};

/// 1 - SSE/SST. Throws DegenerateResponse when SST == 0 and
/// DimensionMismatch on unequal lengths.
double r_squared(const Vector& predictions, const Vector& responses);

double pesarin_statistic(const Vector& x, const Vector& y);

/// Mid-ranks (1-based, ties averaged).
Vector mid_ranks(const Vector& values);

/// Pearson correlation of mid-ranks. Throws DegenerateInput if either
/// argument is constant, TooSmall if n < 3.
double spearman_rho(const Vector& x, const Vector& y);

/// Kendall tau-b with the usual tie corrections.
double kendall_tau(const Vector& x, const Vector& y);

enum class RankMethod { Spearman, Kendall };

std::string to_string(RankMethod method);

struct RankTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  RankMethod method = RankMethod::Spearman;
  bool reject = false;
};

/// Two-sided permutation test of independence ordered by |statistic|,
/// p = (1 + #{|ref| >= |obs|}) / (B + 1), reject when p <= alpha.
/// With config.exhaustive all n! orderings of y are enumerated (n <= 8).
RankTestResult rank_independence_test(const Vector& x, const Vector& y, RankMethod method, const TestConfig& config);

}  // namespace permtest
