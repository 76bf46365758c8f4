#include "permtest/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "permtest/permutations.hpp"

namespace permtest {

namespace {

void require_same_length(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "length " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}

void require_rank_input(const Vector& x, const Vector& y) {
  require_same_length(x, y);
  if (x.size() < 3) throw Error(ErrorKind::TooSmall, "rank correlation needs n >= 3");
  if (x.minCoeff() == x.maxCoeff() || y.minCoeff() == y.maxCoeff()) {
    throw Error(ErrorKind::DegenerateInput, "rank correlation undefined for a constant vector");
  }
}

bool exactly_representable(__int128 v) {
  constexpr __int128 limit = __int128{1} << 53;
  return v < limit && v > -limit;
}

// Twice the mid-rank, which is always an integer.
std::vector<long long> doubled_ranks(const Vector& values) {
  const auto n = static_cast<std::size_t>(values.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values(static_cast<Eigen::Index>(a)) < values(static_cast<Eigen::Index>(b));
  });
  std::vector<long long> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values(static_cast<Eigen::Index>(order[j + 1])) == values(static_cast<Eigen::Index>(order[i]))) ++j;
    // positions i..j (0-based) share rank ((i+1)+(j+1))/2
    const auto doubled = static_cast<long long>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = doubled;
    i = j + 1;
  }
  return ranks;
}

long long tied_pairs(const std::vector<double>& sorted) {
  long long total = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const auto t = static_cast<long long>(j - i + 1);
    total += t * (t - 1) / 2;
    i = j + 1;
  }
  return total;
}

// Sorts v by value and returns the number of strict inversions.
long long merge_count(std::vector<double>& v, std::vector<double>& buffer, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long swaps = merge_count(v, buffer, lo, mid) + merge_count(v, buffer, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<long long>(mid - i);
      buffer[k++] = v[j++];
    } else {
      buffer[k++] = v[i++];
    }
  }
  while (i < mid) buffer[k++] = v[i++];
  while (j < hi) buffer[k++] = v[j++];
  std::copy(buffer.begin() + static_cast<std::ptrdiff_t>(lo), buffer.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

double r_squared(const Vector& predictions, const Vector& responses) {
  require_same_length(predictions, responses);
  if (responses.size() < 2) throw Error(ErrorKind::TooSmall, "R^2 needs n >= 2");
  const double mean = responses.mean();
  const double sst = (responses.array() - mean).square().sum();
  if (!(sst > 0.0)) throw Error(ErrorKind::DegenerateResponse, "responses are constant (SST = 0)");
  const double sse = (responses - predictions).squaredNorm();
  return 1.0 - sse / sst;
}

double pesarin_statistic(const Vector& x, const Vector& y) {
  require_same_length(x, y);
  return x.dot(y);
}

Vector mid_ranks(const Vector& values) {
  const auto doubled = doubled_ranks(values);
  Vector out(values.size());
  for (std::size_t i = 0; i < doubled.size(); ++i) out(static_cast<Eigen::Index>(i)) = 0.5 * static_cast<double>(doubled[i]);
  return out;
}

double spearman_rho(const Vector& x, const Vector& y) {
  require_rank_input(x, y);
  // Exact integer moments of the doubled ranks, so equal correlations
  // compare equal bit for bit.
  const auto rx = doubled_ranks(x);
  const auto ry = doubled_ranks(y);
  const auto n = static_cast<__int128>(rx.size());
  __int128 sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sx += rx[i];
    sy += ry[i];
    sxx += static_cast<__int128>(rx[i]) * rx[i];
    syy += static_cast<__int128>(ry[i]) * ry[i];
    sxy += static_cast<__int128>(rx[i]) * ry[i];
  }
  const __int128 cov = n * sxy - sx * sy;
  const __int128 vx = n * sxx - sx * sx;
  const __int128 vy = n * syy - sy * sy;
  if (vx == vy && exactly_representable(cov) && exactly_representable(vx)) {
    // Without ties the variances agree and a single rounding gives the
    // correctly rounded rational value.
    return static_cast<double>(cov) / static_cast<double>(vx);
  }
  const auto lcov = static_cast<long double>(cov);
  const double rho = static_cast<double>(lcov / std::sqrt(static_cast<long double>(vx) * static_cast<long double>(vy)));
  return std::clamp(rho, -1.0, 1.0);
}

double kendall_tau(const Vector& x, const Vector& y) {
  require_rank_input(x, y);
  // Knight's O(n log n) algorithm.
  const auto n = static_cast<std::size_t>(x.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
    if (x(ia) != x(ib)) return x(ia) < x(ib);
    return y(ia) < y(ib);
  });

  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x(static_cast<Eigen::Index>(order[i]));
    ys[i] = y(static_cast<Eigen::Index>(order[i]));
  }

  const long long n0 = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
  const long long n1 = tied_pairs(xs);
  long long joint = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && xs[j + 1] == xs[i] && ys[j + 1] == ys[i]) ++j;
      const auto t = static_cast<long long>(j - i + 1);
      joint += t * (t - 1) / 2;
      i = j + 1;
    }
  }

  std::vector<double> buffer(n);
  const long long discordant = merge_count(ys, buffer, 0, n);
  const long long n2 = tied_pairs(ys);
  const long long concordant = n0 - n1 - n2 + joint - discordant;

  if (n1 == n2 && exactly_representable(n0 - n1)) {
    return static_cast<double>(concordant - discordant) / static_cast<double>(n0 - n1);
  }
  const long double denom =
      std::sqrt(static_cast<long double>(n0 - n1) * static_cast<long double>(n0 - n2));
  const double tau = static_cast<double>(static_cast<long double>(concordant - discordant) / denom);
  return std::clamp(tau, -1.0, 1.0);
}

std::string to_string(RankMethod method) { return method == RankMethod::Spearman ? "spearman" : "kendall"; }

RankTestResult rank_independence_test(const Vector& x, const Vector& y, RankMethod method, const TestConfig& config) {
  const auto statistic = [method](const Vector& a, const Vector& b) {
    return method == RankMethod::Spearman ? spearman_rho(a, b) : kendall_tau(a, b);
  };

  RankTestResult result;
  result.method = method;
  result.statistic = statistic(x, y);

  const PermutationPlan plan = plan_for(static_cast<std::size_t>(x.size()), config);
  const double observed = std::abs(result.statistic);
  std::size_t at_least = 0;
  for (const auto& perm : plan.permutations) {
    if (std::abs(statistic(x, apply_permutation(y, perm))) >= observed) ++at_least;
  }
  result.p_value = static_cast<double>(1 + at_least) / static_cast<double>(plan.size() + 1);
  result.reject = result.p_value <= config.alpha;
  return result;
}

GofStatistic GofStatistic::r_squared() {
  return {"r2", Input::Predictions, [](const Vector& yhat, const Vector& y) { return permtest::r_squared(yhat, y); }};
}

GofStatistic GofStatistic::pesarin() {
  return {"tstar", Input::Predictors, [](const Vector& x, const Vector& y) { return pesarin_statistic(x, y); }};
}

GofStatistic GofStatistic::absolute_risk() {
  return {"abs-risk", Input::Predictions, [](const Vector& yhat, const Vector& y) {
            require_same_length(yhat, y);
            return -(y - yhat).cwiseAbs().mean();
          }};
}

GofStatistic GofStatistic::huber_risk(double delta) {
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidConfig, "Huber threshold must be positive");
  return {"huber-risk", Input::Predictions, [delta](const Vector& yhat, const Vector& y) {
            require_same_length(yhat, y);
            const auto r = (y - yhat).cwiseAbs().array();
            const auto loss = (r <= delta).select(0.5 * r.square(), delta * (r - 0.5 * delta));
            return -loss.mean();
          }};
}

}  // namespace permtest
