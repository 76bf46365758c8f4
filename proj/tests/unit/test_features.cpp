#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "permtest/features.hpp"

using namespace permtest;
using Catch::Approx;

namespace {

SeriesRecord series(Vector samples) { return {"obs", "ch", std::move(samples)}; }

// Independent synthesis straight from the basis definition.
Vector synthesize(const Vector& coef, int m) {
  Vector out(m);
  const int k = static_cast<int>(coef.size() - 1) / 2;
  for (int t = 0; t < m; ++t) {
    double v = coef(0);
    for (int j = 1; j <= k; ++j) {
      const double w = 2 * std::numbers::pi * j * t / m;
      v += coef(2 * j - 1) * std::cos(w) + coef(2 * j) * std::sin(w);
    }
    out(t) = v;
  }
  return out;
}

}  // namespace

TEST_CASE("Constant series projects onto the constant term only", "[features][fourier]") {
  for (int k : {1, 2, 5}) {
    const Vector f = fourier_features(series(Vector::Constant(16, 2.5)), k);
    REQUIRE(f.size() == 2 * k + 1);
    CHECK(f(0) == Approx(2.5));
    for (Eigen::Index i = 1; i < f.size(); ++i) CHECK(std::abs(f(i)) <= 1e-12);
  }
}

TEST_CASE("Pure cosine recovers its amplitude", "[features][fourier]") {
  const int m = 24;
  Vector s(m);
  for (int t = 0; t < m; ++t) s(t) = 3 * std::cos(2 * std::numbers::pi * t / m);
  const Vector f = fourier_features(series(s), 2);
  CHECK(f(1) == Approx(3.0).margin(1e-8));
  for (int i : {0, 2, 3, 4}) CHECK(std::abs(f(i)) <= 1e-8);
}

TEST_CASE("Band-limited signals round-trip", "[features][fourier][oracle]") {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> harmonics(1, 6), extra(0, 30);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = harmonics(gen);
    const int m = 2 * k + 1 + extra(gen);
    const Vector coef = oracle::random_vector(gen, 2 * k + 1);
    const Vector signal = synthesize(coef, m);
    const Vector recovered = fourier_features(series(signal), k);
    CHECK((synthesize(recovered, m) - signal).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((fourier_synthesis(recovered, m) - signal).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((recovered - coef).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("fourier_features is linear in the series", "[features][fourier][property]") {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 20 + trial;
    const Vector s1 = oracle::random_vector(gen, m), s2 = oracle::random_vector(gen, m);
    const double a = 1.7, b = -0.4;
    const Vector lhs = fourier_features(series(a * s1 + b * s2), 3);
    const Vector rhs = a * fourier_features(series(s1), 3) + b * fourier_features(series(s2), 3);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("fourier_features argument checks", "[features][fourier]") {
  auto kind = [](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoError;
  };
  CHECK(kind([] { fourier_features(series(Vector::Ones(4)), 2); }) == ErrorKind::TooFewSamples);
  CHECK(kind([] { fourier_features(series(Vector::Ones(4)), 0); }) == ErrorKind::InvalidParams);
  CHECK_NOTHROW(fourier_features(series(Vector::Ones(5)), 2));
}

TEST_CASE("va_index arithmetic", "[features][va]") {
  CHECK(va_index(100, 9) == Approx(100.0));
  CHECK(va_index(180, 3) == Approx(108.0));
  for (double v : {0.0, 55.5, 210.0}) CHECK(va_index(v, 0) == 0.0);
  for (int bad : {-1, 2, 4, 5, 7, 8, 10}) CHECK_THROWS_AS(va_index(100, bad), Error);
  CHECK_THROWS_AS(va_index(-1, 3), Error);
}

TEST_CASE("va_index is monotone in both arguments", "[features][va][property]") {
  const int points[] = {0, 1, 3, 6, 9};
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> velocity(0, 250);
  for (int trial = 0; trial < 500; ++trial) {
    double v1 = velocity(gen), v2 = velocity(gen);
    if (v1 > v2) std::swap(v1, v2);
    for (int i = 0; i < 5; ++i) {
      CHECK(va_index(v1, points[i]) <= va_index(v2, points[i]));
      if (i + 1 < 5) CHECK(va_index(v1, points[i]) <= va_index(v1, points[i + 1]));
    }
  }
}

TEST_CASE("featurize concatenates channels per observation", "[features]") {
  const int m = 12;
  std::vector<SeriesRecord> records;
  std::mt19937_64 gen(6);
  for (const char* id : {"s1", "s2", "s3"})
    for (const char* ch : {"acc_x", "gyr_z"}) records.push_back({id, ch, oracle::random_vector(gen, m)});
  std::vector<std::string> ids;
  const Matrix features = featurize(records, 2, &ids);
  CHECK(ids == std::vector<std::string>{"s1", "s2", "s3"});
  REQUIRE(features.rows() == 3);
  REQUIRE(features.cols() == 10);
  CHECK((features.row(1).head(5).transpose() - fourier_features(records[2], 2)).norm() <= 1e-14);
  CHECK((features.row(1).tail(5).transpose() - fourier_features(records[3], 2)).norm() <= 1e-14);

  records.pop_back();
  CHECK_THROWS_AS(featurize(records, 2), Error);
}
