#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "permtest/error.hpp"

namespace permtest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Paired sample (x_i, y_i), i = 1..n. Only obtainable through
/// validate_dataset, so every instance is finite with n >= 2 and d >= 1.
class Dataset {
 public:
  const Matrix& predictors() const noexcept { return predictors_; }
  const Vector& responses() const noexcept { return responses_; }
  std::size_t n() const noexcept { return static_cast<std::size_t>(responses_.size()); }
  std::size_t d() const noexcept { return static_cast<std::size_t>(predictors_.cols()); }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.predictors_ == b.predictors_ && a.responses_ == b.responses_;
  }

 private:
  Dataset(Matrix x, Vector y) : predictors_(std::move(x)), responses_(std::move(y)) {}
  friend Dataset validate_dataset(Matrix predictors, Vector responses);

  Matrix predictors_;
  Vector responses_;
};

/// Throws Error{DimensionMismatch | NonFinite | TooSmall}.
Dataset validate_dataset(Matrix predictors, Vector responses);
Dataset validate_dataset(const Dataset& data);

struct TestConfig {
  double alpha = 0.05;
  std::size_t n_permutations = 200;
  std::uint64_t master_seed = 0;
  bool exhaustive = false;

  friend bool operator==(const TestConfig&, const TestConfig&) = default;
};

inline constexpr std::size_t kMaxExhaustiveN = 8;

/// Checks 0 < alpha < 1 and B >= 1. The n <= 8 guard for exhaustive runs
/// needs the sample size and is applied by the engine.
void validate_config(const TestConfig& config);

/// Counter-based generator: output i is a bijective mix of (key, i), so a
/// stream is fully determined by its key. Meets UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform integer on [0, bound), bound > 0, via rejection (no modulo bias).
  std::uint64_t below(std::uint64_t bound) noexcept;
  double normal() noexcept;

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t hash_tag(std::string_view tag) noexcept;

/// Hands out independent streams keyed by (master_seed, index, tag).
class RngPolicy {
 public:
  explicit RngPolicy(std::uint64_t master_seed) noexcept : master_seed_(master_seed) {}

  RandomStream stream(std::uint64_t index, std::string_view tag = "perm") const noexcept;
  /// Seed for a nested policy, e.g. one replicate of a sweep.
  std::uint64_t derive(std::uint64_t index, std::string_view tag) const noexcept;

  std::uint64_t master_seed() const noexcept { return master_seed_; }

 private:
  std::uint64_t master_seed_;
};

struct TestOutcome {
  std::string statistic_name;
  std::string model_name;
  double r0 = 0.0;
  // Non-finite only at -inf, where a permuted MLP fit diverged.
  std::vector<double> reference;
  double q = 0.0;
  double p_value = 1.0;
  bool reject = false;
  std::size_t diverged = 0;
  TestConfig config;

  friend bool operator==(const TestOutcome&, const TestOutcome&) = default;
};

}  // namespace permtest
