#include "permtest/permutations.hpp"

#include <algorithm>
#include <numeric>

namespace permtest {

std::size_t factorial(std::size_t n) {
  std::size_t out = 1;
  for (std::size_t k = 2; k <= n; ++k) out *= k;
  return out;
}

PermutationPlan sample_permutations(std::size_t n, std::size_t count, const RngPolicy& rng) {
  if (n < 2) throw Error(ErrorKind::TooSmall, "need n >= 2 to permute");
  if (count < 1) throw Error(ErrorKind::InvalidConfig, "need at least one permutation");

  PermutationPlan plan;
  plan.mode = PermutationPlan::Mode::Sampled;
  plan.permutations.resize(count);
  for (std::size_t b = 0; b < count; ++b) {
    auto stream = rng.stream(b, "perm");
    Permutation& perm = plan.permutations[b];
    perm.resize(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(stream.below(i + 1));
      std::swap(perm[i], perm[j]);
    }
  }
  return plan;
}

PermutationPlan exhaustive_permutations(std::size_t n) {
  if (n > kMaxExhaustiveN) {
    throw Error(ErrorKind::TooLarge, "exhaustive enumeration limited to n <= " + std::to_string(kMaxExhaustiveN));
  }
  if (n < 2) throw Error(ErrorKind::TooSmall, "need n >= 2 to permute");
  PermutationPlan plan;
  plan.mode = PermutationPlan::Mode::Exhaustive;
  plan.permutations.reserve(factorial(n));
  Permutation perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  do {
    plan.permutations.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return plan;
}

PermutationPlan plan_for(std::size_t n, const TestConfig& config) {
  validate_config(config);
  if (config.exhaustive) return exhaustive_permutations(n);
  return sample_permutations(n, config.n_permutations, RngPolicy(config.master_seed));
}

Vector apply_permutation(const Vector& values, const Permutation& perm) {
  Vector out(values.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out(static_cast<Eigen::Index>(i)) = values(static_cast<Eigen::Index>(perm[i]));
  return out;
}

}  // namespace permtest
