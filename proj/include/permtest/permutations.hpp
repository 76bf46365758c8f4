#pragma once

#include <cstddef>
#include <vector>

#include "permtest/core.hpp"

namespace permtest {

using Permutation = std::vector<std::size_t>;

struct PermutationPlan {
  enum class Mode { Sampled, Exhaustive };

  Mode mode = Mode::Sampled;
  std::vector<Permutation> permutations;

  std::size_t size() const noexcept { return permutations.size(); }
};

/// B i.i.d. uniform permutations of {0..n-1} by Fisher-Yates; permutation b
/// is drawn from rng.stream(b, "perm") alone. The identity is not excluded.
PermutationPlan sample_permutations(std::size_t n, std::size_t count, const RngPolicy& rng);

/// All n! permutations in lexicographic order. Throws TooLarge for n > 8.
PermutationPlan exhaustive_permutations(std::size_t n);

/// The plan a test with this configuration evaluates.
PermutationPlan plan_for(std::size_t n, const TestConfig& config);

/// out[i] = values[perm[i]].
Vector apply_permutation(const Vector& values, const Permutation& perm);

std::size_t factorial(std::size_t n);

}  // namespace permtest
