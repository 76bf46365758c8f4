#include "permtest/core.hpp"

#include <cmath>

namespace permtest {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::DivergedTraining: return "DivergedTraining";
    case ErrorKind::DegenerateResponse: return "DegenerateResponse";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::InvalidPoints: return "InvalidPoints";
    case ErrorKind::UnknownScenario: return "UnknownScenario";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Dataset validate_dataset(Matrix predictors, Vector responses) {
  if (predictors.rows() != responses.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "predictor rows (" + std::to_string(predictors.rows()) + ") != response length (" +
                    std::to_string(responses.size()) + ")");
  }
  if (predictors.cols() < 1) throw Error(ErrorKind::DimensionMismatch, "at least one predictor column required");
  if (responses.size() < 2) throw Error(ErrorKind::TooSmall, "need n >= 2 observations");
  if (!predictors.allFinite()) throw Error(ErrorKind::NonFinite, "predictors contain NaN or infinity");
  if (!responses.allFinite()) throw Error(ErrorKind::NonFinite, "responses contain NaN or infinity");
  return Dataset(std::move(predictors), std::move(responses));
}

Dataset validate_dataset(const Dataset& data) { return validate_dataset(data.predictors(), data.responses()); }

void validate_config(const TestConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "alpha must lie in (0, 1)");
  }
  if (config.n_permutations < 1) throw Error(ErrorKind::InvalidConfig, "need at least one permutation");
}

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RandomStream::result_type RandomStream::operator()() noexcept {
  ++counter_;
  return mix64(key_ ^ mix64(counter_));
}

double RandomStream::uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

std::uint64_t RandomStream::below(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = (*this)();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RandomStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

std::uint64_t RngPolicy::derive(std::uint64_t index, std::string_view tag) const noexcept {
  return mix64(mix64(master_seed_ ^ hash_tag(tag)) + mix64(index ^ 0x6a09e667f3bcc909ULL));
}

RandomStream RngPolicy::stream(std::uint64_t index, std::string_view tag) const noexcept {
  return RandomStream(derive(index, tag));
}

}  // namespace permtest
