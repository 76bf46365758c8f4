#pragma once

#include <string>
#include <vector>

#include "permtest/core.hpp"

namespace permtest {

/// One channel of one observation, uniformly sampled.
struct SeriesRecord {
  std::string obs_id;
  std::string channel;
  Vector samples;
};

/// Least-squares coefficients of the series on
///   1, cos(2 pi j t / T), sin(2 pi j t / T),  j = 1..k,
/// with t = 0..m-1 and the window taken as one period, T = m.
/// Layout: [c0, cos_1, sin_1, cos_2, sin_2, ...], length 2k + 1.
/// Throws TooFewSamples when 2k + 1 > m, InvalidParams when k < 1.
Vector fourier_features(const SeriesRecord& series, int harmonics);

/// Evaluates a coefficient vector from fourier_features on the m-point grid.
Vector fourier_synthesis(const Vector& coefficients, Eigen::Index length);

/// Velocity-accuracy score: (velocity^2 / 100) * (points / 9).
/// Throws InvalidPoints unless points is one of {0, 1, 3, 6, 9};
/// InvalidParams for negative or non-finite velocity.
double va_index(double ball_velocity_kph, int achieved_points);

/// Concatenates per-channel features for every observation. Observations
/// and channels keep first-appearance order; every observation must carry
/// the same channel set. Returns row i for obs_ids[i].
Matrix featurize(const std::vector<SeriesRecord>& records, int harmonics, std::vector<std::string>* obs_ids = nullptr);

}  // namespace permtest
