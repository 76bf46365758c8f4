#include "permtest/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace permtest {

namespace {

Matrix fourier_design(Eigen::Index length, int harmonics) {
  Matrix basis(length, 2 * harmonics + 1);
  const double period = static_cast<double>(length);
  for (Eigen::Index t = 0; t < length; ++t) {
    basis(t, 0) = 1.0;
    for (int j = 1; j <= harmonics; ++j) {
      const double angle = 2.0 * std::numbers::pi * j * static_cast<double>(t) / period;
      basis(t, 2 * j - 1) = std::cos(angle);
      basis(t, 2 * j) = std::sin(angle);
    }
  }
  return basis;
}

}  // namespace

Vector fourier_features(const SeriesRecord& series, int harmonics) {
  if (harmonics < 1) throw Error(ErrorKind::InvalidParams, "need at least one harmonic");
  const Eigen::Index m = series.samples.size();
  if (2 * harmonics + 1 > m) {
    throw Error(ErrorKind::TooFewSamples, "series " + series.obs_id + "/" + series.channel + " has " +
                                              std::to_string(m) + " samples, need " +
                                              std::to_string(2 * harmonics + 1));
  }
  if (!series.samples.allFinite()) throw Error(ErrorKind::NonFinite, "series contains NaN or infinity");
  return fourier_design(m, harmonics).colPivHouseholderQr().solve(series.samples);
}

Vector fourier_synthesis(const Vector& coefficients, Eigen::Index length) {
  const auto harmonics = static_cast<int>((coefficients.size() - 1) / 2);
  return fourier_design(length, harmonics) * coefficients;
}

double va_index(double ball_velocity_kph, int achieved_points) {
  static constexpr int kPoints[] = {0, 1, 3, 6, 9};
  if (std::find(std::begin(kPoints), std::end(kPoints), achieved_points) == std::end(kPoints)) {
    throw Error(ErrorKind::InvalidPoints, "achieved points must be one of 0, 1, 3, 6, 9; got " +
                                              std::to_string(achieved_points));
  }
  if (!(ball_velocity_kph >= 0.0) || !std::isfinite(ball_velocity_kph)) {
    throw Error(ErrorKind::InvalidParams, "ball velocity must be a finite non-negative number");
  }
  return ball_velocity_kph * ball_velocity_kph / 100.0 * (achieved_points / 9.0);
}

Matrix featurize(const std::vector<SeriesRecord>& records, int harmonics, std::vector<std::string>* obs_ids) {
  std::vector<std::string> ids;
  std::vector<std::string> channels;
  std::map<std::pair<std::string, std::string>, const SeriesRecord*> index;
  for (const auto& r : records) {
    if (std::find(ids.begin(), ids.end(), r.obs_id) == ids.end()) ids.push_back(r.obs_id);
    if (std::find(channels.begin(), channels.end(), r.channel) == channels.end()) channels.push_back(r.channel);
    if (!index.emplace(std::make_pair(r.obs_id, r.channel), &r).second) {
      throw Error(ErrorKind::InvalidParams, "duplicate series for " + r.obs_id + "/" + r.channel);
    }
  }
  if (ids.empty()) throw Error(ErrorKind::TooSmall, "no series records");

  const Eigen::Index width = 2 * harmonics + 1;
  Matrix out(static_cast<Eigen::Index>(ids.size()), width * static_cast<Eigen::Index>(channels.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t c = 0; c < channels.size(); ++c) {
      const auto it = index.find({ids[i], channels[c]});
      if (it == index.end()) {
        throw Error(ErrorKind::MissingColumn, "observation " + ids[i] + " lacks channel " + channels[c]);
      }
      out.block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c) * width, 1, width) =
          fourier_features(*it->second, harmonics).transpose();
    }
  }
  if (obs_ids) *obs_ids = std::move(ids);
  return out;
}

}  // namespace permtest
