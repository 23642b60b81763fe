#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "wearauth/preprocess.hpp"

namespace wearauth::features {

inline constexpr std::size_t kFeatureCount = 84;
inline constexpr int kLayoutVersion = 1;

// Fixed layout of the 84-entry vector:
//   0..59   ten time-domain features per axis, axes ordered
//           x_a, y_a, z_a, x_g, y_g, z_g; per axis: mean, median, variance,
//           average absolute difference of peaks (seconds), range, mode,
//           MAD, IQR, skewness, kurtosis
//   60..65  accelerometer pairwise: cov(x,y), cov(x,z), cov(y,z),
//           corr(x,y), corr(x,z), corr(y,z)
//   66..71  gyroscope pairwise, same order
//   72..83  per axis (same axis order): entropy, spectral energy
inline constexpr std::size_t kPerAxisFeatures = 10;
inline constexpr std::size_t kAccPairwiseOffset = 60;
inline constexpr std::size_t kGyroPairwiseOffset = 66;
inline constexpr std::size_t kFreqOffset = 72;

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  int layout_version = kLayoutVersion;

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

// Peak detection parameters: a peak is a local maximum at least
// mean + height_k * std above the series mean, and accepted peaks are at
// least min_separation frames apart.
struct PeakParams {
  std::size_t min_separation = 10;
  double height_k = 1.0;
};

// Per-feature min/max bounds taken from a user's enrolled templates.
struct Normalizer {
  std::array<double, kFeatureCount> x_min{};
  std::array<double, kFeatureCount> x_max{};
};

// Indices of local maxima above the height threshold, filtered so that any
// two kept peaks are >= min_separation apart; higher peaks win conflicts,
// ties break toward the lower index. Strictly increasing result.
std::vector<std::size_t> detect_peaks(const std::vector<double>& series,
                                      const PeakParams& p);

// The ten per-axis time-domain features, in layout order. rate_hz converts
// inter-peak gaps to seconds. Throws SeriesTooShort for length < 2.
std::array<double, kPerAxisFeatures> axis_time_features(
    const std::vector<double>& series, const PeakParams& p, double rate_hz);

// [cov_xy, cov_xz, cov_yz, corr_xy, corr_xz, corr_yz] with population
// covariance; correlation is 0 when either variance is 0.
std::array<double, 6> pairwise_features(const std::vector<double>& x,
                                        const std::vector<double>& y,
                                        const std::vector<double>& z);

// Spectral entropy and energy of the full n-point DFT (n = series length,
// no padding): energy = sum_k |F_k|^2 / n, entropy over the normalized
// power spectrum with 0*log2(0) := 0. All-zero input gives (0, 0).
struct FreqFeatures {
  double entropy = 0.0;
  double energy = 0.0;
};
FreqFeatures freq_features(const std::vector<double>& series);

// Full 84-entry vector of a clean window in the documented layout.
FeatureVector extract_features(const preprocess::CleanWindow& cw,
                               const PeakParams& p);

// Elementwise min/max across templates. Throws EmptyTemplateSet.
Normalizer fit_normalizer(const std::vector<FeatureVector>& templates);

// Per feature: values are clamped into [x_min, x_max] and scaled to [0,1];
// a feature with equal bounds maps to 0.
FeatureVector normalize(const FeatureVector& fv, const Normalizer& nz);

}  // namespace wearauth::features
