#include "wearauth/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numeric>

#include "wearauth/errors.hpp"

namespace wearauth::features {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

double population_variance(const std::vector<double>& v, double mean) {
  double acc = 0.0;
  for (double x : v) {
    const double d = x - mean;
    acc += d * d;
  }
  return acc / static_cast<double>(v.size());
}

// Linear-interpolated quantile of a sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Mode of a continuous series: center of the most populated of 100
// equal-width bins over [min, max]; ties go to the lowest bin; a constant
// series is its own mode.
double histogram_mode(const std::vector<double>& v, double min_v, double max_v) {
  if (min_v == max_v) return min_v;
  constexpr std::size_t kBins = 100;
  const double width = (max_v - min_v) / static_cast<double>(kBins);
  std::array<std::size_t, kBins> counts{};
  for (double x : v) {
    auto bin = static_cast<std::size_t>((x - min_v) / width);
    if (bin >= kBins) bin = kBins - 1;  // max lands in the last bin
    ++counts[bin];
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < kBins; ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return min_v + (static_cast<double>(best) + 0.5) * width;
}

// |F_k|^2 for the full n-point DFT, restored from the half-spectrum of a
// real transform. Plans are cached per length; the planner is the only
// non-thread-safe part of FFTW, so it sits behind a mutex.
std::vector<double> power_spectrum(const std::vector<double>& series) {
  static std::mutex planner_mu;
  static std::map<std::size_t, fftw_plan> plans;

  const std::size_t n = series.size();
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mu);
    auto it = plans.find(n);
    if (it == plans.end()) {
      std::vector<double> in(n);
      std::vector<std::complex<double>> out(n / 2 + 1);
      plan = fftw_plan_dft_r2c_1d(
          static_cast<int>(n), in.data(),
          reinterpret_cast<fftw_complex*>(out.data()),
          FFTW_ESTIMATE | FFTW_UNALIGNED);
      plans.emplace(n, plan);
    } else {
      plan = it->second;
    }
  }

  std::vector<double> in(series);
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_execute_dft_r2c(plan, in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));

  std::vector<double> power(n);
  for (std::size_t k = 0; k < out.size(); ++k) power[k] = std::norm(out[k]);
  for (std::size_t k = out.size(); k < n; ++k) power[k] = power[n - k];
  return power;
}

}  // namespace

std::vector<std::size_t> detect_peaks(const std::vector<double>& series,
                                      const PeakParams& p) {
  const std::size_t n = series.size();
  if (n < 3) return {};

  const double mean = mean_of(series);
  const double stddev = std::sqrt(population_variance(series, mean));
  const double height = mean + p.height_k * stddev;

  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (series[i] > series[i - 1] && series[i] > series[i + 1] &&
        series[i] >= height) {
      candidates.push_back(i);
    }
  }

  // Higher peaks claim their neighborhood first; equal heights go to the
  // lower index.
  std::sort(candidates.begin(), candidates.end(),
            [&](std::size_t a, std::size_t b) {
              if (series[a] != series[b]) return series[a] > series[b];
              return a < b;
            });

  std::vector<std::size_t> kept;
  for (std::size_t idx : candidates) {
    bool blocked = false;
    for (std::size_t k : kept) {
      const std::size_t gap = idx > k ? idx - k : k - idx;
      if (gap < p.min_separation) {
        blocked = true;
        break;
      }
    }
    if (!blocked) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::array<double, kPerAxisFeatures> axis_time_features(
    const std::vector<double>& series, const PeakParams& p, double rate_hz) {
  const std::size_t n = series.size();
  if (n < 2) throw SeriesTooShort(n);

  if (std::all_of(series.begin(), series.end(),
                  [&](double v) { return v == series.front(); })) {
    // Constant series: every spread statistic is exactly zero and the
    // location statistics are the constant itself.
    const double c = series.front();
    return {c, c, 0.0, 0.0, 0.0, c, 0.0, 0.0, 0.0, 0.0};
  }

  const double mean = mean_of(series);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, mad = 0.0;
  for (double x : series) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
    mad += std::fabs(d);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  m2 *= inv_n;
  m3 *= inv_n;
  m4 *= inv_n;
  mad *= inv_n;

  std::vector<double> sorted(series);
  std::sort(sorted.begin(), sorted.end());
  const double median = quantile_sorted(sorted, 0.5);
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double min_v = sorted.front();
  const double max_v = sorted.back();

  const auto peaks = detect_peaks(series, p);
  double peak_gap_s = 0.0;
  if (peaks.size() >= 2) {
    const double span = static_cast<double>(peaks.back() - peaks.front());
    peak_gap_s = span / static_cast<double>(peaks.size() - 1) / rate_hz;
  }

  const double skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  const double kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;

  return {mean,
          median,
          m2,
          peak_gap_s,
          max_v - min_v,
          histogram_mode(series, min_v, max_v),
          mad,
          iqr,
          skewness,
          kurtosis};
}

std::array<double, 6> pairwise_features(const std::vector<double>& x,
                                        const std::vector<double>& y,
                                        const std::vector<double>& z) {
  if (x.size() != y.size()) throw LengthMismatch(x.size(), y.size());
  if (x.size() != z.size()) throw LengthMismatch(x.size(), z.size());
  if (x.size() < 2) throw SeriesTooShort(x.size());

  // A constant input has zero variance by definition; detecting it by
  // value dodges rounding residue in the mean.
  const auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(),
                       [&](double a) { return a == v.front(); });
  };
  const bool cx = constant(x), cy = constant(y), cz = constant(z);

  const double mx = mean_of(x), my = mean_of(y), mz = mean_of(z);
  const std::size_t n = x.size();
  double cxy = 0.0, cxz = 0.0, cyz = 0.0, vx = 0.0, vy = 0.0, vz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my, dz = z[i] - mz;
    cxy += dx * dy;
    cxz += dx * dz;
    cyz += dy * dz;
    vx += dx * dx;
    vy += dy * dy;
    vz += dz * dz;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  cxy = (cx || cy) ? 0.0 : cxy * inv_n;
  cxz = (cx || cz) ? 0.0 : cxz * inv_n;
  cyz = (cy || cz) ? 0.0 : cyz * inv_n;
  vx = cx ? 0.0 : vx * inv_n;
  vy = cy ? 0.0 : vy * inv_n;
  vz = cz ? 0.0 : vz * inv_n;

  const auto corr = [](double cov, double va, double vb) {
    return (va > 0.0 && vb > 0.0) ? cov / std::sqrt(va * vb) : 0.0;
  };
  return {cxy, cxz, cyz, corr(cxy, vx, vy), corr(cxz, vx, vz),
          corr(cyz, vy, vz)};
}

FreqFeatures freq_features(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 2) throw SeriesTooShort(n);

  const std::vector<double> power = power_spectrum(series);
  const double total = std::accumulate(power.begin(), power.end(), 0.0);

  FreqFeatures out;
  out.energy = total / static_cast<double>(n);
  if (total > 0.0) {
    double h = 0.0;
    for (double pk : power) {
      if (pk > 0.0) {
        const double prob = pk / total;
        h -= prob * std::log2(prob);
      }
    }
    out.entropy = std::max(h, 0.0);
  }
  return out;
}

FeatureVector extract_features(const preprocess::CleanWindow& cw,
                               const PeakParams& p) {
  const std::vector<double>* axes[6] = {&cw.x_a, &cw.y_a, &cw.z_a,
                                        &cw.x_g, &cw.y_g, &cw.z_g};
  FeatureVector fv;
  for (std::size_t a = 0; a < 6; ++a) {
    const auto t = axis_time_features(*axes[a], p, cw.sample_rate_hz);
    std::copy(t.begin(), t.end(),
              fv.values.begin() + static_cast<std::ptrdiff_t>(a * kPerAxisFeatures));
  }

  const auto acc = pairwise_features(cw.x_a, cw.y_a, cw.z_a);
  std::copy(acc.begin(), acc.end(), fv.values.begin() + kAccPairwiseOffset);
  const auto gyro = pairwise_features(cw.x_g, cw.y_g, cw.z_g);
  std::copy(gyro.begin(), gyro.end(), fv.values.begin() + kGyroPairwiseOffset);

  for (std::size_t a = 0; a < 6; ++a) {
    const FreqFeatures ff = freq_features(*axes[a]);
    fv.values[kFreqOffset + 2 * a] = ff.entropy;
    fv.values[kFreqOffset + 2 * a + 1] = ff.energy;
  }
  return fv;
}

Normalizer fit_normalizer(const std::vector<FeatureVector>& templates) {
  if (templates.empty()) throw EmptyTemplateSet();
  Normalizer nz;
  nz.x_min = templates.front().values;
  nz.x_max = templates.front().values;
  for (const FeatureVector& t : templates) {
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      nz.x_min[i] = std::min(nz.x_min[i], t.values[i]);
      nz.x_max[i] = std::max(nz.x_max[i], t.values[i]);
    }
  }
  return nz;
}

FeatureVector normalize(const FeatureVector& fv, const Normalizer& nz) {
  FeatureVector out;
  out.layout_version = fv.layout_version;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const double lo = nz.x_min[i];
    const double hi = nz.x_max[i];
    if (hi > lo) {
      const double clamped = std::clamp(fv.values[i], lo, hi);
      out.values[i] = (clamped - lo) / (hi - lo);
    } else {
      out.values[i] = 0.0;
    }
  }
  return out;
}

}  // namespace wearauth::features
