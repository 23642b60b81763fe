#include "wearauth/synth.hpp"

#include <algorithm>
#include <cmath>

#include "wearauth/errors.hpp"
#include "wearauth/rng.hpp"

namespace wearauth::synth {

namespace {

// Population means the per-user parameters scatter around. Dispersion is
// log-normal so positivity is preserved and separation scales cleanly.
// The dispersions are deliberately modest relative to the sensor noise:
// short windows then blur users together and longer windows pull them
// apart, the regime the evaluation criteria target.
constexpr double kKeyRateMean = 3.2;
constexpr double kKeyRateLogSd = 0.40;
constexpr double kRateCvMean = 0.22;
constexpr double kRateCvLogSd = 0.20;
constexpr double kAmpMean = 1.2;
constexpr double kAmpLogSd = 0.40;
constexpr double kAmpStdMean = 0.25;
constexpr double kAmpStdLogSd = 0.20;
constexpr double kWidthMean = 38.0;
constexpr double kWidthLogSd = 0.36;
constexpr double kXyMean[2] = {0.45, 0.30};
constexpr double kXyLogSd = 0.50;
constexpr double kGyroMean[3] = {0.28, 0.38, 0.16};
constexpr double kGyroLogSd = 0.50;
constexpr double kNoiseAccMean = 1.10;
constexpr double kNoiseLogSd = 0.10;
constexpr double kNoiseGyroMean = 0.33;

double lognormal_jitter(Rng& rng, double mean, double log_sd, double separation) {
  // The draw happens regardless of separation so the stream layout does
  // not depend on it.
  const double z = rng.normal();
  return mean * std::exp(separation * log_sd * z);
}

double truncated_positive_normal(Rng& rng, double mean, double stddev) {
  for (int tries = 0; tries < 64; ++tries) {
    const double v = rng.normal(mean, stddev);
    if (v > 0.0) return v;
  }
  return std::max(mean, 1e-3);
}

}  // namespace

std::string user_id_for_index(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 2) digits.insert(digits.begin(), '0');
  return "u" + digits;
}

SyntheticUserSpec sample_user_spec(const PopulationSpec& pop,
                                   std::size_t user_index) {
  if (user_index >= pop.n_users) throw IndexOutOfRange(user_index, pop.n_users);

  Rng rng(derive_seed(pop.seed, 0xA11CEULL, user_index));
  const double sep = pop.separation;

  SyntheticUserSpec spec;
  spec.key_rate_hz = lognormal_jitter(rng, kKeyRateMean, kKeyRateLogSd, sep);
  spec.rate_cv = std::clamp(
      lognormal_jitter(rng, kRateCvMean, kRateCvLogSd, sep), 0.05, 0.9);
  spec.press_amp_mean = lognormal_jitter(rng, kAmpMean, kAmpLogSd, sep);
  spec.press_amp_std = lognormal_jitter(rng, kAmpStdMean, kAmpStdLogSd, sep);
  spec.peak_width_ms = lognormal_jitter(rng, kWidthMean, kWidthLogSd, sep);
  for (int i = 0; i < 2; ++i) {
    spec.xy_coupling[i] = lognormal_jitter(rng, kXyMean[i], kXyLogSd, sep);
  }
  for (int i = 0; i < 3; ++i) {
    spec.gyro_gain[i] = lognormal_jitter(rng, kGyroMean[i], kGyroLogSd, sep);
  }
  spec.noise_std_acc = lognormal_jitter(rng, kNoiseAccMean, kNoiseLogSd, sep);
  spec.noise_std_gyro = lognormal_jitter(rng, kNoiseGyroMean, kNoiseLogSd, sep);
  spec.seed_user = derive_seed(pop.seed, 0xBEEFULL, user_index);
  return spec;
}

std::vector<double> render_pulse_train(const std::vector<double>& event_times_s,
                                       const std::vector<double>& amplitudes,
                                       double sigma_s, double rate_hz,
                                       std::size_t n) {
  std::vector<double> out(n, 0.0);
  const double support = 5.0 * sigma_s;
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma_s * sigma_s);
  for (std::size_t e = 0; e < event_times_s.size(); ++e) {
    const double t_e = event_times_s[e];
    const double amp = amplitudes[e];
    const auto lo = static_cast<std::ptrdiff_t>(
        std::floor((t_e - support) * rate_hz));
    const auto hi = static_cast<std::ptrdiff_t>(
        std::ceil((t_e + support) * rate_hz));
    for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(lo, 0);
         i <= std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(n) - 1);
         ++i) {
      const double dt = static_cast<double>(i) / rate_hz - t_e;
      out[static_cast<std::size_t>(i)] += amp * std::exp(-dt * dt * inv_two_sigma2);
    }
  }
  return out;
}

Recording generate_recording(const SyntheticUserSpec& spec,
                             const std::string& user_id, double duration_s,
                             double rate_hz, std::uint64_t session_seed) {
  if (duration_s < 1.0) {
    throw BadDuration("duration " + std::to_string(duration_s) + "s < 1s");
  }
  if (rate_hz < 10.0) {
    throw BadDuration("sample rate " + std::to_string(rate_hz) + "Hz < 10Hz");
  }
  if (spec.key_rate_hz <= 0.0 || spec.press_amp_mean <= 0.0 ||
      spec.peak_width_ms <= 0.0 || spec.rate_cv <= 0.0 || spec.rate_cv >= 1.0) {
    throw Error("user spec out of range: rates, amplitudes and widths must "
                "be positive and rate_cv inside (0,1)");
  }

  Rng rng(derive_seed(spec.seed_user, session_seed, 0x5E5510ULL));
  const auto n = static_cast<std::size_t>(std::llround(duration_s * rate_hz));

  // Keystroke times: gamma renewal process with the requested mean rate
  // and coefficient of variation.
  const double cv = spec.rate_cv;
  const double shape = 1.0 / (cv * cv);
  const double scale = 1.0 / (spec.key_rate_hz * shape);
  std::vector<double> events;
  std::vector<double> amps;
  double t = rng.gamma(shape, scale);
  while (t < duration_s) {
    events.push_back(t);
    amps.push_back(
        truncated_positive_normal(rng, spec.press_amp_mean, spec.press_amp_std));
    t += rng.gamma(shape, scale);
  }

  const double sigma_s = spec.peak_width_ms / 1000.0;
  const std::vector<double> z_a = render_pulse_train(events, amps, sigma_s,
                                                     rate_hz, n);

  // Coupled axes reuse the event train with per-event time and amplitude
  // jitter. Independent jitter per axis keeps the cross-axis relationship
  // user-specific without making whole windows drift together.
  const auto jittered = [&](double gain, double jitter_sd) {
    std::vector<double> times(events.size());
    std::vector<double> scaled(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
      times[e] = events[e] + rng.normal(0.0, jitter_sd);
      scaled[e] = gain * amps[e] * std::exp(rng.normal(0.0, 0.25));
    }
    return render_pulse_train(times, scaled, sigma_s, rate_hz, n);
  };

  const double jitter_sd = sigma_s / 2.0;
  const std::vector<double> x_a = jittered(spec.xy_coupling[0], jitter_sd);
  const std::vector<double> y_a = jittered(spec.xy_coupling[1], jitter_sd);
  const std::vector<double> x_g = jittered(spec.gyro_gain[0], jitter_sd);
  const std::vector<double> y_g = jittered(spec.gyro_gain[1], jitter_sd);
  const std::vector<double> z_g = jittered(spec.gyro_gain[2], jitter_sd);

  Recording rec;
  rec.user_id = user_id;
  rec.sample_rate_hz = rate_hz;
  rec.frames.resize(n);
  const double step_ms = 1000.0 / rate_hz;
  for (std::size_t i = 0; i < n; ++i) {
    SensorFrame& f = rec.frames[i];
    f.t_a = f.t_g = static_cast<double>(i) * step_ms;
    f.x_a = x_a[i] + rng.normal(0.0, spec.noise_std_acc);
    f.y_a = y_a[i] + rng.normal(0.0, spec.noise_std_acc);
    f.z_a = z_a[i] + rng.normal(0.0, spec.noise_std_acc);
    f.x_g = x_g[i] + rng.normal(0.0, spec.noise_std_gyro);
    f.y_g = y_g[i] + rng.normal(0.0, spec.noise_std_gyro);
    f.z_g = z_g[i] + rng.normal(0.0, spec.noise_std_gyro);
  }
  return rec;
}

std::vector<PopulationEntry> generate_population(const PopulationSpec& pop,
                                                 std::size_t sessions_per_user) {
  if (sessions_per_user < 1) throw BadDuration("sessions_per_user must be >= 1");
  std::vector<PopulationEntry> out;
  out.reserve(pop.n_users * sessions_per_user);
  for (std::size_t u = 0; u < pop.n_users; ++u) {
    const SyntheticUserSpec spec = sample_user_spec(pop, u);
    const std::string uid = user_id_for_index(u);
    for (std::size_t s = 0; s < sessions_per_user; ++s) {
      PopulationEntry entry;
      entry.user_id = uid;
      entry.session = s;
      entry.session_seed = derive_seed(pop.seed, u, s, 0xD07ULL);
      entry.recording = generate_recording(spec, uid, pop.duration_s,
                                           pop.sample_rate_hz,
                                           entry.session_seed);
      out.push_back(std::move(entry));
    }
  }
  return out;
}

SyntheticUserSpec interpolate_specs(const SyntheticUserSpec& from,
                                    const SyntheticUserSpec& to, double alpha) {
  const auto lerp = [alpha](double a, double b) {
    return a + alpha * (b - a);
  };
  SyntheticUserSpec spec;
  spec.key_rate_hz = lerp(from.key_rate_hz, to.key_rate_hz);
  spec.rate_cv = lerp(from.rate_cv, to.rate_cv);
  spec.press_amp_mean = lerp(from.press_amp_mean, to.press_amp_mean);
  spec.press_amp_std = lerp(from.press_amp_std, to.press_amp_std);
  spec.peak_width_ms = lerp(from.peak_width_ms, to.peak_width_ms);
  for (int i = 0; i < 2; ++i) {
    spec.xy_coupling[i] = lerp(from.xy_coupling[i], to.xy_coupling[i]);
  }
  for (int i = 0; i < 3; ++i) {
    spec.gyro_gain[i] = lerp(from.gyro_gain[i], to.gyro_gain[i]);
  }
  spec.noise_std_acc = lerp(from.noise_std_acc, to.noise_std_acc);
  spec.noise_std_gyro = lerp(from.noise_std_gyro, to.noise_std_gyro);
  spec.seed_user = from.seed_user;
  return spec;
}

}  // namespace wearauth::synth
