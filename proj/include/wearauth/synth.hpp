#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wearauth/types.hpp"

namespace wearauth::synth {

// Generator parameters for one simulated typist. Keystroke times follow a
// gamma renewal process; each keystroke adds a Gaussian-shaped pulse to the
// vertical acceleration, with scaled and jittered copies on the other axes.
struct SyntheticUserSpec {
  double key_rate_hz = 3.2;       // mean keystrokes per second
  double rate_cv = 0.35;          // CV of inter-key intervals, in (0,1)
  double press_amp_mean = 1.2;    // z_a pulse amplitude, m/s^2
  double press_amp_std = 0.25;
  double peak_width_ms = 38.0;    // Gaussian sigma of a pulse
  std::array<double, 2> xy_coupling{0.45, 0.30};
  std::array<double, 3> gyro_gain{0.28, 0.38, 0.16};
  double noise_std_acc = 0.08;
  double noise_std_gyro = 0.025;
  std::uint64_t seed_user = 0;
};

struct PopulationSpec {
  std::size_t n_users = 30;
  double separation = 1.0;   // scales between-user parameter dispersion
  double duration_s = 240.0;
  double sample_rate_hz = 100.0;
  std::uint64_t seed = 42;
};

struct PopulationEntry {
  std::string user_id;
  std::size_t session = 0;
  std::uint64_t session_seed = 0;
  Recording recording;
};

// User id assigned to index i: "u00", "u01", ...
std::string user_id_for_index(std::size_t index);

// Deterministic per (pop.seed, user_index); separation 0 collapses every
// user onto the population means. Throws IndexOutOfRange.
SyntheticUserSpec sample_user_spec(const PopulationSpec& pop,
                                   std::size_t user_index);

// Renders a pulse train: sum of Gaussian pulses centered at event_times_s
// with the given amplitudes, sampled at rate_hz for n frames.
std::vector<double> render_pulse_train(const std::vector<double>& event_times_s,
                                       const std::vector<double>& amplitudes,
                                       double sigma_s, double rate_hz,
                                       std::size_t n);

// One typing session from a user spec. Deterministic per
// (spec, duration, rate, session_seed). Throws BadDuration.
Recording generate_recording(const SyntheticUserSpec& spec,
                             const std::string& user_id, double duration_s,
                             double rate_hz, std::uint64_t session_seed);

// n_users x sessions_per_user recordings with derived per-session seeds.
std::vector<PopulationEntry> generate_population(const PopulationSpec& pop,
                                                 std::size_t sessions_per_user);

// Elementwise interpolation between two specs with weight alpha on `to`
// (alpha = 1 reproduces `to` exactly, except for the seed which stays with
// `from`).
SyntheticUserSpec interpolate_specs(const SyntheticUserSpec& from,
                                    const SyntheticUserSpec& to, double alpha);

}  // namespace wearauth::synth
