#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wearauth {

// One fused reading of both motion sensors. Timestamps are milliseconds and
// non-decreasing within a recording; axis values are m/s^2 (accelerometer)
// and rad/s (gyroscope). All eight fields must be finite.
struct SensorFrame {
  double t_a = 0.0;
  double x_a = 0.0;
  double y_a = 0.0;
  double z_a = 0.0;
  double t_g = 0.0;
  double x_g = 0.0;
  double y_g = 0.0;
  double z_g = 0.0;

  bool operator==(const SensorFrame&) const = default;
};

// A full sensor session for one user at a constant sampling rate.
struct Recording {
  std::string user_id;
  double sample_rate_hz = 100.0;
  std::vector<SensorFrame> frames;

  double duration_seconds() const {
    return frames.empty() ? 0.0
                          : static_cast<double>(frames.size()) / sample_rate_hz;
  }
};

// A fixed-length chunk of a recording; the unit on which one authentication
// decision is made. frames.size() == sample_size always holds.
struct Window {
  std::string user_id;
  double start_ts = 0.0;
  double end_ts = 0.0;
  std::size_t sample_size = 0;
  double sample_rate_hz = 100.0;
  std::vector<SensorFrame> frames;
};

}  // namespace wearauth
