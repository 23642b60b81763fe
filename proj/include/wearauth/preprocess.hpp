#pragma once

#include <string>
#include <vector>

#include "wearauth/types.hpp"

namespace wearauth::preprocess {

// Length M of the moving-average filter used for noise removal.
struct FilterConfig {
  std::size_t m = 9;
};

// A window after filtering, decomposed into the six per-axis series. All
// series share length L = sample_size - m + 1 with L >= 2.
struct CleanWindow {
  std::string user_id;
  double sample_rate_hz = 100.0;
  std::vector<double> x_a, y_a, z_a, x_g, y_g, z_g;

  std::size_t length() const { return x_a.size(); }
};

// M-point moving average, valid mode: out[i] = mean(series[i..i+m-1]),
// output length len - m + 1. Throws WindowTooShort when len < m.
std::vector<double> maf_filter(const std::vector<double>& series,
                               std::size_t m);

// Extracts the six axis columns of a window and filters each with the same
// M. Requires sample_size >= m + 1 so every series keeps length >= 2.
CleanWindow preprocess_window(const Window& w, const FilterConfig& cfg);

}  // namespace wearauth::preprocess
