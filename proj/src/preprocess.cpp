#include "wearauth/preprocess.hpp"

#include "wearauth/errors.hpp"

namespace wearauth::preprocess {

std::vector<double> maf_filter(const std::vector<double>& series,
                               std::size_t m) {
  if (m == 0) throw WindowTooShort(series.size(), m);
  if (series.size() < m) throw WindowTooShort(series.size(), m);
  const std::size_t out_len = series.size() - m + 1;
  std::vector<double> out(out_len);
  const double inv_m = 1.0 / static_cast<double>(m);
  // Direct per-window sums; a running sum would drift over long series.
  for (std::size_t i = 0; i < out_len; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += series[i + j];
    out[i] = acc * inv_m;
  }
  return out;
}

CleanWindow preprocess_window(const Window& w, const FilterConfig& cfg) {
  // L = sample_size - m + 1 must stay >= 2.
  if (w.frames.size() < cfg.m + 1) throw WindowTooShort(w.frames.size(), cfg.m);

  const std::size_t n = w.frames.size();
  std::vector<double> col(n);
  CleanWindow cw;
  cw.user_id = w.user_id;
  cw.sample_rate_hz = w.sample_rate_hz;

  const auto filter_axis = [&](double SensorFrame::*field) {
    for (std::size_t i = 0; i < n; ++i) col[i] = w.frames[i].*field;
    return maf_filter(col, cfg.m);
  };

  cw.x_a = filter_axis(&SensorFrame::x_a);
  cw.y_a = filter_axis(&SensorFrame::y_a);
  cw.z_a = filter_axis(&SensorFrame::z_a);
  cw.x_g = filter_axis(&SensorFrame::x_g);
  cw.y_g = filter_axis(&SensorFrame::y_g);
  cw.z_g = filter_axis(&SensorFrame::z_g);
  return cw;
}

}  // namespace wearauth::preprocess
