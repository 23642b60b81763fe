#include "wearauth/pipeline.hpp"

namespace wearauth::pipeline {

features::FeatureVector extract_window(const Window& w, std::size_t maf_m,
                                       const features::PeakParams& peaks) {
  const preprocess::CleanWindow cw =
      preprocess::preprocess_window(w, preprocess::FilterConfig{maf_m});
  return features::extract_features(cw, peaks);
}

std::vector<decision::Sample> extract_dataset(
    const std::vector<Recording>& recordings, std::size_t sample_size,
    std::size_t maf_m, const features::PeakParams& peaks) {
  std::vector<decision::Sample> out;
  for (const Recording& rec : recordings) {
    for (const Window& w : ingest::chunk(rec, sample_size)) {
      decision::Sample s;
      s.user_id = w.user_id;
      s.t_start = w.start_ts;
      s.t_end = w.end_ts;
      s.fv = extract_window(w, maf_m, peaks);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace wearauth::pipeline
