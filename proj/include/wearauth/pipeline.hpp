#pragma once

#include <vector>

#include "wearauth/decision.hpp"
#include "wearauth/ingest.hpp"
#include "wearauth/preprocess.hpp"

namespace wearauth::pipeline {

// Chunk -> filter -> extract for a set of recordings; the standard path
// from raw sensor data to labeled (raw) feature samples.
std::vector<decision::Sample> extract_dataset(
    const std::vector<Recording>& recordings, std::size_t sample_size,
    std::size_t maf_m, const features::PeakParams& peaks = {});

// Same for a single window.
features::FeatureVector extract_window(const Window& w, std::size_t maf_m,
                                       const features::PeakParams& peaks = {});

}  // namespace wearauth::pipeline
