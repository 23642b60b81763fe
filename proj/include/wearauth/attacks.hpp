#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wearauth/decision.hpp"
#include "wearauth/synth.hpp"

namespace wearauth::attacks {

// Forgery parameters: out_number forged vectors are assembled by drawing
// each feature uniformly inside one of the top_bins most frequent
// histogram bins (bin_number equal-width bins over the attacker pool).
struct AttackConfig {
  std::size_t out_number = 100;
  std::size_t bin_number = 50;
  std::size_t top_bins = 5;
  std::uint64_t seed = 0;
  // Diagnostic mode only: lets the histogram pool include the victim's
  // own samples. Never the default; results are not comparable to the
  // standard attack.
  bool diagnostic_include_victim = false;
};

// Imitation model: the attacker's generator parameters are interpolated
// toward the victim's with weight alpha (1 = perfect imitation).
struct ImitationSpec {
  synth::SyntheticUserSpec victim_spec;
  synth::SyntheticUserSpec attacker_spec;
  double alpha = 0.0;
};

struct BaselineResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Zero-effort baseline: the victim's EER and operating threshold under the
// standard per-victim evaluation protocol, with every other user's sample
// as an impostor attempt.
BaselineResult zero_effort_baseline(const std::vector<decision::Sample>& dataset,
                                    const std::string& victim,
                                    const decision::MetricSpec& metric);

// out_number x n_features matrix of 1-based bin choices in [1, top_bins],
// uniform per entry, deterministic per seed; duplicate rows are resampled
// while distinct rows remain possible.
std::vector<std::vector<std::size_t>> com_gen(std::size_t n_features,
                                              std::size_t out_number,
                                              std::size_t top_bins,
                                              std::uint64_t seed);

struct StatisticalAttackResult {
  double baseline_eer = 0.0;
  double baseline_threshold = 0.0;
  double accept_rate = 0.0;        // forged attempts accepted at threshold
  double eer_forged_only = 0.0;    // victim EER with forged impostors only
  double eer_pooled = 0.0;         // victim EER with forged + natural impostors
  std::vector<features::FeatureVector> forged;  // raw feature space
};

// Histogram-based forgery against one victim: histograms are built from
// every non-victim sample (raw feature space), forged vectors drawn from
// the most frequent bins, then scored as impostor attempts under the
// victim's normalization bounds. A feature whose pool range is zero forges
// the constant value.
StatisticalAttackResult statistical_attack(
    const std::vector<decision::Sample>& dataset, const std::string& victim,
    const AttackConfig& cfg, const decision::MetricSpec& metric);

struct ImitationAttackResult {
  double baseline_eer = 0.0;
  double baseline_threshold = 0.0;
  double accept_rate = 0.0;
};

// Generates n_attempts windows from the interpolated attacker spec and
// scores each (attacker window, victim sample) pair as an impostor attempt
// at the victim's baseline-EER threshold. The dataset supplies the victim's
// enrolled samples and the zero-effort baseline population.
ImitationAttackResult imitation_attack(
    const std::vector<decision::Sample>& dataset, const std::string& victim,
    const ImitationSpec& spec, std::size_t sample_size, std::size_t maf_m,
    double sample_rate_hz, const decision::MetricSpec& metric,
    std::size_t n_attempts, std::uint64_t attack_seed);

}  // namespace wearauth::attacks
