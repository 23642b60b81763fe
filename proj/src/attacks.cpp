#include "wearauth/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "wearauth/errors.hpp"
#include "wearauth/pipeline.hpp"
#include "wearauth/rng.hpp"

namespace wearauth::attacks {

using decision::Sample;
using features::FeatureVector;
using features::kFeatureCount;

BaselineResult zero_effort_baseline(const std::vector<Sample>& dataset,
                                    const std::string& victim,
                                    const decision::MetricSpec& metric) {
  const decision::VictimEval ev =
      decision::evaluate_victim(dataset, victim, metric);
  return {ev.eer, ev.threshold};
}

std::vector<std::vector<std::size_t>> com_gen(std::size_t n_features,
                                              std::size_t out_number,
                                              std::size_t top_bins,
                                              std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xC09ULL));
  std::vector<std::vector<std::size_t>> rows;
  rows.reserve(out_number);

  // Resampling on collision only makes sense while distinct rows remain;
  // top_bins^n_features is compared in log space to dodge overflow.
  const double log_space =
      static_cast<double>(n_features) * std::log(static_cast<double>(top_bins));
  const bool dedupe =
      log_space > std::log(static_cast<double>(out_number) + 1.0);

  std::set<std::vector<std::size_t>>
      seen;  // only consulted when dedupe is on
  while (rows.size() < out_number) {
    std::vector<std::size_t> row(n_features);
    for (std::size_t j = 0; j < n_features; ++j) {
      row[j] = 1 + static_cast<std::size_t>(rng.uniform_index(top_bins));
    }
    if (dedupe && !seen.insert(row).second) continue;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

struct FeatureHistogram {
  double lo = 0.0;
  double hi = 0.0;
  double width = 0.0;
  std::vector<std::size_t> top_bin_indices;  // most frequent first
};

FeatureHistogram build_histogram(const std::vector<const FeatureVector*>& pool,
                                 std::size_t feature, std::size_t bin_number,
                                 std::size_t top_bins) {
  FeatureHistogram h;
  h.lo = h.hi = (*pool.front()).values[feature];
  for (const FeatureVector* fv : pool) {
    h.lo = std::min(h.lo, fv->values[feature]);
    h.hi = std::max(h.hi, fv->values[feature]);
  }
  if (h.hi == h.lo) return h;  // degenerate: forgery is the constant

  h.width = (h.hi - h.lo) / static_cast<double>(bin_number);
  std::vector<std::size_t> counts(bin_number, 0);
  for (const FeatureVector* fv : pool) {
    auto bin = static_cast<std::size_t>((fv->values[feature] - h.lo) / h.width);
    if (bin >= bin_number) bin = bin_number - 1;
    ++counts[bin];
  }

  std::vector<std::size_t> order(bin_number);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return a < b;  // ties toward the lower edge
  });
  order.resize(std::min(top_bins, order.size()));
  h.top_bin_indices = std::move(order);
  return h;
}

}  // namespace

StatisticalAttackResult statistical_attack(
    const std::vector<Sample>& dataset, const std::string& victim,
    const AttackConfig& cfg, const decision::MetricSpec& metric) {
  if (cfg.top_bins < 1 || cfg.top_bins > cfg.bin_number) {
    throw Error("top_bins must lie in [1, bin_number]");
  }

  std::vector<const FeatureVector*> pool;
  std::vector<std::size_t> victim_idx;
  std::set<std::string> pool_users;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].user_id == victim) {
      victim_idx.push_back(i);
      if (cfg.diagnostic_include_victim) pool.push_back(&dataset[i].fv);
    } else {
      pool.push_back(&dataset[i].fv);
      pool_users.insert(dataset[i].user_id);
    }
  }
  if (pool_users.size() < 2) {
    throw DegenerateLabels("statistical attack needs >= 2 non-victim users");
  }

  StatisticalAttackResult res;
  const BaselineResult base = zero_effort_baseline(dataset, victim, metric);
  res.baseline_eer = base.eer;
  res.baseline_threshold = base.threshold;

  // Per-feature histograms over the attacker pool, then one uniform draw
  // inside the chosen top bin per forged entry.
  std::vector<FeatureHistogram> hists(kFeatureCount);
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    hists[j] = build_histogram(pool, j, cfg.bin_number, cfg.top_bins);
  }

  const auto combin =
      com_gen(kFeatureCount, cfg.out_number, cfg.top_bins, cfg.seed);
  Rng rng(derive_seed(cfg.seed, 0xF0F6EULL));
  res.forged.reserve(cfg.out_number);
  for (std::size_t i = 0; i < cfg.out_number; ++i) {
    FeatureVector fv;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      const FeatureHistogram& h = hists[j];
      if (h.width == 0.0) {
        fv.values[j] = h.lo;
        continue;
      }
      const std::size_t choice = combin[i][j] - 1;  // 1-based bin choice
      const std::size_t bin =
          h.top_bin_indices[std::min(choice, h.top_bin_indices.size() - 1)];
      const double edge = h.lo + static_cast<double>(bin) * h.width;
      fv.values[j] = edge + rng.uniform() * h.width;
    }
    res.forged.push_back(fv);
  }

  // Score forged vectors as impostor attempts under the victim's bounds.
  std::vector<FeatureVector> victim_raw;
  for (std::size_t i : victim_idx) victim_raw.push_back(dataset[i].fv);
  const features::Normalizer nz = features::fit_normalizer(victim_raw);
  std::vector<FeatureVector> victim_n;
  for (const auto& fv : victim_raw) victim_n.push_back(features::normalize(fv, nz));

  std::size_t accepted = 0, attempts = 0;
  std::vector<double> forged_scores;
  for (const FeatureVector& f : res.forged) {
    const FeatureVector fn = features::normalize(f, nz);
    for (const FeatureVector& v : victim_n) {
      const double d = decision::distance(fn, v, metric);
      forged_scores.push_back(d);
      ++attempts;
      if (d < base.threshold) ++accepted;
    }
  }
  res.accept_rate =
      attempts > 0 ? static_cast<double>(accepted) / static_cast<double>(attempts)
                   : 0.0;

  // Victim EER recomputed with the forged data included, reported for the
  // forged-only impostor pool and for forged pooled with natural impostors.
  std::vector<double> genuine;
  for (std::size_t i = 0; i < victim_n.size(); ++i) {
    for (std::size_t j = i + 1; j < victim_n.size(); ++j) {
      genuine.push_back(decision::distance(victim_n[i], victim_n[j], metric));
    }
  }
  std::vector<double> natural;
  for (const Sample& s : dataset) {
    if (s.user_id == victim) continue;
    const FeatureVector imp = features::normalize(s.fv, nz);
    for (const FeatureVector& v : victim_n) {
      natural.push_back(decision::distance(imp, v, metric));
    }
  }

  res.eer_forged_only =
      decision::eer(decision::sweep_scores(genuine, forged_scores)).first;
  std::vector<double> pooled(natural);
  pooled.insert(pooled.end(), forged_scores.begin(), forged_scores.end());
  res.eer_pooled = decision::eer(decision::sweep_scores(genuine, pooled)).first;
  return res;
}

ImitationAttackResult imitation_attack(
    const std::vector<Sample>& dataset, const std::string& victim,
    const ImitationSpec& spec, std::size_t sample_size, std::size_t maf_m,
    double sample_rate_hz, const decision::MetricSpec& metric,
    std::size_t n_attempts, std::uint64_t attack_seed) {
  if (spec.alpha < 0.0 || spec.alpha > 1.0) {
    throw Error("alpha must lie in [0,1]");
  }
  if (n_attempts < 1) throw Error("n_attempts must be >= 1");

  ImitationAttackResult res;
  const BaselineResult base = zero_effort_baseline(dataset, victim, metric);
  res.baseline_eer = base.eer;
  res.baseline_threshold = base.threshold;

  // Skill transfers unevenly: pacing is observable (a video shows when
  // keys go down), the force/rotation dynamics are not, so both lag the
  // nominal fidelity and the dynamics lag hardest. alpha = 1 is an exact
  // copy of the victim's generator.
  const double a2 = spec.alpha * spec.alpha;
  const double dynamics_alpha = a2 * a2;
  synth::SyntheticUserSpec attacker = synth::interpolate_specs(
      spec.attacker_spec, spec.victim_spec, dynamics_alpha);
  const synth::SyntheticUserSpec timing = synth::interpolate_specs(
      spec.attacker_spec, spec.victim_spec, a2);
  attacker.key_rate_hz = timing.key_rate_hz;
  attacker.rate_cv = timing.rate_cv;

  // Enough raw data for n_attempts windows, with one window of slack.
  const double duration =
      std::max(1.0, static_cast<double>((n_attempts + 1) * sample_size) /
                        sample_rate_hz);
  const Recording rec = synth::generate_recording(
      attacker, "attacker", duration, sample_rate_hz,
      derive_seed(attack_seed, 0x1317ULL));
  std::vector<Window> windows = ingest::chunk(rec, sample_size);
  if (windows.size() > n_attempts) windows.resize(n_attempts);

  std::vector<FeatureVector> victim_raw;
  for (const Sample& s : dataset) {
    if (s.user_id == victim) victim_raw.push_back(s.fv);
  }
  const features::Normalizer nz = features::fit_normalizer(victim_raw);
  std::vector<FeatureVector> victim_n;
  for (const auto& fv : victim_raw) victim_n.push_back(features::normalize(fv, nz));

  std::size_t accepted = 0, attempts = 0;
  for (const Window& w : windows) {
    const FeatureVector fn =
        features::normalize(pipeline::extract_window(w, maf_m), nz);
    for (const FeatureVector& v : victim_n) {
      ++attempts;
      if (decision::distance(fn, v, metric) < base.threshold) ++accepted;
    }
  }
  res.accept_rate =
      attempts > 0 ? static_cast<double>(accepted) / static_cast<double>(attempts)
                   : 0.0;
  return res;
}

}  // namespace wearauth::attacks
