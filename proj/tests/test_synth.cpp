#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "testutil.hpp"
#include "wearauth/decision.hpp"
#include "wearauth/errors.hpp"
#include "wearauth/features.hpp"
#include "wearauth/ingest.hpp"
#include "wearauth/pipeline.hpp"
#include "wearauth/synth.hpp"

using namespace wearauth;
using namespace wearauth::synth;

TEST_CASE("zero separation collapses all users onto the same parameters") {
  PopulationSpec pop;
  pop.n_users = 8;
  pop.separation = 0.0;
  const auto first = sample_user_spec(pop, 0);
  for (std::size_t u = 1; u < pop.n_users; ++u) {
    const auto spec = sample_user_spec(pop, u);
    CHECK(spec.key_rate_hz == first.key_rate_hz);
    CHECK(spec.press_amp_mean == first.press_amp_mean);
    CHECK(spec.peak_width_ms == first.peak_width_ms);
    CHECK(spec.xy_coupling == first.xy_coupling);
    CHECK(spec.gyro_gain == first.gyro_gain);
    CHECK(spec.seed_user != first.seed_user);  // seeds still differ
  }
}

TEST_CASE("user specs are deterministic and pairwise distinct") {
  PopulationSpec pop;
  pop.n_users = 30;
  std::vector<SyntheticUserSpec> specs;
  for (std::size_t u = 0; u < pop.n_users; ++u) {
    specs.push_back(sample_user_spec(pop, u));
    const auto again = sample_user_spec(pop, u);
    CHECK(again.key_rate_hz == specs.back().key_rate_hz);
    CHECK(again.seed_user == specs.back().seed_user);
  }
  for (std::size_t a = 0; a < specs.size(); ++a) {
    for (std::size_t b = a + 1; b < specs.size(); ++b) {
      const double gap = std::fabs(specs[a].key_rate_hz - specs[b].key_rate_hz) +
                         std::fabs(specs[a].press_amp_mean - specs[b].press_amp_mean) +
                         std::fabs(specs[a].peak_width_ms - specs[b].peak_width_ms);
      CHECK(gap > 0.0);
    }
  }
  CHECK_THROWS_AS(sample_user_spec(pop, 30), IndexOutOfRange);
}

TEST_CASE("a noiseless single keystroke is found where it was placed") {
  const double rate = 100.0;
  const std::size_t n = 300;
  const auto series =
      render_pulse_train({1.0}, {2.0}, 0.04, rate, n);
  const auto peaks = features::detect_peaks(series, {});
  REQUIRE(peaks.size() == 1);
  // The pulse center lands on frame rate*1 = 100; the width is 4 frames.
  CHECK(peaks[0] >= 96);
  CHECK(peaks[0] <= 104);
}

TEST_CASE("240 s at 100 Hz gives 24000 frames") {
  SyntheticUserSpec spec;
  spec.seed_user = 9;
  const Recording rec = generate_recording(spec, "u", 240.0, 100.0, 0);
  CHECK(rec.frames.size() == 24000);
  CHECK(rec.frames.front().t_a == 0.0);
  CHECK(rec.frames.back().t_a == doctest::Approx(239990.0));
  CHECK_THROWS_AS(generate_recording(spec, "u", 0.5, 100.0, 0), BadDuration);
  CHECK_THROWS_AS(generate_recording(spec, "u", 10.0, 5.0, 0), BadDuration);
}

TEST_CASE("same spec, different session seeds: new frames, close features") {
  PopulationSpec pop;
  pop.n_users = 4;
  const auto spec = sample_user_spec(pop, 1);
  const auto other = sample_user_spec(pop, 2);

  const Recording a = generate_recording(spec, "self", 60.0, 100.0, 100);
  const Recording b = generate_recording(spec, "self", 60.0, 100.0, 101);
  const Recording c = generate_recording(other, "other", 60.0, 100.0, 102);
  CHECK(a.frames != b.frames);

  const auto fa = pipeline::extract_dataset({a}, 1500, 9);
  const auto fb = pipeline::extract_dataset({b}, 1500, 9);
  const auto fc = pipeline::extract_dataset({c}, 1500, 9);

  // Intra-user feature distance should be visibly below inter-user
  // distance once both are normalized with the same bounds.
  std::vector<features::FeatureVector> all;
  for (const auto& s : fa) all.push_back(s.fv);
  for (const auto& s : fb) all.push_back(s.fv);
  for (const auto& s : fc) all.push_back(s.fv);
  const auto nz = features::fit_normalizer(all);

  decision::MetricSpec city{decision::MetricKind::Cityblock, 1.0};
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (const auto& s1 : fa) {
    for (const auto& s2 : fb) {
      intra += decision::distance(features::normalize(s1.fv, nz),
                                  features::normalize(s2.fv, nz), city);
      ++n_intra;
    }
    for (const auto& s3 : fc) {
      inter += decision::distance(features::normalize(s1.fv, nz),
                                  features::normalize(s3.fv, nz), city);
      ++n_inter;
    }
  }
  intra /= static_cast<double>(n_intra);
  inter /= static_cast<double>(n_inter);
  CHECK(intra < inter);
}

TEST_CASE("population generation is reproducible byte for byte") {
  PopulationSpec pop;
  pop.n_users = 2;
  pop.duration_s = 20.0;
  const auto first = generate_population(pop, 1);
  REQUIRE(first.size() == 2);

  const auto dir = testutil::temp_dir("synth_repro");
  const auto again = generate_population(pop, 1);
  for (std::size_t i = 0; i < first.size(); ++i) {
    const auto p1 = dir / ("a" + std::to_string(i) + ".csv");
    const auto p2 = dir / ("b" + std::to_string(i) + ".csv");
    ingest::write_recording(first[i].recording, p1);
    ingest::write_recording(again[i].recording, p2);
    CHECK(testutil::slurp(p1) == testutil::slurp(p2));
    CHECK(first[i].session_seed == again[i].session_seed);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("indistinguishable users sit near chance EER") {
  // separation 0: everyone shares one generator parameterization, so the
  // evaluation should hover around 0.5.
  std::vector<double> eers;
  for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
    PopulationSpec pop;
    pop.n_users = 6;
    pop.separation = 0.0;
    pop.duration_s = 60.0;
    pop.seed = seed;
    std::vector<Recording> recs;
    for (const auto& e : generate_population(pop, 2)) {
      recs.push_back(e.recording);
    }
    const auto samples = pipeline::extract_dataset(recs, 500, 9);
    const auto report = decision::evaluate_population(
        samples, {decision::MetricKind::Cityblock, 1.0});
    eers.push_back(report.mean_eer);
  }
  const double med = testutil::median(eers);
  CHECK(med > 0.4);
  CHECK(med < 0.6);
}

TEST_CASE("more separation does not hurt the population EER") {
  std::vector<double> med_eer;
  for (double sep : {0.5, 1.0, 2.0}) {
    std::vector<double> eers;
    for (std::uint64_t seed : {3ULL, 4ULL, 5ULL}) {
      PopulationSpec pop;
      pop.n_users = 6;
      pop.separation = sep;
      pop.duration_s = 60.0;
      pop.seed = seed;
      std::vector<Recording> recs;
      for (const auto& e : generate_population(pop, 2)) {
        recs.push_back(e.recording);
      }
      const auto samples = pipeline::extract_dataset(recs, 500, 9);
      eers.push_back(decision::evaluate_population(
                         samples, {decision::MetricKind::Cityblock, 1.0})
                         .mean_eer);
    }
    med_eer.push_back(testutil::median(eers));
  }
  CHECK(med_eer[1] <= med_eer[0] + 1e-9);
  CHECK(med_eer[2] <= med_eer[1] + 1e-9);
}

TEST_CASE("interpolation endpoints reproduce the inputs") {
  PopulationSpec pop;
  const auto a = sample_user_spec(pop, 0);
  const auto b = sample_user_spec(pop, 1);
  const auto at0 = interpolate_specs(a, b, 0.0);
  const auto at1 = interpolate_specs(a, b, 1.0);
  CHECK(at0.key_rate_hz == a.key_rate_hz);
  CHECK(at0.gyro_gain == a.gyro_gain);
  CHECK(at1.key_rate_hz == b.key_rate_hz);
  CHECK(at1.gyro_gain == b.gyro_gain);
  CHECK(at1.seed_user == a.seed_user);  // seed follows the attacker

  const auto mid = interpolate_specs(a, b, 0.5);
  CHECK(mid.key_rate_hz ==
        doctest::Approx((a.key_rate_hz + b.key_rate_hz) / 2.0));
}
