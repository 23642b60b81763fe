#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "testutil.hpp"
#include "wearauth/attacks.hpp"
#include "wearauth/errors.hpp"
#include "wearauth/pipeline.hpp"

using namespace wearauth;
using namespace wearauth::attacks;
using decision::MetricSpec;
using decision::Sample;

namespace {

const MetricSpec kCity{decision::MetricKind::Cityblock, 1.0};

features::FeatureVector vector_near(Rng& rng, double center, double spread) {
  features::FeatureVector fv;
  for (auto& v : fv.values) v = center + rng.uniform(-spread, spread);
  return fv;
}

// Small synthetic-pipeline dataset shared by the heavier cases.
std::vector<Sample> pipeline_dataset(std::uint64_t seed, std::size_t users,
                                     std::size_t sessions, double duration,
                                     std::size_t sample_size) {
  synth::PopulationSpec pop;
  pop.n_users = users;
  pop.seed = seed;
  pop.duration_s = duration;
  std::vector<Recording> recs;
  for (auto& e : synth::generate_population(pop, sessions)) {
    recs.push_back(std::move(e.recording));
  }
  return pipeline::extract_dataset(recs, sample_size, 9);
}

}  // namespace

TEST_CASE("com_gen with a single bin is all ones") {
  const auto m = com_gen(84, 7, 1, 123);
  REQUIRE(m.size() == 7);
  for (const auto& row : m) {
    REQUIRE(row.size() == 84);
    for (std::size_t v : row) CHECK(v == 1);
  }
}

TEST_CASE("com_gen is reproducible with entries in range") {
  const auto a = com_gen(84, 3, 5, 9);
  const auto b = com_gen(84, 3, 5, 9);
  CHECK(a == b);
  for (const auto& row : a) {
    for (std::size_t v : row) {
      CHECK(v >= 1);
      CHECK(v <= 5);
    }
  }
  CHECK(com_gen(84, 3, 5, 10) != a);
}

TEST_CASE("com_gen rows are distinct while the space allows it") {
  const auto m = com_gen(4, 50, 3, 77);  // 3^4 = 81 > 50
  std::set<std::vector<std::size_t>> unique(m.begin(), m.end());
  CHECK(unique.size() == m.size());

  // 2^2 = 4 < 6: duplicates are unavoidable and permitted.
  const auto tight = com_gen(2, 6, 2, 78);
  CHECK(tight.size() == 6);
}

TEST_CASE("com_gen draws are uniform (chi-square)") {
  constexpr std::size_t kTop = 5;
  const auto m = com_gen(100, 100, kTop, 4242);  // 10^4 entries
  std::array<double, kTop> counts{};
  for (const auto& row : m) {
    for (std::size_t v : row) counts[v - 1] += 1.0;
  }
  const double expected = 10000.0 / kTop;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // dof 4, critical value at p = 0.01
  CHECK(chi2 < 13.277);
}

TEST_CASE("zero-effort baseline separates a far-away victim perfectly") {
  // Near-identical victim samples; bit-identical ones would degenerate
  // the min-max bounds and map every vector to zero. Enough templates
  // keep the normalized genuine distances away from the impostor clamp.
  Rng rng(80);
  std::vector<Sample> ds;
  for (int i = 0; i < 30; ++i) {
    features::FeatureVector fv;
    for (auto& v : fv.values) v = rng.normal(0.0, 0.005);
    ds.push_back({"victim", 0, 0, fv});
  }
  for (int i = 0; i < 10; ++i) {
    ds.push_back({"imp" + std::to_string(i % 2), 0, 0, vector_near(rng, 5.0, 0.5)});
  }
  const auto base = zero_effort_baseline(ds, "victim", kCity);
  CHECK(base.eer == 0.0);
}

TEST_CASE("interleaved identical populations hover near chance") {
  std::vector<double> eers;
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    synth::PopulationSpec pop;
    pop.n_users = 4;
    pop.separation = 0.0;
    pop.duration_s = 90.0;
    pop.seed = seed;
    std::vector<Recording> recs;
    for (auto& e : synth::generate_population(pop, 2)) {
      recs.push_back(std::move(e.recording));
    }
    const auto ds = pipeline::extract_dataset(recs, 500, 9);
    eers.push_back(zero_effort_baseline(ds, "u00", kCity).eer);
  }
  const double med = testutil::median(eers);
  CHECK(med > 0.4);
  CHECK(med < 0.6);
}

TEST_CASE("statistical attack is reproducible and stays inside the top bins") {
  const auto ds = pipeline_dataset(21, 5, 2, 120.0, 1000);
  AttackConfig cfg;
  cfg.out_number = 40;
  cfg.bin_number = 50;
  cfg.top_bins = 5;
  cfg.seed = 99;
  const auto r1 = statistical_attack(ds, "u00", cfg, kCity);
  const auto r2 = statistical_attack(ds, "u00", cfg, kCity);
  CHECK(r1.accept_rate == r2.accept_rate);
  CHECK(r1.baseline_eer == r2.baseline_eer);
  CHECK(r1.eer_pooled == r2.eer_pooled);
  REQUIRE(r1.forged.size() == cfg.out_number);
  for (std::size_t i = 0; i < r1.forged.size(); ++i) {
    for (std::size_t f = 0; f < features::kFeatureCount; ++f) {
      CHECK(r1.forged[i].values[f] == r2.forged[i].values[f]);
    }
  }

  // Containment oracle: every forged value lies inside the union of the
  // top bins of an independently rebuilt histogram.
  for (std::size_t f = 0; f < features::kFeatureCount; ++f) {
    std::vector<double> pool;
    for (const auto& s : ds) {
      if (s.user_id != "u00") pool.push_back(s.fv.values[f]);
    }
    const double lo = *std::min_element(pool.begin(), pool.end());
    const double hi = *std::max_element(pool.begin(), pool.end());
    if (lo == hi) {
      for (const auto& fv : r1.forged) CHECK(fv.values[f] == lo);
      continue;
    }
    const double width = (hi - lo) / static_cast<double>(cfg.bin_number);
    std::vector<std::size_t> counts(cfg.bin_number, 0);
    for (double x : pool) {
      auto b = static_cast<std::size_t>((x - lo) / width);
      if (b >= cfg.bin_number) b = cfg.bin_number - 1;
      ++counts[b];
    }
    std::vector<std::size_t> order(cfg.bin_number);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return counts[a] > counts[b];
    });
    std::set<std::size_t> top(order.begin(), order.begin() + cfg.top_bins);
    for (const auto& fv : r1.forged) {
      const double x = fv.values[f];
      CHECK(x >= lo);
      CHECK(x < hi + width);  // half-open top bin
      bool inside = false;
      for (std::size_t b : top) {
        const double edge = lo + static_cast<double>(b) * width;
        if (x >= edge && x < edge + width) {
          inside = true;
          break;
        }
      }
      CHECK(inside);
    }
  }

  // Forged impostors never beat natural impostors' EER by construction
  // of the pooled variant: pooling can only sit between the two.
  CHECK(r1.eer_pooled >= 0.0);
  CHECK(r1.eer_pooled <= 1.0);
}

TEST_CASE("a constant pool feature forges the constant") {
  Rng rng(81);
  std::vector<Sample> ds;
  for (int i = 0; i < 4; ++i) {
    auto fv = vector_near(rng, 0.2, 0.05);
    ds.push_back({"victim", 0, 0, fv});
  }
  for (int u = 0; u < 2; ++u) {
    for (int i = 0; i < 4; ++i) {
      auto fv = vector_near(rng, 0.8, 0.05);
      fv.values[17] = 3.5;  // degenerate pool feature
      ds.push_back({"imp" + std::to_string(u), 0, 0, fv});
    }
  }
  AttackConfig cfg;
  cfg.out_number = 10;
  cfg.bin_number = 20;
  cfg.top_bins = 2;
  cfg.seed = 5;
  const auto res = statistical_attack(ds, "victim", cfg, kCity);
  for (const auto& fv : res.forged) CHECK(fv.values[17] == 3.5);
}

TEST_CASE("statistical attack refuses a single-user pool") {
  Rng rng(82);
  std::vector<Sample> ds;
  for (int i = 0; i < 3; ++i) ds.push_back({"victim", 0, 0, vector_near(rng, 0, 0.1)});
  for (int i = 0; i < 3; ++i) ds.push_back({"only", 0, 0, vector_near(rng, 1, 0.1)});
  AttackConfig cfg;
  CHECK_THROWS_AS(statistical_attack(ds, "victim", cfg, kCity), DegenerateLabels);
}

TEST_CASE("victim-inclusive pools are a separate diagnostic mode") {
  const auto ds = pipeline_dataset(23, 4, 1, 60.0, 500);
  AttackConfig cfg;
  cfg.out_number = 20;
  cfg.bin_number = 10;
  cfg.top_bins = 2;
  cfg.seed = 9;
  CHECK(cfg.diagnostic_include_victim == false);  // never the default
  const auto standard = statistical_attack(ds, "u00", cfg, kCity);
  cfg.diagnostic_include_victim = true;
  const auto diagnostic = statistical_attack(ds, "u00", cfg, kCity);
  // Same baseline either way; the forged pool differs.
  CHECK(standard.baseline_eer == diagnostic.baseline_eer);
  bool any_differs = false;
  for (std::size_t i = 0; i < standard.forged.size() && !any_differs; ++i) {
    for (std::size_t f = 0; f < features::kFeatureCount; ++f) {
      if (standard.forged[i].values[f] != diagnostic.forged[i].values[f]) {
        any_differs = true;
        break;
      }
    }
  }
  CHECK(any_differs);
}

TEST_CASE("top_bins must not exceed bin_number") {
  const auto ds = pipeline_dataset(22, 4, 1, 60.0, 500);
  AttackConfig cfg;
  cfg.bin_number = 10;
  cfg.top_bins = 11;
  CHECK_THROWS_AS(statistical_attack(ds, "u00", cfg, kCity), Error);
  cfg.top_bins = 0;
  CHECK_THROWS_AS(statistical_attack(ds, "u00", cfg, kCity), Error);
}

TEST_CASE("imitation attack endpoints: perfect copy and zero effort") {
  const std::size_t ss = 1000;
  const auto ds = pipeline_dataset(31, 6, 2, 180.0, ss);
  synth::PopulationSpec pop;
  pop.n_users = 6;
  pop.seed = 31;
  const auto victim_spec = synth::sample_user_spec(pop, 0);
  const auto attacker_spec = sample_user_spec(pop, 3);
  const auto base = zero_effort_baseline(ds, "u00", kCity);

  ImitationSpec perfect{victim_spec, attacker_spec, 1.0};
  const auto at1 = imitation_attack(ds, "u00", perfect, ss, 9, 100.0, kCity,
                                    30, 777);
  CHECK(at1.accept_rate >= 1.0 - base.eer - 0.1);

  ImitationSpec zero{victim_spec, attacker_spec, 0.0};
  const auto at0 = imitation_attack(ds, "u00", zero, ss, 9, 100.0, kCity,
                                    30, 778);
  CHECK(std::fabs(at0.accept_rate - base.eer) <= 0.1 + 0.05);

  CHECK_THROWS_AS(imitation_attack(ds, "u00",
                                   ImitationSpec{victim_spec, attacker_spec, 1.5},
                                   ss, 9, 100.0, kCity, 10, 1),
                  Error);
}

TEST_CASE("imitation accept rate is monotone in alpha") {
  const std::size_t ss = 1000;
  const auto ds = pipeline_dataset(32, 6, 2, 180.0, ss);
  synth::PopulationSpec pop;
  pop.n_users = 6;
  pop.seed = 32;
  std::vector<double> alphas{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> rates;
  for (double a : alphas) {
    double rate = 0.0;
    int n_pairs = 0;
    for (std::size_t v : {std::size_t{0}, std::size_t{1}}) {
      ImitationSpec spec{sample_user_spec(pop, v),
                         sample_user_spec(pop, v + 3), a};
      rate += imitation_attack(ds, synth::user_id_for_index(v), spec, ss, 9,
                               100.0, kCity, 30, 900 + v)
                  .accept_rate;
      ++n_pairs;
    }
    rates.push_back(rate / n_pairs);
  }
  CHECK(testutil::spearman(alphas, rates) >= 0.9);
}
