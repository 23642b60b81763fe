#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "reference_impl.hpp"
#include "testutil.hpp"
#include "wearauth/decision.hpp"
#include "wearauth/errors.hpp"

using namespace wearauth;
using namespace wearauth::decision;
using features::FeatureVector;

namespace {

FeatureVector vec_of(double v) {
  FeatureVector fv;
  fv.values.fill(v);
  return fv;
}

FeatureVector random_unit_vec(Rng& rng) {
  FeatureVector fv;
  for (auto& v : fv.values) v = rng.uniform();
  return fv;
}

const MetricSpec kAllMetrics[5] = {
    {MetricKind::Cityblock, 1.0},  {MetricKind::Euclidean, 2.0},
    {MetricKind::MinkowskiP, 5.0}, {MetricKind::Cosine, 0.0},
    {MetricKind::Correlation, 0.0}};

}  // namespace

TEST_CASE("identical vectors are at distance zero") {
  Rng rng(40);
  const auto a = random_unit_vec(rng);
  for (const auto& m : kAllMetrics) {
    CHECK(distance(a, a, m) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("zeros vs ones maximizes the rescaled distances") {
  const auto zeros = vec_of(0.0);
  const auto ones = vec_of(1.0);
  CHECK(distance(zeros, ones, {MetricKind::Cityblock, 1.0}) == doctest::Approx(1.0));
  CHECK(distance(zeros, ones, {MetricKind::Euclidean, 2.0}) == doctest::Approx(1.0));
  CHECK(distance(zeros, ones, {MetricKind::MinkowskiP, 5.0}) == doctest::Approx(1.0));
}

TEST_CASE("degenerate direction conventions") {
  Rng rng(41);
  const auto zeros = vec_of(0.0);
  const auto other = random_unit_vec(rng);
  CHECK(distance(zeros, other, {MetricKind::Cosine, 0.0}) == 0.5);
  CHECK(distance(vec_of(0.7), other, {MetricKind::Correlation, 0.0}) == 0.5);
}

TEST_CASE("every metric matches its textbook formula on random pairs") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_unit_vec(rng);
    const auto b = random_unit_vec(rng);
    CHECK(std::fabs(distance(a, b, kAllMetrics[0]) -
                    refimpl::cityblock(a.values, b.values)) < 1e-12);
    CHECK(std::fabs(distance(a, b, kAllMetrics[1]) -
                    refimpl::euclidean(a.values, b.values)) < 1e-12);
    CHECK(std::fabs(distance(a, b, kAllMetrics[2]) -
                    refimpl::minkowski(a.values, b.values, 5.0)) < 1e-12);
    CHECK(std::fabs(distance(a, b, kAllMetrics[3]) -
                    refimpl::cosine(a.values, b.values)) < 1e-12);
    CHECK(std::fabs(distance(a, b, kAllMetrics[4]) -
                    refimpl::pearson_distance(a.values, b.values)) < 1e-12);
  }
}

TEST_CASE("distances stay in [0,1], are symmetric and respect the triangle") {
  Rng rng(43);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = random_unit_vec(rng);
    const auto b = random_unit_vec(rng);
    const auto c = random_unit_vec(rng);
    for (const auto& m : kAllMetrics) {
      const double dab = distance(a, b, m);
      CHECK(dab >= 0.0);
      CHECK(dab <= 1.0);
      CHECK(dab == distance(b, a, m));
    }
    for (const auto& m : {kAllMetrics[0], kAllMetrics[1]}) {
      const double dab = distance(a, b, m);
      const double dbc = distance(b, c, m);
      const double dac = distance(a, c, m);
      CHECK(dac <= dab + dbc + 1e-12);
    }
  }
}

TEST_CASE("match scores aggregate template distances") {
  Rng rng(44);
  const auto q = random_unit_vec(rng);
  CHECK(match_score(q, {q}, kAllMetrics[0]) == doctest::Approx(0.0));

  // Construct two templates at cityblock distances 0.2 and 0.4 from zero.
  const auto zeros = vec_of(0.0);
  CHECK(match_score(zeros, {vec_of(0.2), vec_of(0.4)}, kAllMetrics[0]) ==
        doctest::Approx(0.3));

  std::vector<FeatureVector> ts;
  double sum = 0.0, best = 1e9;
  for (int i = 0; i < 5; ++i) {
    ts.push_back(random_unit_vec(rng));
    const double d = distance(q, ts.back(), kAllMetrics[0]);
    sum += d;
    best = std::min(best, d);
  }
  CHECK(std::fabs(match_score(q, ts, kAllMetrics[0]) - sum / 5.0) < 1e-12);
  CHECK(std::fabs(match_score(q, ts, kAllMetrics[0], Aggregation::Min) - best) <
        1e-12);
  CHECK_THROWS_AS(match_score(q, {}, kAllMetrics[0]), EmptyTemplateSet);
}

TEST_CASE("the decision threshold is strict") {
  Policy p;
  p.threshold = 0.5;
  CHECK(decide(0.0, p) == Decision::Match);
  CHECK(decide(0.5, p) == Decision::NoMatch);  // equality rejects
  p.threshold = 1.0;
  CHECK(decide(1.0, p) == Decision::NoMatch);
  p.threshold = 0.0;
  CHECK(decide(0.0, p) == Decision::NoMatch);
}

TEST_CASE("dissimilarity matrix structure") {
  Rng rng(45);
  const auto a = random_unit_vec(rng);
  std::vector<Sample> two{{"u0", 0, 0, a}, {"u0", 0, 0, a}};
  const auto D2 = dissimilarity_matrix(two, kAllMetrics[0]);
  CHECK(D2 == std::vector<std::vector<double>>{{0.0, 0.0}, {0.0, 0.0}});

  std::vector<Sample> samples;
  for (int i = 0; i < 3; ++i) samples.push_back({"u", 0, 0, random_unit_vec(rng)});
  const auto D = dissimilarity_matrix(samples, kAllMetrics[1]);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(D[i][i] == 0.0);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(D[i][j] == D[j][i]);  // mirrored bit for bit
      CHECK(D[i][j] == doctest::Approx(distance(samples[i].fv, samples[j].fv,
                                                kAllMetrics[1])));
    }
  }
}

TEST_CASE("sweep boundaries under the strict rule") {
  // Genuine at literal distance zero is still rejected at threshold 0.
  const auto curves = sweep_scores({0.0, 0.1}, {0.9, 0.95});
  CHECK(curves.frr[0] == 1.0);
  CHECK(curves.far[0] == 0.0);
  // At 1.00 everything below 1 is accepted.
  CHECK(curves.far[100] == 1.0);
  CHECK(curves.frr[100] == 0.0);
}

TEST_CASE("sweeps are monotone and grid scores sit on the strict side") {
  Rng rng(46);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> gen(40), imp(60);
    for (auto& s : gen) s = rng.uniform();
    for (auto& s : imp) s = rng.uniform();
    // Values exactly on the grid exercise the boundary.
    gen[0] = 0.30;
    imp[0] = 0.30;
    const auto curves = sweep_scores(gen, imp);
    for (std::size_t t = 1; t < kThresholdSteps; ++t) {
      CHECK(curves.far[t] >= curves.far[t - 1]);
      CHECK(curves.frr[t] <= curves.frr[t - 1]);
    }
    // Direct recount at a few thresholds.
    for (std::size_t t : {std::size_t{0}, std::size_t{30}, std::size_t{31},
                          std::size_t{99}, std::size_t{100}}) {
      const double tau = threshold_at(t);
      std::size_t acc = 0;
      for (double s : imp) acc += s < tau ? 1 : 0;
      CHECK(curves.far[t] ==
            doctest::Approx(static_cast<double>(acc) / imp.size()));
      std::size_t rej = 0;
      for (double s : gen) rej += s < tau ? 0 : 1;
      CHECK(curves.frr[t] ==
            doctest::Approx(static_cast<double>(rej) / gen.size()));
    }
  }
}

TEST_CASE("matrix sweep validates its labels") {
  std::vector<std::vector<double>> D(3, std::vector<double>(3, 0.1));
  CHECK_THROWS_AS(far_frr_sweep(D, {"a", "a", "a"}), DegenerateLabels);
  CHECK_THROWS_AS(far_frr_sweep(D, {"a", "a", "b"}), DegenerateLabels);
  CHECK_THROWS_AS(far_frr_sweep(D, {"a", "a"}), DegenerateLabels);
}

TEST_CASE("two well-separated clusters give EER exactly zero") {
  Rng rng(47);
  std::vector<Sample> samples;
  for (int i = 0; i < 6; ++i) {
    FeatureVector fv;
    for (auto& v : fv.values) v = rng.uniform(0.0, 0.05);
    samples.push_back({"genuine", 0, 0, fv});
  }
  for (int i = 0; i < 6; ++i) {
    FeatureVector fv;
    for (auto& v : fv.values) v = rng.uniform(0.7, 0.9);
    samples.push_back({"other", 0, 0, fv});
  }
  // Sanity on the constructed geometry: intra < 0.1, inter > 0.5.
  const auto D = dissimilarity_matrix(samples, kAllMetrics[0]);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      if (samples[i].user_id == samples[j].user_id) {
        CHECK(D[i][j] < 0.1);
      } else {
        CHECK(D[i][j] > 0.5);
      }
    }
  }
  std::vector<std::string> labels;
  for (const auto& s : samples) labels.push_back(s.user_id);
  const auto curves = far_frr_sweep(D, labels);
  const auto [e, tau] = eer(curves);
  CHECK(e == 0.0);
  // Every threshold in (0.1, 0.5] separates the clusters perfectly.
  for (std::size_t t = 11; t <= 50; ++t) {
    CHECK(curves.far[t] == 0.0);
    CHECK(curves.frr[t] == 0.0);
  }
}

TEST_CASE("eer picks the closest point, ties to the smallest threshold") {
  Curves flat;
  flat.far.fill(0.05);
  flat.frr.fill(0.05);
  const auto [e1, t1] = eer(flat);
  CHECK(e1 == doctest::Approx(0.05));
  CHECK(t1 == 0.0);

  Curves crossing;
  for (std::size_t t = 0; t < kThresholdSteps; ++t) {
    crossing.far[t] = threshold_at(t);
    crossing.frr[t] = 1.0 - threshold_at(t);
  }
  const auto [e2, t2] = eer(crossing);
  CHECK(e2 == doctest::Approx(0.5));
  CHECK(t2 == doctest::Approx(0.5));
}

TEST_CASE("eer equals an exhaustive grid scan on random monotone curves") {
  Rng rng(48);
  for (int trial = 0; trial < 50; ++trial) {
    Curves c;
    double far = 0.0, frr = 1.0;
    for (std::size_t t = 0; t < kThresholdSteps; ++t) {
      far = std::min(1.0, far + rng.uniform(0.0, 0.03));
      frr = std::max(0.0, frr - rng.uniform(0.0, 0.03));
      c.far[t] = far;
      c.frr[t] = frr;
    }
    const auto [e, tau] = eer(c);
    double best_gap = 2.0, want_e = 0.0, want_tau = 0.0;
    for (std::size_t t = 0; t < kThresholdSteps; ++t) {
      const double gap = std::fabs(c.far[t] - c.frr[t]);
      if (gap < best_gap) {
        best_gap = gap;
        want_e = (c.far[t] + c.frr[t]) / 2.0;
        want_tau = threshold_at(t);
      }
    }
    CHECK(e == want_e);
    CHECK(tau == want_tau);
  }
}

TEST_CASE("reordering samples leaves every per-user EER unchanged") {
  Rng rng(49);
  std::vector<Sample> samples;
  for (int u = 0; u < 4; ++u) {
    const double base = 0.2 * u;
    for (int s = 0; s < 5; ++s) {
      FeatureVector fv;
      for (auto& v : fv.values) v = base + rng.uniform(0.0, 0.15);
      samples.push_back({"user" + std::to_string(u), 0, 0, fv});
    }
  }
  const auto before = evaluate_population(samples, kAllMetrics[0]);

  std::vector<Sample> shuffled = samples;
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[rng.uniform_index(i)]);
  }
  const auto after = evaluate_population(shuffled, kAllMetrics[0]);

  REQUIRE(before.per_user.size() == after.per_user.size());
  for (const auto& [user, ev] : before.per_user) {
    CHECK(after.per_user.at(user).eer == ev.eer);
    CHECK(after.per_user.at(user).threshold == ev.threshold);
  }
  CHECK(before.mean_eer == after.mean_eer);
}

TEST_CASE("Minkowski exponents below 1 are rejected") {
  Rng rng(51);
  const auto a = random_unit_vec(rng);
  const auto b = random_unit_vec(rng);
  CHECK_THROWS_AS(distance(a, b, {MetricKind::MinkowskiP, 0.5}), Error);
  CHECK_NOTHROW(distance(a, b, {MetricKind::MinkowskiP, 1.0}));
}

TEST_CASE("self verification matches for any positive threshold") {
  Rng rng(50);
  const auto t = random_unit_vec(rng);
  Policy p;
  p.threshold = 1e-6;
  CHECK(decide(match_score(t, {t}, p.metric), p) == Decision::Match);
}
