#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "testutil.hpp"
#include "wearauth/errors.hpp"
#include "wearauth/preprocess.hpp"

using namespace wearauth;
using preprocess::maf_filter;

TEST_CASE("constant series stays constant") {
  const std::vector<double> v(10, 3.25);
  const auto out = maf_filter(v, 3);
  REQUIRE(out.size() == 8);
  for (double x : out) CHECK(x == doctest::Approx(3.25));
}

TEST_CASE("m=1 is the identity") {
  const std::vector<double> v{1.0, -2.0, 7.5, 0.25};
  CHECK(maf_filter(v, 1) == v);
}

TEST_CASE("hand-computed example") {
  const auto out = maf_filter({1, 2, 3, 4}, 2);
  REQUIRE(out.size() == 3);
  CHECK(out[0] == doctest::Approx(1.5));
  CHECK(out[1] == doctest::Approx(2.5));
  CHECK(out[2] == doctest::Approx(3.5));
}

TEST_CASE("series shorter than the filter window is rejected") {
  CHECK_THROWS_AS(maf_filter({1, 2}, 3), WindowTooShort);
  CHECK_THROWS_AS(maf_filter({}, 1), WindowTooShort);
}

TEST_CASE("matches a brute-force sliding mean on random input") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng.uniform_index(200);
    const std::size_t m = 1 + rng.uniform_index(n);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-10.0, 10.0);

    const auto out = maf_filter(v, m);
    REQUIRE(out.size() == n - m + 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += v[i + j];
      CHECK(std::fabs(out[i] - s / static_cast<double>(m)) < 1e-12);
    }
  }
}

TEST_CASE("the filter is linear") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 10 + rng.uniform_index(100);
    const std::size_t m = 1 + rng.uniform_index(n - 1);
    std::vector<double> x(n), y(n), combo(n);
    const double a = rng.uniform(-3.0, 3.0);
    const double b = rng.uniform(-3.0, 3.0);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(-5.0, 5.0);
      y[i] = rng.uniform(-5.0, 5.0);
      combo[i] = a * x[i] + b * y[i];
    }
    const auto fx = maf_filter(x, m);
    const auto fy = maf_filter(y, m);
    const auto fc = maf_filter(combo, m);
    for (std::size_t i = 0; i < fc.size(); ++i) {
      CHECK(std::fabs(fc[i] - (a * fx[i] + b * fy[i])) < 1e-9);
    }
  }
}

TEST_CASE("filtering never increases the max absolute value") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 8 + rng.uniform_index(64);
    const std::size_t m = 1 + rng.uniform_index(n);
    std::vector<double> v(n);
    double max_in = 0.0;
    for (auto& x : v) {
      x = rng.normal(0.0, 2.0);
      max_in = std::max(max_in, std::fabs(x));
    }
    for (double x : maf_filter(v, m)) {
      CHECK(std::fabs(x) <= max_in + 1e-12);
    }
  }
}

TEST_CASE("all-zero window stays zero through preprocessing") {
  Window w;
  w.user_id = "u";
  w.sample_size = 50;
  w.frames.resize(50);
  const auto cw = preprocess::preprocess_window(w, {9});
  REQUIRE(cw.length() == 42);
  for (const auto* series : {&cw.x_a, &cw.y_a, &cw.z_a, &cw.x_g, &cw.y_g, &cw.z_g}) {
    for (double x : *series) CHECK(x == 0.0);
  }
}

TEST_CASE("1000-frame window with m=9 gives six 992-length series") {
  Window w;
  w.sample_size = 1000;
  w.frames.resize(1000);
  Rng rng(5);
  for (auto& f : w.frames) {
    f.x_a = rng.normal();
    f.y_a = rng.normal();
    f.z_a = rng.normal();
    f.x_g = rng.normal();
    f.y_g = rng.normal();
    f.z_g = rng.normal();
  }
  const auto cw = preprocess::preprocess_window(w, {9});
  CHECK(cw.x_a.size() == 992);
  CHECK(cw.y_a.size() == 992);
  CHECK(cw.z_a.size() == 992);
  CHECK(cw.x_g.size() == 992);
  CHECK(cw.y_g.size() == 992);
  CHECK(cw.z_g.size() == 992);

  // Axis columns go through the same filter as the flat series.
  std::vector<double> za(1000);
  for (std::size_t i = 0; i < 1000; ++i) za[i] = w.frames[i].z_a;
  CHECK(cw.z_a == maf_filter(za, 9));
}

TEST_CASE("m equal to the window length leaves too little data") {
  Window w;
  w.sample_size = 16;
  w.frames.resize(16);
  CHECK_THROWS_AS(preprocess::preprocess_window(w, {16}), WindowTooShort);
  CHECK_NOTHROW(preprocess::preprocess_window(w, {15}));
}
