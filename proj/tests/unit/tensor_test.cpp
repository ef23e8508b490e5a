#include <doctest.h>

#include <cmath>
#include <random>

#include "beamgeo/error.hpp"
#include "beamgeo/format.hpp"
#include "beamgeo/tensor.hpp"

using namespace beamgeo;

TEST_SUITE("tensor") {

TEST_CASE("metric signature and index gymnastics") {
  CHECK(metric::eta(0, 0) == 1.0);
  for (std::size_t i = 1; i < 4; ++i) CHECK(metric::eta(i, i) == -1.0);
  CHECK(metric::eta(0, 2) == 0.0);
  CHECK(metric::determinant() == -1.0);
  const Vec4 v{2.0, 1.0, -3.0, 0.5};
  CHECK(raise(lower(v)) == v);
  CHECK(dot(v, v) == doctest::Approx(4.0 - 1.0 - 9.0 - 0.25));
  // a boosted unit vector stays on the shell
  const double g = 100.0;
  const Vec4 y{g, 0.0, std::sqrt(g * g - 1.0), 0.0};
  CHECK(std::abs(dot(y, y) - 1.0) < 1e-12);
}

TEST_CASE("distances") {
  const Vec4 a{1.0, 0.0, 0.0, 0.0}, b{5.0, 3.0, 0.0, 4.0};
  CHECK(euclidean_distance(a, b) == doctest::Approx(std::sqrt(16.0 + 9.0 + 16.0)));
  CHECK(spatial_distance(a, b) == doctest::Approx(5.0));
  CHECK(euclidean_norm({3.0, 4.0, 0.0, 0.0}) == doctest::Approx(5.0));
}

TEST_CASE("connection setter keeps the lower pair symmetric") {
  Connection3 g;
  g.set(1, 0, 2, 3.5);
  CHECK(g(1, 0, 2) == 3.5);
  CHECK(g(1, 2, 0) == 3.5);
  CHECK(g.is_symmetric());
  Connection3 h;
  h.set(1, 2, 0, 1.0);
  CHECK((g + h)(1, 0, 2) == 4.5);
}

TEST_CASE("geodesic contraction") {
  Connection3 g;
  g.set(1, 0, 2, 1.0);
  g.set(3, 1, 1, 2.0);
  const Vec4 u{1.0, 2.0, 3.0, 0.0};
  const Vec4 a = contract_geodesic(g, u, u);
  CHECK(a[1] == doctest::Approx(2.0 * 1.0 * 3.0));
  CHECK(a[3] == doctest::Approx(2.0 * 4.0));
  CHECK(a[0] == 0.0);
}

TEST_CASE("symmetric rank-3 array") {
  const Vec4 u{1.5, 0.25, -2.0, 3.0};
  const Sym3 t = Sym3::outer_cube(u);
  CHECK(t.is_symmetric());
  for (std::size_t m = 0; m < 4; ++m)
    for (std::size_t s = 0; s < 4; ++s)
      for (std::size_t l = 0; l < 4; ++l) CHECK(t(m, s, l) == doctest::Approx(u[m] * u[s] * u[l]));
  Sym3 w;
  w.set(2, 0, 1, 7.0);
  CHECK(w(0, 1, 2) == 7.0);
  CHECK(w(1, 2, 0) == 7.0);
  CHECK(sorted_triples().size() == 20);
  for (const auto& tr : sorted_triples()) CHECK((tr[0] <= tr[1] && tr[1] <= tr[2]));
}

TEST_CASE("field samples must lower to antisymmetric tensors") {
  Mat4 f{};
  f[1][2] = 0.7;
  f[2][1] = -0.7;  // magnetic: spatial block antisymmetric in mixed form too
  f[0][2] = 0.3;
  f[2][0] = 0.3;  // electric: symmetric in mixed form
  CHECK(lowered_is_antisymmetric(f));
  const FieldSample s(f, {});
  const Mat4 low = s.lowered();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(low[i][j] == -low[j][i]);

  Mat4 bad = f;
  bad[2][0] = -0.3;
  CHECK_FALSE(lowered_is_antisymmetric(bad));
  try {
    FieldSample{bad, {}};
    FAIL("expected InvalidField");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidField);
  }
}

TEST_CASE("property: F y is eta-orthogonal to y for random fields") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    Mat4 f{};
    // build from a random antisymmetric lowered tensor
    double low[4][4] = {};
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        low[i][j] = u(rng);
        low[j][i] = -low[i][j];
      }
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) f[i][j] = metric::eta(i, i) * low[i][j];
    REQUIRE(lowered_is_antisymmetric(f));
    const Vec4 y{u(rng), u(rng), u(rng), u(rng)};
    CHECK(std::abs(dot(y, apply(f, y))) < 1e-12);
  }
}

TEST_CASE("round-trip number formatting") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(i % 40) - 20);
    const auto back = parse_double(format_double(x));
    REQUIRE(back.has_value());
    CHECK(*back == x);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK_FALSE(parse_double("1.5x").has_value());
  CHECK_FALSE(parse_double("nan").has_value());
  const auto list = parse_double_list("0.02, 0.01,0.005");
  REQUIRE(list.has_value());
  CHECK(list->size() == 3);
  CHECK((*list)[2] == 0.005);
  CHECK_FALSE(parse_double_list("1,,2").has_value());
}

}
