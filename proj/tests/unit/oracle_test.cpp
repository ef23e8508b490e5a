#include <doctest.h>

#include <cmath>
#include <cstring>
#include <json.hpp>

#include "beamgeo/error.hpp"
#include "beamgeo/oracle.hpp"

using namespace beamgeo;

namespace {

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::Io;
}

bool same_bits(const Vec4& a, const Vec4& b) { return std::memcmp(a.data(), b.data(), sizeof a) == 0; }

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("weighted mean") {
  const Vec4 a{1.0, 2.0, 3.0, 4.0};
  CHECK(same_bits(weighted_mean({a, a, a, a, a}, {1, 2, 3, 4, 5}), a));
  const auto m = weighted_mean({{0, 0, 0, 0}, {4, 0, 0, 0}}, {3.0, 1.0});
  CHECK(m[0] == 1.0);
  CHECK(code_of([] { weighted_mean({}, {}); }) == Errc::InvalidArgument);
}

TEST_CASE("delta ensemble mean is bitwise the single orbit") {
  const Lattice lat({Element::drift(0.3), Element::quad_dipole(2.0, 0.4, 0.5), Element::rf(1.0, 0.1, 2.0),
                     Element::drift(5.0)});
  const Vec4 u = project_to_hyperboloid({0.05, 1.0, -0.02});
  const Vec4 x0{0.0, 0.01, 0.0, 0.02};
  const BeamEnsemble e(std::vector<VelocitySample>(9, VelocitySample{u, 0.5}));
  const auto mean = ensemble_track(lat, e, x0, 0.0, 3.0, {});
  const auto single = integrate_lorentz(lat, {0.0, x0, u}, 3.0, {});
  REQUIRE(mean.size() == single.size());
  for (std::size_t k = 0; k < mean.size(); ++k) {
    CHECK(same_bits(mean[k].x, single[k].x));
    CHECK(same_bits(mean[k].v, single[k].v));
  }
  for (auto b : {kernels::Backend::Scalar, kernels::Backend::Avx2}) {
    const auto m2 = ensemble_track(lat, e, x0, 0.0, 3.0, {}, b);
    CHECK(same_bits(m2.back().x, single.back().x));
  }
}

TEST_CASE("two symmetric samples in free space move with the mean velocity") {
  const Lattice lat({Element::drift(50.0)});
  const BeamEnsemble e({{project_to_hyperboloid({0.1, 1.0, 0.0}), 1.0}, {project_to_hyperboloid({-0.1, 1.0, 0.0}), 1.0}});
  const auto tr = ensemble_track(lat, e, {}, 0.0, 2.0, {});
  CHECK(tr.back().x[1] == doctest::Approx(0.0).scale(1.0));
  CHECK(tr.back().x[2] == doctest::Approx(2.0));
}

TEST_CASE("endpoints at equal coordinate time") {
  const Lattice lat({Element::drift(50.0)});
  const Vec4 u{std::sqrt(5.0), 0.0, 2.0, 0.0};
  const auto tr = integrate_lorentz(lat, {0.0, {}, u}, 4.0, {});
  const Vec4 p = trajectory_endpoint(tr, 3.0, ComparisonTime::Coordinate);
  CHECK(p[0] == doctest::Approx(3.0));
  CHECK(p[2] == doctest::Approx(3.0 * 2.0 / std::sqrt(5.0)));
  const Vec4 q = trajectory_endpoint(tr, 1.2345, ComparisonTime::Proper);
  CHECK(q[2] == doctest::Approx(2.0 * 1.2345));
  CHECK(code_of([&] { trajectory_endpoint(tr, 100.0, ComparisonTime::Coordinate); }) == Errc::OutOfSpan);

  // ensemble of different speeds: each sample is cut at its own proper time
  const BeamEnsemble e({{project_to_hyperboloid({0, 1, 0}), 1.0}, {project_to_hyperboloid({0, 3, 0}), 1.0}});
  const Vec4 m = ensemble_endpoint(lat, e, {}, 4.0, {}, ComparisonTime::Coordinate);
  const double expect = 0.5 * (4.0 / std::sqrt(2.0) + 4.0 * 3.0 / std::sqrt(10.0));
  CHECK(m[2] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(m[0] == doctest::Approx(4.0));
}

TEST_CASE("geodesic versus ensemble mean in the delta limit and free space") {
  const Lattice lat({Element::dipole(30.0, 0.05)});
  const BeamEnsemble delta({{project_to_hyperboloid({0, 3, 0}), 1.0}});
  CHECK(theorem1_deviation(lat, delta, {}, 10.0, {}) <= 1e-9);
  CHECK(theorem1_deviation(lat, delta, {}, 1.0, {}, ComparisonTime::Proper) <= 1e-9);
  const Lattice free({Element::drift(30.0)});
  const auto g = gaussian_family(3.0, 500, 1)(0.05);
  // free flight: each sample keeps y / y^0, the geodesic keeps <y> / <y^0>
  Vec4 mean_dir{}, mean_y{};
  double wsum = 0.0;
  for (const auto& s : g.samples()) {
    mean_dir = mean_dir + (s.w / s.y[0]) * s.y;
    mean_y = mean_y + s.w * s.y;
    wsum += s.w;
  }
  const Vec4 expect = (10.0 / wsum) * mean_dir - (10.0 / mean_y[0]) * mean_y;
  CHECK(theorem1_deviation(free, g, {}, 10.0, {}) ==
        doctest::Approx(std::hypot(expect[1], expect[2], expect[3])).epsilon(1e-6));
}

TEST_CASE("gaussian family") {
  const auto fam = gaussian_family(100.0, 10000, 42);
  const auto e = fam(0.01);
  const auto st = energy_stats(e);
  CHECK(st.alpha > 0.005);
  CHECK(st.alpha < 0.02);
  const auto m = compute_moments(e);
  CHECK(m.first[2] == doctest::Approx(std::sqrt(100.0 * 100.0 - 1.0)).epsilon(1e-6));
  CHECK(code_of([] { gaussian_family(0.5, 10, 1); }) == Errc::InvalidArgument);
  // rescaling: the same draws at every alpha
  const auto a = fam(0.02), b = fam(0.01);
  CHECK((a.samples()[3].y[1]) == doctest::Approx(2.0 * b.samples()[3].y[1]).epsilon(1e-12));
}

TEST_CASE("power law fit") {
  const auto [k, c] = fit_power_law({1.0, 2.0, 4.0}, {3.0, 12.0, 48.0});
  CHECK(k == doctest::Approx(2.0));
  CHECK(c == doctest::Approx(3.0));
  CHECK(code_of([] { fit_power_law({1.0}, {1.0}); }) == Errc::DegenerateFit);
  CHECK(code_of([] { fit_power_law({1.0, 2.0}, {1.0, 0.0}); }) == Errc::DegenerateFit);
}

TEST_CASE("scan validation and json") {
  const Lattice lat({Element::dipole(30.0, 0.05)});
  const auto fam = gaussian_family(100.0, 50, 1);
  CHECK(code_of([&] { theorem1_scan(lat, fam, {0.02, 0.01}, 10.0, {}); }) == Errc::DegenerateFit);
  CHECK(code_of([&] { theorem1_scan(lat, fam, {0.01, 0.02, 0.005}, 10.0, {}); }) == Errc::InvalidArgument);
  CHECK(code_of([&] { theorem1_scan(lat, fam, {0.3, 0.02, 0.01}, 10.0, {}); }) == Errc::InvalidArgument);

  ScalingReport r{{0.02, 0.01}, {4e-8, 1e-8}, 2.0, 1e-4};
  const auto j = nlohmann::json::parse(to_json(r));
  CHECK(j["alphas"].size() == 2);
  CHECK(j["deviations"][1].get<double>() == 1e-8);
  CHECK(j["fitted_exponent"].get<double>() == 2.0);
  CHECK(j["fitted_prefactor"].get<double>() == 1e-4);
  const std::string text = to_json(r);
  CHECK(text.find("\"alphas\"") < text.find("\"deviations\""));
  CHECK(text.back() == '\n');
}

TEST_CASE("jacobi against two geodesics") {
  const Lattice lat({Element::dipole(30.0, 0.2)});
  const auto m = compute_moments(sample_gaussian_beam({0, 1, 0}, {0.01, 0.01, 0.01}, 1000, 3));
  const double nm = std::sqrt(dot(m.first, m.first));
  const auto ref = integrate_averaged_geodesic(lat, m, {0.0, {}, (1.0 / nm) * m.first}, 5.0, {});
  const JacobiState xi0{0.0, {0, 1, 0, 1}, {0, 0.5, 0, -0.5}};
  const auto rep = jacobi_vs_two_geodesics(lat, ref, xi0, {1e-3, 5e-4, 2.5e-4}, 5.0, {});
  CHECK(rep.fitted_order >= 1.7);
  CHECK(rep.fitted_order <= 2.3);

  const auto zero = jacobi_vs_two_geodesics(lat, ref, xi0, {0.0}, 5.0, {});
  CHECK(zero.errors[0] == 0.0);
  CHECK(std::isnan(zero.fitted_order));

  const Lattice free({Element::drift(30.0)});
  const auto fref = integrate_averaged_geodesic(free, m, {0.0, {}, (1.0 / nm) * m.first}, 5.0, {});
  const auto flat = jacobi_vs_two_geodesics(free, fref, xi0, {1e-1, 1e-2}, 5.0, {});
  for (double e : flat.errors) CHECK(e <= 1e-12);
}

}
