#include "beamgeo/connections.hpp"

#include <cmath>

#include "beamgeo/error.hpp"
#include "beamgeo/format.hpp"

namespace beamgeo {

FrameMode FrameMode::arc_adapted(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw Error(Errc::InvalidArgument, "arc-adapted frame needs rho > 0");
  }
  return FrameMode{Kind::ArcAdapted, rho};
}

Connection3 levi_civita(const FrameMode&) { return Connection3{}; }

std::array<Connection3, 4> levi_civita_gradient(const FrameMode& mode) {
  std::array<Connection3, 4> g{};
  if (mode.kind == FrameMode::Kind::ArcAdapted) {
    const double k = 1.0 / (mode.rho * mode.rho);
    for (std::size_t a = 1; a < 4; ++a) g[1].set(1, a, a, k);
  }
  return g;
}

Vec4 inertial_acceleration(const FrameMode& mode, const Vec4& x_dot, const Vec4& xi,
                           const Vec4& xi_dot) {
  Connection3 gamma = levi_civita(mode);
  const auto grad = levi_civita_gradient(mode);
  Connection3 total;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = j; k < 4; ++k) {
        double v = gamma(i, j, k);
        for (std::size_t l = 0; l < 4; ++l) v += xi[l] * grad[l](i, j, k);
        total.set(i, j, k, v);
      }
  const Vec4 a = contract_geodesic(total, x_dot, x_dot);
  const Vec4 b = contract_geodesic(total, x_dot, xi_dot);
  return a + 2.0 * b;
}

Connection3 field_connection(const Mat4& f, const Vec4& first, const Sym3& third) {
  const Vec4 y_low = lower(first);
  Connection3 g;
  for (std::size_t i = 0; i < 4; ++i) {
    double fy = 0.0;
    for (std::size_t m = 0; m < 4; ++m) fy += f[i][m] * first[m];
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t k = j; k < 4; ++k) {
        // F^i_m T^m_{jk}, lowered with eta_jj eta_kk.
        double ft = 0.0;
        for (std::size_t m = 0; m < 4; ++m) ft += f[i][m] * third(m, j, k);
        ft *= metric::eta(j, j) * metric::eta(k, k);
        const double sym = f[i][j] * y_low[k] + f[i][k] * y_low[j];
        g.set(i, j, k, 0.5 * sym + 0.5 * (fy * metric::eta(j, k) - ft));
      }
    }
  }
  return g;
}

Connection3 lorentz_connection(const FieldSample& field, const Vec4& y, const FrameMode& mode) {
  const double shell = dot(y, y) - 1.0;
  if (!(std::abs(shell) <= kOnShellTolerance)) {
    throw Error(Errc::OffShell, "velocity off the unit hyperboloid (eta(y,y) - 1 = " +
                                    format_double(shell) + ")");
  }
  return levi_civita(mode) + field_connection(field.f_mixed(), y, Sym3::outer_cube(y));
}

Connection3 averaged_connection(const FieldSample& field, const MomentSet& moments,
                                const FrameMode& mode) {
  return levi_civita(mode) + field_connection(field.f_mixed(), moments.first, moments.third);
}

std::array<Connection3, 4> averaged_connection_gradient(const FieldSample& field,
                                                        const MomentSet& moments,
                                                        const FrameMode& mode) {
  auto g = levi_civita_gradient(mode);
  for (std::size_t l = 0; l < 4; ++l) {
    g[l] += field_connection(field.grad()[l], moments.first, moments.third);
  }
  return g;
}

}  // namespace beamgeo
