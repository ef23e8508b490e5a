#pragma once

// Hill-equation optics (principal solutions, Green function, dispersion) and
// the collective offset observable.

#include <array>
#include <functional>
#include <vector>

#include "beamgeo/dynamics.hpp"
#include "beamgeo/ensemble.hpp"
#include "beamgeo/lattice.hpp"

namespace beamgeo {

/// A coefficient function of the path parameter. Piecewise-constant
/// profiles evaluate to the left or right limit at their breakpoints.
class Profile {
 public:
  enum class Side { Left, Right };

  static Profile constant(double value);
  /// Consecutive segments (length, value) starting at t0.
  static Profile segments(const std::vector<std::pair<double, double>>& pieces, double t0 = 0.0);
  /// Samples (t_k, v_k), linear in between; t must increase.
  static Profile samples(std::vector<double> t, std::vector<double> v);
  static Profile function(std::function<double(double)> f);

  double at(double t, Side side = Side::Right) const;
  /// Interior discontinuities.
  const std::vector<double>& breakpoints() const noexcept { return breaks_; }

 private:
  enum class Kind { Constant, Segments, Samples, Function };
  Kind kind_ = Kind::Constant;
  double value_ = 0.0;
  std::vector<double> t_;  // segment edges or sample abscissae
  std::vector<double> v_;
  std::vector<double> breaks_;
  std::function<double(double)> f_;
};

/// Horizontal (u = x^1) or vertical (u = x^3) plane.
enum class Plane { Horizontal, Vertical };

/// K(l) and 1/rho(l) along a lattice, from the transverse systems of the
/// dipole-bearing elements (rho = curvature_radius); zero elsewhere.
struct LatticeOptics {
  Profile k;
  Profile inverse_rho;
  double length = 0.0;
};
LatticeOptics lattice_optics(const Lattice& lattice, Plane plane);

struct PrincipalSolutions {
  std::vector<double> grid;
  std::vector<double> c, dc, s, ds;
  std::vector<double> k;            // K at the grid points (right limit)
  std::vector<std::size_t> breaks;  // grid indices sitting on a breakpoint
};

/// Wronskian tolerance: |C S' - C' S - 1| <= kWronskianTolerance.
inline constexpr double kWronskianTolerance = 1e-9;

/// RK4 solutions of u'' + K u = 0 with C(t0) = 1, C' = 0, S = 0, S' = 1.
/// The grid is uniform with spacing <= step inside each smooth piece and
/// contains every breakpoint. Throws WronskianDrift.
PrincipalSolutions principal_solutions(const Profile& k, double t0, double t_end, double step);

/// K given as samples on a grid, linearly interpolated between them.
PrincipalSolutions principal_solutions(const std::vector<double>& grid, const std::vector<double>& k);

/// G(t, t~) = S(t) C(t~) - C(t) S(t~), with C and S interpolated by cubic
/// Hermite polynomials through (C, C') and (S, S'). Throws OutOfSpan.
double green_function(const PrincipalSolutions& ps, double t, double t_tilde);

/// P(t) = int_t0^t p G(t, .) = S(t) int p C - C(t) int p S, both integrals by
/// cumulative trapezoid on the grid. Verifies |P'' + K P - p| <= 1e-6 max|p|
/// by three-point differences away from breakpoints; throws ResidualTooLarge.
std::vector<double> particular_solution(const PrincipalSolutions& ps, const Profile& p);
std::vector<double> particular_solution(const PrincipalSolutions& ps, const std::vector<double>& p);

struct DispersionResult {
  std::vector<double> d;   // D(t), m
  std::vector<double> dd;  // D'(t)
  double delta = 0.0;      // dp / p0
  std::vector<double> offset;  // delta * D, m
};

/// D solves D'' + K D = 1/rho. Throws InvalidArgument for delta < 0.
DispersionResult dispersion(const PrincipalSolutions& ps, const Profile& inverse_rho, double delta);

/// Largest laboratory-frame spatial deviation |xi| over a run, the value
/// assigned to dp in the dispersion driver.
double max_spatial_deviation(const JacobiSeries& run);

struct OffsetSeries {
  std::vector<double> t;
  std::array<std::vector<double>, 2> off13;     // Off^1, Off^3 (Born)
  std::array<std::vector<double>, 2> averaged;  // <Off^1>, <Off^3>
};

/// <Off^i>(t) = int_0^t F^i_m (<y^m> eta(X', X') - <y^m y^s y^l> X'_s X'_l),
/// i = 1, 3, by trapezoid on the reference grid. off13 is left empty.
/// Throws MismatchedGrid.
OffsetSeries averaged_offset(const Lattice& lattice, const Trajectory& reference,
                             const std::vector<MomentSet>& moments_along);

/// Born approximation: the integrand above plus
///   F^i_j xi'^j eta(X', eps) + F^i_k X'^k eta(xi', eps)
///   + xi^l d_l F^i_m (<y^m> eta(X', X') - <y^m y^s y^l> X'_s X'_l),
/// eps = <y> - X'. Fills both off13 (Born) and averaged. Throws MismatchedGrid.
OffsetSeries born_offset(const Lattice& lattice, const Trajectory& reference,
                         const std::vector<MomentSet>& moments_along, const JacobiSeries& xi_run);

}  // namespace beamgeo
