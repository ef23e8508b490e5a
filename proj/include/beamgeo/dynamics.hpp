#pragma once

// Fixed-step RK4 integration of the equations of motion.
//
// Geodesic runs are parameterized by proper time t (m, c = 1). The field
// element used for a step is the one containing x^2 at the start of the step;
// with boundary_align set, steps that would cross an element boundary are
// split at the (linearly predicted) crossing.

#include <functional>
#include <string>
#include <vector>

#include "beamgeo/connections.hpp"
#include "beamgeo/ensemble.hpp"
#include "beamgeo/kernels.hpp"
#include "beamgeo/lattice.hpp"
#include "beamgeo/tensor.hpp"

namespace beamgeo {

struct TrajectoryState {
  double t = 0.0;
  Vec4 x{};
  Vec4 v{1.0, 0.0, 0.0, 0.0};
};
using Trajectory = std::vector<TrajectoryState>;

struct JacobiState {
  double t = 0.0;
  Vec4 xi{};
  Vec4 dxi{};
};
using JacobiSeries = std::vector<JacobiState>;

struct IntegratorConfig {
  double step = 1e-3;
  bool boundary_align = false;
};

/// Tolerance on the initial velocity of geodesic runs.
inline constexpr double kInitialShellTolerance = 1e-9;

/// x'' = -F(x) x' sqrt(eta(x', x')). Throws OffShellInitial, StepTooLarge
/// (step > shortest element / 4), OutOfLattice. t_end may precede initial.t.
Trajectory integrate_lorentz(const Lattice& lattice, const TrajectoryState& initial, double t_end,
                             const IntegratorConfig& config);

/// Same trajectory through the connection form x'' = -Gamma^L(x, u) x' x',
/// with the connection evaluated at u = x' / sqrt(eta(x', x')).
Trajectory integrate_lorentz_connection(const Lattice& lattice, const TrajectoryState& initial,
                                        double t_end, const IntegratorConfig& config);

/// A run along a curve together with the beam moments carried along it.
/// moments[k] belongs to trajectory[k].
struct AveragedRun {
  Trajectory trajectory;
  std::vector<MomentSet> moments;
};

/// Rate of change of the moments under the on-shell velocity flow y' = -F y:
/// d<y> = -F <y>, d<yyy>^{msl} = -(F^m_a T^{asl} + F^s_a T^{mal} + F^l_a T^{msa}).
MomentSet moment_rate(const Mat4& f, const MomentSet& m);

/// Geodesic of the averaged connection, x'' = -<Gamma>(x) x' x', with the
/// moments transported along the curve by moment_rate.
AveragedRun integrate_averaged_geodesic(const Lattice& lattice, const MomentSet& moments,
                                        const TrajectoryState& initial, double t_end,
                                        const IntegratorConfig& config);

/// Integral curve of the mean velocity field: x' = <y>, moments transported
/// as above. trajectory[k].v holds <y> at that point.
AveragedRun integrate_mean_field(const Lattice& lattice, const MomentSet& moments, const Vec4& x0,
                                 double t0, double t_end, const IntegratorConfig& config);

/// Euclidean norm of <nabla>_V V along the curve, with V = <y>: the
/// derivative of V is a five-point finite difference whose stencil stays
/// inside the element of the evaluation point (one-sided near the ends and
/// the element edges), plus <Gamma> V V. Throws MismatchedSampling unless the
/// curve is on a uniform grid with one moment set per point and at least
/// five points in every element it visits.
std::vector<double> mean_field_defect(const Lattice& lattice,
                                      const std::vector<MomentSet>& moments_along,
                                      const Trajectory& curve);

/// Geodesic of <Gamma> with the moments prescribed as a function of t by a
/// reference run (not transported along the new curve). The RK4 step is
/// `step`; step / 2 must be a multiple of the reference spacing so every
/// stage lands on a reference sample. Throws InvalidArgument otherwise and
/// ReferenceSpanExceeded if [initial.t, t_end] leaves the reference.
Trajectory integrate_prescribed_geodesic(const Lattice& lattice, const AveragedRun& reference,
                                         const TrajectoryState& initial, double t_end, double step);

enum class JacobiMode {
  Full,        // <Gamma> from the transported moments
  Linearized,  // <y> replaced by X' (delta moments at the reference velocity)
};

struct JacobiOptions {
  double step = 2e-3;  // step / 2 must be a multiple of the reference spacing
  JacobiMode mode = JacobiMode::Full;
  FrameMode frame = FrameMode::inertial();
};

struct JacobiRun {
  JacobiSeries series;
  std::vector<Vec4> epsilon;  // <y> - X' at each output point
  /// max over the run of |eta(X', xi')| / |xi'| (Euclidean |xi'|).
  double max_decoupling_ratio = 0.0;
  bool decoupling_violated = false;  // ratio above 1e-2 somewhere
  std::vector<std::string> warnings;
};

/// xi'' = -2 Gamma(xi', X') - xi^l d_l Gamma(X', X') - inertial terms, along
/// the reference run. Throws ReferenceSpanExceeded, InvalidArgument (grid).
JacobiRun integrate_jacobi_full(const Lattice& lattice, const AveragedRun& reference,
                                const JacobiState& initial, double t_end,
                                const JacobiOptions& options);

/// Closed-form linear transverse system in path length l:
///   dipole:           xi1'' + xi1 / rho^2 = 0,        xi3'' = 0
///   quad_dipole:      xi1'' + (1/rho^2 - b1) xi1 = 0, xi3'' + b1 xi3 = 0
///   skew_quad_dipole: xi1'' + (1/rho^2 + b1) xi1 = 0, xi3'' - b1 xi3 = 0
/// xi0 and xi2 move freely. Throws UnsupportedElement, InvalidArgument (rho).
JacobiSeries integrate_transverse_linear(const Element& element, double rho,
                                         const JacobiState& initial, double l_end,
                                         const IntegratorConfig& config);

/// (K_horizontal, K_vertical) of the transverse system above.
std::pair<double, double> transverse_focusing(const Element& element, double rho);

/// gamma(t) = dX^0/dt of a reference, linearly interpolated.
class GammaSeries {
 public:
  GammaSeries(std::vector<double> t, std::vector<double> gamma);
  static GammaSeries constant(double gamma, double t0, double t1);
  static GammaSeries from_trajectory(const Trajectory& reference);

  /// Throws ReferenceSpanExceeded outside the sampled span.
  double at(double t) const;

 private:
  std::vector<double> t_;
  std::vector<double> gamma_;
};

/// Linear longitudinal deviation in an electric section:
///   const_e: xi2'' = -E2 xi2',             xi0'' = -E2 xi2'
///   rf:      xi2'' =  2 gamma(t) E2(0) xi2, xi0'' = -2 gamma(t) E2(0) xi2
/// xi1 and xi3 move freely. Throws UnsupportedElement.
JacobiSeries integrate_longitudinal(const Element& element, const GammaSeries& gamma,
                                    const JacobiState& initial, double t_end,
                                    const IntegratorConfig& config);

/// Reparameterizes a deviation run by path length l = X^2(t) - X^2(t0),
/// dividing xi' by dX^2/dt. Throws MismatchedSampling unless the reference
/// has a sample at every series time.
JacobiSeries reparameterize_by_path_length(const JacobiSeries& series, const Trajectory& reference);

/// Batched Lorentz tracking used by integrate_lorentz and the ensemble
/// oracle. `state` is structure-of-arrays (x0..x3, v0..v3 for n particles,
/// 8 n doubles). The observer sees the state at every grid time including
/// the first; returning false stops early. Errors name the particle index
/// when n > 1.
void track_batch(const Lattice& lattice, std::vector<double>& state, std::size_t n,
                 const std::vector<double>& grid, const IntegratorConfig& config,
                 const std::function<bool(std::size_t, double, const std::vector<double>&)>& observer,
                 kernels::Backend backend);

/// Throws StepTooLarge if step exceeds a quarter of the shortest element.
void check_step(const Lattice& lattice, double step);

}  // namespace beamgeo
