#pragma once

// Brute-force checks: every beam sample pushed through the exact Lorentz
// force, compared against the averaged and linearized descriptions.

#include <functional>
#include <string>
#include <vector>

#include "beamgeo/dynamics.hpp"
#include "beamgeo/ensemble.hpp"
#include "beamgeo/kernels.hpp"
#include "beamgeo/lattice.hpp"

namespace beamgeo {

/// Weighted mean of per-sample values, reduced as
///   v_0 + (sum_p w_p (v_p - v_0)) / sum_p w_p
/// with the interleaved four-lane order of the kernels. Identical samples
/// give back v_0 bit for bit.
Vec4 weighted_mean(const std::vector<Vec4>& values, const std::vector<double>& weights);

/// Mean position and velocity of the ensemble at every proper-time grid
/// point, all samples starting at x0 at t0. Errors name the sample index.
Trajectory ensemble_track(const Lattice& lattice, const BeamEnsemble& ensemble, const Vec4& x0, double t0,
                          double t_end, const IntegratorConfig& config,
                          kernels::Backend backend = kernels::active());

/// How endpoints of different curves are compared.
enum class ComparisonTime {
  Coordinate,  // at equal laboratory time x^0 = x0^0 + s (default)
  Proper,      // at equal curve parameter t = s
};

/// Position of a curve at the comparison time, by cubic Hermite
/// interpolation between the bracketing samples. Throws OutOfSpan.
Vec4 trajectory_endpoint(const Trajectory& curve, double s, ComparisonTime mode);

/// Weighted mean of the sample positions at the comparison time.
Vec4 ensemble_endpoint(const Lattice& lattice, const BeamEnsemble& ensemble, const Vec4& x0, double s,
                       const IntegratorConfig& config, ComparisonTime mode,
                       kernels::Backend backend = kernels::active());

/// Distance between the averaged geodesic (moments of the ensemble, started
/// at x0 with the normalized mean velocity) and the ensemble mean, spatial
/// Euclidean at equal coordinate time or four-component Euclidean at equal
/// proper time.
double theorem1_deviation(const Lattice& lattice, const BeamEnsemble& ensemble, const Vec4& x0, double s,
                          const IntegratorConfig& config, ComparisonTime mode = ComparisonTime::Coordinate);

using BeamFamily = std::function<BeamEnsemble(double alpha)>;

/// Gaussian beams around spatial mean (0, sqrt(gamma^2 - 1), 0) with
/// sigma = alpha / 9 per component, n samples, fixed seed. The support
/// diameter of such a beam is close to alpha for n ~ 1e4.
BeamFamily gaussian_family(double gamma, std::size_t n, std::uint64_t seed);

struct ScalingReport {
  std::vector<double> alphas;
  std::vector<double> deviations;
  double fitted_exponent = 0.0;
  double fitted_prefactor = 0.0;
};

struct ScanConfig {
  IntegratorConfig integrator{};
  ComparisonTime time = ComparisonTime::Coordinate;
  Vec4 x0{0.0, 0.0, 0.0, 0.0};
};

/// Least-squares fit of log(deviation) against log(alpha). Throws
/// DegenerateFit for fewer than three alphas or a non-positive deviation,
/// InvalidArgument unless the alphas are strictly decreasing in (0, 0.2].
ScalingReport theorem1_scan(const Lattice& lattice, const BeamFamily& family, const std::vector<double>& alphas,
                            double s, const ScanConfig& config);

/// JSON object with keys alphas, deviations, fitted_exponent, fitted_prefactor.
std::string to_json(const ScalingReport& report);

/// Slope and exp(intercept) of the least-squares line through (log x, log y).
std::pair<double, double> fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

struct JacobiCheckReport {
  std::vector<double> scales;
  std::vector<double> errors;  // |x_sigma - x_0 - sigma xi| at the end, Euclidean
  double fitted_order = 0.0;   // NaN when fewer than two positive errors
};

/// For each scale sigma, integrates the geodesic of <Gamma> (moments
/// prescribed by the reference) from X + sigma xi0 with velocity
/// X' + sigma xi0', and compares with the unperturbed one plus sigma times the
/// Jacobi solution. All curves use options.step.
JacobiCheckReport jacobi_vs_two_geodesics(const Lattice& lattice, const AveragedRun& reference,
                                          const JacobiState& xi0, const std::vector<double>& scales,
                                          double t_end, const JacobiOptions& options);

/// A probe point: reference position x and deviation xi.
struct Probe {
  Vec4 x;
  Vec4 xi;
};

/// Worst relative error between central differences (in xi) of the field and
/// the analytic gradient, normalized by the largest analytic entry (or 1e-12).
double validate_field_gradients(const Lattice& lattice, const std::vector<Probe>& probes, double fd_step = 1e-5);

}  // namespace beamgeo
