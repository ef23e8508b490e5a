#pragma once

// Discrete representation of the one-particle velocity distribution at a point
// of the reference trajectory, and its moments.
//
// The continuum measure dvol = sqrt|det eta| dy^1 dy^2 dy^3 / y^0 is absorbed
// into the sample weights: a weighted ensemble is the quadrature rule.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "beamgeo/tensor.hpp"

namespace beamgeo {

using Vec3 = std::array<double, 3>;

struct VelocitySample {
  Vec4 y{1.0, 0.0, 0.0, 0.0};
  double w = 1.0;
};

/// Relative on-shell tolerance used for sample validation:
/// |eta(y,y) - 1| <= kShellTolerance * max(1, (y^0)^2).
inline constexpr double kShellTolerance = 1e-12;

class BeamEnsemble {
 public:
  /// Throws EmptyEnsemble, ZeroWeight (total weight not positive, or a
  /// negative/non-finite weight) or OffShellSample.
  explicit BeamEnsemble(std::vector<VelocitySample> samples, std::string label = {});

  const std::vector<VelocitySample>& samples() const noexcept { return samples_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t size() const noexcept { return samples_.size(); }

  /// Velocities as structure-of-arrays (4 * n) and weights (n).
  std::vector<double> velocity_soa() const;
  std::vector<double> weights() const;

 private:
  std::vector<VelocitySample> samples_;
  std::string label_;
};

struct MomentSet {
  double vol = 1.0;
  Vec4 first{1.0, 0.0, 0.0, 0.0};  // <y^i>
  Sym3 third;                      // <y^m y^s y^l>
};

/// Moments of the single-velocity distribution at u: first = u, third = u u u.
MomentSet delta_moments(const Vec4& u, double vol = 1.0);

struct EnergyStats {
  double energy = 1.0;  // min y^0 over the support
  double alpha = 0.0;   // diameter of the support (Euclidean, lab components)
};

/// (sqrt(1 + |p|^2), p).
Vec4 project_to_hyperboloid(const Vec3& spatial) noexcept;

/// vol = sum w, first = sum(w y)/vol, third = sum(w y y y)/vol. Sums follow
/// the interleaved lane order documented in kernels.hpp, so results are
/// bit-reproducible for a given sample list and identical across backends.
MomentSet compute_moments(const BeamEnsemble& ensemble);
MomentSet compute_moments(std::span<const VelocitySample> samples);

EnergyStats energy_stats(const BeamEnsemble& ensemble);
EnergyStats energy_stats(std::span<const VelocitySample> samples);

/// n unit-weight samples whose spatial parts are mean + sigma * z, z drawn
/// from std::normal_distribution over std::mt19937_64(seed) in component
/// order 1, 2, 3 per sample. The draws do not depend on sigma, so beams that
/// differ only in sigma are exact rescalings of each other.
BeamEnsemble sample_gaussian_beam(const Vec3& mean, const Vec3& sigma, std::size_t n,
                                  std::uint64_t seed);

/// Snapshot format: header "y0,y1,y2,y3,w", one sample per row.
std::string ensemble_csv(const BeamEnsemble& ensemble);
BeamEnsemble parse_ensemble_csv(const std::string& text, std::string label = {});

/// Beam description file: key=value lines
///   distribution=gaussian|delta
///   mean=<f>,<f>,<f>      (spatial four-velocity components)
///   sigma=<f>,<f>,<f>     (gaussian only)
///   n=<int>
///   seed=<int>
/// '#' starts a comment.
struct BeamSpec {
  enum class Distribution { Delta, Gaussian };
  Distribution distribution = Distribution::Delta;
  Vec3 mean{0.0, 0.0, 0.0};
  Vec3 sigma{0.0, 0.0, 0.0};
  std::size_t n = 1;
  std::uint64_t seed = 0;
};

BeamSpec parse_beam_spec(const std::string& text);
BeamEnsemble realize(const BeamSpec& spec);

}  // namespace beamgeo
