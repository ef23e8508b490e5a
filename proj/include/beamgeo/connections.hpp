#pragma once

// Connection coefficients: Levi-Civita (frame dependent), Lorentz, and the
// moment-averaged Lorentz connection.
//
// Field part, for a first moment y and third moment T:
//   G^i_{jk} = 1/2 (F^i_j y_k + F^i_k y_j) + 1/2 (F^i_m y^m eta_{jk} - F^i_m T^m_{jk})
// with indices lowered by eta. The Lorentz connection is the case T = y y y.

#include <array>

#include "beamgeo/ensemble.hpp"
#include "beamgeo/tensor.hpp"

namespace beamgeo {

struct FrameMode {
  enum class Kind { InertialCartesian, ArcAdapted };
  Kind kind = Kind::InertialCartesian;
  double rho = 0.0;  // m, ArcAdapted only

  static FrameMode inertial() noexcept { return {}; }
  /// Throws InvalidArgument unless rho > 0.
  static FrameMode arc_adapted(double rho);
};

/// On-shell tolerance for lorentz_connection: |eta(y,y) - 1| <= 1e-9.
inline constexpr double kOnShellTolerance = 1e-9;

/// Levi-Civita coefficients on the reference curve (xi = 0). Zero in both
/// modes: in the arc-adapted frame the centripetal coefficients vanish on
/// the reference and only their gradient survives.
Connection3 levi_civita(const FrameMode& mode);

/// d_l Gamma^i_{jk} of the frame, indexed [l]. ArcAdapted(rho) has
/// d_1 Gamma^1_{ab} = delta_ab / rho^2 for spatial a, b.
std::array<Connection3, 4> levi_civita_gradient(const FrameMode& mode);

/// Inertial part of the Jacobi equation,
///   (Gamma + xi^l d_l Gamma)(Xdot Xdot + 2 Xdot xidot),
/// i.e. the term that appears on the left-hand side next to xi''.
Vec4 inertial_acceleration(const FrameMode& mode, const Vec4& x_dot, const Vec4& xi,
                           const Vec4& xi_dot);

/// Field-dependent part for an arbitrary mixed matrix (F or one slice of dF).
Connection3 field_connection(const Mat4& f, const Vec4& first, const Sym3& third);

/// Throws OffShell if |eta(y,y) - 1| > kOnShellTolerance.
Connection3 lorentz_connection(const FieldSample& field, const Vec4& y,
                               const FrameMode& mode = FrameMode::inertial());

Connection3 averaged_connection(const FieldSample& field, const MomentSet& moments,
                                const FrameMode& mode = FrameMode::inertial());

/// d_l <Gamma>, with the moments held fixed (they are attached to the
/// reference curve, not to the deviation).
std::array<Connection3, 4> averaged_connection_gradient(const FieldSample& field,
                                                        const MomentSet& moments,
                                                        const FrameMode& mode = FrameMode::inertial());

}  // namespace beamgeo
