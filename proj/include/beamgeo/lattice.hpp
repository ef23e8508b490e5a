#pragma once

// Field elements and their composition into a beamline along x^2.
//
// Element matrices are mixed tensors F^i_j, with the charge-to-mass ratio
// absorbed into the strengths (b0, e2, e2_0, w_rf in 1/m, b1 in 1/m^2).
// Quadrupole terms depend on the transverse coordinates x^1, x^3 measured
// from the design axis. Element boundaries are hard edged.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "beamgeo/tensor.hpp"

namespace beamgeo {

enum class ElementKind { Drift, Dipole, NormalQuadDipole, SkewQuadDipole, ConstantE, RFCavity };

/// Lattice-file keyword: drift, dipole, quad_dipole, skew_quad_dipole, const_e, rf.
std::string_view keyword(ElementKind kind) noexcept;

struct Element {
  ElementKind kind = ElementKind::Drift;
  double length = 1.0;
  double b0 = 0.0;
  double b1 = 0.0;
  double e2 = 0.0;
  double e2_0 = 0.0;
  double w_rf = 0.0;

  static Element drift(double length);
  static Element dipole(double length, double b0);
  static Element quad_dipole(double length, double b0, double b1);
  static Element skew_quad_dipole(double length, double b0, double b1);
  static Element const_e(double length, double e2);
  static Element rf(double length, double e2_0, double w_rf);

  bool has_dipole() const noexcept;
};

/// F^i_j of one element at absolute position `position` (no gradient, no
/// validation; the hot path of the trackers).
Mat4 element_matrix(const Element& element, const Vec4& position);

/// Field of one element at absolute position `position`, with exact
/// analytic gradient. RF phase is measured from the lattice entry (x^2 = 0).
FieldSample element_field(const Element& element, const Vec4& position);

class Lattice {
 public:
  Lattice() = default;
  /// Throws NegativeLength for non-positive lengths, InvalidArgument for
  /// non-finite strengths.
  explicit Lattice(std::vector<Element> elements);

  const std::vector<Element>& elements() const noexcept { return elements_; }
  double total_length() const noexcept { return total_length_; }
  double start_of(std::size_t index) const { return starts_.at(index); }
  double min_element_length() const noexcept;

  /// Index of the element containing longitudinal coordinate s; a point on
  /// a boundary belongs to the downstream element (the last element keeps
  /// its exit face). Throws OutOfLattice outside [0, total_length].
  std::size_t locate(double s) const;

  /// Element `index` evaluated at an arbitrary position (no range check).
  FieldSample field_in(std::size_t index, const Vec4& position) const;

 private:
  std::vector<Element> elements_;
  std::vector<double> starts_;
  double total_length_ = 0.0;
};

/// Field of the element containing x^2, evaluated at x + xi.
FieldSample field_at(const Lattice& lattice, const Vec4& x, const Vec4& xi);

/// 1/|b0| for dipole-bearing elements (unit spatial momentum normalization),
/// nullopt for drifts and electric sections. Throws ZeroStrength if b0 = 0.
std::optional<double> curvature_radius(const Element& element);

/// Parses the line-oriented lattice format
///   element <kind> length=<f> [b0=<f>] [b1=<f>] [e2=<f>] [e2_0=<f>] [w_rf=<f>]
/// with '#' comments. Keys that do not apply to the kind are rejected.
Lattice parse_lattice(std::string_view text);
Lattice load_lattice(const std::string& path);

}  // namespace beamgeo
