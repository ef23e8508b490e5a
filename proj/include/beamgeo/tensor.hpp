#pragma once

// Minkowski tensor algebra in c = 1 units.
//
// Signature is fixed to diag(+1, -1, -1, -1) with index 0 the laboratory time
// axis, so four-velocities of massive particles live on eta(y, y) = +1 with
// y^0 >= 1. Field tensors are stored in mixed form F^i_j, which is the form
// that enters the equations of motion directly.

#include <array>
#include <cstddef>

namespace beamgeo {

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;

namespace metric {

constexpr double eta(std::size_t i, std::size_t j) noexcept {
  if (i != j) return 0.0;
  return i == 0 ? 1.0 : -1.0;
}

// Inverse metric; numerically identical to eta for this signature.
constexpr double eta_inv(std::size_t i, std::size_t j) noexcept { return eta(i, j); }

constexpr double determinant() noexcept { return -1.0; }

}  // namespace metric

/// Covariant components eta_{ij} v^j.
constexpr Vec4 lower(const Vec4& v) noexcept { return {v[0], -v[1], -v[2], -v[3]}; }

/// Contravariant components eta^{ij} w_j.
constexpr Vec4 raise(const Vec4& w) noexcept { return {w[0], -w[1], -w[2], -w[3]}; }

/// eta(u, v), evaluated as ((u0 v0 - u1 v1) - u2 v2) - u3 v3.
constexpr double dot(const Vec4& u, const Vec4& v) noexcept {
  return ((u[0] * v[0] - u[1] * v[1]) - u[2] * v[2]) - u[3] * v[3];
}

double euclidean_norm(const Vec4& v) noexcept;
double euclidean_distance(const Vec4& a, const Vec4& b) noexcept;
double spatial_distance(const Vec4& a, const Vec4& b) noexcept;

Vec4 operator+(const Vec4& a, const Vec4& b) noexcept;
Vec4 operator-(const Vec4& a, const Vec4& b) noexcept;
Vec4 operator*(double s, const Vec4& a) noexcept;

/// M^i_j v^j.
Vec4 apply(const Mat4& m, const Vec4& v) noexcept;

/// Rank-(1,2) coefficient array Gamma^i_{jk}, symmetric in the lower pair.
/// The setter writes both (j,k) and (k,j), so symmetry holds bitwise.
class Connection3 {
 public:
  Connection3() = default;

  double operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return c_[i][j][k];
  }

  void set(std::size_t i, std::size_t j, std::size_t k, double value) noexcept {
    c_[i][j][k] = value;
    c_[i][k][j] = value;
  }

  Connection3& operator+=(const Connection3& other) noexcept;
  bool is_symmetric() const noexcept;

 private:
  std::array<std::array<std::array<double, 4>, 4>, 4> c_{};
};

Connection3 operator+(Connection3 a, const Connection3& b) noexcept;

/// Gamma^i_{jk} u^j v^k.
Vec4 contract_geodesic(const Connection3& gamma, const Vec4& u, const Vec4& v) noexcept;

/// Totally symmetric rank-3 array, used for third velocity moments.
class Sym3 {
 public:
  Sym3() = default;

  double operator()(std::size_t m, std::size_t s, std::size_t l) const noexcept {
    return c_[m][s][l];
  }

  /// Writes all permutations of (m, s, l).
  void set(std::size_t m, std::size_t s, std::size_t l, double value) noexcept;

  /// u^m u^s u^l, each entry evaluated as (u^a u^b) u^c with a <= b <= c.
  static Sym3 outer_cube(const Vec4& u) noexcept;

  bool is_symmetric() const noexcept;

 private:
  std::array<std::array<std::array<double, 4>, 4>, 4> c_{};
};

/// The twenty sorted index triples (m <= s <= l), in the order used by the
/// moment kernels.
const std::array<std::array<std::size_t, 3>, 20>& sorted_triples() noexcept;

/// Field tensor and its spatial gradient at one point.
///
/// grad[l] holds d_l F^i_j. Construction checks that the lowered tensor
/// F_{ij} = eta_{ik} F^k_j (and each gradient slice) is exactly antisymmetric.
class FieldSample {
 public:
  FieldSample() = default;
  FieldSample(const Mat4& f_mixed, const std::array<Mat4, 4>& grad);

  const Mat4& f_mixed() const noexcept { return f_; }
  const std::array<Mat4, 4>& grad() const noexcept { return grad_; }

  /// F_{ij} = eta_{ik} F^k_j.
  Mat4 lowered() const noexcept;

  static FieldSample zero() noexcept { return FieldSample{}; }

 private:
  Mat4 f_{};
  std::array<Mat4, 4> grad_{};
};

bool lowered_is_antisymmetric(const Mat4& f_mixed) noexcept;

}  // namespace beamgeo
