#include "beamgeo/tensor.hpp"

#include <cmath>

#include "beamgeo/error.hpp"

namespace beamgeo {

double euclidean_norm(const Vec4& v) noexcept {
  return std::sqrt(((v[0] * v[0] + v[1] * v[1]) + v[2] * v[2]) + v[3] * v[3]);
}

double euclidean_distance(const Vec4& a, const Vec4& b) noexcept { return euclidean_norm(a - b); }

double spatial_distance(const Vec4& a, const Vec4& b) noexcept {
  const double d1 = a[1] - b[1];
  const double d2 = a[2] - b[2];
  const double d3 = a[3] - b[3];
  return std::sqrt((d1 * d1 + d2 * d2) + d3 * d3);
}

Vec4 operator+(const Vec4& a, const Vec4& b) noexcept {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

Vec4 operator-(const Vec4& a, const Vec4& b) noexcept {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}

Vec4 operator*(double s, const Vec4& a) noexcept { return {s * a[0], s * a[1], s * a[2], s * a[3]}; }

Vec4 apply(const Mat4& m, const Vec4& v) noexcept {
  Vec4 out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = ((m[i][0] * v[0] + m[i][1] * v[1]) + m[i][2] * v[2]) + m[i][3] * v[3];
  }
  return out;
}

Connection3& Connection3::operator+=(const Connection3& other) noexcept {
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = 0; k < 4; ++k) c_[i][j][k] += other.c_[i][j][k];
  return *this;
}

bool Connection3::is_symmetric() const noexcept {
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = j + 1; k < 4; ++k)
        if (c_[i][j][k] != c_[i][k][j]) return false;
  return true;
}

Connection3 operator+(Connection3 a, const Connection3& b) noexcept {
  a += b;
  return a;
}

Vec4 contract_geodesic(const Connection3& gamma, const Vec4& u, const Vec4& v) noexcept {
  // Summed over unordered pairs so that swapping u and v only permutes the
  // addends of each symmetric pair term.
  Vec4 out{};
  for (std::size_t i = 0; i < 4; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      acc += gamma(i, j, j) * (u[j] * v[j]);
      for (std::size_t k = j + 1; k < 4; ++k) {
        acc += gamma(i, j, k) * (u[j] * v[k] + u[k] * v[j]);
      }
    }
    out[i] = acc;
  }
  return out;
}

void Sym3::set(std::size_t m, std::size_t s, std::size_t l, double value) noexcept {
  c_[m][s][l] = value;
  c_[m][l][s] = value;
  c_[s][m][l] = value;
  c_[s][l][m] = value;
  c_[l][m][s] = value;
  c_[l][s][m] = value;
}

Sym3 Sym3::outer_cube(const Vec4& u) noexcept {
  Sym3 out;
  for (const auto& t : sorted_triples()) {
    out.set(t[0], t[1], t[2], (u[t[0]] * u[t[1]]) * u[t[2]]);
  }
  return out;
}

bool Sym3::is_symmetric() const noexcept {
  for (std::size_t m = 0; m < 4; ++m)
    for (std::size_t s = 0; s < 4; ++s)
      for (std::size_t l = 0; l < 4; ++l) {
        const double v = c_[m][s][l];
        if (v != c_[m][l][s] || v != c_[s][m][l] || v != c_[s][l][m] || v != c_[l][m][s] ||
            v != c_[l][s][m])
          return false;
      }
  return true;
}

const std::array<std::array<std::size_t, 3>, 20>& sorted_triples() noexcept {
  static const auto table = [] {
    std::array<std::array<std::size_t, 3>, 20> t{};
    std::size_t n = 0;
    for (std::size_t m = 0; m < 4; ++m)
      for (std::size_t s = m; s < 4; ++s)
        for (std::size_t l = s; l < 4; ++l) t[n++] = {m, s, l};
    return t;
  }();
  return table;
}

bool lowered_is_antisymmetric(const Mat4& f) noexcept {
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i; j < 4; ++j) {
      const double fij = metric::eta(i, i) * f[i][j];
      const double fji = metric::eta(j, j) * f[j][i];
      if (fij + fji != 0.0) return false;
    }
  return true;
}

FieldSample::FieldSample(const Mat4& f_mixed, const std::array<Mat4, 4>& grad)
    : f_(f_mixed), grad_(grad) {
  if (!lowered_is_antisymmetric(f_)) {
    throw Error(Errc::InvalidField, "lowered field tensor is not antisymmetric");
  }
  for (const auto& g : grad_) {
    if (!lowered_is_antisymmetric(g)) {
      throw Error(Errc::InvalidField, "lowered field gradient is not antisymmetric");
    }
  }
}

Mat4 FieldSample::lowered() const noexcept {
  Mat4 out{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) out[i][j] = metric::eta(i, i) * f_[i][j];
  return out;
}

}  // namespace beamgeo
