#include <cmath>

#include "beamgeo/kernels.hpp"
#include "beamgeo/tensor.hpp"

namespace beamgeo::kernels::scalar {

MomentSums accumulate_moments(const double* y, const double* w, std::size_t n) {
  const double* y0 = y;
  const double* y1 = y + n;
  const double* y2 = y + 2 * n;
  const double* y3 = y + 3 * n;
  const auto& triples = sorted_triples();

  std::array<double, kLanes> wsum{};
  std::array<std::array<double, kLanes>, 4> first{};
  std::array<std::array<double, kLanes>, 20> third{};

  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t lane = p % kLanes;
    const double wp = w[p];
    const std::array<double, 4> yp{y0[p], y1[p], y2[p], y3[p]};
    wsum[lane] += wp;
    for (std::size_t i = 0; i < 4; ++i) first[i][lane] += wp * yp[i];
    for (std::size_t t = 0; t < 20; ++t) {
      const auto& tr = triples[t];
      third[t][lane] += wp * ((yp[tr[0]] * yp[tr[1]]) * yp[tr[2]]);
    }
  }

  auto fold = [](const std::array<double, kLanes>& s) { return (s[0] + s[1]) + (s[2] + s[3]); };
  MomentSums out;
  out.weight = fold(wsum);
  for (std::size_t i = 0; i < 4; ++i) out.first[i] = fold(first[i]);
  for (std::size_t t = 0; t < 20; ++t) out.third[t] = fold(third[t]);
  return out;
}

double max_pair_distance_sq(const double* y, std::size_t n) {
  double best = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      const double d0 = y[p] - y[q];
      const double d1 = y[n + p] - y[n + q];
      const double d2 = y[2 * n + p] - y[2 * n + q];
      const double d3 = y[3 * n + p] - y[3 * n + q];
      const double d = ((d0 * d0 + d1 * d1) + d2 * d2) + d3 * d3;
      if (d > best) best = d;
    }
  }
  return best;
}

void lorentz_accel(const double* f, const double* v, double* a, std::size_t n) {
  for (std::size_t p = 0; p < n; ++p) {
    const double v0 = v[p];
    const double v1 = v[n + p];
    const double v2 = v[2 * n + p];
    const double v3 = v[3 * n + p];
    const double norm = std::sqrt(((v0 * v0 - v1 * v1) - v2 * v2) - v3 * v3);
    for (std::size_t i = 0; i < 4; ++i) {
      const double* row = f + (i * 4) * n;
      const double fv = ((row[p] * v0 + row[n + p] * v1) + row[2 * n + p] * v2) + row[3 * n + p] * v3;
      a[i * n + p] = -(fv * norm);
    }
  }
}

void add_scaled(const double* base, const double* k, double c, double* out, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = base[i] + c * k[i];
}

void rk4_combine(const double* base, const double* k1, const double* k2, const double* k3,
                 const double* k4, double h6, double* out, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    out[i] = base[i] + h6 * (((k1[i] + 2.0 * k2[i]) + 2.0 * k3[i]) + k4[i]);
  }
}

}  // namespace beamgeo::kernels::scalar
