// Compiled with -mavx2 only (no -mfma): each lane performs exactly the
// multiply/add sequence of the scalar reference.

#include <immintrin.h>

#include <cmath>

#include "beamgeo/kernels.hpp"
#include "beamgeo/tensor.hpp"

namespace beamgeo::kernels::avx2 {

MomentSums accumulate_moments(const double* y, const double* w, std::size_t n) {
  const double* yc[4] = {y, y + n, y + 2 * n, y + 3 * n};
  const auto& triples = sorted_triples();

  __m256d wsum = _mm256_setzero_pd();
  __m256d first[4];
  __m256d third[20];
  for (auto& f : first) f = _mm256_setzero_pd();
  for (auto& t : third) t = _mm256_setzero_pd();

  const std::size_t blocks = n / kLanes;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t p = b * kLanes;
    const __m256d wp = _mm256_loadu_pd(w + p);
    __m256d yp[4];
    for (int i = 0; i < 4; ++i) yp[i] = _mm256_loadu_pd(yc[i] + p);
    wsum = _mm256_add_pd(wsum, wp);
    for (int i = 0; i < 4; ++i) first[i] = _mm256_add_pd(first[i], _mm256_mul_pd(wp, yp[i]));
    for (std::size_t t = 0; t < 20; ++t) {
      const auto& tr = triples[t];
      const __m256d prod = _mm256_mul_pd(_mm256_mul_pd(yp[tr[0]], yp[tr[1]]), yp[tr[2]]);
      third[t] = _mm256_add_pd(third[t], _mm256_mul_pd(wp, prod));
    }
  }

  alignas(32) double lanes_w[kLanes];
  alignas(32) double lanes_first[4][kLanes];
  alignas(32) double lanes_third[20][kLanes];
  _mm256_store_pd(lanes_w, wsum);
  for (int i = 0; i < 4; ++i) _mm256_store_pd(lanes_first[i], first[i]);
  for (int t = 0; t < 20; ++t) _mm256_store_pd(lanes_third[t], third[t]);

  for (std::size_t p = blocks * kLanes; p < n; ++p) {
    const std::size_t lane = p % kLanes;
    const double wp = w[p];
    const double yp[4] = {yc[0][p], yc[1][p], yc[2][p], yc[3][p]};
    lanes_w[lane] += wp;
    for (int i = 0; i < 4; ++i) lanes_first[i][lane] += wp * yp[i];
    for (std::size_t t = 0; t < 20; ++t) {
      const auto& tr = triples[t];
      lanes_third[t][lane] += wp * ((yp[tr[0]] * yp[tr[1]]) * yp[tr[2]]);
    }
  }

  auto fold = [](const double* s) { return (s[0] + s[1]) + (s[2] + s[3]); };
  MomentSums out;
  out.weight = fold(lanes_w);
  for (int i = 0; i < 4; ++i) out.first[i] = fold(lanes_first[i]);
  for (int t = 0; t < 20; ++t) out.third[t] = fold(lanes_third[t]);
  return out;
}

double max_pair_distance_sq(const double* y, std::size_t n) {
  const double* yc[4] = {y, y + n, y + 2 * n, y + 3 * n};
  __m256d best_v = _mm256_setzero_pd();
  double best = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const __m256d a0 = _mm256_set1_pd(yc[0][p]);
    const __m256d a1 = _mm256_set1_pd(yc[1][p]);
    const __m256d a2 = _mm256_set1_pd(yc[2][p]);
    const __m256d a3 = _mm256_set1_pd(yc[3][p]);
    std::size_t q = p + 1;
    for (; q + kLanes <= n; q += kLanes) {
      const __m256d d0 = _mm256_sub_pd(a0, _mm256_loadu_pd(yc[0] + q));
      const __m256d d1 = _mm256_sub_pd(a1, _mm256_loadu_pd(yc[1] + q));
      const __m256d d2 = _mm256_sub_pd(a2, _mm256_loadu_pd(yc[2] + q));
      const __m256d d3 = _mm256_sub_pd(a3, _mm256_loadu_pd(yc[3] + q));
      __m256d d = _mm256_add_pd(_mm256_mul_pd(d0, d0), _mm256_mul_pd(d1, d1));
      d = _mm256_add_pd(d, _mm256_mul_pd(d2, d2));
      d = _mm256_add_pd(d, _mm256_mul_pd(d3, d3));
      best_v = _mm256_max_pd(best_v, d);
    }
    for (; q < n; ++q) {
      const double d0 = yc[0][p] - yc[0][q];
      const double d1 = yc[1][p] - yc[1][q];
      const double d2 = yc[2][p] - yc[2][q];
      const double d3 = yc[3][p] - yc[3][q];
      const double d = ((d0 * d0 + d1 * d1) + d2 * d2) + d3 * d3;
      if (d > best) best = d;
    }
  }
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, best_v);
  for (double l : lanes)
    if (l > best) best = l;
  return best;
}

void lorentz_accel(const double* f, const double* v, double* a, std::size_t n) {
  const std::size_t blocks = n / kLanes;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t p = b * kLanes;
    const __m256d v0 = _mm256_loadu_pd(v + p);
    const __m256d v1 = _mm256_loadu_pd(v + n + p);
    const __m256d v2 = _mm256_loadu_pd(v + 2 * n + p);
    const __m256d v3 = _mm256_loadu_pd(v + 3 * n + p);
    __m256d nn = _mm256_sub_pd(_mm256_mul_pd(v0, v0), _mm256_mul_pd(v1, v1));
    nn = _mm256_sub_pd(nn, _mm256_mul_pd(v2, v2));
    nn = _mm256_sub_pd(nn, _mm256_mul_pd(v3, v3));
    const __m256d norm = _mm256_sqrt_pd(nn);
    const __m256d sign = _mm256_set1_pd(-0.0);
    for (std::size_t i = 0; i < 4; ++i) {
      const double* row = f + (i * 4) * n;
      __m256d fv = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(row + p), v0),
                                 _mm256_mul_pd(_mm256_loadu_pd(row + n + p), v1));
      fv = _mm256_add_pd(fv, _mm256_mul_pd(_mm256_loadu_pd(row + 2 * n + p), v2));
      fv = _mm256_add_pd(fv, _mm256_mul_pd(_mm256_loadu_pd(row + 3 * n + p), v3));
      _mm256_storeu_pd(a + i * n + p, _mm256_xor_pd(_mm256_mul_pd(fv, norm), sign));
    }
  }
  for (std::size_t p = blocks * kLanes; p < n; ++p) {
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
  const __m256d cv = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    const __m256d r = _mm256_add_pd(_mm256_loadu_pd(base + i), _mm256_mul_pd(cv, _mm256_loadu_pd(k + i)));
    _mm256_storeu_pd(out + i, r);
  }
  for (; i < len; ++i) out[i] = base[i] + c * k[i];
}

void rk4_combine(const double* base, const double* k1, const double* k2, const double* k3,
                 const double* k4, double h6, double* out, std::size_t len) {
  const __m256d hv = _mm256_set1_pd(h6);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    __m256d s = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_mul_pd(two, _mm256_loadu_pd(k2 + i)));
    s = _mm256_add_pd(s, _mm256_mul_pd(two, _mm256_loadu_pd(k3 + i)));
    s = _mm256_add_pd(s, _mm256_loadu_pd(k4 + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(base + i), _mm256_mul_pd(hv, s)));
  }
  for (; i < len; ++i) out[i] = base[i] + h6 * (((k1[i] + 2.0 * k2[i]) + 2.0 * k3[i]) + k4[i]);
}

}  // namespace beamgeo::kernels::avx2
