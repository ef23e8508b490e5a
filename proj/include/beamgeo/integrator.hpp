#pragma once

// Fixed-step classical RK4 and the step grid shared by every integrator.

#include <array>
#include <cstddef>
#include <vector>

namespace beamgeo {

/// Grid t_k = t0 + k h for k < n, closed by t_end; the last step is shorter
/// when the span is not a multiple of h. Backward spans (t_end < t0) use a
/// negative step. Throws InvalidArgument for h <= 0 or a non-finite span.
std::vector<double> step_grid(double t0, double t_end, double h);

/// y + h6 * (((k1 + 2 k2) + 2 k3) + k4), the same rounding as the kernels.
template <std::size_t N>
std::array<double, N> rk4_combine(const std::array<double, N>& y, const std::array<double, N>& k1,
                                  const std::array<double, N>& k2, const std::array<double, N>& k3,
                                  const std::array<double, N>& k4, double h6) {
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = y[i] + h6 * (((k1[i] + 2.0 * k2[i]) + 2.0 * k3[i]) + k4[i]);
  }
  return out;
}

template <std::size_t N>
std::array<double, N> add_scaled(const std::array<double, N>& y, const std::array<double, N>& k,
                                 double c) {
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + c * k[i];
  return out;
}

/// One RK4 step of y' = f(t, y).
template <std::size_t N, class F>
std::array<double, N> rk4_step(const F& f, double t, const std::array<double, N>& y, double h) {
  const double half = 0.5 * h;
  const auto k1 = f(t, y);
  const auto k2 = f(t + half, add_scaled(y, k1, half));
  const auto k3 = f(t + half, add_scaled(y, k2, half));
  const auto k4 = f(t + h, add_scaled(y, k3, h));
  return rk4_combine(y, k1, k2, k3, k4, h / 6.0);
}

}  // namespace beamgeo
