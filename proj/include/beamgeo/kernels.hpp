#pragma once

// Data-parallel inner loops over particle samples.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant selected at runtime. Both variants perform the same IEEE operations
// in the same order per element (no FMA contraction, identical reduction
// trees), so their outputs are bitwise equal; the kernel tests assert this.
//
// Arrays are structure-of-arrays: a quantity with C components for n
// particles is stored component-major, element (c, p) at index c * n + p.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace beamgeo::kernels {

enum class Backend { Scalar, Avx2 };

std::string_view to_string(Backend b) noexcept;

/// True when the AVX2 variants were compiled in and the CPU supports them.
bool avx2_available() noexcept;

/// Backend used by the dispatching entry points. Defaults to the best
/// available; the environment variable BEAMGEO_KERNELS=scalar forces scalar.
Backend active() noexcept;

/// Overrides the active backend (falls back to scalar if AVX2 is missing).
void set_active(Backend b) noexcept;

/// Lane count of the interleaved reductions. Sample p contributes to partial
/// sum p % kLanes; partials combine as (s0 + s1) + (s2 + s3).
inline constexpr std::size_t kLanes = 4;

struct MomentSums {
  double weight = 0.0;
  std::array<double, 4> first{};   // sum w y^i
  std::array<double, 20> third{};  // sum w (y^m y^s) y^l over sorted_triples()
};

/// y holds 4 * n doubles (SoA), w holds n weights.
MomentSums accumulate_moments(std::span<const double> y, std::span<const double> w, std::size_t n,
                              Backend b);

/// max over pairs p < q of the squared Euclidean distance between 4-velocities.
double max_pair_distance_sq(std::span<const double> y, std::size_t n, Backend b);

/// a^i = -sqrt(eta(v, v)) * (((F^i_0 v^0 + F^i_1 v^1) + F^i_2 v^2) + F^i_3 v^3).
/// f holds 16 * n (entry i*4+j major), v and a hold 4 * n.
void lorentz_accel(std::span<const double> f, std::span<const double> v, std::span<double> a,
                   std::size_t n, Backend b);

/// out = base + c * k, elementwise.
void add_scaled(std::span<const double> base, std::span<const double> k, double c,
                std::span<double> out, Backend b);

/// out = base + h6 * (((k1 + 2 k2) + 2 k3) + k4), elementwise.
void rk4_combine(std::span<const double> base, std::span<const double> k1,
                 std::span<const double> k2, std::span<const double> k3,
                 std::span<const double> k4, double h6, std::span<double> out, Backend b);

// Convenience overloads that use active().
MomentSums accumulate_moments(std::span<const double> y, std::span<const double> w, std::size_t n);
double max_pair_distance_sq(std::span<const double> y, std::size_t n);

namespace scalar {
MomentSums accumulate_moments(const double* y, const double* w, std::size_t n);
double max_pair_distance_sq(const double* y, std::size_t n);
void lorentz_accel(const double* f, const double* v, double* a, std::size_t n);
void add_scaled(const double* base, const double* k, double c, double* out, std::size_t len);
void rk4_combine(const double* base, const double* k1, const double* k2, const double* k3,
                 const double* k4, double h6, double* out, std::size_t len);
}  // namespace scalar

namespace avx2 {
MomentSums accumulate_moments(const double* y, const double* w, std::size_t n);
double max_pair_distance_sq(const double* y, std::size_t n);
void lorentz_accel(const double* f, const double* v, double* a, std::size_t n);
void add_scaled(const double* base, const double* k, double c, double* out, std::size_t len);
void rk4_combine(const double* base, const double* k1, const double* k2, const double* k3,
                 const double* k4, double h6, double* out, std::size_t len);
}  // namespace avx2

}  // namespace beamgeo::kernels
