#include <atomic>
#include <cstdlib>
#include <cstring>

#include "beamgeo/error.hpp"
#include "beamgeo/kernels.hpp"

namespace beamgeo::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(BEAMGEO_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend initial_backend() noexcept {
  const char* env = std::getenv("BEAMGEO_KERNELS");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return Backend::Scalar;
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& active_slot() noexcept {
  static std::atomic<Backend> slot{initial_backend()};
  return slot;
}

Backend resolve(Backend b) noexcept {
  return (b == Backend::Avx2 && !avx2_available()) ? Backend::Scalar : b;
}

}  // namespace

std::string_view to_string(Backend b) noexcept {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

bool avx2_available() noexcept {
  static const bool available = cpu_has_avx2();
  return available;
}

Backend active() noexcept { return active_slot().load(std::memory_order_relaxed); }

void set_active(Backend b) noexcept { active_slot().store(resolve(b), std::memory_order_relaxed); }

#if defined(BEAMGEO_HAVE_AVX2)
#define BEAMGEO_DISPATCH(b, call) \
  (resolve(b) == Backend::Avx2 ? avx2::call : scalar::call)
#else
#define BEAMGEO_DISPATCH(b, call) ((void)(b), scalar::call)
#endif

MomentSums accumulate_moments(std::span<const double> y, std::span<const double> w, std::size_t n,
                              Backend b) {
  if (y.size() != 4 * n || w.size() != n) {
    throw Error(Errc::InvalidArgument, "accumulate_moments: array sizes do not match sample count");
  }
  return BEAMGEO_DISPATCH(b, accumulate_moments(y.data(), w.data(), n));
}

double max_pair_distance_sq(std::span<const double> y, std::size_t n, Backend b) {
  if (y.size() != 4 * n) {
    throw Error(Errc::InvalidArgument, "max_pair_distance_sq: array size does not match sample count");
  }
  return BEAMGEO_DISPATCH(b, max_pair_distance_sq(y.data(), n));
}

void lorentz_accel(std::span<const double> f, std::span<const double> v, std::span<double> a,
                   std::size_t n, Backend b) {
  if (f.size() != 16 * n || v.size() != 4 * n || a.size() != 4 * n) {
    throw Error(Errc::InvalidArgument, "lorentz_accel: array sizes do not match particle count");
  }
  BEAMGEO_DISPATCH(b, lorentz_accel(f.data(), v.data(), a.data(), n));
}

void add_scaled(std::span<const double> base, std::span<const double> k, double c,
                std::span<double> out, Backend b) {
  if (k.size() != base.size() || out.size() != base.size()) {
    throw Error(Errc::InvalidArgument, "add_scaled: length mismatch");
  }
  BEAMGEO_DISPATCH(b, add_scaled(base.data(), k.data(), c, out.data(), base.size()));
}

void rk4_combine(std::span<const double> base, std::span<const double> k1,
                 std::span<const double> k2, std::span<const double> k3,
                 std::span<const double> k4, double h6, std::span<double> out, Backend b) {
  const std::size_t len = base.size();
  if (k1.size() != len || k2.size() != len || k3.size() != len || k4.size() != len ||
      out.size() != len) {
    throw Error(Errc::InvalidArgument, "rk4_combine: length mismatch");
  }
  BEAMGEO_DISPATCH(b, rk4_combine(base.data(), k1.data(), k2.data(), k3.data(), k4.data(), h6,
                                  out.data(), len));
}

MomentSums accumulate_moments(std::span<const double> y, std::span<const double> w, std::size_t n) {
  return accumulate_moments(y, w, n, active());
}

double max_pair_distance_sq(std::span<const double> y, std::size_t n) {
  return max_pair_distance_sq(y, n, active());
}

}  // namespace beamgeo::kernels
