#include "beamgeo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "beamgeo/error.hpp"
#include "beamgeo/format.hpp"
#include "beamgeo/integrator.hpp"

namespace beamgeo {

namespace {

constexpr std::size_t kMomentSlots = 24;

void pack_moments(const MomentSet& m, double* out) {
  for (std::size_t i = 0; i < 4; ++i) out[i] = m.first[i];
  const auto& triples = sorted_triples();
  for (std::size_t t = 0; t < triples.size(); ++t) {
    out[4 + t] = m.third(triples[t][0], triples[t][1], triples[t][2]);
  }
}

MomentSet unpack_moments(const double* in, double vol) {
  MomentSet m;
  m.vol = vol;
  for (std::size_t i = 0; i < 4; ++i) m.first[i] = in[i];
  const auto& triples = sorted_triples();
  for (std::size_t t = 0; t < triples.size(); ++t) {
    m.third.set(triples[t][0], triples[t][1], triples[t][2], in[4 + t]);
  }
  return m;
}

Vec4 slice4(const double* p) { return {p[0], p[1], p[2], p[3]}; }

void put4(double* p, const Vec4& v) {
  for (std::size_t i = 0; i < 4; ++i) p[i] = v[i];
}

void check_initial_shell(const Vec4& v) {
  const double shell = dot(v, v) - 1.0;
  if (!(std::abs(shell) <= kInitialShellTolerance) || !(v[0] > 0.0)) {
    throw Error(Errc::OffShellInitial, "initial velocity is off the unit hyperboloid (eta(v,v) - 1 = " +
                                           format_double(shell) + ")");
  }
}

// Step size of grid interval k: the nominal step except for the closing one.
double step_of(const std::vector<double>& grid, std::size_t k, double h) {
  if (k + 2 < grid.size()) return grid[k + 1] > grid[k] ? h : -h;
  return grid[k + 1] - grid[k];
}

// Fraction of a step after which the linear prediction x2 + v2 tau crosses
// the boundary of element idx, if that happens strictly inside the step and
// the boundary is interior to the lattice.
std::optional<double> boundary_crossing(const Lattice& lattice, std::size_t idx, double x2,
                                        double v2, double h) {
  if (v2 == 0.0) return std::nullopt;
  const double start = lattice.start_of(idx);
  const double end = start + lattice.elements()[idx].length;
  const bool forward = (v2 > 0.0) == (h > 0.0);
  const double edge = forward ? end : start;
  if (edge <= 0.0 || edge >= lattice.total_length()) return std::nullopt;
  const double tau = (edge - x2) / v2;
  const double frac = tau / h;
  if (frac > 1e-12 && frac < 1.0 - 1e-12) return tau;
  return std::nullopt;
}

std::size_t locate_clamped(const Lattice& lattice, double s) {
  return lattice.locate(std::clamp(s, 0.0, lattice.total_length()));
}

// Drives a single-state system over the grid. deriv(element, t, y) returns
// y'; slots x2 and v2 locate the longitudinal position and velocity.
template <std::size_t N, class Deriv>
std::vector<std::array<double, N>> drive(const Lattice& lattice, const std::vector<double>& grid,
                                         std::array<double, N> y, const IntegratorConfig& config,
                                         std::size_t x2, std::size_t v2, const Deriv& deriv) {
  std::vector<std::array<double, N>> out;
  out.reserve(grid.size());
  out.push_back(y);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double t = grid[k];
    const double h = step_of(grid, k, config.step);
    const std::size_t idx = lattice.locate(y[x2]);
    auto with = [&](std::size_t e) { return [&deriv, e](double tt, const std::array<double, N>& s) { return deriv(e, tt, s); }; };
    const auto tau = config.boundary_align ? boundary_crossing(lattice, idx, y[x2], y[v2], h) : std::nullopt;
    if (tau) {
      y = rk4_step<N>(with(idx), t, y, *tau);
      const double rest = h - *tau;
      const std::size_t next = locate_clamped(lattice, y[x2] + 0.5 * rest * y[v2]);
      y = rk4_step<N>(with(next), t + *tau, y, rest);
    } else {
      y = rk4_step<N>(with(idx), t, y, h);
    }
    out.push_back(y);
  }
  return out;
}

struct BatchScratch {
  std::vector<double> f, k1, k2, k3, k4, tmp;
  explicit BatchScratch(std::size_t n)
      : f(16 * n), k1(8 * n), k2(8 * n), k3(8 * n), k4(8 * n), tmp(8 * n) {}
};

void batch_deriv(const Lattice& lattice, const std::vector<std::size_t>& elem, const double* s,
                 double* d, std::size_t n, std::vector<double>& f, kernels::Backend b) {
  const auto& elements = lattice.elements();
  for (std::size_t p = 0; p < n; ++p) {
    const Vec4 x{s[p], s[n + p], s[2 * n + p], s[3 * n + p]};
    const Mat4 m = element_matrix(elements[elem[p]], x);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) f[(i * 4 + j) * n + p] = m[i][j];
  }
  std::copy(s + 4 * n, s + 8 * n, d);
  kernels::lorentz_accel(std::span<const double>(f.data(), 16 * n),
                         std::span<const double>(s + 4 * n, 4 * n), std::span<double>(d + 4 * n, 4 * n),
                         n, b);
}

void batch_rk4(const Lattice& lattice, const std::vector<std::size_t>& elem, double* s, std::size_t n,
               double h, BatchScratch& w, kernels::Backend b) {
  const std::size_t len = 8 * n;
  const std::span<const double> base(s, len);
  const std::span<double> tmp(w.tmp.data(), len);
  const double half = 0.5 * h;
  batch_deriv(lattice, elem, s, w.k1.data(), n, w.f, b);
  kernels::add_scaled(base, std::span<const double>(w.k1.data(), len), half, tmp, b);
  batch_deriv(lattice, elem, w.tmp.data(), w.k2.data(), n, w.f, b);
  kernels::add_scaled(base, std::span<const double>(w.k2.data(), len), half, tmp, b);
  batch_deriv(lattice, elem, w.tmp.data(), w.k3.data(), n, w.f, b);
  kernels::add_scaled(base, std::span<const double>(w.k3.data(), len), h, tmp, b);
  batch_deriv(lattice, elem, w.tmp.data(), w.k4.data(), n, w.f, b);
  kernels::rk4_combine(base, std::span<const double>(w.k1.data(), len),
                       std::span<const double>(w.k2.data(), len), std::span<const double>(w.k3.data(), len),
                       std::span<const double>(w.k4.data(), len), h / 6.0, std::span<double>(s, len), b);
}

std::string particle_prefix(std::size_t p, std::size_t n) {
  return n > 1 ? "particle " + std::to_string(p) + ": " : std::string();
}

// Reference samples visited by a consumer whose RK4 stages land on grid
// points: step k starts at index first + 2 * half * k.
struct StrideGrid {
  std::size_t first = 0;
  std::size_t half = 1;
  std::size_t steps = 0;
  double step = 0.0;
};

StrideGrid stride_grid(const Trajectory& ref, double t0, double t_end, double step) {
  if (ref.size() < 2) throw Error(Errc::InvalidArgument, "reference needs at least two samples");
  if (!(step > 0.0)) throw Error(Errc::InvalidArgument, "step must be positive");
  if (t_end < t0) throw Error(Errc::InvalidArgument, "span must run forward along the reference");
  const double dt = ref[1].t - ref[0].t;
  if (!(dt > 0.0)) throw Error(Errc::InvalidArgument, "reference must run forward in t");
  auto as_index = [](double r, const char* what) {
    const double k = std::round(r);
    if (std::abs(r - k) > 1e-6 * std::max(1.0, std::abs(r)) || k < 0.0) {
      throw Error(Errc::InvalidArgument, std::string(what) + " is not on the reference grid");
    }
    return static_cast<std::size_t>(k);
  };
  StrideGrid g;
  g.step = step;
  g.half = as_index(0.5 * step / dt, "half step");
  if (g.half == 0) throw Error(Errc::InvalidArgument, "step is shorter than twice the reference spacing");
  if (t0 < ref.front().t - 1e-9 * dt || t_end > ref.back().t + 1e-9 * dt) {
    throw Error(Errc::ReferenceSpanExceeded, "requested span [" + format_double(t0) + ", " +
                                                 format_double(t_end) + "] leaves the reference");
  }
  g.first = as_index((t0 - ref[0].t) / dt, "start time");
  g.steps = static_cast<std::size_t>(std::floor((t_end - t0) / step + 1e-9));
  const std::size_t last = g.first + 2 * g.half * g.steps;
  if (last >= ref.size()) {
    throw Error(Errc::ReferenceSpanExceeded, "reference ends before t = " + format_double(t_end));
  }
  const double expected = ref[0].t + static_cast<double>(last) * dt;
  if (std::abs(ref[last].t - expected) > 1e-6 * dt) {
    throw Error(Errc::InvalidArgument, "reference grid is not uniform over the requested span");
  }
  return g;
}

}  // namespace

void check_step(const Lattice& lattice, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw Error(Errc::InvalidArgument, "step must be positive");
  if (lattice.elements().empty()) throw Error(Errc::InvalidArgument, "lattice has no elements");
  if (step > 0.25 * lattice.min_element_length()) {
    throw Error(Errc::StepTooLarge, "step " + format_double(step) + " exceeds a quarter of the shortest element (" +
                                        format_double(lattice.min_element_length()) + " m)");
  }
}

void track_batch(const Lattice& lattice, std::vector<double>& state, std::size_t n,
                 const std::vector<double>& grid, const IntegratorConfig& config,
                 const std::function<bool(std::size_t, double, const std::vector<double>&)>& observer,
                 kernels::Backend backend) {
  if (state.size() != 8 * n) throw Error(Errc::InvalidArgument, "batch state must hold 8 n values");
  BatchScratch work(n);
  BatchScratch single(1);
  std::vector<std::size_t> elem(n);
  std::vector<double> saved;
  if (!observer(0, grid.front(), state)) return;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double h = step_of(grid, k, config.step);
    for (std::size_t p = 0; p < n; ++p) {
      try {
        elem[p] = lattice.locate(state[2 * n + p]);
      } catch (const Error& e) {
        throw Error(e.code(), particle_prefix(p, n) + e.message());
      }
    }
    if (config.boundary_align) saved = state;
    batch_rk4(lattice, elem, state.data(), n, h, work, backend);
    if (config.boundary_align) {
      for (std::size_t p = 0; p < n; ++p) {
        const auto tau = boundary_crossing(lattice, elem[p], saved[2 * n + p], saved[6 * n + p], h);
        if (!tau) continue;
        std::array<double, 8> one;
        for (std::size_t c = 0; c < 8; ++c) one[c] = saved[c * n + p];
        std::vector<std::size_t> e1{elem[p]};
        batch_rk4(lattice, e1, one.data(), 1, *tau, single, backend);
        const double rest = h - *tau;
        e1[0] = locate_clamped(lattice, one[2] + 0.5 * rest * one[6]);
        batch_rk4(lattice, e1, one.data(), 1, rest, single, backend);
        for (std::size_t c = 0; c < 8; ++c) state[c * n + p] = one[c];
      }
    }
    if (!observer(k + 1, grid[k + 1], state)) return;
  }
}

Trajectory integrate_lorentz(const Lattice& lattice, const TrajectoryState& initial, double t_end,
                             const IntegratorConfig& config) {
  check_step(lattice, config.step);
  check_initial_shell(initial.v);
  const auto grid = step_grid(initial.t, t_end, config.step);
  std::vector<double> state(8);
  put4(state.data(), initial.x);
  put4(state.data() + 4, initial.v);
  Trajectory out;
  out.reserve(grid.size());
  track_batch(
      lattice, state, 1, grid, config,
      [&out](std::size_t, double t, const std::vector<double>& s) {
        out.push_back({t, slice4(s.data()), slice4(s.data() + 4)});
        return true;
      },
      kernels::active());
  return out;
}

Trajectory integrate_lorentz_connection(const Lattice& lattice, const TrajectoryState& initial,
                                        double t_end, const IntegratorConfig& config) {
  check_step(lattice, config.step);
  check_initial_shell(initial.v);
  const auto grid = step_grid(initial.t, t_end, config.step);
  std::array<double, 8> y{};
  put4(y.data(), initial.x);
  put4(y.data() + 4, initial.v);
  const auto deriv = [&lattice](std::size_t e, double, const std::array<double, 8>& s) {
    const Vec4 x = slice4(s.data());
    const Vec4 v = slice4(s.data() + 4);
    const double speed = std::sqrt(dot(v, v));
    const Vec4 u = (1.0 / speed) * v;
    const FieldSample field(element_matrix(lattice.elements()[e], x), {});
    const Vec4 a = contract_geodesic(lorentz_connection(field, u), v, v);
    std::array<double, 8> d{};
    put4(d.data(), v);
    put4(d.data() + 4, -1.0 * a);
    return d;
  };
  const auto states = drive<8>(lattice, grid, y, config, 2, 6, deriv);
  Trajectory out(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    out[k] = {grid[k], slice4(states[k].data()), slice4(states[k].data() + 4)};
  }
  return out;
}

MomentSet moment_rate(const Mat4& f, const MomentSet& m) {
  MomentSet r;
  r.vol = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double s = 0.0;
    for (std::size_t a = 0; a < 4; ++a) s += f[i][a] * m.first[a];
    r.first[i] = -s;
  }
  for (const auto& tr : sorted_triples()) {
    const std::size_t i = tr[0], j = tr[1], k = tr[2];
    double s = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
      s += f[i][a] * m.third(a, j, k) + f[j][a] * m.third(i, a, k) + f[k][a] * m.third(i, j, a);
    }
    r.third.set(i, j, k, -s);
  }
  return r;
}

AveragedRun integrate_averaged_geodesic(const Lattice& lattice, const MomentSet& moments,
                                        const TrajectoryState& initial, double t_end,
                                        const IntegratorConfig& config) {
  check_step(lattice, config.step);
  check_initial_shell(initial.v);
  const auto grid = step_grid(initial.t, t_end, config.step);
  constexpr std::size_t N = 8 + kMomentSlots;
  std::array<double, N> y{};
  put4(y.data(), initial.x);
  put4(y.data() + 4, initial.v);
  pack_moments(moments, y.data() + 8);
  const double vol = moments.vol;
  const auto deriv = [&lattice, vol](std::size_t e, double, const std::array<double, N>& s) {
    const Vec4 x = slice4(s.data());
    const Vec4 v = slice4(s.data() + 4);
    const MomentSet m = unpack_moments(s.data() + 8, vol);
    const Mat4 f = element_matrix(lattice.elements()[e], x);
    const Vec4 a = contract_geodesic(field_connection(f, m.first, m.third), v, v);
    std::array<double, N> d{};
    put4(d.data(), v);
    put4(d.data() + 4, -1.0 * a);
    pack_moments(moment_rate(f, m), d.data() + 8);
    return d;
  };
  const auto states = drive<N>(lattice, grid, y, config, 2, 6, deriv);
  AveragedRun run;
  run.trajectory.resize(states.size());
  run.moments.resize(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    run.trajectory[k] = {grid[k], slice4(states[k].data()), slice4(states[k].data() + 4)};
    run.moments[k] = unpack_moments(states[k].data() + 8, vol);
  }
  return run;
}

AveragedRun integrate_mean_field(const Lattice& lattice, const MomentSet& moments, const Vec4& x0,
                                 double t0, double t_end, const IntegratorConfig& config) {
  check_step(lattice, config.step);
  const auto grid = step_grid(t0, t_end, config.step);
  constexpr std::size_t N = 4 + kMomentSlots;
  std::array<double, N> y{};
  put4(y.data(), x0);
  pack_moments(moments, y.data() + 4);
  const double vol = moments.vol;
  const auto deriv = [&lattice, vol](std::size_t e, double, const std::array<double, N>& s) {
    const Vec4 x = slice4(s.data());
    const MomentSet m = unpack_moments(s.data() + 4, vol);
    const Mat4 f = element_matrix(lattice.elements()[e], x);
    std::array<double, N> d{};
    put4(d.data(), m.first);
    pack_moments(moment_rate(f, m), d.data() + 4);
    return d;
  };
  // <y> occupies slots 4..7, so slot 6 is its longitudinal component.
  const auto states = drive<N>(lattice, grid, y, config, 2, 6, deriv);
  AveragedRun run;
  run.trajectory.resize(states.size());
  run.moments.resize(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    run.moments[k] = unpack_moments(states[k].data() + 4, vol);
    run.trajectory[k] = {grid[k], slice4(states[k].data()), run.moments[k].first};
  }
  return run;
}

std::vector<double> mean_field_defect(const Lattice& lattice,
                                      const std::vector<MomentSet>& moments_along,
                                      const Trajectory& curve) {
  const std::size_t n = curve.size();
  if (moments_along.size() != n) {
    throw Error(Errc::MismatchedSampling, "curve has " + std::to_string(n) + " points but " +
                                              std::to_string(moments_along.size()) + " moment sets");
  }
  if (n < 5) throw Error(Errc::MismatchedSampling, "defect needs at least five curve points");
  const double h = curve[1].t - curve[0].t;
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs((curve[k].t - curve[k - 1].t) - h) > 1e-9 * std::abs(h)) {
      throw Error(Errc::MismatchedSampling, "curve is not on a uniform grid");
    }
  }
  // Five-point stencils, shifted so that every point lies in the element of
  // the evaluation point: the field jumps at element edges.
  static constexpr double kStencil[5][5] = {{-25.0, 48.0, -36.0, 16.0, -3.0},
                                            {-3.0, -10.0, 18.0, -6.0, 1.0},
                                            {1.0, -8.0, 0.0, 8.0, -1.0},
                                            {-1.0, 6.0, -18.0, 10.0, 3.0},
                                            {3.0, -16.0, 36.0, -48.0, 25.0}};
  std::vector<std::size_t> elem(n);
  for (std::size_t k = 0; k < n; ++k) elem[k] = lattice.locate(curve[k].x[2]);
  auto window_ok = [&](std::size_t w, std::size_t k) {
    if (w + 4 >= n) return false;
    for (std::size_t j = w; j < w + 5; ++j)
      if (elem[j] != elem[k]) return false;
    return true;
  };
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t offset = 5;
    for (std::size_t o : {2, 1, 3, 0, 4}) {
      if (o <= k && window_ok(k - o, k)) {
        offset = o;
        break;
      }
    }
    if (offset == 5) {
      throw Error(Errc::MismatchedSampling,
                  "fewer than five samples inside element " + std::to_string(elem[k]) + " around point " +
                      std::to_string(k));
    }
    Vec4 dv{};
    for (std::size_t j = 0; j < 5; ++j) dv = dv + kStencil[offset][j] * moments_along[k - offset + j].first;
    dv = (1.0 / (12.0 * h)) * dv;
    const auto& m = moments_along[k];
    const Mat4 f = element_matrix(lattice.elements()[elem[k]], curve[k].x);
    const Vec4 acc = contract_geodesic(field_connection(f, m.first, m.third), m.first, m.first);
    out[k] = euclidean_norm(dv + acc);
  }
  return out;
}

Trajectory integrate_prescribed_geodesic(const Lattice& lattice, const AveragedRun& reference,
                                         const TrajectoryState& initial, double t_end, double step) {
  if (reference.moments.size() != reference.trajectory.size()) {
    throw Error(Errc::MismatchedSampling, "reference moments and trajectory differ in length");
  }
  const auto g = stride_grid(reference.trajectory, initial.t, t_end, step);
  const auto& elements = lattice.elements();
  using S = std::array<double, 8>;
  auto deriv = [&](std::size_t e, std::size_t idx, const S& s) {
    const Vec4 x = slice4(s.data());
    const Vec4 v = slice4(s.data() + 4);
    const auto& m = reference.moments[idx];
    const Mat4 f = element_matrix(elements[e], x);
    const Vec4 a = contract_geodesic(field_connection(f, m.first, m.third), v, v);
    S d{};
    put4(d.data(), v);
    put4(d.data() + 4, -1.0 * a);
    return d;
  };
  S y{};
  put4(y.data(), initial.x);
  put4(y.data() + 4, initial.v);
  Trajectory out;
  out.reserve(g.steps + 1);
  out.push_back({reference.trajectory[g.first].t, initial.x, initial.v});
  const double h = g.step;
  for (std::size_t k = 0; k < g.steps; ++k) {
    const std::size_t i0 = g.first + 2 * g.half * k;
    const std::size_t im = i0 + g.half;
    const std::size_t i1 = im + g.half;
    const std::size_t e = lattice.locate(y[2]);
    const auto k1 = deriv(e, i0, y);
    const auto k2 = deriv(e, im, add_scaled(y, k1, 0.5 * h));
    const auto k3 = deriv(e, im, add_scaled(y, k2, 0.5 * h));
    const auto k4 = deriv(e, i1, add_scaled(y, k3, h));
    y = rk4_combine(y, k1, k2, k3, k4, h / 6.0);
    out.push_back({reference.trajectory[i1].t, slice4(y.data()), slice4(y.data() + 4)});
  }
  return out;
}

JacobiRun integrate_jacobi_full(const Lattice& lattice, const AveragedRun& reference,
                                const JacobiState& initial, double t_end,
                                const JacobiOptions& options) {
  const auto& ref = reference.trajectory;
  if (reference.moments.size() != ref.size()) {
    throw Error(Errc::MismatchedSampling, "reference moments and trajectory differ in length");
  }
  const auto g = stride_grid(ref, initial.t, t_end, options.step);

  auto moments_at = [&](std::size_t idx) {
    return options.mode == JacobiMode::Full ? reference.moments[idx] : delta_moments(ref[idx].v);
  };
  using S = std::array<double, 8>;
  auto deriv = [&](std::size_t e, std::size_t idx, const S& s) {
    const Vec4 xi = slice4(s.data());
    const Vec4 dxi = slice4(s.data() + 4);
    const Vec4& xd = ref[idx].v;
    const MomentSet m = moments_at(idx);
    const FieldSample field = lattice.field_in(e, ref[idx].x);
    const Connection3 gamma = averaged_connection(field, m, options.frame);
    const auto grad = averaged_connection_gradient(field, m, options.frame);
    Vec4 acc = 2.0 * contract_geodesic(gamma, dxi, xd);
    for (std::size_t l = 0; l < 4; ++l) acc = acc + xi[l] * contract_geodesic(grad[l], xd, xd);
    S d{};
    put4(d.data(), dxi);
    put4(d.data() + 4, -1.0 * acc);
    return d;
  };

  JacobiRun run;
  bool warned = false;
  auto record = [&](std::size_t idx, const S& s) {
    const JacobiState st{ref[idx].t, slice4(s.data()), slice4(s.data() + 4)};
    run.series.push_back(st);
    run.epsilon.push_back(reference.moments[idx].first - ref[idx].v);
    const double speed = euclidean_norm(st.dxi);
    if (speed > 0.0) {
      run.max_decoupling_ratio = std::max(run.max_decoupling_ratio, std::abs(dot(ref[idx].v, st.dxi)) / speed);
    }
    if (!warned) {
      const auto& el = lattice.elements()[lattice.locate(ref[idx].x[2])];
      if (el.has_dipole() && el.b0 != 0.0) {
        const double rho = *curvature_radius(el);
        if (euclidean_norm(st.xi) / rho > 0.1) {
          run.warnings.push_back("|xi|/rho exceeds 0.1 at t = " + format_double(st.t) +
                                 "; the linear deviation model may be inaccurate");
          warned = true;
        }
      }
    }
  };

  S y{};
  put4(y.data(), initial.xi);
  put4(y.data() + 4, initial.dxi);
  record(g.first, y);
  const double h = g.step;
  for (std::size_t k = 0; k < g.steps; ++k) {
    const std::size_t i0 = g.first + 2 * g.half * k;
    const std::size_t im = i0 + g.half;
    const std::size_t i1 = im + g.half;
    const std::size_t e = lattice.locate(ref[i0].x[2]);
    const auto k1 = deriv(e, i0, y);
    const auto k2 = deriv(e, im, add_scaled(y, k1, 0.5 * h));
    const auto k3 = deriv(e, im, add_scaled(y, k2, 0.5 * h));
    const auto k4 = deriv(e, i1, add_scaled(y, k3, h));
    y = rk4_combine(y, k1, k2, k3, k4, h / 6.0);
    record(i1, y);
  }
  run.decoupling_violated = run.max_decoupling_ratio > 1e-2;
  if (run.decoupling_violated) {
    run.warnings.push_back("decoupling condition |eta(X', xi')| <= 1e-2 |xi'| violated (max ratio " +
                           format_double(run.max_decoupling_ratio) + ")");
  }
  return run;
}

std::pair<double, double> transverse_focusing(const Element& element, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(Errc::InvalidArgument, "rho must be positive");
  const double k0 = 1.0 / (rho * rho);
  switch (element.kind) {
    case ElementKind::Dipole:
      return {k0, 0.0};
    case ElementKind::NormalQuadDipole:
      return {k0 - element.b1, element.b1};
    case ElementKind::SkewQuadDipole:
      return {k0 + element.b1, -element.b1};
    default:
      throw Error(Errc::UnsupportedElement, "transverse system needs a dipole-bearing element, got " +
                                                std::string(keyword(element.kind)));
  }
}

JacobiSeries integrate_transverse_linear(const Element& element, double rho,
                                         const JacobiState& initial, double l_end,
                                         const IntegratorConfig& config) {
  const auto [kx, ky] = transverse_focusing(element, rho);
  const auto grid = step_grid(initial.t, l_end, config.step);
  using S = std::array<double, 8>;
  const auto deriv = [kx = kx, ky = ky](double, const S& s) {
    S d{};
    for (std::size_t i = 0; i < 4; ++i) d[i] = s[4 + i];
    d[5] = -kx * s[1];
    d[7] = -ky * s[3];
    return d;
  };
  S y{};
  put4(y.data(), initial.xi);
  put4(y.data() + 4, initial.dxi);
  JacobiSeries out;
  out.reserve(grid.size());
  out.push_back({grid[0], initial.xi, initial.dxi});
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    y = rk4_step<8>(deriv, grid[k], y, step_of(grid, k, config.step));
    out.push_back({grid[k + 1], slice4(y.data()), slice4(y.data() + 4)});
  }
  return out;
}

GammaSeries::GammaSeries(std::vector<double> t, std::vector<double> gamma)
    : t_(std::move(t)), gamma_(std::move(gamma)) {
  if (t_.size() != gamma_.size() || t_.empty()) {
    throw Error(Errc::MismatchedSampling, "gamma series needs matching, non-empty t and gamma");
  }
  for (std::size_t k = 1; k < t_.size(); ++k) {
    if (!(t_[k] > t_[k - 1])) throw Error(Errc::InvalidArgument, "gamma series times must increase");
  }
}

GammaSeries GammaSeries::constant(double gamma, double t0, double t1) {
  if (t1 < t0) std::swap(t0, t1);
  if (t1 == t0) return GammaSeries({t0}, {gamma});
  return GammaSeries({t0, t1}, {gamma, gamma});
}

GammaSeries GammaSeries::from_trajectory(const Trajectory& reference) {
  std::vector<double> t, g;
  for (const auto& s : reference) {
    t.push_back(s.t);
    g.push_back(s.v[0]);
  }
  return GammaSeries(std::move(t), std::move(g));
}

double GammaSeries::at(double t) const {
  const double span = t_.back() - t_.front();
  const double slack = 1e-12 * std::max(1.0, std::abs(span));
  if (t < t_.front() - slack || t > t_.back() + slack) {
    throw Error(Errc::ReferenceSpanExceeded, "gamma series does not cover t = " + format_double(t));
  }
  if (t_.size() == 1 || t <= t_.front()) return gamma_.front();
  if (t >= t_.back()) return gamma_.back();
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const std::size_t k = static_cast<std::size_t>(std::distance(t_.begin(), it)) - 1;
  const double w = (t - t_[k]) / (t_[k + 1] - t_[k]);
  return gamma_[k] + w * (gamma_[k + 1] - gamma_[k]);
}

JacobiSeries integrate_longitudinal(const Element& element, const GammaSeries& gamma,
                                    const JacobiState& initial, double t_end,
                                    const IntegratorConfig& config) {
  using S = std::array<double, 8>;
  std::function<S(double, const S&)> deriv;
  if (element.kind == ElementKind::ConstantE) {
    const double e2 = element.e2;
    deriv = [e2](double, const S& s) {
      S d{};
      for (std::size_t i = 0; i < 4; ++i) d[i] = s[4 + i];
      d[6] = -e2 * s[6];
      d[4] = -e2 * s[6];
      return d;
    };
  } else if (element.kind == ElementKind::RFCavity) {
    const double e0 = element.e2_0;
    deriv = [e0, &gamma](double t, const S& s) {
      S d{};
      for (std::size_t i = 0; i < 4; ++i) d[i] = s[4 + i];
      const double drive = 2.0 * gamma.at(t) * e0 * s[2];
      d[6] = drive;
      d[4] = -drive;
      return d;
    };
  } else {
    throw Error(Errc::UnsupportedElement, "longitudinal system needs const_e or rf, got " +
                                              std::string(keyword(element.kind)));
  }
  const auto grid = step_grid(initial.t, t_end, config.step);
  S y{};
  put4(y.data(), initial.xi);
  put4(y.data() + 4, initial.dxi);
  JacobiSeries out;
  out.reserve(grid.size());
  out.push_back({grid[0], initial.xi, initial.dxi});
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    y = rk4_step<8>(deriv, grid[k], y, step_of(grid, k, config.step));
    out.push_back({grid[k + 1], slice4(y.data()), slice4(y.data() + 4)});
  }
  return out;
}

JacobiSeries reparameterize_by_path_length(const JacobiSeries& series, const Trajectory& reference) {
  if (reference.empty()) throw Error(Errc::MismatchedSampling, "empty reference");
  JacobiSeries out;
  out.reserve(series.size());
  std::size_t r = 0;
  const double x2_0 = [&] {
    for (const auto& s : reference)
      if (!series.empty() && std::abs(s.t - series.front().t) <= 1e-9 * std::max(1.0, std::abs(s.t))) return s.x[2];
    throw Error(Errc::MismatchedSampling, "reference has no sample at the series start");
  }();
  for (const auto& s : series) {
    while (r < reference.size() && reference[r].t < s.t - 1e-9 * std::max(1.0, std::abs(s.t))) ++r;
    if (r == reference.size() || std::abs(reference[r].t - s.t) > 1e-9 * std::max(1.0, std::abs(s.t))) {
      throw Error(Errc::MismatchedSampling, "reference has no sample at t = " + format_double(s.t));
    }
    const double v2 = reference[r].v[2];
    if (v2 == 0.0) throw Error(Errc::InvalidArgument, "reference is not moving along x2");
    out.push_back({reference[r].x[2] - x2_0, s.xi, (1.0 / v2) * s.dxi});
  }
  return out;
}

}  // namespace beamgeo
