#include "beamgeo/observables.hpp"

#include <algorithm>
#include <cmath>

#include "beamgeo/error.hpp"
#include "beamgeo/format.hpp"
#include "beamgeo/integrator.hpp"

namespace beamgeo {

Profile Profile::constant(double value) {
  Profile p;
  p.kind_ = Kind::Constant;
  p.value_ = value;
  return p;
}

Profile Profile::segments(const std::vector<std::pair<double, double>>& pieces, double t0) {
  if (pieces.empty()) throw Error(Errc::InvalidArgument, "segment profile needs at least one piece");
  Profile p;
  p.kind_ = Kind::Segments;
  p.t_.push_back(t0);
  for (const auto& [len, value] : pieces) {
    if (!(len > 0.0)) throw Error(Errc::NegativeLength, "segment length must be positive");
    p.t_.push_back(p.t_.back() + len);
    p.v_.push_back(value);
  }
  p.breaks_.assign(p.t_.begin() + 1, p.t_.end() - 1);
  return p;
}

Profile Profile::samples(std::vector<double> t, std::vector<double> v) {
  if (t.size() != v.size() || t.empty()) {
    throw Error(Errc::MismatchedGrid, "profile samples need matching, non-empty t and values");
  }
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (!(t[k] > t[k - 1])) throw Error(Errc::InvalidArgument, "profile sample times must increase");
  }
  Profile p;
  p.kind_ = Kind::Samples;
  p.t_ = std::move(t);
  p.v_ = std::move(v);
  return p;
}

Profile Profile::function(std::function<double(double)> f) {
  Profile p;
  p.kind_ = Kind::Function;
  p.f_ = std::move(f);
  return p;
}

double Profile::at(double t, Side side) const {
  switch (kind_) {
    case Kind::Constant:
      return value_;
    case Kind::Function:
      return f_(t);
    case Kind::Segments: {
      // Segment i covers [t_i, t_{i+1}); the left limit at an edge belongs
      // to the segment ending there.
      auto it = side == Side::Right ? std::upper_bound(t_.begin(), t_.end(), t)
                                    : std::lower_bound(t_.begin(), t_.end(), t);
      auto i = std::distance(t_.begin(), it) - 1;
      i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(v_.size()) - 1);
      return v_[static_cast<std::size_t>(i)];
    }
    case Kind::Samples: {
      if (t <= t_.front()) return v_.front();
      if (t >= t_.back()) return v_.back();
      const auto it = std::upper_bound(t_.begin(), t_.end(), t);
      const auto k = static_cast<std::size_t>(std::distance(t_.begin(), it)) - 1;
      const double w = (t - t_[k]) / (t_[k + 1] - t_[k]);
      return v_[k] + w * (v_[k + 1] - v_[k]);
    }
  }
  return 0.0;
}

LatticeOptics lattice_optics(const Lattice& lattice, Plane plane) {
  std::vector<std::pair<double, double>> k, inv_rho;
  for (const auto& e : lattice.elements()) {
    double kh = 0.0, kv = 0.0, g = 0.0;
    if (e.has_dipole()) {
      if (e.b0 != 0.0) {
        const double rho = *curvature_radius(e);
        std::tie(kh, kv) = transverse_focusing(e, rho);
        g = 1.0 / rho;
      } else if (e.kind == ElementKind::NormalQuadDipole) {
        kh = -e.b1;
        kv = e.b1;
      } else if (e.kind == ElementKind::SkewQuadDipole) {
        kh = e.b1;
        kv = -e.b1;
      }
    }
    k.emplace_back(e.length, plane == Plane::Horizontal ? kh : kv);
    inv_rho.emplace_back(e.length, plane == Plane::Horizontal ? g : 0.0);
  }
  return {Profile::segments(k), Profile::segments(inv_rho), lattice.total_length()};
}

namespace {

using Side = Profile::Side;

// Integrates the Hill pair over consecutive grid points; K at a step's
// ends takes the one-sided limits facing into the step.
PrincipalSolutions integrate_hill(std::vector<double> grid, const Profile& k,
                                  std::vector<std::size_t> breaks) {
  const std::size_t n = grid.size();
  PrincipalSolutions ps;
  ps.c.resize(n);
  ps.dc.resize(n);
  ps.s.resize(n);
  ps.ds.resize(n);
  ps.k.resize(n);
  std::array<double, 4> y{1.0, 0.0, 0.0, 1.0};
  auto store = [&](std::size_t i) {
    ps.c[i] = y[0];
    ps.dc[i] = y[1];
    ps.s[i] = y[2];
    ps.ds[i] = y[3];
    ps.k[i] = k.at(grid[i], Side::Right);
  };
  store(0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = grid[i], b = grid[i + 1];
    const auto rhs = [&](double t, const std::array<double, 4>& u) {
      const Side side = t == a ? Side::Right : Side::Left;
      const double kk = k.at(t, side);
      return std::array<double, 4>{u[1], -kk * u[0], u[3], -kk * u[2]};
    };
    y = rk4_step<4>(rhs, a, y, b - a);
    store(i + 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double w = ps.c[i] * ps.ds[i] - ps.dc[i] * ps.s[i];
    if (!(std::abs(w - 1.0) <= kWronskianTolerance)) {
      throw Error(Errc::WronskianDrift, "Wronskian C S' - C' S = " + format_double(w) + " at t = " +
                                            format_double(grid[i]));
    }
  }
  ps.grid = std::move(grid);
  ps.breaks = std::move(breaks);
  return ps;
}

struct Quadrature {
  std::vector<double> a, b;  // cumulative int p C and int p S
};

Quadrature green_integrals(const PrincipalSolutions& ps, const Profile& p) {
  const std::size_t n = ps.grid.size();
  Quadrature q;
  q.a.assign(n, 0.0);
  q.b.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = ps.grid[i + 1] - ps.grid[i];
    const double p0 = p.at(ps.grid[i], Side::Right);
    const double p1 = p.at(ps.grid[i + 1], Side::Left);
    q.a[i + 1] = q.a[i] + 0.5 * h * (p0 * ps.c[i] + p1 * ps.c[i + 1]);
    q.b[i + 1] = q.b[i] + 0.5 * h * (p0 * ps.s[i] + p1 * ps.s[i + 1]);
  }
  return q;
}

void check_residual(const PrincipalSolutions& ps, const Profile& p, const std::vector<double>& P) {
  const auto& g = ps.grid;
  const std::size_t n = g.size();
  double pmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) pmax = std::max(pmax, std::abs(p.at(g[i])));
  const double limit = 1e-6 * pmax;
  const auto& pb = p.breakpoints();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (std::binary_search(ps.breaks.begin(), ps.breaks.end(), i)) continue;
    const double hm = g[i] - g[i - 1], hp = g[i + 1] - g[i];
    if (std::abs(hp - hm) > 1e-9 * hp) continue;
    const bool straddles = std::any_of(pb.begin(), pb.end(), [&](double t) { return t > g[i - 1] && t < g[i + 1]; });
    if (straddles) continue;
    const double d2 = (P[i + 1] - 2.0 * P[i] + P[i - 1]) / (hp * hm);
    const double r = d2 + ps.k[i] * P[i] - p.at(g[i]);
    if (!(std::abs(r) <= limit)) {
      throw Error(Errc::ResidualTooLarge, "particular solution residual " + format_double(r) + " at t = " +
                                              format_double(g[i]) + " exceeds " + format_double(limit));
    }
  }
}

std::vector<double> combine(const PrincipalSolutions& ps, const Quadrature& q) {
  std::vector<double> P(ps.grid.size());
  for (std::size_t i = 0; i < P.size(); ++i) P[i] = ps.s[i] * q.a[i] - ps.c[i] * q.b[i];
  return P;
}

}  // namespace

PrincipalSolutions principal_solutions(const Profile& k, double t0, double t_end, double step) {
  if (!(step > 0.0)) throw Error(Errc::InvalidArgument, "step must be positive");
  if (!(t_end > t0)) throw Error(Errc::InvalidArgument, "span must be positive");
  std::vector<double> edges{t0};
  for (double b : k.breakpoints()) {
    if (b > t0 && b < t_end) edges.push_back(b);
  }
  edges.push_back(t_end);
  std::vector<double> grid{t0};
  std::vector<std::size_t> breaks;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double a = edges[e], b = edges[e + 1];
    const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / step - 1e-9)));
    const double h = (b - a) / static_cast<double>(m);
    for (std::size_t i = 1; i < m; ++i) grid.push_back(a + static_cast<double>(i) * h);
    grid.push_back(b);
    if (e + 2 < edges.size()) breaks.push_back(grid.size() - 1);
  }
  return integrate_hill(std::move(grid), k, std::move(breaks));
}

PrincipalSolutions principal_solutions(const std::vector<double>& grid, const std::vector<double>& k) {
  if (grid.size() < 2) throw Error(Errc::InvalidArgument, "grid needs at least two points");
  return integrate_hill(grid, Profile::samples(grid, k), {});
}

double green_function(const PrincipalSolutions& ps, double t, double t_tilde) {
  const auto& g = ps.grid;
  auto hermite = [&](double x, const std::vector<double>& f, const std::vector<double>& df) {
    if (!(x >= g.front()) || !(x <= g.back())) {
      throw Error(Errc::OutOfSpan, "t = " + format_double(x) + " outside [" + format_double(g.front()) + ", " +
                                       format_double(g.back()) + "]");
    }
    auto it = std::upper_bound(g.begin(), g.end(), x);
    std::size_t i = static_cast<std::size_t>(std::distance(g.begin(), it));
    i = std::min(i, g.size() - 1);
    const std::size_t i0 = i - 1;
    if (x == g[i0]) return f[i0];
    const double h = g[i] - g[i0];
    const double s = (x - g[i0]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * f[i0] + h10 * h * df[i0] + h01 * f[i] + h11 * h * df[i];
  };
  const double st = hermite(t, ps.s, ps.ds);
  const double ct = hermite(t, ps.c, ps.dc);
  const double su = hermite(t_tilde, ps.s, ps.ds);
  const double cu = hermite(t_tilde, ps.c, ps.dc);
  return st * cu - ct * su;
}

std::vector<double> particular_solution(const PrincipalSolutions& ps, const Profile& p) {
  const auto P = combine(ps, green_integrals(ps, p));
  check_residual(ps, p, P);
  return P;
}

std::vector<double> particular_solution(const PrincipalSolutions& ps, const std::vector<double>& p) {
  if (p.size() != ps.grid.size()) {
    throw Error(Errc::MismatchedGrid, "driver has " + std::to_string(p.size()) + " samples, grid has " +
                                          std::to_string(ps.grid.size()));
  }
  return particular_solution(ps, Profile::samples(ps.grid, p));
}

DispersionResult dispersion(const PrincipalSolutions& ps, const Profile& inverse_rho, double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw Error(Errc::InvalidArgument, "delta must be >= 0");
  const auto q = green_integrals(ps, inverse_rho);
  DispersionResult r;
  r.d = combine(ps, q);
  check_residual(ps, inverse_rho, r.d);
  r.dd.resize(r.d.size());
  r.offset.resize(r.d.size());
  for (std::size_t i = 0; i < r.d.size(); ++i) {
    r.dd[i] = ps.ds[i] * q.a[i] - ps.dc[i] * q.b[i];
    r.offset[i] = delta * r.d[i];
  }
  r.delta = delta;
  return r;
}

double max_spatial_deviation(const JacobiSeries& run) {
  double m = 0.0;
  for (const auto& s : run) m = std::max(m, std::sqrt((s.xi[1] * s.xi[1] + s.xi[2] * s.xi[2]) + s.xi[3] * s.xi[3]));
  return m;
}

namespace {

// F^i_m (<y^m> eta(X', X') - <y^m y^s y^l> X'_s X'_l) for the rows i = 1, 3.
std::array<double, 2> moment_drive(const Mat4& f, const MomentSet& m, const Vec4& xd) {
  const Vec4 xl = lower(xd);
  const double xx = dot(xd, xd);
  Vec4 w{};
  for (std::size_t a = 0; a < 4; ++a) {
    double t = 0.0;
    for (std::size_t s = 0; s < 4; ++s)
      for (std::size_t l = 0; l < 4; ++l) t += m.third(a, s, l) * xl[s] * xl[l];
    w[a] = m.first[a] * xx - t;
  }
  std::array<double, 2> out{};
  for (std::size_t r = 0; r < 2; ++r) {
    const std::size_t i = r == 0 ? 1 : 3;
    double v = 0.0;
    for (std::size_t a = 0; a < 4; ++a) v += f[i][a] * w[a];
    out[r] = v;
  }
  return out;
}

Mat4 field_on(const Lattice& lattice, const Vec4& x) {
  return element_matrix(lattice.elements()[lattice.locate(x[2])], x);
}

void accumulate(std::vector<double>& series, const std::vector<double>& t, std::size_t k, double f0, double f1) {
  series[k] = series[k - 1] + 0.5 * (t[k] - t[k - 1]) * (f0 + f1);
}

}  // namespace

OffsetSeries averaged_offset(const Lattice& lattice, const Trajectory& reference,
                             const std::vector<MomentSet>& moments_along) {
  if (moments_along.size() != reference.size() || reference.empty()) {
    throw Error(Errc::MismatchedGrid, "reference has " + std::to_string(reference.size()) + " samples but " +
                                          std::to_string(moments_along.size()) + " moment sets");
  }
  const std::size_t n = reference.size();
  OffsetSeries out;
  out.t.resize(n);
  std::vector<std::array<double, 2>> f(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.t[k] = reference[k].t;
    f[k] = moment_drive(field_on(lattice, reference[k].x), moments_along[k], reference[k].v);
  }
  for (std::size_t r = 0; r < 2; ++r) {
    out.averaged[r].assign(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) accumulate(out.averaged[r], out.t, k, f[k - 1][r], f[k][r]);
  }
  return out;
}

OffsetSeries born_offset(const Lattice& lattice, const Trajectory& reference,
                         const std::vector<MomentSet>& moments_along, const JacobiSeries& xi_run) {
  if (moments_along.size() != reference.size()) {
    throw Error(Errc::MismatchedGrid, "reference and moment series differ in length");
  }
  if (xi_run.empty()) throw Error(Errc::MismatchedGrid, "empty deviation run");
  // Match each deviation sample to the reference sample at the same t.
  std::vector<std::size_t> idx;
  idx.reserve(xi_run.size());
  std::size_t r = 0;
  for (const auto& s : xi_run) {
    const double tol = 1e-9 * std::max(1.0, std::abs(s.t));
    while (r < reference.size() && reference[r].t < s.t - tol) ++r;
    if (r == reference.size() || std::abs(reference[r].t - s.t) > tol) {
      throw Error(Errc::MismatchedGrid, "reference has no sample at t = " + format_double(s.t));
    }
    idx.push_back(r);
  }
  const std::size_t n = xi_run.size();
  OffsetSeries out;
  out.t.resize(n);
  std::vector<std::array<double, 2>> fa(n), fb(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& ref = reference[idx[k]];
    const auto& m = moments_along[idx[k]];
    const FieldSample field = field_at(lattice, ref.x, Vec4{});
    const Mat4& f = field.f_mixed();
    out.t[k] = ref.t;
    fa[k] = moment_drive(f, m, ref.v);

    const Vec4& xi = xi_run[k].xi;
    const Vec4& dxi = xi_run[k].dxi;
    const Vec4 eps = m.first - ref.v;
    const double xe = dot(ref.v, eps);
    const double de = dot(dxi, eps);
    const Vec4 fd = apply(f, dxi);
    const Vec4 fx = apply(f, ref.v);
    std::array<double, 2> grad_term{};
    for (std::size_t l = 0; l < 4; ++l) {
      if (xi[l] == 0.0) continue;
      const auto g = moment_drive(field.grad()[l], m, ref.v);
      grad_term[0] += xi[l] * g[0];
      grad_term[1] += xi[l] * g[1];
    }
    fb[k][0] = fa[k][0] + ((fd[1] * xe + fx[1] * de) + grad_term[0]);
    fb[k][1] = fa[k][1] + ((fd[3] * xe + fx[3] * de) + grad_term[1]);
  }
  for (std::size_t c = 0; c < 2; ++c) {
    out.averaged[c].assign(n, 0.0);
    out.off13[c].assign(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
      accumulate(out.averaged[c], out.t, k, fa[k - 1][c], fa[k][c]);
      accumulate(out.off13[c], out.t, k, fb[k - 1][c], fb[k][c]);
    }
  }
  return out;
}

}  // namespace beamgeo
