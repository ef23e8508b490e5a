#include "beamgeo/oracle.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "beamgeo/error.hpp"
#include "beamgeo/format.hpp"
#include "beamgeo/integrator.hpp"

namespace beamgeo {

namespace {

double lane_sum(const std::array<double, kernels::kLanes>& s) { return (s[0] + s[1]) + (s[2] + s[3]); }

struct Hermite {
  double h00, h10, h01, h11;
  explicit Hermite(double s) {
    const double s2 = s * s, s3 = s2 * s;
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    h10 = s3 - 2.0 * s2 + s;
    h01 = -2.0 * s3 + 3.0 * s2;
    h11 = s3 - s2;
  }
  double operator()(double f0, double d0, double f1, double d1, double h) const {
    return h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
  }
};

Vec4 hermite_point(const TrajectoryState& a, const TrajectoryState& b, double frac) {
  const Hermite H(frac);
  const double h = b.t - a.t;
  Vec4 x;
  for (std::size_t i = 0; i < 4; ++i) x[i] = H(a.x[i], a.v[i], b.x[i], b.v[i], h);
  return x;
}

// Fraction in [0, 1] at which the Hermite interpolant of x^0 reaches target.
double coordinate_crossing(const TrajectoryState& a, const TrajectoryState& b, double target) {
  const double h = b.t - a.t;
  auto f = [&](double s) { return Hermite(s)(a.x[0], a.v[0], b.x[0], b.v[0], h) - target; };
  double lo = 0.0, hi = 1.0;
  double flo = f(lo);
  if (flo >= 0.0) return 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

TrajectoryState sample_state(const std::vector<double>& s, std::size_t n, std::size_t p, double t) {
  TrajectoryState st;
  st.t = t;
  for (std::size_t i = 0; i < 4; ++i) {
    st.x[i] = s[i * n + p];
    st.v[i] = s[(4 + i) * n + p];
  }
  return st;
}

std::vector<double> initial_batch(const BeamEnsemble& ensemble, const Vec4& x0) {
  const std::size_t n = ensemble.size();
  std::vector<double> state(8 * n);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = 0; i < 4; ++i) {
      state[i * n + p] = x0[i];
      state[(4 + i) * n + p] = ensemble.samples()[p].y[i];
    }
  }
  return state;
}

}  // namespace

Vec4 weighted_mean(const std::vector<Vec4>& values, const std::vector<double>& weights) {
  if (values.empty() || values.size() != weights.size()) {
    throw Error(Errc::InvalidArgument, "weighted mean needs matching, non-empty values and weights");
  }
  std::array<double, kernels::kLanes> wl{};
  for (std::size_t p = 0; p < weights.size(); ++p) wl[p % kernels::kLanes] += weights[p];
  const double total = lane_sum(wl);
  if (!(total > 0.0)) throw Error(Errc::ZeroWeight, "total weight is zero");
  const Vec4& base = values.front();
  Vec4 out;
  for (std::size_t i = 0; i < 4; ++i) {
    std::array<double, kernels::kLanes> sl{};
    for (std::size_t p = 0; p < values.size(); ++p) sl[p % kernels::kLanes] += weights[p] * (values[p][i] - base[i]);
    const double s = lane_sum(sl);
    out[i] = s == 0.0 ? base[i] : base[i] + s / total;
  }
  return out;
}

Trajectory ensemble_track(const Lattice& lattice, const BeamEnsemble& ensemble, const Vec4& x0, double t0,
                          double t_end, const IntegratorConfig& config, kernels::Backend backend) {
  check_step(lattice, config.step);
  const std::size_t n = ensemble.size();
  const auto grid = step_grid(t0, t_end, config.step);
  const auto weights = ensemble.weights();
  auto state = initial_batch(ensemble, x0);
  Trajectory out;
  out.reserve(grid.size());
  std::vector<Vec4> xs(n), vs(n);
  track_batch(
      lattice, state, n, grid, config,
      [&](std::size_t, double t, const std::vector<double>& s) {
        for (std::size_t p = 0; p < n; ++p) {
          const auto st = sample_state(s, n, p, t);
          xs[p] = st.x;
          vs[p] = st.v;
        }
        out.push_back({t, weighted_mean(xs, weights), weighted_mean(vs, weights)});
        return true;
      },
      backend);
  return out;
}

Vec4 trajectory_endpoint(const Trajectory& curve, double s, ComparisonTime mode) {
  if (curve.empty()) throw Error(Errc::OutOfSpan, "empty curve");
  const double target = mode == ComparisonTime::Coordinate ? curve.front().x[0] + s : curve.front().t + s;
  auto key = [&](const TrajectoryState& st) { return mode == ComparisonTime::Coordinate ? st.x[0] : st.t; };
  if (key(curve.front()) == target) return curve.front().x;
  for (std::size_t k = 1; k < curve.size(); ++k) {
    if (key(curve[k]) < target) continue;
    if (key(curve[k]) == target) return curve[k].x;
    const auto& a = curve[k - 1];
    const auto& b = curve[k];
    const double frac = mode == ComparisonTime::Coordinate ? coordinate_crossing(a, b, target)
                                                           : (target - a.t) / (b.t - a.t);
    return hermite_point(a, b, frac);
  }
  throw Error(Errc::OutOfSpan, "curve does not reach the comparison time " + format_double(target));
}

Vec4 ensemble_endpoint(const Lattice& lattice, const BeamEnsemble& ensemble, const Vec4& x0, double s,
                       const IntegratorConfig& config, ComparisonTime mode, kernels::Backend backend) {
  check_step(lattice, config.step);
  const std::size_t n = ensemble.size();
  const auto weights = ensemble.weights();
  if (mode == ComparisonTime::Proper) {
    const auto grid = step_grid(0.0, s, config.step);
    auto state = initial_batch(ensemble, x0);
    std::vector<Vec4> xs(n);
    track_batch(
        lattice, state, n, grid, config,
        [&](std::size_t k, double t, const std::vector<double>& st) {
          if (k + 1 == grid.size())
            for (std::size_t p = 0; p < n; ++p) xs[p] = sample_state(st, n, p, t).x;
          return true;
        },
        backend);
    return weighted_mean(xs, weights);
  }

  const double target = x0[0] + s;
  double min_y0 = std::numeric_limits<double>::infinity();
  for (const auto& smp : ensemble.samples()) min_y0 = std::min(min_y0, smp.y[0]);
  double t_max = 1.01 * s / min_y0 + 2.0 * config.step;
  for (int attempt = 0; attempt < 20; ++attempt, t_max *= 2.0) {
    const auto grid = step_grid(0.0, t_max, config.step);
    auto state = initial_batch(ensemble, x0);
    std::vector<double> prev = state;
    double t_prev = 0.0;
    std::vector<Vec4> xs(n);
    std::vector<char> done(n, 0);
    std::size_t remaining = n;
    track_batch(
        lattice, state, n, grid, config,
        [&](std::size_t k, double t, const std::vector<double>& st) {
          for (std::size_t p = 0; p < n && k > 0; ++p) {
            if (done[p] || st[p] < target) continue;
            const auto a = sample_state(prev, n, p, t_prev);
            const auto b = sample_state(st, n, p, t);
            xs[p] = st[p] == target ? b.x : hermite_point(a, b, coordinate_crossing(a, b, target));
            done[p] = 1;
            --remaining;
          }
          if (k == 0) {
            for (std::size_t p = 0; p < n; ++p) {
              if (st[p] == target) {
                xs[p] = sample_state(st, n, p, t).x;
                done[p] = 1;
                --remaining;
              }
            }
          }
          prev = st;
          t_prev = t;
          return remaining > 0;
        },
        backend);
    if (remaining == 0) return weighted_mean(xs, weights);
  }
  throw Error(Errc::OutOfSpan, "ensemble does not reach coordinate time " + format_double(target));
}

double theorem1_deviation(const Lattice& lattice, const BeamEnsemble& ensemble, const Vec4& x0, double s,
                          const IntegratorConfig& config, ComparisonTime mode) {
  const MomentSet m = compute_moments(ensemble);
  const double norm = std::sqrt(dot(m.first, m.first));
  TrajectoryState init{0.0, x0, (1.0 / norm) * m.first};
  const Vec4 mean = ensemble_endpoint(lattice, ensemble, x0, s, config, mode);

  Vec4 geo;
  if (mode == ComparisonTime::Proper) {
    const auto run = integrate_averaged_geodesic(lattice, m, init, s, config);
    geo = run.trajectory.back().x;
    return euclidean_distance(geo, mean);
  }
  double t_max = 1.01 * s / init.v[0] + 2.0 * config.step;
  for (int attempt = 0; attempt < 20; ++attempt, t_max *= 2.0) {
    const auto run = integrate_averaged_geodesic(lattice, m, init, t_max, config);
    if (run.trajectory.back().x[0] < x0[0] + s) continue;
    geo = trajectory_endpoint(run.trajectory, s, ComparisonTime::Coordinate);
    return spatial_distance(geo, mean);
  }
  throw Error(Errc::OutOfSpan, "averaged geodesic does not reach coordinate time " + format_double(x0[0] + s));
}

BeamFamily gaussian_family(double gamma, std::size_t n, std::uint64_t seed) {
  if (!(gamma >= 1.0)) throw Error(Errc::InvalidArgument, "gamma must be >= 1");
  const double p = std::sqrt(gamma * gamma - 1.0);
  return [p, n, seed](double alpha) {
    const double sigma = alpha / 9.0;
    return sample_gaussian_beam({0.0, p, 0.0}, {sigma, sigma, sigma}, n, seed);
  };
}

std::pair<double, double> fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(Errc::DegenerateFit, "power-law fit needs at least two points");
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(Errc::DegenerateFit, "power-law fit needs positive data");
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (!(sxx > 0.0)) throw Error(Errc::DegenerateFit, "abscissae coincide");
  const double slope = sxy / sxx;
  return {slope, std::exp(my - slope * mx)};
}

ScalingReport theorem1_scan(const Lattice& lattice, const BeamFamily& family, const std::vector<double>& alphas,
                            double s, const ScanConfig& config) {
  if (alphas.size() < 3) throw Error(Errc::DegenerateFit, "scan needs at least three alpha values");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0 && alphas[i] <= 0.2)) throw Error(Errc::InvalidArgument, "alphas must lie in (0, 0.2]");
    if (i > 0 && !(alphas[i] < alphas[i - 1])) throw Error(Errc::InvalidArgument, "alphas must be strictly decreasing");
  }
  if (!(s > 0.0)) throw Error(Errc::InvalidArgument, "span must be positive");
  ScalingReport r;
  r.alphas = alphas;
  for (double a : alphas) {
    r.deviations.push_back(theorem1_deviation(lattice, family(a), config.x0, s, config.integrator, config.time));
  }
  std::tie(r.fitted_exponent, r.fitted_prefactor) = fit_power_law(r.alphas, r.deviations);
  return r;
}

std::string to_json(const ScalingReport& report) {
  nlohmann::ordered_json j;
  j["alphas"] = report.alphas;
  j["deviations"] = report.deviations;
  j["fitted_exponent"] = report.fitted_exponent;
  j["fitted_prefactor"] = report.fitted_prefactor;
  return j.dump(2) + "\n";
}

JacobiCheckReport jacobi_vs_two_geodesics(const Lattice& lattice, const AveragedRun& reference,
                                          const JacobiState& xi0, const std::vector<double>& scales,
                                          double t_end, const JacobiOptions& options) {
  const auto& ref = reference.trajectory;
  if (ref.empty()) throw Error(Errc::InvalidArgument, "empty reference");
  std::size_t start = 0;
  while (start < ref.size() && ref[start].t < xi0.t - 1e-12 * std::max(1.0, std::abs(xi0.t))) ++start;
  if (start == ref.size()) throw Error(Errc::ReferenceSpanExceeded, "deviation starts after the reference");
  const TrajectoryState base{ref[start].t, ref[start].x, ref[start].v};

  const auto jac = integrate_jacobi_full(lattice, reference, xi0, t_end, options);
  const auto x0 = integrate_prescribed_geodesic(lattice, reference, base, t_end, options.step);
  const Vec4& xi_end = jac.series.back().xi;

  JacobiCheckReport r;
  r.scales = scales;
  std::vector<double> fx, fy;
  for (double sigma : scales) {
    const TrajectoryState pert{base.t, base.x + sigma * xi0.xi, base.v + sigma * xi0.dxi};
    const auto xs = integrate_prescribed_geodesic(lattice, reference, pert, t_end, options.step);
    const double err = euclidean_distance(xs.back().x, x0.back().x + sigma * xi_end);
    r.errors.push_back(err);
    if (sigma > 0.0 && err > 0.0) {
      fx.push_back(sigma);
      fy.push_back(err);
    }
  }
  r.fitted_order = fx.size() >= 2 ? fit_power_law(fx, fy).first : std::numeric_limits<double>::quiet_NaN();
  return r;
}

double validate_field_gradients(const Lattice& lattice, const std::vector<Probe>& probes, double fd_step) {
  if (!(fd_step > 0.0)) throw Error(Errc::InvalidArgument, "finite-difference step must be positive");
  double worst = 0.0;
  for (const auto& pr : probes) {
    const FieldSample at = field_at(lattice, pr.x, pr.xi);
    double scale = 1e-12;
    for (const auto& g : at.grad())
      for (const auto& row : g)
        for (double v : row) scale = std::max(scale, std::abs(v));
    for (std::size_t l = 0; l < 4; ++l) {
      Vec4 up = pr.xi, dn = pr.xi;
      up[l] += fd_step;
      dn[l] -= fd_step;
      const Mat4 fu = field_at(lattice, pr.x, up).f_mixed();
      const Mat4 fd = field_at(lattice, pr.x, dn).f_mixed();
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
          const double diff = (fu[i][j] - fd[i][j]) / (up[l] - dn[l]);
          worst = std::max(worst, std::abs(diff - at.grad()[l][i][j]) / scale);
        }
    }
  }
  return worst;
}

}  // namespace beamgeo
