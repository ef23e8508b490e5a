#include "cli.hpp"

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "beamgeo/connections.hpp"
#include "beamgeo/dynamics.hpp"
#include "beamgeo/ensemble.hpp"
#include "beamgeo/error.hpp"
#include "beamgeo/format.hpp"
#include "beamgeo/io.hpp"
#include "beamgeo/lattice.hpp"
#include "beamgeo/observables.hpp"
#include "beamgeo/oracle.hpp"

namespace beamgeo::cli {

namespace {

struct Options {
  std::string lattice;
  std::string beam;
  std::string out;
  std::optional<double> step;
  double span = 10.0;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  std::string frame = "inertial";
  std::optional<double> rho;
  std::string jacobi_mode = "full";
  std::string alphas = "0.02,0.01,0.005";
  std::string x0 = "0,0,0,0";
  std::string xi0 = "0,0,0,0";
  std::string dxi0 = "0,0,0,0";
  std::optional<double> gamma;
  double delta = 0.0;
  bool proper_time = false;
};

Vec4 parse_vec4(const std::string& text, const char* flag) {
  const auto list = parse_double_list(text);
  if (!list || list->size() != 4) {
    throw Error(Errc::InvalidArgument, std::string(flag) + " expects four comma-separated numbers");
  }
  return {(*list)[0], (*list)[1], (*list)[2], (*list)[3]};
}

void emit(const Options& o, const std::string& content) {
  if (o.out.empty()) {
    std::cout << content;
  } else {
    write_text_file(o.out, content);
  }
}

Lattice need_lattice(const Options& o) {
  if (o.lattice.empty()) throw Error(Errc::InvalidArgument, "--lattice is required");
  return load_lattice(o.lattice);
}

BeamEnsemble need_beam(const Options& o) {
  if (o.beam.empty()) throw Error(Errc::InvalidArgument, "--beam is required");
  const std::string text = read_text_file(o.beam);
  if (o.beam.size() >= 4 && o.beam.compare(o.beam.size() - 4, 4, ".csv") == 0) {
    return parse_ensemble_csv(text, o.beam);
  }
  BeamSpec spec = parse_beam_spec(text);
  if (o.seed) spec.seed = *o.seed;
  if (o.n) spec.n = *o.n;
  return realize(spec);
}

IntegratorConfig integrator(const Options& o, double fallback) { return {o.step.value_or(fallback), false}; }

FrameMode frame_of(const Options& o) {
  if (o.frame == "inertial") return FrameMode::inertial();
  if (!o.rho) throw Error(Errc::InvalidArgument, "--frame arc needs --rho");
  return FrameMode::arc_adapted(*o.rho);
}

TrajectoryState mean_start(const Options& o, const MomentSet& m) {
  const double norm = std::sqrt(dot(m.first, m.first));
  return {0.0, parse_vec4(o.x0, "--x0"), (1.0 / norm) * m.first};
}

const Element& first_element(const Lattice& lattice, std::initializer_list<ElementKind> kinds, const char* what) {
  for (const auto& e : lattice.elements()) {
    for (auto k : kinds)
      if (e.kind == k) return e;
  }
  throw Error(Errc::UnsupportedElement, std::string("lattice has no ") + what + " element");
}

int cmd_track(const Options& o) {
  const auto lattice = need_lattice(o);
  const auto beam = need_beam(o);
  const auto start = mean_start(o, compute_moments(beam));
  emit(o, trajectory_csv(integrate_lorentz(lattice, start, o.span, integrator(o, 1e-3))));
  return 0;
}

int cmd_avg_track(const Options& o) {
  const auto lattice = need_lattice(o);
  const auto m = compute_moments(need_beam(o));
  const auto run = integrate_averaged_geodesic(lattice, m, mean_start(o, m), o.span, integrator(o, 1e-3));
  emit(o, trajectory_csv(run.trajectory));
  return 0;
}

int cmd_jacobi(const Options& o) {
  const auto lattice = need_lattice(o);
  const auto m = compute_moments(need_beam(o));
  const auto cfg = integrator(o, 1e-3);
  const auto ref = integrate_averaged_geodesic(lattice, m, mean_start(o, m), o.span, cfg);
  JacobiOptions jo;
  jo.step = 2.0 * cfg.step;
  jo.frame = frame_of(o);
  if (o.jacobi_mode == "full")
    jo.mode = JacobiMode::Full;
  else if (o.jacobi_mode == "linearized")
    jo.mode = JacobiMode::Linearized;
  else
    throw Error(Errc::InvalidArgument, "--jacobi-mode must be full or linearized");
  const auto run = integrate_jacobi_full(lattice, ref, {0.0, parse_vec4(o.xi0, "--xi0"), parse_vec4(o.dxi0, "--dxi0")},
                                         o.span, jo);
  for (const auto& w : run.warnings) std::cerr << "warning: " << w << "\n";
  emit(o, jacobi_csv(run.series));
  return 0;
}

int cmd_transverse(const Options& o) {
  const auto lattice = need_lattice(o);
  const auto& e = first_element(lattice, {ElementKind::Dipole, ElementKind::NormalQuadDipole, ElementKind::SkewQuadDipole},
                                "dipole-bearing");
  const double rho = o.rho ? *o.rho : *curvature_radius(e);
  const JacobiState init{0.0, parse_vec4(o.xi0, "--xi0"), parse_vec4(o.dxi0, "--dxi0")};
  emit(o, jacobi_csv(integrate_transverse_linear(e, rho, init, o.span, integrator(o, 1e-3))));
  return 0;
}

int cmd_longitudinal(const Options& o) {
  const auto lattice = need_lattice(o);
  const auto& e = first_element(lattice, {ElementKind::ConstantE, ElementKind::RFCavity}, "const_e or rf");
  double gamma = 0.0;
  if (o.gamma) {
    gamma = *o.gamma;
  } else if (!o.beam.empty()) {
    gamma = compute_moments(need_beam(o)).first[0];
  } else {
    throw Error(Errc::InvalidArgument, "longitudinal needs --gamma or --beam");
  }
  const JacobiState init{0.0, parse_vec4(o.xi0, "--xi0"), parse_vec4(o.dxi0, "--dxi0")};
  const auto g = GammaSeries::constant(gamma, std::min(0.0, o.span), std::max(0.0, o.span));
  emit(o, jacobi_csv(integrate_longitudinal(e, g, init, o.span, integrator(o, 1e-3))));
  return 0;
}

int cmd_moments(const Options& o) {
  const auto beam = need_beam(o);
  const auto m = compute_moments(beam);
  const auto st = energy_stats(beam);
  nlohmann::ordered_json j;
  j["samples"] = beam.size();
  j["vol"] = m.vol;
  j["first"] = m.first;
  nlohmann::ordered_json third;
  for (const auto& t : sorted_triples()) {
    third[std::to_string(t[0]) + std::to_string(t[1]) + std::to_string(t[2])] = m.third(t[0], t[1], t[2]);
  }
  j["third"] = third;
  j["energy"] = st.energy;
  j["alpha"] = st.alpha;
  emit(o, j.dump(2) + "\n");
  return 0;
}

int cmd_offset(const Options& o) {
  const auto lattice = need_lattice(o);
  const auto m = compute_moments(need_beam(o));
  const auto run = integrate_averaged_geodesic(lattice, m, mean_start(o, m), o.span, integrator(o, 1e-3));
  const auto off = averaged_offset(lattice, run.trajectory, run.moments);
  std::string csv = "t,avg_off1,avg_off3\n";
  for (std::size_t k = 0; k < off.t.size(); ++k) {
    csv += format_double(off.t[k]) + ',' + format_double(off.averaged[0][k]) + ',' +
           format_double(off.averaged[1][k]) + '\n';
  }
  emit(o, csv);
  return 0;
}

int cmd_dispersion(const Options& o) {
  const auto lattice = need_lattice(o);
  const auto optics = lattice_optics(lattice, Plane::Horizontal);
  const double span = std::min(o.span, optics.length);
  const auto ps = principal_solutions(optics.k, 0.0, span, o.step.value_or(1e-3));
  const auto d = dispersion(ps, optics.inverse_rho, o.delta);
  std::string csv = "l,C,dC,S,dS,D,dD,offset\n";
  for (std::size_t k = 0; k < ps.grid.size(); ++k) {
    csv += format_double(ps.grid[k]) + ',' + format_double(ps.c[k]) + ',' + format_double(ps.dc[k]) + ',' +
           format_double(ps.s[k]) + ',' + format_double(ps.ds[k]) + ',' + format_double(d.d[k]) + ',' +
           format_double(d.dd[k]) + ',' + format_double(d.offset[k]) + '\n';
  }
  emit(o, csv);
  return 0;
}

int cmd_scan_alpha(const Options& o) {
  const auto lattice = need_lattice(o);
  const auto alphas = parse_double_list(o.alphas);
  if (!alphas) throw Error(Errc::InvalidArgument, "--alphas expects comma-separated numbers");
  ScanConfig sc;
  sc.integrator = integrator(o, 1e-3);
  sc.time = o.proper_time ? ComparisonTime::Proper : ComparisonTime::Coordinate;
  sc.x0 = parse_vec4(o.x0, "--x0");
  const auto family = gaussian_family(o.gamma.value_or(100.0), o.n.value_or(10000), o.seed.value_or(42));
  emit(o, to_json(theorem1_scan(lattice, family, *alphas, o.span, sc)));
  return 0;
}

int cmd_validate(const Options& o) {
  const auto lattice = need_lattice(o);
  std::vector<Probe> probes;
  for (std::size_t i = 0; i < lattice.elements().size(); ++i) {
    const double mid = lattice.start_of(i) + 0.5 * lattice.elements()[i].length;
    probes.push_back({{0.0, 0.0, mid, 0.0}, {0.0, 0.01, 0.0, -0.01}});
  }
  nlohmann::ordered_json j;
  j["elements"] = lattice.elements().size();
  j["total_length"] = lattice.total_length();
  j["max_gradient_error"] = validate_field_gradients(lattice, probes);
  emit(o, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"beamgeo: averaged Lorentz connection beam dynamics.\n"
               "Units: c = 1, lengths and times in m, b0/e2/e2_0/w_rf in 1/m, b1 in 1/m^2."};
  app.require_subcommand(1);
  Options o;

  auto lattice = [&](CLI::App* c) { c->add_option("--lattice", o.lattice, "Lattice file (lengths in m, b0/e2 in 1/m, b1 in 1/m^2)"); };
  auto beam = [&](CLI::App* c) {
    c->add_option("--beam", o.beam, "Beam file (key=value) or ensemble snapshot (.csv); velocities dimensionless");
    c->add_option("--seed", o.seed, "Override the beam seed");
    c->add_option("--n", o.n, "Override the beam sample count");
  };
  auto common = [&](CLI::App* c, const char* span_help) {
    c->add_option("--step", o.step, "Integrator step (m)")->check(CLI::PositiveNumber);
    c->add_option("--span", o.span, span_help);
    c->add_option("--out", o.out, "Output file (default: stdout)");
  };
  auto deviation = [&](CLI::App* c) {
    c->add_option("--xi0", o.xi0, "Initial deviation xi (m), four comma-separated components");
    c->add_option("--dxi0", o.dxi0, "Initial deviation rate dxi/dt (dimensionless)");
  };
  auto start = [&](CLI::App* c) { c->add_option("--x0", o.x0, "Initial position (m), four components"); };

  auto* track = app.add_subcommand("track", "Lorentz-force trajectory of the beam's mean velocity (span: proper time, m)");
  lattice(track), beam(track), common(track, "Proper-time span (m)"), start(track);
  auto* avg = app.add_subcommand("avg-track", "Geodesic of the averaged connection (span: proper time, m)");
  lattice(avg), beam(avg), common(avg, "Proper-time span (m)"), start(avg);
  auto* jac = app.add_subcommand("jacobi", "Averaged Jacobi equation along the averaged geodesic (xi in m)");
  lattice(jac), beam(jac), common(jac, "Proper-time span (m)"), start(jac), deviation(jac);
  jac->add_option("--jacobi-mode", o.jacobi_mode, "full | linearized");
  jac->add_option("--frame", o.frame, "inertial | arc");
  jac->add_option("--rho", o.rho, "Curvature radius for --frame arc (m)");
  auto* tr = app.add_subcommand("transverse", "Linear transverse system of the first dipole-bearing element (l in m)");
  lattice(tr), common(tr, "Path length (m)"), deviation(tr);
  tr->add_option("--rho", o.rho, "Curvature radius (m); default 1/b0");
  auto* lon = app.add_subcommand("longitudinal", "Linear longitudinal system of the first const_e/rf element (t in m)");
  lattice(lon), beam(lon), common(lon, "Proper-time span (m)"), deviation(lon);
  lon->add_option("--gamma", o.gamma, "Constant reference gamma = dX0/dt (dimensionless)");
  auto* mom = app.add_subcommand("moments", "Moments, energy and narrowness of a beam (dimensionless), JSON");
  beam(mom);
  mom->add_option("--out", o.out, "Output file (default: stdout)");
  auto* off = app.add_subcommand("offset", "Averaged offset <Off^1>, <Off^3> along the averaged geodesic (m)");
  lattice(off), beam(off), common(off, "Proper-time span (m)"), start(off);
  auto* disp = app.add_subcommand("dispersion", "Principal solutions and dispersion along the lattice (l in m, D in m)");
  lattice(disp), common(disp, "Path length (m); capped at the lattice length");
  disp->add_option("--delta", o.delta, "Relative momentum offset dp/p0 (dimensionless)");
  auto* scan = app.add_subcommand("scan-alpha", "Deviation of averaged geodesic from ensemble mean versus narrowness, JSON (m)");
  lattice(scan), common(scan, "Coordinate-time span s (m)"), start(scan);
  scan->add_option("--alphas", o.alphas, "Narrowness values, strictly decreasing (dimensionless)");
  scan->add_option("--seed", o.seed, "Beam seed (default 42)");
  scan->add_option("--n", o.n, "Samples per beam (default 10000)");
  scan->add_option("--gamma", o.gamma, "Beam energy gamma (default 100)");
  scan->add_flag("--proper-time", o.proper_time, "Compare at equal proper time instead of coordinate time");
  auto* val = app.add_subcommand("validate", "Finite-difference check of field gradients (relative error)");
  lattice(val);
  val->add_option("--out", o.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (track->parsed()) return cmd_track(o);
    if (avg->parsed()) return cmd_avg_track(o);
    if (jac->parsed()) return cmd_jacobi(o);
    if (tr->parsed()) return cmd_transverse(o);
    if (lon->parsed()) return cmd_longitudinal(o);
    if (mom->parsed()) return cmd_moments(o);
    if (off->parsed()) return cmd_offset(o);
    if (disp->parsed()) return cmd_dispersion(o);
    if (scan->parsed()) return cmd_scan_alpha(o);
    if (val->parsed()) return cmd_validate(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace beamgeo::cli
