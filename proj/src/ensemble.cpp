#include "beamgeo/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "beamgeo/error.hpp"
#include "beamgeo/format.hpp"
#include "beamgeo/kernels.hpp"

namespace beamgeo {

namespace {

void validate_samples(std::span<const VelocitySample> samples) {
  if (samples.empty()) throw Error(Errc::EmptyEnsemble, "ensemble has no samples");
  double total = 0.0;
  for (std::size_t p = 0; p < samples.size(); ++p) {
    const auto& s = samples[p];
    if (!(s.w >= 0.0) || !std::isfinite(s.w)) {
      throw Error(Errc::ZeroWeight, "sample " + std::to_string(p) + " has invalid weight");
    }
    total += s.w;
    const double shell = dot(s.y, s.y) - 1.0;
    const double scale = std::max(1.0, s.y[0] * s.y[0]);
    if (!(std::abs(shell) <= kShellTolerance * scale) || !(s.y[0] > 0.0)) {
      throw Error(Errc::OffShellSample,
                  "sample " + std::to_string(p) + " is not on the unit hyperboloid");
    }
  }
  if (!(total > 0.0)) throw Error(Errc::ZeroWeight, "total weight is zero");
}

std::vector<double> soa_of(std::span<const VelocitySample> samples) {
  const std::size_t n = samples.size();
  std::vector<double> y(4 * n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t i = 0; i < 4; ++i) y[i * n + p] = samples[p].y[i];
  return y;
}

}  // namespace

BeamEnsemble::BeamEnsemble(std::vector<VelocitySample> samples, std::string label)
    : samples_(std::move(samples)), label_(std::move(label)) {
  validate_samples(samples_);
}

std::vector<double> BeamEnsemble::velocity_soa() const { return soa_of(samples_); }

std::vector<double> BeamEnsemble::weights() const {
  std::vector<double> w(samples_.size());
  std::transform(samples_.begin(), samples_.end(), w.begin(), [](const auto& s) { return s.w; });
  return w;
}

MomentSet delta_moments(const Vec4& u, double vol) {
  MomentSet m;
  m.vol = vol;
  m.first = u;
  m.third = Sym3::outer_cube(u);
  return m;
}

Vec4 project_to_hyperboloid(const Vec3& p) noexcept {
  const double sq = (p[0] * p[0] + p[1] * p[1]) + p[2] * p[2];
  return {std::sqrt(1.0 + sq), p[0], p[1], p[2]};
}

MomentSet compute_moments(std::span<const VelocitySample> samples) {
  validate_samples(samples);
  const std::size_t n = samples.size();
  const auto y = soa_of(samples);
  std::vector<double> w(n);
  for (std::size_t p = 0; p < n; ++p) w[p] = samples[p].w;

  const auto sums = kernels::accumulate_moments(y, w, n);
  MomentSet m;
  m.vol = sums.weight;
  for (std::size_t i = 0; i < 4; ++i) m.first[i] = sums.first[i] / sums.weight;
  const auto& triples = sorted_triples();
  for (std::size_t t = 0; t < triples.size(); ++t) {
    m.third.set(triples[t][0], triples[t][1], triples[t][2], sums.third[t] / sums.weight);
  }
  return m;
}

MomentSet compute_moments(const BeamEnsemble& ensemble) { return compute_moments(ensemble.samples()); }

EnergyStats energy_stats(std::span<const VelocitySample> samples) {
  if (samples.empty()) throw Error(Errc::EmptyEnsemble, "ensemble has no samples");
  EnergyStats st;
  st.energy = samples[0].y[0];
  for (const auto& s : samples) st.energy = std::min(st.energy, s.y[0]);
  const auto y = soa_of(samples);
  st.alpha = std::sqrt(kernels::max_pair_distance_sq(y, samples.size()));
  return st;
}

EnergyStats energy_stats(const BeamEnsemble& ensemble) { return energy_stats(ensemble.samples()); }

BeamEnsemble sample_gaussian_beam(const Vec3& mean, const Vec3& sigma, std::size_t n,
                                  std::uint64_t seed) {
  if (n == 0) throw Error(Errc::InvalidCount, "sample count must be at least 1");
  for (double s : sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw Error(Errc::InvalidArgument, "sigma components must be finite and non-negative");
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<VelocitySample> samples(n);
  for (auto& s : samples) {
    Vec3 p{};
    for (std::size_t c = 0; c < 3; ++c) p[c] = mean[c] + sigma[c] * normal(rng);
    s.y = project_to_hyperboloid(p);
    s.w = 1.0;
  }
  return BeamEnsemble(std::move(samples), "gaussian");
}

std::string ensemble_csv(const BeamEnsemble& ensemble) {
  std::string out = "y0,y1,y2,y3,w\n";
  for (const auto& s : ensemble.samples()) {
    out += format_double(s.y[0]) + ',' + format_double(s.y[1]) + ',' + format_double(s.y[2]) + ',' +
           format_double(s.y[3]) + ',' + format_double(s.w) + '\n';
  }
  return out;
}

BeamEnsemble parse_ensemble_csv(const std::string& text, std::string label) {
  std::vector<VelocitySample> samples;
  std::size_t line_no = 0;
  bool header_seen = false;
  for (auto line : split(text, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "y0,y1,y2,y3,w") {
        throw Error(Errc::ParseError, "line 1: expected header 'y0,y1,y2,y3,w'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 5) {
      throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": expected 5 fields");
    }
    VelocitySample s;
    for (std::size_t c = 0; c < 5; ++c) {
      const auto v = parse_double(fields[c]);
      if (!v) throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": bad number");
      if (c < 4)
        s.y[c] = *v;
      else
        s.w = *v;
    }
    samples.push_back(s);
  }
  return BeamEnsemble(std::move(samples), std::move(label));
}

BeamSpec parse_beam_spec(const std::string& text) {
  BeamSpec spec;
  std::set<std::string, std::less<>> seen;
  bool have_sigma = false;
  std::size_t line_no = 0;
  auto fail = [&](Errc code, const std::string& why) {
    throw Error(code, "line " + std::to_string(line_no) + ": " + why);
  };
  auto parse_vec3 = [&](std::string_view value) {
    const auto list = parse_double_list(value);
    if (!list || list->size() != 3) fail(Errc::ParseError, "expected three comma-separated numbers");
    return Vec3{(*list)[0], (*list)[1], (*list)[2]};
  };

  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(Errc::ParseError, "expected key=value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.insert(std::string(key)).second) fail(Errc::DuplicateKey, "duplicate key '" + std::string(key) + "'");

    if (key == "distribution") {
      if (value == "gaussian")
        spec.distribution = BeamSpec::Distribution::Gaussian;
      else if (value == "delta")
        spec.distribution = BeamSpec::Distribution::Delta;
      else
        fail(Errc::ParseError, "unknown distribution '" + std::string(value) + "'");
    } else if (key == "mean") {
      spec.mean = parse_vec3(value);
    } else if (key == "sigma") {
      spec.sigma = parse_vec3(value);
      have_sigma = true;
    } else if (key == "n") {
      const auto v = parse_integer(value);
      if (!v || *v < 1) fail(Errc::InvalidCount, "n must be a positive integer");
      spec.n = static_cast<std::size_t>(*v);
    } else if (key == "seed") {
      const auto v = parse_integer(value);
      if (!v || *v < 0) fail(Errc::ParseError, "seed must be a non-negative integer");
      spec.seed = static_cast<std::uint64_t>(*v);
    } else {
      fail(Errc::ParseError, "unknown key '" + std::string(key) + "'");
    }
  }
  if (spec.distribution == BeamSpec::Distribution::Gaussian && !have_sigma) {
    throw Error(Errc::ParseError, "gaussian beam requires sigma");
  }
  return spec;
}

BeamEnsemble realize(const BeamSpec& spec) {
  if (spec.distribution == BeamSpec::Distribution::Delta) {
    if (spec.n == 0) throw Error(Errc::InvalidCount, "sample count must be at least 1");
    std::vector<VelocitySample> samples(spec.n, VelocitySample{project_to_hyperboloid(spec.mean), 1.0});
    return BeamEnsemble(std::move(samples), "delta");
  }
  return sample_gaussian_beam(spec.mean, spec.sigma, spec.n, spec.seed);
}

}  // namespace beamgeo
