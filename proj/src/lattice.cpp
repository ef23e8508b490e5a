#include "beamgeo/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "beamgeo/error.hpp"
#include "beamgeo/format.hpp"
#include "beamgeo/io.hpp"

namespace beamgeo {

std::string_view keyword(ElementKind kind) noexcept {
  switch (kind) {
    case ElementKind::Drift: return "drift";
    case ElementKind::Dipole: return "dipole";
    case ElementKind::NormalQuadDipole: return "quad_dipole";
    case ElementKind::SkewQuadDipole: return "skew_quad_dipole";
    case ElementKind::ConstantE: return "const_e";
    case ElementKind::RFCavity: return "rf";
  }
  return "?";
}

Element Element::drift(double length) { return Element{ElementKind::Drift, length}; }

Element Element::dipole(double length, double b0) {
  Element e{ElementKind::Dipole, length};
  e.b0 = b0;
  return e;
}

Element Element::quad_dipole(double length, double b0, double b1) {
  Element e{ElementKind::NormalQuadDipole, length};
  e.b0 = b0;
  e.b1 = b1;
  return e;
}

Element Element::skew_quad_dipole(double length, double b0, double b1) {
  Element e{ElementKind::SkewQuadDipole, length};
  e.b0 = b0;
  e.b1 = b1;
  return e;
}

Element Element::const_e(double length, double e2) {
  Element e{ElementKind::ConstantE, length};
  e.e2 = e2;
  return e;
}

Element Element::rf(double length, double e2_0, double w_rf) {
  Element e{ElementKind::RFCavity, length};
  e.e2_0 = e2_0;
  e.w_rf = w_rf;
  return e;
}

bool Element::has_dipole() const noexcept {
  return kind == ElementKind::Dipole || kind == ElementKind::NormalQuadDipole ||
         kind == ElementKind::SkewQuadDipole;
}

namespace {

// Sets the magnetic (1,2) and (2,3) blocks from their upper entries; the
// lower entries are exact negations so the lowered tensor is antisymmetric.
void set_magnetic(Mat4& f, double f12, double f23) {
  f[1][2] = f12;
  f[2][1] = -f12;
  f[2][3] = f23;
  f[3][2] = -f23;
}

void set_electric_longitudinal(Mat4& f, double e) {
  f[0][2] = e;
  f[2][0] = e;
}

}  // namespace

Mat4 element_matrix(const Element& e, const Vec4& p) {
  Mat4 f{};
  switch (e.kind) {
    case ElementKind::Drift:
      break;
    case ElementKind::Dipole:
      set_magnetic(f, e.b0, 0.0);
      break;
    case ElementKind::NormalQuadDipole:
      set_magnetic(f, e.b0 - e.b1 * p[1], e.b1 * p[3]);
      break;
    case ElementKind::SkewQuadDipole:
      set_magnetic(f, e.b0 + e.b1 * p[3], e.b1 * p[1]);
      break;
    case ElementKind::ConstantE:
      set_electric_longitudinal(f, e.e2);
      break;
    case ElementKind::RFCavity:
      set_electric_longitudinal(f, e.e2_0 * std::sin(e.w_rf * p[2]));
      break;
  }
  return f;
}

FieldSample element_field(const Element& e, const Vec4& p) {
  std::array<Mat4, 4> grad{};
  switch (e.kind) {
    case ElementKind::NormalQuadDipole:
      set_magnetic(grad[1], -e.b1, 0.0);
      set_magnetic(grad[3], 0.0, e.b1);
      break;
    case ElementKind::SkewQuadDipole:
      set_magnetic(grad[3], e.b1, 0.0);
      set_magnetic(grad[1], 0.0, e.b1);
      break;
    case ElementKind::RFCavity:
      set_electric_longitudinal(grad[2], e.e2_0 * e.w_rf * std::cos(e.w_rf * p[2]));
      break;
    default:
      break;
  }
  return FieldSample(element_matrix(e, p), grad);
}

Lattice::Lattice(std::vector<Element> elements) : elements_(std::move(elements)) {
  starts_.reserve(elements_.size());
  double s = 0.0;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const auto& e = elements_[i];
    if (!(e.length > 0.0) || !std::isfinite(e.length)) {
      throw Error(Errc::NegativeLength, "element " + std::to_string(i) + " has non-positive length");
    }
    for (double v : {e.b0, e.b1, e.e2, e.e2_0, e.w_rf}) {
      if (!std::isfinite(v)) {
        throw Error(Errc::InvalidArgument, "element " + std::to_string(i) + " has a non-finite strength");
      }
    }
    starts_.push_back(s);
    s += e.length;
  }
  total_length_ = s;
}

double Lattice::min_element_length() const noexcept {
  double m = total_length_;
  for (const auto& e : elements_) m = std::min(m, e.length);
  return m;
}

std::size_t Lattice::locate(double s) const {
  if (elements_.empty() || !(s >= 0.0) || !(s <= total_length_)) {
    throw Error(Errc::OutOfLattice, "longitudinal coordinate " + format_double(s) +
                                        " outside lattice [0, " + format_double(total_length_) + "]");
  }
  const auto it = std::upper_bound(starts_.begin(), starts_.end(), s);
  return static_cast<std::size_t>(std::distance(starts_.begin(), it)) - 1;
}

FieldSample Lattice::field_in(std::size_t index, const Vec4& position) const {
  return element_field(elements_.at(index), position);
}

FieldSample field_at(const Lattice& lattice, const Vec4& x, const Vec4& xi) {
  return lattice.field_in(lattice.locate(x[2]), x + xi);
}

std::optional<double> curvature_radius(const Element& e) {
  if (!e.has_dipole()) return std::nullopt;
  if (e.b0 == 0.0) {
    throw Error(Errc::ZeroStrength, std::string(keyword(e.kind)) + " element has b0 = 0");
  }
  return 1.0 / std::abs(e.b0);
}

Lattice parse_lattice(std::string_view text) {
  struct KindInfo {
    ElementKind kind;
    std::vector<std::string_view> required;
  };
  static const std::map<std::string_view, KindInfo> kinds = {
      {"drift", {ElementKind::Drift, {}}},
      {"dipole", {ElementKind::Dipole, {"b0"}}},
      {"quad_dipole", {ElementKind::NormalQuadDipole, {"b0", "b1"}}},
      {"skew_quad_dipole", {ElementKind::SkewQuadDipole, {"b0", "b1"}}},
      {"const_e", {ElementKind::ConstantE, {"e2"}}},
      {"rf", {ElementKind::RFCavity, {"e2_0", "w_rf"}}},
  };
  static const std::vector<std::string_view> known_keys = {"length", "b0", "b1", "e2", "e2_0", "w_rf"};

  std::vector<Element> elements;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    auto fail = [&](Errc code, const std::string& why) {
      throw Error(code, "line " + std::to_string(line_no) + ": " + why);
    };
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    std::vector<std::string_view> tokens;
    for (auto tok : split(line, ' ')) {
      for (auto sub : split(tok, '\t')) {
        if (!trim(sub).empty()) tokens.push_back(trim(sub));
      }
    }
    if (tokens.size() < 2 || tokens[0] != "element") fail(Errc::ParseError, "expected 'element <kind> ...'");
    const auto kind_it = kinds.find(tokens[1]);
    if (kind_it == kinds.end()) fail(Errc::ParseError, "unknown element kind '" + std::string(tokens[1]) + "'");
    const auto& info = kind_it->second;

    std::map<std::string_view, double> values;
    for (std::size_t t = 2; t < tokens.size(); ++t) {
      const auto eq = tokens[t].find('=');
      if (eq == std::string_view::npos) fail(Errc::ParseError, "expected key=value, got '" + std::string(tokens[t]) + "'");
      const auto key = tokens[t].substr(0, eq);
      const auto raw = tokens[t].substr(eq + 1);
      if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end()) {
        fail(Errc::ParseError, "unknown key '" + std::string(key) + "'");
      }
      if (key != "length" && std::find(info.required.begin(), info.required.end(), key) == info.required.end()) {
        fail(Errc::ParseError, "key '" + std::string(key) + "' does not apply to " + std::string(tokens[1]));
      }
      const auto v = parse_double(raw);
      if (!v) fail(Errc::ParseError, "bad number for '" + std::string(key) + "'");
      if (!values.emplace(key, *v).second) fail(Errc::DuplicateKey, "duplicate key '" + std::string(key) + "'");
    }
    if (!values.count("length")) fail(Errc::ParseError, "missing length");
    for (auto req : info.required) {
      if (!values.count(req)) fail(Errc::ParseError, "missing " + std::string(req));
    }
    if (!(values["length"] > 0.0)) fail(Errc::NegativeLength, "length must be positive");

    Element e;
    e.kind = info.kind;
    e.length = values["length"];
    auto get = [&](std::string_view k) {
      const auto it = values.find(k);
      return it == values.end() ? 0.0 : it->second;
    };
    e.b0 = get("b0");
    e.b1 = get("b1");
    e.e2 = get("e2");
    e.e2_0 = get("e2_0");
    e.w_rf = get("w_rf");
    elements.push_back(e);
  }
  return Lattice(std::move(elements));
}

Lattice load_lattice(const std::string& path) { return parse_lattice(read_text_file(path)); }

}  // namespace beamgeo
