#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "beamgeo/error.hpp"
#include "beamgeo/format.hpp"
#include "beamgeo/io.hpp"

namespace beamgeo {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<long long> parse_integer(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  long long value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::string_view trim(std::string_view text) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::optional<std::vector<double>> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (auto part : split(text, ',')) {
    const auto v = parse_double(part);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(Errc::Io, "write failed for '" + path + "'");
}

std::string trajectory_csv(const Trajectory& series) {
  std::string out = "t,x0,x1,x2,x3,v0,v1,v2,v3\n";
  for (const auto& s : series) {
    out += format_double(s.t);
    for (double c : s.x) out += ',' + format_double(c);
    for (double c : s.v) out += ',' + format_double(c);
    out += '\n';
  }
  return out;
}

std::string jacobi_csv(const JacobiSeries& series) {
  std::string out = "t,xi0,xi1,xi2,xi3,dxi0,dxi1,dxi2,dxi3\n";
  for (const auto& s : series) {
    out += format_double(s.t);
    for (double c : s.xi) out += ',' + format_double(c);
    for (double c : s.dxi) out += ',' + format_double(c);
    out += '\n';
  }
  return out;
}

}  // namespace beamgeo
