#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hmflow/error.hpp"
#include "hmflow/mesh.hpp"

namespace hmflow {

using Json = nlohmann::ordered_json;

inline std::string fmt17(double x)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline Json cplx_json(cplx z) { return Json::array({z.real(), z.imag()}); }

inline std::ofstream open_out(const std::filesystem::path& path)
{
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Stage::io, "cannot write " + path.string());
  return out;
}

inline void write_json(const std::filesystem::path& path, const Json& j)
{
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

inline Json read_json(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Stage::io, "cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Stage::io, path.string() + ": " + e.what());
  }
}

/// Comma separated rows; doubles at 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(open_out(path))
  {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }

  CsvWriter& operator<<(double x) { return cell(fmt17(x)); }
  CsvWriter& operator<<(long x) { return cell(std::to_string(x)); }
  CsvWriter& operator<<(int x) { return cell(std::to_string(x)); }
  CsvWriter& operator<<(const std::string& x) { return cell(x); }
  void end_row()
  {
    out_ << "\n";
    first_ = true;
  }

 private:
  CsvWriter& cell(const std::string& s)
  {
    if (!first_) out_ << ",";
    out_ << s;
    first_ = false;
    return *this;
  }
  std::ofstream out_;
  bool first_ = true;
};

// ------------------------------------------------------------------ SVG

namespace detail {

// viridis at five anchors, linearly interpolated
inline std::array<int, 3> colour(double t)
{
  static const double anchors[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  if (!std::isfinite(t)) return {200, 200, 200};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int i = std::min(3, int(t));
  const double f = t - i;
  std::array<int, 3> c;
  for (int k = 0; k < 3; ++k) c[k] = int(std::lround(anchors[i][k] + f * (anchors[i + 1][k] - anchors[i][k])));
  return c;
}

}  // namespace detail

struct HeatmapOptions {
  std::string title;
  bool log_scale = false;
  int width = 640;
};

/// Triangles of the fundamental domain filled by the mean of their corner values.
inline void write_svg_heatmap(const std::filesystem::path& path, const EquivariantMesh& m,
                              const std::vector<double>& value, const HeatmapOptions& opt = {})
{
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& v : m.vertices) {
    x0 = std::min(x0, v.z.real());
    x1 = std::max(x1, v.z.real());
    y0 = std::min(y0, v.z.imag());
    y1 = std::max(y1, v.z.imag());
  }
  auto tr = [&](double v) { return opt.log_scale ? std::log10(std::max(v, 1e-300)) : v; };
  std::vector<double> tv(m.triangles.size());
  double lo = 1e300, hi = -1e300;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& T = m.triangles[t];
    tv[t] = tr((value[T[0]] + value[T[1]] + value[T[2]]) / 3.0);
    if (std::isfinite(tv[t])) {
      lo = std::min(lo, tv[t]);
      hi = std::max(hi, tv[t]);
    }
  }
  if (!(hi > lo)) hi = lo + 1.0;
  const double margin = 40.0, bar = 60.0;
  const double w = opt.width - 2 * margin - bar;
  const double sc = w / std::max(x1 - x0, 1e-300);
  const double h = (y1 - y0) * sc;
  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
      << fmt17(h + 2 * margin) << "\">\n";
  out << "<text x=\"" << margin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << opt.title
      << "</text>\n";
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto c = detail::colour((tv[t] - lo) / (hi - lo));
    out << "<polygon points=\"";
    for (int k = 0; k < 3; ++k) {
      const cplx z = m.vertices[m.triangles[t][k]].z;
      out << (k ? " " : "") << fmt17(margin + (z.real() - x0) * sc) << "," << fmt17(margin + (y1 - z.imag()) * sc);
    }
    out << "\" fill=\"rgb(" << c[0] << "," << c[1] << "," << c[2] << ")\" stroke=\"none\"/>\n";
  }
  const double bx = opt.width - margin - bar + 20;
  for (int k = 0; k < 32; ++k) {
    const auto c = detail::colour((k + 0.5) / 32.0);
    out << "<rect x=\"" << bx << "\" y=\"" << fmt17(margin + h * (31 - k) / 32.0) << "\" width=\"12\" height=\""
        << fmt17(h / 32.0 + 0.5) << "\" fill=\"rgb(" << c[0] << "," << c[1] << "," << c[2] << ")\"/>\n";
  }
  const std::string unit = opt.log_scale ? "log10 " : "";
  out << "<text x=\"" << bx << "\" y=\"" << fmt17(margin - 4) << "\" font-family=\"sans-serif\" font-size=\"10\">"
      << unit << fmt17(hi) << "</text>\n";
  out << "<text x=\"" << bx << "\" y=\"" << fmt17(margin + h + 12) << "\" font-family=\"sans-serif\" font-size=\"10\">"
      << unit << fmt17(lo) << "</text>\n";
  out << "</svg>\n";
}

/// Polyline plot of one or more series against a shared abscissa.
inline void write_svg_lines(const std::filesystem::path& path, const std::vector<double>& x,
                            const std::vector<std::vector<double>>& ys, const std::vector<std::string>& labels,
                            const std::string& title, bool log_y = false)
{
  const double W = 640, H = 400, m = 50;
  auto ty = [&](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (double v : x) {
    x0 = std::min(x0, v);
    x1 = std::max(x1, v);
  }
  for (const auto& y : ys)
    for (double v : y)
      if (std::isfinite(ty(v))) {
        y0 = std::min(y0, ty(v));
        y1 = std::max(y1, ty(v));
      }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<text x=\"" << m << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  out << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m << "\" height=\"" << H - 2 * m
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  for (std::size_t s = 0; s < ys.size(); ++s) {
    out << "<polyline fill=\"none\" stroke=\"" << palette[s % 4] << "\" points=\"";
    for (std::size_t i = 0; i < x.size() && i < ys[s].size(); ++i) {
      const double px = m + (x[i] - x0) / (x1 - x0) * (W - 2 * m);
      const double py = H - m - (ty(ys[s][i]) - y0) / (y1 - y0) * (H - 2 * m);
      if (std::isfinite(py)) out << (i ? " " : "") << fmt17(px) << "," << fmt17(py);
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - m - 120 << "\" y=\"" << m + 14 * (s + 1) << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
        << palette[s % 4] << "\">" << (s < labels.size() ? labels[s] : "") << "</text>\n";
  }
  const std::string unit = log_y ? "log10 " : "";
  out << "<text x=\"4\" y=\"" << m + 4 << "\" font-family=\"sans-serif\" font-size=\"10\">" << unit << fmt17(y1) << "</text>\n";
  out << "<text x=\"4\" y=\"" << H - m << "\" font-family=\"sans-serif\" font-size=\"10\">" << unit << fmt17(y0) << "</text>\n";
  out << "<text x=\"" << m << "\" y=\"" << H - m + 16 << "\" font-family=\"sans-serif\" font-size=\"10\">" << fmt17(x0) << "</text>\n";
  out << "<text x=\"" << W - m - 40 << "\" y=\"" << H - m + 16 << "\" font-family=\"sans-serif\" font-size=\"10\">" << fmt17(x1) << "</text>\n";
  out << "</svg>\n";
}

}  // namespace hmflow
