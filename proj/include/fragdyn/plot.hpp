#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fragdyn/core.hpp"
#include "fragdyn/observables.hpp"

namespace fragdyn {

// Minimal static SVG output for figure-ready CSV data.

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw Error(Errc::SchemaMismatch, "missing column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Numeric CSV with a header row. Non-numeric cells, ragged rows and tables
// without data are schema errors.
inline CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::SchemaMismatch, "empty input");
  t.columns = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != t.columns.size()) throw Error(Errc::SchemaMismatch, "row width differs from header");
    std::vector<double> row;
    for (const auto& c : cells) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != c.size()) throw Error(Errc::SchemaMismatch, "non-numeric cell '" + c + "'");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw Error(Errc::SchemaMismatch, "no data rows");
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::InvalidArgument, "cannot open " + path);
  return parse_csv(f);
}

enum class Axis { Linear, Cbrt, Log2, NegLn };

inline Axis parse_axis(const std::string& s) {
  if (s.empty() || s == "linear") return Axis::Linear;
  if (s == "cbrt") return Axis::Cbrt;
  if (s == "log2") return Axis::Log2;
  if (s == "neg_ln") return Axis::NegLn;
  throw Error(Errc::InvalidArgument, "unknown axis transform '" + s + "'");
}

inline double apply_axis(Axis a, double v) {
  switch (a) {
    case Axis::Linear: return v;
    case Axis::Cbrt: return std::cbrt(v);
    case Axis::Log2: return std::log2(v);
    case Axis::NegLn: return -std::log(v);
  }
  return v;
}

inline std::string axis_label(Axis a, const std::string& name) {
  switch (a) {
    case Axis::Linear: return name;
    case Axis::Cbrt: return name + "^(1/3)";
    case Axis::Log2: return "log2 " + name;
    case Axis::NegLn: return "-ln " + name;
  }
  return name;
}

struct PlotSpec {
  std::string x, y;
  Axis x_axis = Axis::Linear, y_axis = Axis::Linear;
  bool fit = false;  // least-squares guide line with its slope annotated
  std::string title;
};

inline std::string render_svg(const CsvTable& t, const PlotSpec& spec) {
  std::size_t cx = t.column(spec.x), cy = t.column(spec.y);
  std::vector<double> xs, ys;
  for (const auto& r : t.rows) {
    double x = apply_axis(spec.x_axis, r[cx]), y = apply_axis(spec.y_axis, r[cy]);
    if (std::isfinite(x) && std::isfinite(y)) xs.push_back(x), ys.push_back(y);
  }
  if (xs.empty()) throw Error(Errc::SchemaMismatch, "no finite points to plot");
  const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 55;
  double x0 = *std::min_element(xs.begin(), xs.end()), x1 = *std::max_element(xs.begin(), xs.end());
  double y0 = *std::min_element(ys.begin(), ys.end()), y1 = *std::max_element(ys.begin(), ys.end());
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  double px = 0.05 * (x1 - x0), py = 0.05 * (y1 - y0);
  x0 -= px, x1 += px, y0 -= py, y1 += py;
  auto sx = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  auto sy = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    os << "<text x=\"" << sx(xv) << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\">" << xv << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n";
  }
  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
     << axis_label(spec.x_axis, spec.x) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (mt + H - mb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (mt + H - mb) / 2 << ")\">" << axis_label(spec.y_axis, spec.y) << "</text>\n";
  if (!spec.title.empty())
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << spec.title << "</text>\n";
  for (std::size_t i = 0; i < xs.size(); ++i)
    os << "<circle cx=\"" << sx(xs[i]) << "\" cy=\"" << sy(ys[i]) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  if (spec.fit && xs.size() >= 2) {
    LinearFit f = linear_fit(xs, ys);
    double a = x0 + px, b = x1 - px;
    os << "<line x1=\"" << sx(a) << "\" y1=\"" << sy(f.intercept + f.slope * a) << "\" x2=\"" << sx(b) << "\" y2=\""
       << sy(f.intercept + f.slope * b) << "\" stroke=\"#d62728\" stroke-dasharray=\"6 4\"/>\n";
    os << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 18 << "\" fill=\"#d62728\">slope = " << f.slope
       << ", R2 = " << f.r2 << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline void emit_plot(const std::string& csv_path, const PlotSpec& spec, const std::string& svg_path) {
  std::string svg = render_svg(read_csv(csv_path), spec);
  std::ofstream f(svg_path);
  if (!f) throw Error(Errc::InvalidArgument, "cannot write " + svg_path);
  f << svg;
}

}  // namespace fragdyn
