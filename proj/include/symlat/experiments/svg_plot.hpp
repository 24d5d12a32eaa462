#pragma once

// Small SVG scatter plotter and the figure builders for experiment CSVs.
// Figures are computed from CSV tables only, so rerunning a builder on a
// saved CSV reproduces the figure byte for byte.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "symlat/csv.hpp"

namespace symlat::experiments {

enum class Marker { Circle, Square, Triangle, Tick };

struct Series {
  std::string name;
  std::string color = "black";
  Marker marker = Marker::Circle;
  bool filled = true;
  std::vector<std::pair<double, double>> points;
};

struct Plot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<Series> series;
  std::vector<double> dashed_levels;  // horizontal reference lines
  std::optional<std::pair<double, double>> y_range;
  bool log_y = false;
};

namespace detail {

inline std::string fixed2(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

inline std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string tick_label(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

}  // namespace detail

inline std::string render_svg(const Plot& p) {
  constexpr double W = 640, H = 420, left = 70, right = 170, top = 40, bottom = 55;
  const double pw = W - left - right, ph = H - top - bottom;
  auto ty = [&](double y) { return p.log_y ? std::log10(std::max(y, 1e-300)) : y; };

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : p.series)
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y) || (p.log_y && y <= 0)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, ty(y));
      y1 = std::max(y1, ty(y));
    }
  for (double l : p.dashed_levels) {
    y0 = std::min(y0, ty(l));
    y1 = std::max(y1, ty(l));
  }
  if (p.y_range) {
    y0 = ty(p.y_range->first);
    y1 = ty(p.y_range->second);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1;
  if (!std::isfinite(y0)) y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 1, x1 += 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double xpad = 0.04 * (x1 - x0), ypad = 0.05 * (y1 - y0);
  x0 -= xpad, x1 += xpad;
  if (!p.y_range) y0 -= ypad, y1 += ypad;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph; };

  using detail::fixed2;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' '
    << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fixed2(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << detail::escape_xml(p.title) << "</text>\n";
  o << "<rect x=\"" << fixed2(left) << "\" y=\"" << fixed2(top) << "\" width=\"" << fixed2(pw) << "\" height=\""
    << fixed2(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = x0 + xpad + (x1 - x0 - 2 * xpad) * k / 5.0;
    const double yv_t = y0 + (y1 - y0) * k / 5.0;
    const double yv = p.log_y ? std::pow(10.0, yv_t) : yv_t;
    o << "<line x1=\"" << fixed2(sx(xv)) << "\" y1=\"" << fixed2(top + ph) << "\" x2=\"" << fixed2(sx(xv)) << "\" y2=\""
      << fixed2(top + ph + 5) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fixed2(sx(xv)) << "\" y=\"" << fixed2(top + ph + 18) << "\" text-anchor=\"middle\" font-size=\"11\">"
      << detail::tick_label(xv) << "</text>\n";
    o << "<line x1=\"" << fixed2(left - 5) << "\" y1=\"" << fixed2(sy(yv)) << "\" x2=\"" << fixed2(left) << "\" y2=\""
      << fixed2(sy(yv)) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fixed2(left - 8) << "\" y=\"" << fixed2(sy(yv) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
      << detail::tick_label(yv) << "</text>\n";
  }
  o << "<text x=\"" << fixed2(left + pw / 2) << "\" y=\"" << fixed2(H - 12) << "\" text-anchor=\"middle\" font-size=\"13\">"
    << detail::escape_xml(p.xlabel) << "</text>\n";
  o << "<text x=\"16\" y=\"" << fixed2(top + ph / 2) << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
    << fixed2(top + ph / 2) << ")\">" << detail::escape_xml(p.ylabel) << "</text>\n";
  for (double l : p.dashed_levels)
    o << "<line x1=\"" << fixed2(left) << "\" y1=\"" << fixed2(sy(l)) << "\" x2=\"" << fixed2(left + pw) << "\" y2=\""
      << fixed2(sy(l)) << "\" stroke=\"grey\" stroke-dasharray=\"6,4\"/>\n";

  auto marker = [&](const Series& s, double cx, double cy) {
    const std::string fill = s.filled ? s.color : "none";
    const std::string style = "fill=\"" + fill + "\" stroke=\"" + s.color + "\" stroke-width=\"1.5\"";
    switch (s.marker) {
      case Marker::Circle:
        o << "<circle cx=\"" << fixed2(cx) << "\" cy=\"" << fixed2(cy) << "\" r=\"4\" " << style << "/>\n";
        break;
      case Marker::Square:
        o << "<rect x=\"" << fixed2(cx - 4) << "\" y=\"" << fixed2(cy - 4) << "\" width=\"8\" height=\"8\" " << style << "/>\n";
        break;
      case Marker::Triangle:
        o << "<polygon points=\"" << fixed2(cx) << ',' << fixed2(cy - 5) << ' ' << fixed2(cx - 4.5) << ','
          << fixed2(cy + 4) << ' ' << fixed2(cx + 4.5) << ',' << fixed2(cy + 4) << "\" " << style << "/>\n";
        break;
      case Marker::Tick:
        o << "<line x1=\"" << fixed2(cx - 3) << "\" y1=\"" << fixed2(cy) << "\" x2=\"" << fixed2(cx + 3) << "\" y2=\""
          << fixed2(cy) << "\" stroke=\"" << s.color << "\" stroke-opacity=\"0.5\"/>\n";
        break;
    }
  };
  std::size_t legend_row = 0;
  for (const auto& s : p.series) {
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y) || (p.log_y && y <= 0)) continue;
      marker(s, sx(x), sy(y));
    }
    if (s.name.empty()) continue;
    const double ly = top + 12 + 20.0 * static_cast<double>(legend_row++);
    marker(s, left + pw + 18, ly);
    o << "<text x=\"" << fixed2(left + pw + 30) << "\" y=\"" << fixed2(ly + 4) << "\" font-size=\"12\">"
      << detail::escape_xml(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

/// Rejection rate against n from (test, hypothesis, n, rejection_rate,
/// replicates, alpha): power filled, size hollow, alpha dashed.
inline std::string power_curve_svg(const CsvTable& t) {
  Plot p;
  p.title = "Rejection rates";
  p.xlabel = "n = m";
  p.ylabel = "rejection rate";
  p.y_range = std::make_pair(0.0, 1.0);
  std::map<std::pair<std::string, std::string>, Series> by_key;
  const auto ct = t.column("test"), ch = t.column("hypothesis");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto key = std::make_pair(t.rows[r][ct], t.rows[r][ch]);
    auto& s = by_key[key];
    if (s.name.empty()) {
      const bool power = key.second == "non-invariant";
      s.name = key.first + (power ? " power" : " size");
      s.filled = power;
      s.color = key.first == "asym" ? "black" : "firebrick";
      s.marker = key.first == "asym" ? Marker::Circle : Marker::Square;
    }
    s.points.emplace_back(t.number(r, "n"), t.number(r, "rejection_rate"));
  }
  for (auto& [k, s] : by_key) p.series.push_back(std::move(s));
  if (!t.rows.empty()) p.dashed_levels.push_back(t.number(0, "alpha"));
  return render_svg(p);
}

/// Proportion of each estimate against n for one test type, from
/// (test, n, prop_I, prop_C2, prop_C4).
inline std::string group_recovery_svg(const CsvTable& t, const std::string& test) {
  Plot p;
  p.title = "Estimated group (" + test + " test)";
  p.xlabel = "n = m";
  p.ylabel = "proportion";
  p.y_range = std::make_pair(0.0, 1.0);
  Series i{"I", "red", Marker::Triangle, true, {}}, c2{"C2", "black", Marker::Square, true, {}},
      c4{"C4", "red", Marker::Circle, false, {}};
  const auto ct = t.column("test");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r][ct] != test) continue;
    const double n = t.number(r, "n");
    i.points.emplace_back(n, t.number(r, "prop_I"));
    c2.points.emplace_back(n, t.number(r, "prop_C2"));
    c4.points.emplace_back(n, t.number(r, "prop_C4"));
  }
  p.series = {i, c2, c4};
  return render_svg(p);
}

/// MSPE against n on a log axis from per-replicate rows
/// (scenario, n, replicate, mspe_A, mspe_B, mspe_C): ticks per replicate,
/// circles at the means.
inline std::string estimator_svg(const CsvTable& t) {
  Plot p;
  p.title = t.rows.empty() ? "MSPE" : "MSPE, scenario " + t.rows[0][t.column("scenario")];
  p.xlabel = "n";
  p.ylabel = "mean squared prediction error";
  p.log_y = true;
  const std::vector<std::pair<std::string, std::string>> est{{"A", "black"}, {"B", "blue"}, {"C", "red"}};
  for (std::size_t e = 0; e < est.size(); ++e) {
    const auto& [name, color] = est[e];
    const double shift = (static_cast<double>(e) - 1.0) * 3.0;
    Series ticks{"", color, Marker::Tick, true, {}};
    std::map<double, std::pair<double, std::size_t>> sums;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const double n = t.number(r, "n"), v = t.number(r, "mspe_" + name);
      ticks.points.emplace_back(n + shift, v);
      sums[n].first += v;
      sums[n].second += 1;
    }
    Series means{name, color, Marker::Circle, true, {}};
    for (auto [n, s] : sums) means.points.emplace_back(n + shift, s.first / static_cast<double>(s.second));
    p.series.push_back(std::move(ticks));
    p.series.push_back(std::move(means));
  }
  return render_svg(p);
}

}  // namespace symlat::experiments
