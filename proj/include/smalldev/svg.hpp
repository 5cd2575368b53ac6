#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace smalldev {

struct SeriesPoint {
  double x = 0.0;
  double y = 0.0;
  double err = 0.0;  // half-length of the error bar, 0 for none
};

struct Series {
  std::string name;
  std::vector<SeriesPoint> points;
  bool line = false;  // polyline when true, markers with error bars otherwise
  std::string color = "#1f77b4";
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  bool log_x = false;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
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

inline std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

/// Round tick spacing (1, 2 or 5 times a power of ten) giving about n ticks.
inline double tick_step(double span, int n) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / n;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return mag * (r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0);
}

}  // namespace detail

/// Self-contained SVG. The raw series are repeated in a comment block so the
/// file doubles as a data table.
inline void write_svg(std::ostream& os, const Plot& plot) {
  constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 55;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto tx = [&](double x) { return plot.log_x ? std::log10(x) : x; };
  for (const auto& s : plot.series)
    for (const auto& p : s.points) {
      if (!std::isfinite(p.y) || (plot.log_x && !(p.x > 0.0))) continue;
      x0 = std::min(x0, tx(p.x));
      x1 = std::max(x1, tx(p.x));
      y0 = std::min(y0, p.y - p.err);
      y1 = std::max(y1, p.y + p.err);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\">\n";
  os << "<!--\ndata\nseries,x,y,err\n";
  os << std::setprecision(17);
  for (const auto& s : plot.series)
    for (const auto& p : s.points) os << s.name << ',' << p.x << ',' << p.y << ',' << p.err << '\n';
  os << "-->\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << detail::xml_escape(plot.title) << "</text>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\" stroke-width=\"1\">\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double ys = detail::tick_step(y1 - y0, 6);
  for (double y = std::ceil(y0 / ys) * ys; y <= y1; y += ys) {
    os << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << py(y) << "\" y2=\"" << py(y)
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << detail::fmt(y) << "</text>\n";
  }
  const double xs = detail::tick_step(x1 - x0, 6);
  for (double x = std::ceil(x0 / xs) * xs; x <= x1 + 1e-12; x += xs) {
    const double xv = plot.log_x ? std::pow(10.0, x) : x;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << detail::fmt(xv)
       << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 14 << "\" text-anchor=\"middle\">"
     << detail::xml_escape(plot.x_label) << (plot.log_x ? " (log scale)" : "") << "</text>\n";
  os << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << detail::xml_escape(plot.y_label) << "</text>\n";

  int legend = 0;
  for (const auto& s : plot.series) {
    if (s.line) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& p : s.points)
        if (std::isfinite(p.y)) os << px(p.x) << ',' << py(p.y) << ' ';
      os << "\"/>\n";
    } else {
      for (const auto& p : s.points) {
        if (!std::isfinite(p.y)) continue;
        if (p.err > 0.0)
          os << "<line x1=\"" << px(p.x) << "\" x2=\"" << px(p.x) << "\" y1=\"" << py(p.y - p.err) << "\" y2=\""
             << py(p.y + p.err) << "\" stroke=\"" << s.color << "\"/>\n";
        os << "<circle cx=\"" << px(p.x) << "\" cy=\"" << py(p.y) << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      }
    }
    const double ly = T + 14 + 18 * legend++;
    os << "<rect x=\"" << W - R + 10 << "\" y=\"" << ly - 8 << "\" width=\"10\" height=\"10\" fill=\"" << s.color
       << "\"/>\n";
    os << "<text x=\"" << W - R + 26 << "\" y=\"" << ly + 1 << "\">" << detail::xml_escape(s.name) << "</text>\n";
  }
  os << "</g>\n</svg>\n";
}

}  // namespace smalldev
