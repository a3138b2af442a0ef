#pragma once

// Staircase SVG rendering of one or more curves: k on the x axis, duration
// on the y axis, one colour per series, solid lower and dashed upper.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "gran/curves.hpp"

namespace gran {

struct PlotSeries {
  std::string label;
  Curve curve;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

} // namespace detail

inline std::string plot_svg(const std::vector<PlotSeries>& series) {
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  const double W = 640, H = 420, ml = 60, mr = 170, mt = 20, mb = 50;
  std::size_t kmax = 1;
  std::int64_t ymax = 1;
  for (const auto& s : series) {
    kmax = std::max(kmax, s.curve.size());
    for (std::size_t k = 1; k <= s.curve.size(); ++k)
      for (Bound b : {s.curve.lo(k), s.curve.up(k)})
        if (b.is_finite())
          ymax = std::max(ymax, b.value());
  }
  const double pw = W - ml - mr, ph = H - mt - mb;
  auto px = [&](double k) { return ml + pw * k / static_cast<double>(kmax); };
  auto py = [&](double v) { return mt + ph - ph * v / static_cast<double>(ymax); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(W) + "\" height=\"" +
                  detail::num(H) + "\" viewBox=\"0 0 " + detail::num(W) + " " + detail::num(H) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<g stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + detail::num(ml) + "\" y1=\"" + detail::num(py(0)) + "\" x2=\"" + detail::num(px(kmax)) +
       "\" y2=\"" + detail::num(py(0)) + "\"/>\n";
  s += "<line x1=\"" + detail::num(ml) + "\" y1=\"" + detail::num(py(0)) + "\" x2=\"" + detail::num(ml) +
       "\" y2=\"" + detail::num(mt) + "\"/>\n</g>\n";
  s += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
  const std::size_t kstep = std::max<std::size_t>(1, kmax / 12);
  for (std::size_t k = 0; k <= kmax; k += kstep)
    s += "<text x=\"" + detail::num(px(static_cast<double>(k))) + "\" y=\"" + detail::num(py(0) + 16) +
         "\" text-anchor=\"middle\">" + std::to_string(k) + "</text>\n";
  const std::int64_t ystep = std::max<std::int64_t>(1, ymax / 8);
  for (std::int64_t v = 0; v <= ymax; v += ystep)
    s += "<text x=\"" + detail::num(ml - 6) + "\" y=\"" + detail::num(py(static_cast<double>(v)) + 4) +
         "\" text-anchor=\"end\">" + std::to_string(v) + "</text>\n";
  s += "<text x=\"" + detail::num(ml + pw / 2) + "\" y=\"" + detail::num(H - 12) +
       "\" text-anchor=\"middle\">k (events)</text>\n";
  s += "<text x=\"16\" y=\"" + detail::num(mt + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       detail::num(mt + ph / 2) + ")\">duration</text>\n</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& c = series[i].curve;
    const std::string colour = colours[i % (sizeof colours / sizeof *colours)];
    auto path = [&](bool upper) {
      std::string d;
      bool open = false;
      for (std::size_t k = 1; k <= c.size(); ++k) {
        const Bound b = upper ? c.up(k) : c.lo(k);
        if (b.is_infinite()) {
          open = false;
          continue;
        }
        const double y = py(static_cast<double>(b.value()));
        d += (open ? " L" : " M") + detail::num(px(static_cast<double>(k) - 1)) + " " + detail::num(y) + " L" +
             detail::num(px(static_cast<double>(k))) + " " + detail::num(y);
        open = true;
      }
      if (d.empty())
        return std::string();
      return "<path d=\"" + d.substr(1) + "\" fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.5\"" +
             (upper ? " stroke-dasharray=\"5 3\"" : "") + "/>\n";
    };
    s += path(false);
    s += path(true);
    const double ly = mt + 14 + 18 * static_cast<double>(i);
    s += "<line x1=\"" + detail::num(W - mr + 12) + "\" y1=\"" + detail::num(ly - 4) + "\" x2=\"" +
         detail::num(W - mr + 32) + "\" y2=\"" + detail::num(ly - 4) + "\" stroke=\"" + colour +
         "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + detail::num(W - mr + 38) + "\" y=\"" + detail::num(ly) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + detail::escape_xml(series[i].label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

} // namespace gran
