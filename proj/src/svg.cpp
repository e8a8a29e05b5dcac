#include "tabbench/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "tabbench/error.hpp"

namespace tabbench {

namespace {

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double unit(double v) const {
    if (log) return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
    return (v - lo) / (hi - lo);
  }
  bool visible(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
};

void grow(double v, bool log, double& lo, double& hi) {
  if (!std::isfinite(v)) return;
  if (log && v <= 0.0) return;
  lo = std::min(lo, v);
  hi = std::max(hi, v);
}

Axis make_axis(double lo, double hi, bool want_log) {
  Axis ax;
  if (lo > hi) {  // no data at all
    lo = want_log ? 1.0 : 0.0;
    hi = want_log ? 10.0 : 1.0;
  }
  ax.log = want_log && lo > 0.0;
  if (lo == hi) {
    if (ax.log) {
      lo *= 0.5;
      hi *= 2.0;
    } else {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  ax.lo = lo;
  ax.hi = hi;
  return ax;
}

std::string tick_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<double> linear_ticks(double lo, double hi) {
  const double raw = (hi - lo) / 4.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = mag * (norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0);
  std::vector<double> ticks;
  double t = std::ceil(lo / step) * step;
  const double eps = step * 1e-9;
  while (t <= hi + eps) {
    ticks.push_back(std::abs(t) < eps ? 0.0 : t);
    t += step;
  }
  return ticks;
}

std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> ticks;
  for (int k = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
       k <= static_cast<int>(std::floor(std::log10(hi) + 1e-9)); ++k)
    ticks.push_back(std::pow(10.0, k));
  if (ticks.size() < 2) {
    ticks = {lo, std::sqrt(lo * hi), hi};
  }
  return ticks;
}

std::vector<double> ticks_for(const Axis& ax) {
  return ax.log ? log_ticks(ax.lo, ax.hi) : linear_ticks(ax.lo, ax.hi);
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
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

void append_fmt(std::string& out, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  out += buf;
}

}  // namespace

const std::vector<std::string>& default_palette() {
  static const std::vector<std::string> palette = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return palette;
}

std::string render_line_plot(const std::vector<PlotSeries>& series,
                             const std::vector<PlotBand>& bands, const PlotOptions& options) {
  const double W = options.width, H = options.height;
  const double ml = 70.0, mr = 18.0, mt = options.title.empty() ? 18.0 : 34.0, mb = 48.0;
  const double pw = W - ml - mr, ph = H - mt - mb;
  if (pw <= 0 || ph <= 0) throw std::domain_error("plot area is empty");

  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      grow(s.x[i], options.log_x, xlo, xhi);
      grow(s.y[i], options.log_y, ylo, yhi);
    }
  for (const auto& b : bands)
    for (size_t i = 0; i < b.x.size(); ++i) {
      grow(b.x[i], options.log_x, xlo, xhi);
      grow(b.y_lo[i], options.log_y, ylo, yhi);
      grow(b.y_hi[i], options.log_y, ylo, yhi);
    }

  const Axis xa = make_axis(xlo, xhi, options.log_x);
  const Axis ya = make_axis(ylo, yhi, options.log_y);
  auto px = [&](double v) { return ml + xa.unit(v) * pw; };
  auto py = [&](double v) { return mt + (1.0 - ya.unit(v)) * ph; };

  std::string svg;
  append_fmt(svg,
             "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
             "viewBox=\"0 0 %g %g\" font-family=\"sans-serif\">\n",
             W, H, W, H);
  append_fmt(svg, "<rect x=\"0\" y=\"0\" width=\"%g\" height=\"%g\" fill=\"white\"/>\n", W, H);
  append_fmt(svg,
             "<clipPath id=\"plot\"><rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" "
             "height=\"%.2f\"/></clipPath>\n",
             ml, mt, pw, ph);

  // Grid + tick labels.
  for (double t : ticks_for(xa)) {
    if (!xa.visible(t) || t < xa.lo || t > xa.hi) continue;
    const double x = px(t);
    append_fmt(svg,
               "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#dddddd\"/>\n", x,
               mt, x, mt + ph);
    append_fmt(svg,
               "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"middle\">%s</text>\n",
               x, mt + ph + 16.0, tick_text(t).c_str());
  }
  for (double t : ticks_for(ya)) {
    if (!ya.visible(t) || t < ya.lo || t > ya.hi) continue;
    const double y = py(t);
    append_fmt(svg,
               "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#dddddd\"/>\n", ml,
               y, ml + pw, y);
    append_fmt(
        svg,
        "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\">%s</text>\n",
        ml - 6.0, y + 4.0, tick_text(t).c_str());
  }

  // Bands behind the lines.
  svg += "<g clip-path=\"url(#plot)\">\n";
  for (const auto& b : bands) {
    std::string pts;
    size_t n = std::min({b.x.size(), b.y_lo.size(), b.y_hi.size()});
    bool ok = n > 0;
    for (size_t i = 0; i < n && ok; ++i)
      ok = xa.visible(b.x[i]) && ya.visible(b.y_lo[i]) && ya.visible(b.y_hi[i]);
    if (!ok) continue;
    for (size_t i = 0; i < n; ++i) append_fmt(pts, "%.2f,%.2f ", px(b.x[i]), py(b.y_hi[i]));
    for (size_t i = n; i-- > 0;) append_fmt(pts, "%.2f,%.2f ", px(b.x[i]), py(b.y_lo[i]));
    append_fmt(svg, "<polygon points=\"%s\" fill=\"%s\" fill-opacity=\"%g\"/>\n", pts.c_str(),
               b.color.c_str(), b.opacity);
  }

  // Lines; a non-representable point starts a new polyline.
  size_t palette_pos = 0;
  for (const auto& s : series) {
    const std::string color =
        s.color.empty() ? default_palette()[palette_pos++ % default_palette().size()] : s.color;
    std::string pts;
    double last_y = 0.0;
    bool have_last = false;
    auto flush = [&]() {
      if (!pts.empty())
        append_fmt(svg,
                   "<polyline points=\"%s\" fill=\"none\" stroke=\"%s\" stroke-width=\"%g\"/>\n",
                   pts.c_str(), color.c_str(), s.stroke_width);
      pts.clear();
    };
    const size_t n = std::min(s.x.size(), s.y.size());
    for (size_t i = 0; i < n; ++i) {
      if (!xa.visible(s.x[i]) || !ya.visible(s.y[i])) {
        flush();
        have_last = false;
        continue;
      }
      if (s.step && have_last) append_fmt(pts, "%.2f,%.2f ", px(s.x[i]), py(last_y));
      append_fmt(pts, "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
      last_y = s.y[i];
      have_last = true;
    }
    flush();
  }
  svg += "</g>\n";

  // Frame.
  append_fmt(svg,
             "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" "
             "stroke=\"#444444\"/>\n",
             ml, mt, pw, ph);

  if (!options.title.empty())
    append_fmt(svg,
               "<text x=\"%.2f\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">%s</text>\n",
               ml + pw / 2.0, escape_xml(options.title).c_str());
  if (!options.x_label.empty())
    append_fmt(svg,
               "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\">%s</text>\n",
               ml + pw / 2.0, H - 10.0, escape_xml(options.x_label).c_str());
  if (!options.y_label.empty())
    append_fmt(svg,
               "<text x=\"16\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\" "
               "transform=\"rotate(-90 16 %.2f)\">%s</text>\n",
               mt + ph / 2.0, mt + ph / 2.0, escape_xml(options.y_label).c_str());

  // Legend, top-right inside the frame.
  size_t labeled = 0;
  for (const auto& s : series)
    if (!s.label.empty()) ++labeled;
  if (labeled > 0) {
    double box_w = 0.0;
    for (const auto& s : series)
      box_w = std::max(box_w, 7.0 * static_cast<double>(s.label.size()));
    box_w += 40.0;
    const double box_h = 8.0 + 16.0 * static_cast<double>(labeled);
    const double bx = ml + pw - box_w - 8.0, by = mt + 8.0;
    append_fmt(svg,
               "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"white\" "
               "fill-opacity=\"0.85\" stroke=\"#bbbbbb\"/>\n",
               bx, by, box_w, box_h);
    size_t row = 0;
    palette_pos = 0;
    for (const auto& s : series) {
      const std::string color =
          s.color.empty() ? default_palette()[palette_pos++ % default_palette().size()] : s.color;
      if (s.label.empty()) continue;
      const double y = by + 16.0 + 16.0 * static_cast<double>(row++);
      append_fmt(svg,
                 "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
                 "stroke-width=\"2.5\"/>\n",
                 bx + 6.0, y - 4.0, bx + 28.0, y - 4.0, color.c_str());
      append_fmt(svg, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\">%s</text>\n", bx + 34.0, y,
                 escape_xml(s.label).c_str());
    }
  }

  svg += "</svg>\n";
  return svg;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("short write to '" + path + "'");
}

}  // namespace tabbench
