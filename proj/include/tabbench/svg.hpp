#pragma once

#include <string>
#include <vector>

namespace tabbench {

// One drawable line. With step=true the series renders as a right-continuous
// step function (horizontal segment first, then the jump).
struct PlotSeries {
  std::string label;
  std::string color;  // any SVG color; empty picks from the default palette
  std::vector<double> x;
  std::vector<double> y;
  bool step = false;
  double stroke_width = 1.6;
};

// Shaded vertical band (e.g. an interquartile ribbon) behind the lines.
struct PlotBand {
  std::string color;
  std::vector<double> x;
  std::vector<double> y_lo;
  std::vector<double> y_hi;
  double opacity = 0.15;
};

struct PlotOptions {
  int width = 880;
  int height = 540;
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

const std::vector<std::string>& default_palette();

// Self-contained SVG document. Non-finite points break the line; a log axis
// with no positive data falls back to linear.
std::string render_line_plot(const std::vector<PlotSeries>& series,
                             const std::vector<PlotBand>& bands, const PlotOptions& options);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace tabbench
