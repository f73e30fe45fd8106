#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "otmedian/errors.hpp"
#include "otmedian/io.hpp"

namespace otmedian::io {

namespace {

constexpr const char* kPalette[] = {"#7b3294", "#2c7bb6", "#d7191c", "#1a9641",
                                    "#fdae61", "#404040"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
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

}  // namespace

std::string render_line_plot_svg(const std::vector<Series>& series, const std::string& title,
                                 const std::string& x_label, const std::string& y_label) {
  if (series.empty()) throw InvalidInput("line plot: no series");
  const std::size_t length = series.front().points.size();
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    if (s.points.empty() || s.points.size() != length)
      throw InvalidInput("line plot: series '" + s.name + "' is empty or of unequal length");
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y))
        throw InvalidInput("line plot: non-finite value in series '" + s.name + "'");
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  y0 = std::min(y0, 0.0);
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;

  const double width = 480, height = 320, left = 60, right = 130, top = 30, bottom = 45;
  const double pw = width - left - right, ph = height - top - bottom;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };

  std::string svg =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) +
      "\" height=\"" + num(height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
         "\" fill=\"white\"/>\n";
  if (!title.empty())
    svg += "<text x=\"" + num(left + pw / 2) + "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" +
           escape(title) + "</text>\n";
  // Axes with min/max tick labels.
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(left + pw) +
         "\" y2=\"" + num(top + ph) + "\"/>\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" +
         num(top + ph) + "\"/>\n</g>\n";
  svg += "<g font-size=\"10\">\n";
  svg += "<text x=\"" + num(left) + "\" y=\"" + num(top + ph + 14) + "\" text-anchor=\"middle\">" + num(x0) + "</text>\n";
  svg += "<text x=\"" + num(left + pw) + "\" y=\"" + num(top + ph + 14) + "\" text-anchor=\"middle\">" + num(x1) + "</text>\n";
  svg += "<text x=\"" + num(left - 4) + "\" y=\"" + num(top + ph) + "\" text-anchor=\"end\">" + num(y0) + "</text>\n";
  svg += "<text x=\"" + num(left - 4) + "\" y=\"" + num(top + 8) + "\" text-anchor=\"end\">" + num(y1) + "</text>\n";
  if (!x_label.empty())
    svg += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(height - 8) + "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  if (!y_label.empty())
    svg += "<text x=\"14\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
           num(top + ph / 2) + ")\">" + escape(y_label) + "</text>\n";
  svg += "</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* colour = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (const auto& [x, y] : series[i].points) {
      if (!pts.empty()) pts += ' ';
      pts += num(sx(x)) + ',' + num(sy(y));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(colour) +
           "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
  }
  svg += "<g class=\"legend\" font-size=\"11\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = top + 10 + 18 * static_cast<double>(i);
    const char* colour = kPalette[i % std::size(kPalette)];
    svg += "<rect x=\"" + num(left + pw + 12) + "\" y=\"" + num(y - 8) +
           "\" width=\"12\" height=\"10\" fill=\"" + colour + "\"/>";
    svg += "<text x=\"" + num(left + pw + 30) + "\" y=\"" + num(y) + "\">" + escape(series[i].name) +
           "</text>\n";
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

void emit_line_plot_svg(const std::vector<Series>& series, const std::string& path,
                        const std::string& title, const std::string& x_label,
                        const std::string& y_label) {
  write_text_file(path, render_line_plot_svg(series, title, x_label, y_label));
}

std::string render_image_grid_svg(const std::vector<std::vector<GridMeasure>>& rows,
                                  const std::vector<std::string>& row_labels) {
  const double cell = 3.0, gap = 6.0, label_width = 90.0;
  double width = label_width, height = gap;
  for (const auto& row : rows) {
    double w = label_width;
    double h = 0.0;
    for (const auto& m : row) {
      if (m.rank() != 2) throw InvalidInput("image grid: measures must be 2D");
      w += cell * static_cast<double>(m.shape()[1]) + gap;
      h = std::max(h, cell * static_cast<double>(m.shape()[0]));
    }
    width = std::max(width, w);
    height += h + gap;
  }
  std::string svg =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) +
      "\" height=\"" + num(height) + "\">\n<rect x=\"0\" y=\"0\" width=\"" + num(width) +
      "\" height=\"" + num(height) + "\" fill=\"black\"/>\n";
  double y = gap;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double row_height = 0.0;
    if (r < row_labels.size())
      svg += "<text x=\"4\" y=\"" + num(y + 14) + "\" fill=\"white\" font-size=\"11\">" +
             escape(row_labels[r]) + "</text>\n";
    double x = label_width;
    for (const auto& m : rows[r]) {
      const std::size_t h = m.shape()[0], w = m.shape()[1];
      const double peak = *std::max_element(m.mass().begin(), m.mass().end());
      svg += "<g>";
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
          const double v = peak > 0 ? m.mass()[i * w + j] / peak : 0.0;
          const int level = static_cast<int>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
          if (level == 0) continue;
          svg += "<rect x=\"" + num(x + cell * j) + "\" y=\"" + num(y + cell * i) +
                 "\" width=\"" + num(cell) + "\" height=\"" + num(cell) + "\" fill=\"rgb(" +
                 std::to_string(level) + ',' + std::to_string(level) + ',' +
                 std::to_string(level) + ")\"/>";
        }
      svg += "</g>\n";
      x += cell * static_cast<double>(w) + gap;
      row_height = std::max(row_height, cell * static_cast<double>(h));
    }
    y += row_height + gap;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace otmedian::io
