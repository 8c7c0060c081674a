#include "shillsim/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "shillsim/errors.hpp"

namespace shillsim {
namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 24, kTop = 46, kBottom = 54;

const char* const kPalette[] = {"#1f6fb2", "#d1495b", "#3a923a",
                                "#8a5fbf", "#e08214", "#4f4f4f"};
constexpr int kPaletteSize = 6;

std::string esc(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Axis {
  double lo = 0, hi = 1;
  double span() const { return hi - lo; }
};

Axis fit_axis(double lo, double hi, bool pad) {
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  } else if (pad) {
    double margin = 0.05 * (hi - lo);
    lo -= margin;
    hi += margin;
  }
  return {lo, hi};
}

void open_svg(std::ostringstream& svg, const std::string& title) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n"
      << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << px(kWidth / 2) << "\" y=\"24\" font-size=\"15\" "
         "font-family=\"sans-serif\" text-anchor=\"middle\">"
      << esc(title) << "</text>\n";
}

void draw_frame(std::ostringstream& svg, const std::string& x_label,
                const std::string& y_label) {
  double x0 = kLeft, x1 = kWidth - kRight;
  double y0 = kHeight - kBottom, y1 = kTop;
  svg << "<line x1=\"" << px(x0) << "\" y1=\"" << px(y0) << "\" x2=\""
      << px(x1) << "\" y2=\"" << px(y0)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << px(x0) << "\" y1=\"" << px(y0) << "\" x2=\""
      << px(x0) << "\" y2=\"" << px(y1)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << px((x0 + x1) / 2) << "\" y=\"" << px(kHeight - 12)
      << "\" font-size=\"12\" font-family=\"sans-serif\" "
         "text-anchor=\"middle\">"
      << esc(x_label) << "</text>\n";
  svg << "<text x=\"16\" y=\"" << px((y0 + y1) / 2)
      << "\" font-size=\"12\" font-family=\"sans-serif\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << px((y0 + y1) / 2) << ")\">" << esc(y_label) << "</text>\n";
}

void draw_y_ticks(std::ostringstream& svg, const Axis& axis) {
  double y0 = kHeight - kBottom, y1 = kTop;
  for (int i = 0; i <= 4; ++i) {
    double v = axis.lo + axis.span() * i / 4;
    double y = y0 + (y1 - y0) * i / 4;
    svg << "<line x1=\"" << px(kLeft - 4) << "\" y1=\"" << px(y) << "\" x2=\""
        << px(kLeft) << "\" y2=\"" << px(y) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(y) << "\" x2=\""
        << px(kWidth - kRight) << "\" y2=\"" << px(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    svg << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(y + 4)
        << "\" font-size=\"11\" font-family=\"sans-serif\" "
           "text-anchor=\"end\">"
        << tick_label(v) << "</text>\n";
  }
}

void draw_legend(std::ostringstream& svg,
                 const std::vector<std::string>& labels) {
  double x = kWidth - kRight - 150, y = kTop + 6;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    const char* color = kPalette[s % kPaletteSize];
    svg << "<line x1=\"" << px(x) << "\" y1=\"" << px(y) << "\" x2=\""
        << px(x + 22) << "\" y2=\"" << px(y) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << px(x + 28) << "\" y=\"" << px(y + 4)
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << esc(labels[s])
        << "</text>\n";
    y += 16;
  }
}

void commit(const std::string& path, const std::ostringstream& svg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write plot file: " + path);
  out << svg.str() << "</svg>\n";
  if (!out) throw DataError("failed writing plot file: " + path);
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series) {
  for (const auto& s : series) {
    if (s.xs.size() != s.ys.size()) {
      throw UsageError("plot series '" + s.label +
                       "' has mismatched x/y lengths");
    }
  }

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  std::size_t points = 0;
  for (const auto& s : series) {
    points += s.xs.size();
    for (double v : s.xs) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : s.ys) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (points == 0) {
    xmin = ymin = 0;
    xmax = ymax = 1;
  }
  Axis xa = fit_axis(xmin, xmax, true), ya = fit_axis(ymin, ymax, true);

  double x0 = kLeft, x1 = kWidth - kRight;
  double y0 = kHeight - kBottom, y1 = kTop;
  auto sx = [&](double v) { return x0 + (x1 - x0) * (v - xa.lo) / xa.span(); };
  auto sy = [&](double v) { return y0 + (y1 - y0) * (v - ya.lo) / ya.span(); };

  std::ostringstream svg;
  open_svg(svg, title);
  draw_y_ticks(svg, ya);
  for (int i = 0; i <= 4; ++i) {
    double v = xa.lo + xa.span() * i / 4;
    double x = x0 + (x1 - x0) * i / 4;
    svg << "<line x1=\"" << px(x) << "\" y1=\"" << px(y0) << "\" x2=\""
        << px(x) << "\" y2=\"" << px(y0 + 4) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px(x) << "\" y=\"" << px(y0 + 18)
        << "\" font-size=\"11\" font-family=\"sans-serif\" "
           "text-anchor=\"middle\">"
        << tick_label(v) << "</text>\n";
  }
  draw_frame(svg, x_label, y_label);

  std::vector<std::string> labels;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % kPaletteSize];
    labels.push_back(series[s].label);
    if (!series[s].xs.empty()) {
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < series[s].xs.size(); ++i) {
        if (i) svg << " ";
        svg << px(sx(series[s].xs[i])) << "," << px(sy(series[s].ys[i]));
      }
      svg << "\"/>\n";
    }
    for (std::size_t i = 0; i < series[s].xs.size(); ++i) {
      svg << "<circle cx=\"" << px(sx(series[s].xs[i])) << "\" cy=\""
          << px(sy(series[s].ys[i])) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
  }
  draw_legend(svg, labels);
  commit(path, svg);
}

void write_bar_chart(const std::string& path, const std::string& title,
                     const std::string& y_label,
                     const std::vector<std::string>& series_labels,
                     const std::vector<BarGroup>& groups) {
  for (const auto& g : groups) {
    if (g.values.size() != series_labels.size()) {
      throw UsageError("bar group '" + g.label +
                       "' does not match the series labels");
    }
  }

  double ymax = 0;
  for (const auto& g : groups) {
    for (double v : g.values) ymax = std::max(ymax, v);
  }
  if (ymax <= 0) ymax = 1;
  Axis ya = fit_axis(0, ymax * 1.05, false);

  double x0 = kLeft, x1 = kWidth - kRight;
  double y0 = kHeight - kBottom, y1 = kTop;
  auto sy = [&](double v) { return y0 + (y1 - y0) * (v - ya.lo) / ya.span(); };

  std::ostringstream svg;
  open_svg(svg, title);
  draw_y_ticks(svg, ya);
  draw_frame(svg, "", y_label);

  double slot = groups.empty() ? 0 : (x1 - x0) / groups.size();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    double center = x0 + slot * (g + 0.5);
    double cluster = slot * 0.8;
    double bar = series_labels.empty() ? cluster
                                       : cluster / series_labels.size();
    for (std::size_t s = 0; s < groups[g].values.size(); ++s) {
      double left = center - cluster / 2 + bar * s;
      double top = sy(groups[g].values[s]);
      svg << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\""
          << px(bar * 0.92) << "\" height=\"" << px(y0 - top) << "\" fill=\""
          << kPalette[s % kPaletteSize] << "\"/>\n";
    }
    svg << "<text x=\"" << px(center) << "\" y=\"" << px(y0 + 18)
        << "\" font-size=\"11\" font-family=\"sans-serif\" "
           "text-anchor=\"middle\">"
        << esc(groups[g].label) << "</text>\n";
  }
  draw_legend(svg, series_labels);
  commit(path, svg);
}

}  // namespace shillsim
