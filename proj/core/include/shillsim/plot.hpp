#ifndef SHILLSIM_PLOT_HPP
#define SHILLSIM_PLOT_HPP

#include <string>
#include <vector>

namespace shillsim {

struct PlotSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;  // same length as xs
};

// Standalone SVG line chart with markers, axes and a legend.  Output bytes
// depend only on the arguments, so repeated runs diff clean.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series);

// One cluster of bars per group, one bar per series label.
struct BarGroup {
  std::string label;
  std::vector<double> values;  // one per series label
};

void write_bar_chart(const std::string& path, const std::string& title,
                     const std::string& y_label,
                     const std::vector<std::string>& series_labels,
                     const std::vector<BarGroup>& groups);

}  // namespace shillsim

#endif
