#pragma once

#include <string>
#include <vector>

namespace mforge {

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  int group = 0;  // index into the legend labels
};

// Self-contained SVG scatter plot: one circle per point, legend entry per
// group. Output is plain XML text with a fixed canvas.
void write_scatter_svg(const std::string& path, const std::vector<ScatterPoint>& points,
                       const std::vector<std::string>& group_labels, const std::string& title);

}  // namespace mforge
