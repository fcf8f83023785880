#include "mforge/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mforge/errors.hpp"

namespace mforge {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                          "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78"};
constexpr int kPaletteSize = 12;

std::string esc(const std::string& s) {
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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void write_scatter_svg(const std::string& path, const std::vector<ScatterPoint>& points,
                       const std::vector<std::string>& group_labels, const std::string& title) {
  if (points.empty()) throw UsageError("scatter plot needs at least one point");
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);

  double xmin = points[0].x, xmax = points[0].x, ymin = points[0].y, ymax = points[0].y;
  for (const auto& p : points) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;

  const double W = 640.0, H = 480.0, margin = 48.0, legend_w = 140.0;
  const double plot_w = W - 2 * margin - legend_w, plot_h = H - 2 * margin;
  auto sx = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * plot_w; };
  auto sy = [&](double y) { return H - margin - (y - ymin) / (ymax - ymin) * plot_h; };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "  <rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "  <text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << esc(title) << "</text>\n";
  out << "  <rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#444444\"/>\n";
  for (const auto& p : points) {
    out << "  <circle cx=\"" << num(sx(p.x)) << "\" cy=\"" << num(sy(p.y))
        << "\" r=\"3.5\" fill=\"" << kPalette[p.group % kPaletteSize] << "\" fill-opacity=\"0.75\"/>\n";
  }
  for (std::size_t i = 0; i < group_labels.size(); ++i) {
    const double ly = margin + 16.0 * static_cast<double>(i);
    out << "  <circle cx=\"" << W - legend_w + 8 << "\" cy=\"" << ly << "\" r=\"4\" fill=\""
        << kPalette[i % kPaletteSize] << "\"/>\n";
    out << "  <text x=\"" << W - legend_w + 18 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << esc(group_labels[i]) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace mforge
