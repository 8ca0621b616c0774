#include "silfid/heatmap.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "silfid/error.hpp"

namespace silfid {

namespace {

int lerp(int a, int b, double t) {
  return static_cast<int>(std::lround(a + (b - a) * t));
}

Rgb mix(const Rgb& a, const Rgb& b, double t) {
  return {lerp(a.r, b.r, t), lerp(a.g, b.g, t), lerp(a.b, b.b, t)};
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

Rgb heatmap_color(std::optional<double> value) noexcept {
  if (!value || std::isnan(*value)) return kHeatmapMissing;
  const double v = std::clamp(*value, 0.0, 1.0);
  return v <= 0.5 ? mix(kHeatmapLow, kHeatmapMid, v / 0.5) : mix(kHeatmapMid, kHeatmapHigh, (v - 0.5) / 0.5);
}

std::string emit_heatmap_svg(const ResponseMatrix& m, const HeatmapOptions& o) {
  if (m.empty()) throw InputError("heatmap of an empty panel");
  if (o.cell_width < 1 || o.cell_height < 1) throw InputError("heatmap: cell size must be positive");
  const int header = 24;
  const auto rows = static_cast<int>(m.rows());
  const auto cols = static_cast<int>(m.cols());
  const int width = std::max(cols * o.cell_width, 240);
  const int height = header + rows * o.cell_height;
  const std::string title = o.title.empty() ? m.source_tag() : o.title;

  std::string out;
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "data-rows=\"{}\" data-cols=\"{}\" shape-rendering=\"crispEdges\">\n",
      width, height, width, height, rows, cols);
  out += fmt::format("<title>{}</title>\n", escape_xml(title));
  out += fmt::format("<text class=\"dims\" x=\"2\" y=\"16\" font-family=\"sans-serif\" font-size=\"12\">"
                     "{}: {} respondents x {} questions</text>\n",
                     escape_xml(title), rows, cols);
  out += fmt::format("<g transform=\"translate(0,{})\">\n", header);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t q = 0; q < m.cols(); ++q) {
      const Rgb c = heatmap_color(m.at(r, q));
      out += fmt::format(
          "<rect class=\"cell\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"rgb({},{},{})\"/>\n",
          static_cast<int>(q) * o.cell_width, static_cast<int>(r) * o.cell_height, o.cell_width,
          o.cell_height, c.r, c.g, c.b);
    }
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace silfid
