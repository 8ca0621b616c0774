#pragma once

#include <optional>
#include <string>

#include "silfid/response_matrix.hpp"

namespace silfid {

struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kHeatmapLow{215, 48, 39};
inline constexpr Rgb kHeatmapMid{255, 255, 255};
inline constexpr Rgb kHeatmapHigh{69, 117, 180};
inline constexpr Rgb kHeatmapMissing{191, 191, 191};

/// Diverging map: low at 0, white at 0.5, high at 1, linear in between;
/// nullopt gives the missing gray. Values are clamped to [0, 1].
Rgb heatmap_color(std::optional<double> value) noexcept;

struct HeatmapOptions {
  int cell_width = 6;
  int cell_height = 6;
  std::string title;
};

/// Standalone SVG with one <rect class="cell"> per cell, rows = respondents.
/// Throws InputError for an empty panel.
std::string emit_heatmap_svg(const ResponseMatrix& m, const HeatmapOptions& options = {});

}  // namespace silfid
