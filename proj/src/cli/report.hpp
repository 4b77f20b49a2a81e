#pragma once

#include <optional>
#include <string>
#include <vector>

namespace srde::cli::report {

/// Shortest text that reads back to the same double; "inf", "-inf", "nan" otherwise.
std::string num(double x);

/// Writes the whole file or throws srde::Error.
void write_file(const std::string& path, const std::string& content);

/// Header line embedded in every CSV: tool version and config hash.
std::string csv_banner(const std::string& config_hash);

/// Fixed viridis colormap: `t` in [0, 1] mapped to "#rrggbb".
std::string viridis(double t);

struct Heatmap {
  std::string title;
  std::string x_label, y_label;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  /// values[row][col]; row index runs along y (bottom to top), col along x.
  std::vector<std::vector<double>> values;
  double v_min = 0, v_max = 1;
  std::string value_label;
  /// Optional polyline in data coordinates drawn over the cells.
  std::vector<std::pair<double, double>> overlay;
  std::string overlay_label;
  std::string config_hash;
};

std::string heatmap_svg(const Heatmap& h);

}  // namespace srde::cli::report
