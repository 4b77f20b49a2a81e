#include "report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "srde/cli.hpp"
#include "srde/errors.hpp"

namespace srde::cli::report {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << content;
  if (!os) throw Error("failed writing '" + path + "'");
}

std::string csv_banner(const std::string& config_hash) {
  return std::string("# srde ") + kToolVersion + " config " + config_hash + "\n";
}

std::string viridis(double t) {
  // Samples of matplotlib's viridis at t = 0, 1/8, ..., 1, interpolated linearly in sRGB.
  static const std::array<std::array<int, 3>, 9> anchors{{{68, 1, 84},
                                                         {71, 44, 122},
                                                         {59, 81, 139},
                                                         {44, 113, 142},
                                                         {33, 145, 140},
                                                         {40, 174, 128},
                                                         {94, 201, 98},
                                                         {173, 220, 48},
                                                         {253, 231, 37}}};
  if (!std::isfinite(t)) t = t > 0 ? 1 : 0;
  t = std::clamp(t, 0.0, 1.0);
  const double s = t * 8;
  const int i = std::min(7, int(s));
  const double f = s - i;
  char buf[8];
  int rgb[3];
  for (int k = 0; k < 3; ++k) rgb[k] = int(std::lround(anchors[i][k] + f * (anchors[i + 1][k] - anchors[i][k])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

namespace {

std::string fixed(double x, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string label(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string heatmap_svg(const Heatmap& h) {
  const double left = 70, top = 40, width = 520, height = 360, bar = 20;
  const double W = left + width + 110, H = top + height + 60;
  const std::size_t rows = h.values.size();
  const std::size_t cols = rows ? h.values[0].size() : 0;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<!-- srde " << kToolVersion << " config " << h.config_hash << " -->\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << escape(h.title) << "</text>\n";
  const double span = h.v_max > h.v_min ? h.v_max - h.v_min : 1;
  if (rows && cols) {
    const double cw = width / double(cols), ch = height / double(rows);
    os << "<g shape-rendering=\"crispEdges\">\n";
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double v = h.values[r][c];
        const std::string fill = std::isnan(v) ? "#bbbbbb" : viridis((v - h.v_min) / span);
        os << "<rect x=\"" << fixed(left + c * cw) << "\" y=\"" << fixed(top + height - (r + 1) * ch) << "\" width=\""
           << fixed(cw + 0.01) << "\" height=\"" << fixed(ch + 0.01) << "\" fill=\"" << fill << "\"/>\n";
      }
    }
    os << "</g>\n";
  }
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width << "\" height=\"" << height
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto px = [&](double x) { return left + (x - h.x0) / (h.x1 - h.x0) * width; };
  auto py = [&](double y) { return top + height - (y - h.y0) / (h.y1 - h.y0) * height; };
  if (h.overlay.size() >= 2) {
    os << "<clipPath id=\"plot\"><rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width << "\" height=\""
       << height << "\"/></clipPath>\n";
    os << "<polyline clip-path=\"url(#plot)\" fill=\"none\" stroke=\"#e8112d\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : h.overlay) os << fixed(px(x)) << ',' << fixed(py(y)) << ' ';
    os << "\"/>\n";
    if (!h.overlay_label.empty())
      os << "<text x=\"" << left + width - 4 << "\" y=\"" << top + 16 << "\" text-anchor=\"end\" fill=\"#e8112d\">"
         << escape(h.overlay_label) << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double x = h.x0 + (h.x1 - h.x0) * k / 4, y = h.y0 + (h.y1 - h.y0) * k / 4;
    os << "<text x=\"" << fixed(px(x)) << "\" y=\"" << top + height + 16 << "\" text-anchor=\"middle\">" << label(x)
       << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << fixed(py(y) + 4) << "\" text-anchor=\"end\">" << label(y)
       << "</text>\n";
  }
  os << "<text x=\"" << left + width / 2 << "\" y=\"" << top + height + 36 << "\" text-anchor=\"middle\">"
     << escape(h.x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << top + height / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(h.y_label) << "</text>\n";
  const double bx = left + width + 20;
  for (int k = 0; k < 64; ++k) {
    os << "<rect x=\"" << bx << "\" y=\"" << fixed(top + height - (k + 1) * height / 64) << "\" width=\"" << bar
       << "\" height=\"" << fixed(height / 64 + 0.01) << "\" fill=\"" << viridis((k + 0.5) / 64) << "\"/>\n";
  }
  os << "<text x=\"" << bx + bar + 4 << "\" y=\"" << top + height << "\">" << label(h.v_min) << "</text>\n";
  os << "<text x=\"" << bx + bar + 4 << "\" y=\"" << top + 10 << "\">" << label(h.v_max) << "</text>\n";
  os << "<text x=\"" << bx << "\" y=\"" << top - 6 << "\">" << escape(h.value_label) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace srde::cli::report
