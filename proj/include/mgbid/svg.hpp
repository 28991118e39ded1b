#pragma once
// Minimal static SVG writers for quick visual inspection of cluster scatters
// and per-bin variance lines. Not a plotting library: fixed margins, one
// numeric label per axis end.
#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "mgbid/errors.hpp"

namespace mgbid::svg {

namespace detail {

struct Frame {
  double x_lo, x_hi, y_lo, y_hi;
  int width, height;
  static constexpr int margin = 40;

  double px(double x) const {
    return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin);
  }
  double py(double y) const {
    return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin);
  }
};

inline Frame make_frame(const std::vector<double>& xs, const std::vector<double>& ys,
                        int width, int height) {
  Frame f{*std::min_element(xs.begin(), xs.end()),
          *std::max_element(xs.begin(), xs.end()),
          *std::min_element(ys.begin(), ys.end()),
          *std::max_element(ys.begin(), ys.end()),
          width, height};
  if (f.x_lo == f.x_hi) {
    f.x_lo -= 1.0;
    f.x_hi += 1.0;
  }
  if (f.y_lo == f.y_hi) {
    f.y_lo -= 1.0;
    f.y_hi += 1.0;
  }
  return f;
}

inline void open_svg(std::ostringstream& out, const Frame& f) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width
      << "\" height=\"" << f.height << "\">\n";
  out << "<rect x=\"" << Frame::margin << "\" y=\"" << Frame::margin
      << "\" width=\"" << f.width - 2 * Frame::margin << "\" height=\""
      << f.height - 2 * Frame::margin
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << Frame::margin << "\" y=\"" << f.height - 8
      << "\" font-size=\"10\">" << f.x_lo << "</text>\n";
  out << "<text x=\"" << f.width - Frame::margin << "\" y=\"" << f.height - 8
      << "\" text-anchor=\"end\" font-size=\"10\">" << f.x_hi << "</text>\n";
  out << "<text x=\"4\" y=\"" << f.height - Frame::margin
      << "\" font-size=\"10\">" << f.y_lo << "</text>\n";
  out << "<text x=\"4\" y=\"" << Frame::margin + 10 << "\" font-size=\"10\">"
      << f.y_hi << "</text>\n";
}

inline const char* palette(int cls) {
  static constexpr const char* colors[] = {"#1b6ca8", "#d1495b", "#3a7d44",
                                           "#8d6a9f", "#c77d2e", "#4a4e69"};
  return colors[cls >= 0 ? cls % 6 : 0];
}

}  // namespace detail

inline std::string scatter_svg(const std::vector<double>& x,
                               const std::vector<double>& y,
                               const std::vector<int>& cls, int width = 640,
                               int height = 480) {
  if (x.empty() || x.size() != y.size() || x.size() != cls.size())
    throw ContractError("scatter_svg: columns empty or misaligned");
  const detail::Frame f = detail::make_frame(x, y, width, height);
  std::ostringstream out;
  detail::open_svg(out, f);
  for (std::size_t i = 0; i < x.size(); ++i)
    out << "<circle cx=\"" << f.px(x[i]) << "\" cy=\"" << f.py(y[i])
        << "\" r=\"2\" fill=\"" << detail::palette(cls[i])
        << "\" fill-opacity=\"0.6\"/>\n";
  out << "</svg>\n";
  return out.str();
}

inline std::string line_svg(const std::vector<double>& x,
                            const std::vector<double>& y, int width = 640,
                            int height = 480) {
  if (x.empty() || x.size() != y.size())
    throw ContractError("line_svg: columns empty or misaligned");
  const detail::Frame f = detail::make_frame(x, y, width, height);
  std::ostringstream out;
  detail::open_svg(out, f);
  out << "<polyline fill=\"none\" stroke=\"" << detail::palette(0)
      << "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i)
    out << f.px(x[i]) << ',' << f.py(y[i]) << ' ';
  out << "\"/>\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    out << "<circle cx=\"" << f.px(x[i]) << "\" cy=\"" << f.py(y[i])
        << "\" r=\"3\" fill=\"" << detail::palette(0) << "\"/>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace mgbid::svg
