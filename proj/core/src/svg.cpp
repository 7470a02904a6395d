#include "fundom/svg.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

namespace fundom {

std::string palette_color(int index) {
  // Golden-angle hue walk, fixed saturation/value.
  double h = std::fmod(0.618033988749895 * (index + 1), 1.0) * 6.0;
  double s = 0.45, v = 0.93;
  int i = static_cast<int>(h);
  double f = h - i;
  double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  double r, g, b;
  switch (i % 6) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(r * 255 + 0.5), static_cast<int>(g * 255 + 0.5),
                static_cast<int>(b * 255 + 0.5));
  return buf;
}

std::string render_pixels_svg(const SpaceModel& space, const Window& window, int grid,
                              const PixelClassifier& classify) {
  if (space.model() == Model::Graph)
    throw std::invalid_argument("SVG export covers plane and disk models only");
  double ex0, ex1, ey0, ey1;
  if (space.model() == Model::Disk) {
    ex0 = ey0 = 1e300;
    ex1 = ey1 = -1e300;
    SampleSet ring = space.sample_ball(window.center, window.radius, 256, 99);
    for (const auto& p : ring.points) {
      ex0 = std::min(ex0, p.x);
      ex1 = std::max(ex1, p.x);
      ey0 = std::min(ey0, p.y);
      ey1 = std::max(ey1, p.y);
    }
    double pad = 0.03 * (ex1 - ex0 + 1e-9);
    ex0 -= pad;
    ex1 += pad;
    ey0 -= pad;
    ey1 += pad;
  } else {
    ex0 = window.center.x - window.radius;
    ex1 = window.center.x + window.radius;
    ey0 = window.center.y - window.radius;
    ey1 = window.center.y + window.radius;
  }

  std::string out;
  out.reserve(1 << 20);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%d\" "
                "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                grid, grid, grid, grid);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  auto color_of = [](int code) -> std::string {
    if (code == -2) return "#000000";
    if (code == -3) return "#dddddd";
    return palette_color(code);
  };

  for (int iy = 0; iy < grid; ++iy) {
    double y = ey1 - (ey1 - ey0) * (iy + 0.5) / grid;  // SVG y grows downward
    int run_code = -1;
    int run_start = 0;
    auto flush = [&](int end) {
      if (run_code == -1 || end <= run_start) return;
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"1\" fill=\"%s\"/>\n", run_start,
                    iy, end - run_start, color_of(run_code).c_str());
      out += buf;
    };
    for (int ix = 0; ix < grid; ++ix) {
      double x = ex0 + (ex1 - ex0) * (ix + 0.5) / grid;
      Point p = space.model() == Model::Disk ? Point::disk(x, y) : Point::plane(x, y);
      int code = -1;
      if (space.valid(p) && space.distance(p, window.center) <= window.radius) code = classify(p);
      if (code != run_code) {
        flush(ix);
        run_code = code;
        run_start = ix;
      }
    }
    flush(grid);
  }
  if (space.model() == Model::Disk) {
    double sx = grid / (ex1 - ex0), sy = grid / (ey1 - ey0);
    double cx = (0 - ex0) * sx, cy = (ey1 - 0) * sy;
    std::snprintf(buf, sizeof(buf),
                  "<ellipse cx=\"%.2f\" cy=\"%.2f\" rx=\"%.2f\" ry=\"%.2f\" fill=\"none\" "
                  "stroke=\"#444444\" stroke-width=\"1\"/>\n",
                  cx, cy, sx, sy);
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace fundom
