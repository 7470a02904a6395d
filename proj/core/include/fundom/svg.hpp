#ifndef FUNDOM_SVG_HPP
#define FUNDOM_SVG_HPP

#include <functional>
#include <string>

#include "fundom/geometry.hpp"

namespace fundom {

// Pixel code contract: -1 background, -2 boundary (black), -3 muted gray,
// k >= 0 palette color k.
using PixelClassifier = std::function<int(const Point&)>;

// Rasterize the window (plane/disk only) on an n x n grid and emit SVG 1.1
// with run-length-merged rects. Disk renders also stroke the unit circle.
std::string render_pixels_svg(const SpaceModel& space, const Window& window, int grid,
                              const PixelClassifier& classify);

std::string palette_color(int index);

}  // namespace fundom

#endif  // FUNDOM_SVG_HPP
