#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace guifix {

/// Axis-aligned rectangle: left/top corner plus width and height.
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double left() const { return x; }
  double top() const { return y; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }
  double area() const { return w * h; }
  bool empty() const { return !(w > 0.0 && h > 0.0); }

  // Closed containment; a rectangle contains itself.
  bool contains_point(double px, double py) const {
    return px >= x && px <= right() && py >= y && py <= bottom();
  }
  bool contains(const Rect& o) const {
    return o.x >= x && o.y >= y && o.right() <= right() && o.bottom() <= bottom();
  }
  // Positive-area intersection.
  bool intersects(const Rect& o) const {
    return x < o.right() && o.x < right() && y < o.bottom() && o.y < bottom();
  }

  Rect scaled(double factor) const { return {x * factor, y * factor, w * factor, h * factor}; }
  Rect translated(double dx, double dy) const { return {x + dx, y + dy, w, h}; }

  bool operator==(const Rect&) const = default;
};

// Positive-length overlap of the horizontal / vertical projections.
inline bool overlap_x(const Rect& a, const Rect& b) { return a.x < b.right() && b.x < a.right(); }
inline bool overlap_y(const Rect& a, const Rect& b) { return a.y < b.bottom() && b.y < a.bottom(); }

/// Chebyshev-style separation: the larger of the horizontal and vertical gaps.
/// Negative when the rectangles overlap on both axes.
double separation(const Rect& a, const Rect& b);

/// 8-bit sRGB triple.  Channels are stored as int so out-of-range input can be
/// detected rather than silently wrapped.
struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;

  bool valid() const {
    return r >= 0 && r <= 255 && g >= 0 && g <= 255 && b >= 0 && b <= 255;
  }
  std::uint32_t packed() const {
    return (static_cast<std::uint32_t>(r) << 16) | (static_cast<std::uint32_t>(g) << 8) |
           static_cast<std::uint32_t>(b);
  }
  bool operator==(const Rgb&) const = default;
};

std::string to_hex(Rgb c);
/// Accepts "#RRGGBB", "RRGGBB" or "#AARRGGBB" (alpha ignored).
Rgb parse_hex(std::string_view text);

}  // namespace guifix
