#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "guifix/geometry.hpp"

namespace guifix {

enum class ViewClass { Button, Text, Image, ViewGroup, Other };

std::string_view to_string(ViewClass c);

/// Maps a declared view class name ("android.widget.ImageButton", "Text",
/// "androidx.recyclerview.widget.RecyclerView", ...) onto the coarse classes
/// used for repair.  Total: unknown names map to Other.
ViewClass classify_class_name(std::string_view declared);

inline bool is_visible_class(ViewClass c) {
  return c == ViewClass::Button || c == ViewClass::Text || c == ViewClass::Image;
}

struct ViewNode {
  std::string id;
  std::string class_name;  // as declared in the dump
  ViewClass view_class = ViewClass::Other;
  Rect bounds_px;          // as declared in the dump
  Rect bounds;             // bounds_px / density
  std::optional<Rgb> color;
  std::optional<std::string> text;
  std::vector<ViewNode> children;

  bool operator==(const ViewNode&) const = default;
};

struct ScreenMeta {
  int width_px = 0;
  int height_px = 0;
  double density = 1.0;
  Rgb background_color{255, 255, 255};

  double width_dp() const { return width_px / density; }
  double height_dp() const { return height_px / density; }
  Rect screen_dp() const { return {0.0, 0.0, width_dp(), height_dp()}; }

  bool operator==(const ScreenMeta&) const = default;
};

struct ViewTree {
  ScreenMeta screen;
  ViewNode root;

  bool operator==(const ViewTree&) const = default;
};

enum class DumpFormat { Xml, Json };

/// Parses a UIAutomator-style XML dump or a canonical json-dump.
/// Throws ParseError on malformed input, missing/non-numeric bounds,
/// duplicate ids or a non-positive density.
ViewTree parse_hierarchy(std::string_view raw, DumpFormat format);

/// Reads a dump from disk; the format follows the file extension
/// (.xml -> Xml, anything else -> Json).
ViewTree load_view_tree(const std::filesystem::path& path);

/// Canonical json-dump.  parse_hierarchy(serialize_json(t), Json) == t.
std::string serialize_json(const ViewTree& tree);

ViewNode* find_node(ViewNode& root, std::string_view id);
const ViewNode* find_node(const ViewNode& root, std::string_view id);

/// Field-wise division, so integral pixel multiples of the density map to
/// exact dp values.
Rect px_to_dp(const Rect& px, double density);

/// Sets px bounds and derives dp exactly as the parser does.
void set_bounds_px(ViewNode& node, const Rect& px, double density);

/// Sets both dp and px bounds of a node consistently.
void set_bounds_dp(ViewNode& node, const Rect& dp, double density);

std::size_t count_nodes(const ViewNode& root);
std::size_t count_leaves(const ViewNode& root);

// --- screenshots --------------------------------------------------------

/// Decoded 8-bit raster, 3 (RGB) or 4 (RGBA) interleaved channels.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> pixels;

  Rgb at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * channels;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
};

Raster load_png(const std::filesystem::path& path);

/// Dominant color of a pixel region: each channel is quantized to 16
/// buckets, the most populated bucket wins (ties -> lowest packed bucket
/// value) and the mean of the original pixels in that bucket is returned.
/// Rectangles are in pixels; a pixel belongs to a rectangle when its
/// center lies inside it.
Rgb sample_colors(const Raster& raster, const Rect& region, std::span<const Rect> exclusions);

/// Fills the background color and every visible node lacking a color from
/// a screenshot whose size must equal the screen size in pixels.
void fill_colors_from_screenshot(ViewTree& tree, const Raster& raster);

}  // namespace guifix
