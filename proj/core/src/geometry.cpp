#include "guifix/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "guifix/error.hpp"

namespace guifix {

double separation(const Rect& a, const Rect& b) {
  const double gap_x = std::max(b.x - a.right(), a.x - b.right());
  const double gap_y = std::max(b.y - a.bottom(), a.y - b.bottom());
  return std::max(gap_x, gap_y);
}

std::string to_hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02X%02X%02X", c.r & 0xFF, c.g & 0xFF, c.b & 0xFF);
  return buf;
}

Rgb parse_hex(std::string_view text) {
  if (!text.empty() && text.front() == '#') text.remove_prefix(1);
  if (text.size() != 6 && text.size() != 8) {
    throw ParseError("invalid color literal '" + std::string(text) + "'");
  }
  auto nibble = [&](char ch) {
    if (!std::isxdigit(static_cast<unsigned char>(ch))) {
      throw ParseError("invalid color literal '" + std::string(text) + "'");
    }
    if (ch >= '0' && ch <= '9') return ch - '0';
    return std::tolower(static_cast<unsigned char>(ch)) - 'a' + 10;
  };
  const std::size_t off = text.size() == 8 ? 2 : 0;
  auto channel = [&](std::size_t i) { return nibble(text[off + i]) * 16 + nibble(text[off + i + 1]); };
  return {channel(0), channel(2), channel(4)};
}

}  // namespace guifix
