#pragma once

#include <random>
#include <string>

#include "guifix/wireframe.hpp"

namespace guifix::testing {

// Arbitrary wireframes: containers and components at random positions, with
// overlaps, touching edges and containment left to chance.
inline Wireframe random_wireframe(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Wireframe wf;
  wf.screen.width_px = 360;
  wf.screen.height_px = 640;
  wf.screen.density = 1.0;
  wf.background_color = {255, 255, 255};
  const int containers = uni(1, 5);
  for (int v = 0; v < containers; ++v) {
    const double x = uni(0, 200), y = uni(0, 500);
    wf.containers.push_back({"v" + std::to_string(v), {x, y, double(uni(60, 160)), double(uni(60, 140))}});
  }
  const int components = uni(1, 14);
  for (int c = 0; c < components; ++c) {
    const auto& home = wf.containers[static_cast<std::size_t>(uni(0, containers - 1))];
    Component comp;
    comp.id = "c" + std::to_string(c);
    comp.view_class = static_cast<ViewClass>(uni(0, 2));
    // Coarse grid so aligned rows and columns are common.
    const double x = home.bounds.x + 4 * uni(0, 20), y = home.bounds.y + 4 * uni(0, 20);
    comp.bounds = {x, y, double(4 * uni(2, 16)), double(4 * uni(2, 16))};
    comp.color = Rgb{uni(0, 255), uni(0, 255), uni(0, 255)};
    comp.container_id = home.id;
    wf.components.push_back(std::move(comp));
  }
  wf.components = resolve_overlaps(std::move(wf.components));
  return wf;
}

}  // namespace guifix::testing
