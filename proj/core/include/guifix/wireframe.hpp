#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guifix/geometry.hpp"
#include "guifix/layout.hpp"

namespace guifix {

/// Container id used when a component's center falls in no view group.
inline constexpr std::string_view kImplicitRootId = "__root__";

struct Component {
  std::string id;
  ViewClass view_class = ViewClass::Button;
  Rect bounds;  // dp
  std::optional<Rgb> color;
  std::optional<std::string> text;
  std::string container_id;
  /// Ids of components whose bounds lie fully inside this one.
  std::vector<std::string> contains;

  bool operator==(const Component&) const = default;
};

struct Container {
  std::string id;
  Rect bounds;  // dp

  bool operator==(const Container&) const = default;
};

/// Flat view of a GUI: visible components plus the innermost containers
/// that directly hold them.
struct Wireframe {
  ScreenMeta screen;
  Rgb background_color;
  std::vector<Component> components;
  std::vector<Container> containers;
  std::vector<std::string> warnings;

  std::optional<std::size_t> component_index(std::string_view id) const;
  std::optional<std::size_t> container_index(std::string_view id) const;
  const Container& container_of(const Component& c) const;
};

Wireframe flatten(const ViewTree& tree);

/// Records full containment between components.  Partial overlaps and
/// disjoint components are left untouched; no component is dropped.
std::vector<Component> resolve_overlaps(std::vector<Component> components);

/// Rebuilds a two-level tree (root -> containers -> components) whose
/// flattening reproduces the wireframe.
ViewTree to_view_tree(const Wireframe& wf);

/// Flat json form of the wireframe (see docs/formats.md).
std::string wireframe_to_json(const Wireframe& wf);

}  // namespace guifix
