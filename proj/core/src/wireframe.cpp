#include "guifix/wireframe.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include <json.hpp>

namespace guifix {

namespace {

struct Walk {
  std::vector<const ViewNode*> components;
  std::vector<const ViewNode*> groups;  // preorder
  std::map<const ViewNode*, std::size_t> depth;
};

// Returns true when the subtree rooted at `node` holds a visible component.
bool walk(const ViewNode& node, std::size_t depth, Walk& out) {
  if (node.view_class == ViewClass::ViewGroup && !node.bounds.empty()) {
    out.groups.push_back(&node);
    out.depth[&node] = depth;
  }
  bool below = false;
  for (const auto& c : node.children) below = walk(c, depth + 1, out) || below;
  const bool visible = is_visible_class(node.view_class) && !node.bounds.empty();
  if (visible && !below) out.components.push_back(&node);
  return visible || below;
}

}  // namespace

std::optional<std::size_t> Wireframe::component_index(std::string_view id) const {
  for (std::size_t i = 0; i < components.size(); ++i)
    if (components[i].id == id) return i;
  return std::nullopt;
}

std::optional<std::size_t> Wireframe::container_index(std::string_view id) const {
  for (std::size_t i = 0; i < containers.size(); ++i)
    if (containers[i].id == id) return i;
  return std::nullopt;
}

const Container& Wireframe::container_of(const Component& c) const {
  return containers[*container_index(c.container_id)];
}

Wireframe flatten(const ViewTree& tree) {
  Wireframe wf;
  wf.screen = tree.screen;
  wf.background_color = tree.screen.background_color;

  Walk w;
  walk(tree.root, 0, w);
  // Components walk in post-order; restore document order.
  std::vector<const ViewNode*> ordered;
  std::map<const ViewNode*, std::size_t> preorder;
  {
    std::size_t k = 0;
    auto number = [&](auto&& self, const ViewNode& n) -> void {
      preorder[&n] = k++;
      for (const auto& c : n.children) self(self, c);
    };
    number(number, tree.root);
  }
  ordered = w.components;
  std::sort(ordered.begin(), ordered.end(),
            [&](const ViewNode* a, const ViewNode* b) { return preorder[a] < preorder[b]; });

  std::map<const ViewNode*, std::vector<std::size_t>> held;
  std::vector<std::size_t> orphans;
  for (const ViewNode* n : ordered) {
    const double cx = n->bounds.center_x(), cy = n->bounds.center_y();
    const ViewNode* best = nullptr;
    for (const ViewNode* g : w.groups) {
      if (!g->bounds.contains_point(cx, cy)) continue;
      if (best == nullptr || g->bounds.area() < best->bounds.area() ||
          (g->bounds.area() == best->bounds.area() && w.depth[g] > w.depth[best])) {
        best = g;
      }
    }
    Component c;
    c.id = n->id;
    c.view_class = n->view_class;
    c.bounds = n->bounds;
    c.color = n->color;
    c.text = n->text;
    const std::size_t idx = wf.components.size();
    if (best != nullptr) {
      c.container_id = best->id;
      held[best].push_back(idx);
    } else {
      c.container_id = std::string(kImplicitRootId);
      orphans.push_back(idx);
      wf.warnings.push_back("component " + n->id + " lies in no container; assigned to " +
                            std::string(kImplicitRootId));
    }
    wf.components.push_back(std::move(c));
  }

  for (const ViewNode* g : w.groups) {
    if (held.count(g)) wf.containers.push_back({g->id, g->bounds});
  }
  if (!orphans.empty()) wf.containers.push_back({std::string(kImplicitRootId), tree.screen.screen_dp()});

  wf.components = resolve_overlaps(std::move(wf.components));
  return wf;
}

std::vector<Component> resolve_overlaps(std::vector<Component> components) {
  for (auto& c : components) c.contains.clear();
  for (std::size_t i = 0; i < components.size(); ++i) {
    for (std::size_t j = 0; j < components.size(); ++j) {
      if (i == j) continue;
      const Rect& a = components[i].bounds;
      const Rect& b = components[j].bounds;
      if (!a.contains(b)) continue;
      // Identical rectangles: only the earlier one is recorded as the holder.
      if (b.contains(a) && j < i) continue;
      components[i].contains.push_back(components[j].id);
    }
  }
  return components;
}

ViewTree to_view_tree(const Wireframe& wf) {
  ViewTree tree;
  tree.screen = wf.screen;
  tree.screen.background_color = wf.background_color;
  const double d = wf.screen.density;

  ViewNode root;
  root.id = std::string(kImplicitRootId);
  root.class_name = "ViewGroup";
  root.view_class = ViewClass::ViewGroup;
  set_bounds_dp(root, wf.screen.screen_dp(), d);

  for (const auto& container : wf.containers) {
    ViewNode* parent = &root;
    ViewNode group;
    if (container.id != kImplicitRootId) {
      group.id = container.id;
      group.class_name = "ViewGroup";
      group.view_class = ViewClass::ViewGroup;
      set_bounds_dp(group, container.bounds, d);
    }
    for (const auto& c : wf.components) {
      if (c.container_id != container.id) continue;
      ViewNode leaf;
      leaf.id = c.id;
      leaf.class_name = std::string(to_string(c.view_class));
      leaf.view_class = c.view_class;
      set_bounds_dp(leaf, c.bounds, d);
      leaf.color = c.color;
      leaf.text = c.text;
      (container.id == kImplicitRootId ? parent->children : group.children).push_back(std::move(leaf));
    }
    if (container.id != kImplicitRootId) root.children.push_back(std::move(group));
  }
  tree.root = std::move(root);
  return tree;
}

std::string wireframe_to_json(const Wireframe& wf) {
  using ordered_json = nlohmann::ordered_json;
  ordered_json j;
  j["screen"] = {{"width_px", wf.screen.width_px},
                 {"height_px", wf.screen.height_px},
                 {"density", wf.screen.density}};
  j["background_color"] = {wf.background_color.r, wf.background_color.g, wf.background_color.b};
  j["containers"] = ordered_json::array();
  for (const auto& c : wf.containers) {
    j["containers"].push_back({{"id", c.id}, {"bounds", {c.bounds.x, c.bounds.y, c.bounds.w, c.bounds.h}}});
  }
  j["components"] = ordered_json::array();
  for (const auto& c : wf.components) {
    ordered_json e;
    e["id"] = c.id;
    e["class"] = to_string(c.view_class);
    e["bounds"] = {c.bounds.x, c.bounds.y, c.bounds.w, c.bounds.h};
    e["color"] = c.color ? ordered_json{c.color->r, c.color->g, c.color->b} : ordered_json(nullptr);
    e["container_id"] = c.container_id;
    e["contains"] = c.contains;
    j["components"].push_back(std::move(e));
  }
  j["warnings"] = wf.warnings;
  return j.dump(2) + "\n";
}

}  // namespace guifix
