#include <doctest.h>

#include <algorithm>
#include <random>
#include <string>

#include "guifix/layout.hpp"
#include "guifix/synth.hpp"
#include "guifix/wireframe.hpp"

using namespace guifix;

namespace {

const std::string kFixtures = GUIFIX_FIXTURES;

ViewNode node(std::string id, std::string cls, Rect dp, std::vector<ViewNode> children = {}) {
  ViewNode n;
  n.id = std::move(id);
  n.class_name = std::move(cls);
  n.view_class = classify_class_name(n.class_name);
  n.bounds_px = dp;
  n.bounds = dp;
  n.children = std::move(children);
  return n;
}

ViewTree tree_of(ViewNode root) {
  ViewTree t;
  t.screen.width_px = 360;
  t.screen.height_px = 640;
  t.screen.density = 1.0;
  t.root = std::move(root);
  return t;
}

Component comp(std::string id, Rect r) {
  Component c;
  c.id = std::move(id);
  c.bounds = r;
  return c;
}

std::size_t flags(const std::vector<Component>& cs) {
  std::size_t n = 0;
  for (const auto& c : cs) n += c.contains.size();
  return n;
}

}  // namespace

TEST_SUITE("wireframe") {
  TEST_CASE("nested view groups collapse to the innermost container") {
    auto t = tree_of(node("outer", "ViewGroup", {0, 0, 360, 640},
                          {node("inner", "LinearLayout", {10, 10, 200, 200},
                                {node("b", "Button", {20, 20, 48, 48})})}));
    const auto wf = flatten(t);
    REQUIRE(wf.components.size() == 1);
    REQUIRE(wf.containers.size() == 1);
    CHECK(wf.containers[0].id == "inner");
    CHECK(wf.components[0].container_id == "inner");
  }

  TEST_CASE("a tree without visible leaves flattens to nothing") {
    auto t = tree_of(node("root", "FrameLayout", {0, 0, 360, 640}, {node("v", "View", {0, 0, 10, 10})}));
    const auto wf = flatten(t);
    CHECK(wf.components.empty());
    CHECK(wf.containers.empty());
  }

  TEST_CASE("login fixture flattens to eight components in two containers") {
    const auto wf = flatten(load_view_tree(kFixtures + "/login.xml"));
    CHECK(wf.components.size() == 8);
    REQUIRE(wf.containers.size() == 2);
    CHECK(wf.containers[0].id == "header");
    CHECK(wf.containers[1].id == "form");
    CHECK(std::count_if(wf.components.begin(), wf.components.end(),
                        [](const Component& c) { return c.container_id == "form"; }) == 6);
  }

  TEST_CASE("components outside every container fall back to an implicit root with a warning") {
    auto t = tree_of(node("root", "FrameLayout", {0, 0, 100, 100},
                          {node("b", "Button", {200, 200, 48, 48}), node("c", "Button", {10, 10, 48, 48})}));
    const auto wf = flatten(t);
    REQUIRE(wf.components.size() == 2);
    CHECK(wf.components[0].container_id == kImplicitRootId);
    CHECK(wf.components[1].container_id == "root");
    CHECK(wf.warnings.size() == 1);
    CHECK(wf.container_index(kImplicitRootId).has_value());
  }

  TEST_CASE("smallest container holding the center wins") {
    auto t = tree_of(node("root", "FrameLayout", {0, 0, 360, 640},
                          {node("wide", "LinearLayout", {0, 0, 360, 300}),
                           node("b", "Button", {20, 20, 48, 48}),
                           node("narrow", "LinearLayout", {0, 0, 100, 100})}));
    const auto wf = flatten(t);
    REQUIRE(wf.components.size() == 1);
    CHECK(wf.components[0].container_id == "narrow");
    REQUIRE(wf.containers.size() == 1);
  }

  TEST_CASE("an icon inside a button keeps both with one containment flag") {
    auto out = resolve_overlaps({comp("button", {0, 0, 100, 50}), comp("icon", {10, 10, 20, 20})});
    CHECK(out.size() == 2);
    CHECK(out[0].contains == std::vector<std::string>{"icon"});
    CHECK(out[1].contains.empty());
    CHECK(out[1].bounds == Rect{10, 10, 20, 20});
  }

  TEST_CASE("disjoint and partially overlapping components are untouched") {
    auto in = std::vector<Component>{comp("a", {0, 0, 10, 10}), comp("b", {5, 5, 10, 10}), comp("c", {50, 0, 10, 10})};
    CHECK(resolve_overlaps(in) == in);
    in.push_back(comp("big", {100, 100, 50, 50}));
    in.push_back(comp("small", {110, 110, 5, 5}));
    CHECK(flags(resolve_overlaps(in)) == 1);
  }

  TEST_CASE("flatten is idempotent through the reconstructed tree") {
    const auto once = flatten(load_view_tree(kFixtures + "/login.xml"));
    const auto twice = flatten(to_view_tree(once));
    CHECK(twice.components == once.components);
    CHECK(twice.containers == once.containers);
    SynthConfig cfg;
    for (const auto& g : gen_accessible(cfg, 20)) {
      const auto a = flatten(g.tree);
      const auto b = flatten(to_view_tree(a));
      CHECK(a.components == b.components);
      CHECK(a.containers == b.containers);
    }
  }

  TEST_CASE("structural invariants over synthetic trees") {
    SynthConfig cfg;
    cfg.seed = 5;
    for (const auto& g : gen_accessible(cfg, 30)) {
      const auto wf = flatten(g.tree);
      CHECK(wf.components.size() <= count_leaves(g.tree.root));
      for (const auto& container : wf.containers) {
        CHECK(std::any_of(wf.components.begin(), wf.components.end(),
                          [&](const Component& c) { return c.container_id == container.id; }));
      }
      for (const auto& c : wf.components) {
        CHECK(wf.container_index(c.container_id).has_value());
        CHECK_FALSE(wf.component_index(c.container_id).has_value());
      }
    }
  }
}
