#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "guifix/detect.hpp"
#include "guifix/error.hpp"
#include "guifix/fix.hpp"
#include "guifix/graph.hpp"
#include "guifix/settings.hpp"
#include "guifix/synth.hpp"

using namespace guifix;

namespace {

const std::string kFixtures = GUIFIX_FIXTURES;

StableSignal sig(double v) { return {"x", v, 0, true}; }

Calibration linear(double slope) {
  Calibration c;
  c.f_size.coefficients = {0.0, slope};
  c.f_interval.coefficients = {0.0, slope};
  c.f_color.coefficients = {0.0, slope};
  return c;
}

const TrainedModel& shared_model() {
  static const TrainedModel m = [] {
    SynthConfig sc;
    sc.seed = 31;
    std::vector<GuiGraph> graphs;
    for (const auto& g : gen_accessible(sc, 30)) graphs.push_back(build_graph(flatten(g.tree)));
    TrainConfig cfg;
    cfg.epochs = 40;
    cfg.dim = 8;
    return train(graphs, cfg);
  }();
  return m;
}

struct Case {
  ViewTree tree;
  Wireframe wf;
  std::vector<Issue> issues;
};

std::vector<Case> injected_cases(std::size_t n, std::uint64_t seed) {
  SynthConfig sc;
  sc.seed = seed;
  InjectionMix mix;
  mix.p_size = mix.p_interval = mix.p_contrast = 0.3;
  std::vector<Case> out;
  for (const auto& g : gen_accessible(sc, n)) {
    auto inj = inject_issues(g.tree, mix, g.seed, sc.thresholds);
    Case c{inj.tree, flatten(inj.tree), {}};
    c.issues = detect_issues(c.wf, sc.thresholds);
    out.push_back(std::move(c));
  }
  return out;
}

std::set<std::tuple<std::string, IssueKind, std::optional<std::string>>> keys(const std::vector<Issue>& v) {
  std::set<std::tuple<std::string, IssueKind, std::optional<std::string>>> out;
  for (const auto& i : v) out.insert(i.key());
  return out;
}

}  // namespace

TEST_SUITE("fix") {
  TEST_CASE("size targets clamp to the touch threshold") {
    const auto cal = linear(26.0);
    const Thresholds th;
    auto t = target_size(sig(2.0), cal, th);
    CHECK(t.value == doctest::Approx(52.0));
    CHECK(t.clamps.empty());
    t = target_size(sig(1.0), cal, th);
    CHECK(t.raw == doctest::Approx(26.0));
    CHECK(t.value == 48.0);
    CHECK(t.clamps == std::vector<std::string>{"threshold"});
  }

  TEST_CASE("interval targets use the signal gap") {
    const auto pub = published_calibration();
    const Thresholds th;
    const auto t = target_interval(sig(3.0), sig(2.0), pub, th);
    CHECK(t.raw == doctest::Approx(0.042 + 1.634 - 0.0378));
    CHECK(t.value == 8.0);
    const auto u = target_interval(sig(0.0), sig(10.0), linear(1.5), th);
    CHECK(u.value == doctest::Approx(15.0));
    CHECK(u.clamps.empty());
  }

  TEST_CASE("mean interval over an ordered run") {
    const Thresholds th;
    const std::vector<StableSignal> run{sig(0.0), sig(10.0), sig(22.0)};
    auto t = mean_interval(run, linear(1.0), th);
    CHECK(t.value == doctest::Approx(11.0));
    const std::vector<StableSignal> tight{sig(1.0), sig(4.0), sig(7.0002)};
    t = mean_interval(tight, linear(1.0), th);
    CHECK(t.raw == doctest::Approx(3.0001));
    CHECK(t.value == 8.0);
    const std::vector<StableSignal> two{sig(0.0), sig(1.0)};
    CHECK_THROWS_AS(mean_interval(two, linear(1.0), th), Error);
  }

  TEST_CASE("contrast targets clamp to the applicable threshold and to 21") {
    const auto pub = published_calibration();
    const Thresholds th;
    auto t = target_contrast(sig(2.0), pub, th, true, 12.0);
    CHECK(t.raw == doctest::Approx(1.872));
    CHECK(t.value == 4.5);
    t = target_contrast(sig(2.0), pub, th, true, 24.0);
    CHECK(t.value == 3.0);
    t = target_contrast(sig(2.0), pub, th, false, 12.0);
    CHECK(t.value == 3.0);
    t = target_contrast(sig(10.0), pub, th, true, 12.0);
    CHECK(t.value == 21.0);
    CHECK(t.clamps == std::vector<std::string>{"max_ratio"});
  }

  TEST_CASE("luminance recoloring on white") {
    const Rgb white{255, 255, 255};
    // Target luminance for 4.5:1 below white is 1.05 / 4.5 - 0.05.
    const double l_target = 1.05 / 4.5 - 0.05;
    CHECK(l_target == doctest::Approx(0.18333).epsilon(1e-4));
    const auto r = recolor({200, 200, 200}, white, 4.5);
    CHECK(r.feasible);
    CHECK(r.achieved >= 4.5);
    CHECK(r.achieved - 4.5 <= 0.2);
    CHECK(relative_luminance(r.color) <= l_target + 1e-12);
    CHECK(relative_luminance(r.color) == doctest::Approx(l_target).epsilon(0.02));
    CHECK(r.achieved == doctest::Approx(contrast_ratio(r.color, white)));
  }

  TEST_CASE("recoloring keeps a compliant color and rejects bad ratios") {
    const auto same = recolor({10, 20, 30}, {10, 20, 30}, 1.0);
    CHECK(same.color == Rgb{10, 20, 30});
    CHECK(same.achieved == 1.0);
    const auto r = recolor({118, 118, 118}, {255, 255, 255}, 4.5);
    CHECK(r.color == Rgb{118, 118, 118});
    CHECK_THROWS_AS(recolor({0, 0, 0}, {255, 255, 255}, 0.5), Error);
    CHECK_THROWS_AS(recolor({0, 0, 0}, {255, 255, 255}, 22.0), Error);
  }

  TEST_CASE("mid gray background cannot reach 7:1") {
    const Rgb bg{119, 119, 119};
    const double best = std::max(contrast_ratio({0, 0, 0}, bg), contrast_ratio({255, 255, 255}, bg));
    CHECK(max_contrast_against(bg) == doctest::Approx(best));
    REQUIRE(best < 7.0);
    const auto r = recolor({50, 50, 50}, bg, 7.0);
    CHECK_FALSE(r.feasible);
  }

  TEST_CASE("per-channel recoloring leaves the gamut on white") {
    // (1 + 0.05) / (4.5 * 0.2126) exceeds one, so the red channel clamps.
    CHECK(1.05 / (4.5 * 0.2126) == doctest::Approx(1.0976).epsilon(1e-4));
    const auto r = recolor({100, 100, 100}, {255, 255, 255}, 4.5, RecolorMode::PerChannel);
    CHECK(r.out_of_gamut);
    CHECK(recolor_mode_from_string(to_string(RecolorMode::PerChannel)) == RecolorMode::PerChannel);
    CHECK_THROWS_AS(recolor_mode_from_string("hsv"), Error);
  }

  TEST_CASE("patch json round trip and application") {
    const auto tree = load_view_tree(kFixtures + "/login.xml");
    Patch p;
    CHECK(apply_patch(tree, p) == tree);
    Change c;
    c.component_id = "help";
    c.field = ChangeField::Bounds;
    c.old_bounds_px = {612, 1050, 120, 108};
    c.new_bounds_px = {612, 1050, 144, 144};
    c.old_bounds = px_to_dp(c.old_bounds_px, 3.0);
    c.new_bounds = px_to_dp(c.new_bounds_px, 3.0);
    c.notes.push_back({"SmallSize", 1.25, "f_size", 30.0, 48.0, {"threshold"}});
    p.changes.push_back(c);
    Change col;
    col.component_id = "terms";
    col.field = ChangeField::Color;
    col.old_color = {170, 170, 170};
    col.new_color = {110, 110, 110};
    p.changes.push_back(col);
    p.unfixable.push_back({"logo", IssueKind::LowContrast, std::nullopt, "image"});
    p.warnings.push_back("w");
    CHECK(patch_from_json(patch_to_json(p)) == p);

    const auto patched = apply_patch(tree, p);
    const ViewNode* help = find_node(patched.root, "help");
    REQUIRE(help);
    CHECK(help->bounds_px == c.new_bounds_px);
    CHECK(help->bounds == Rect{204, 350, 48, 48});
    CHECK(find_node(patched.root, "terms")->color == Rgb{110, 110, 110});
    CHECK(find_node(patched.root, "login")->bounds == find_node(tree.root, "login")->bounds);

    Patch dangling;
    dangling.changes.push_back(c);
    dangling.changes[0].component_id = "nope";
    CHECK_THROWS_AS(apply_patch(tree, dangling), Error);
  }

  TEST_CASE("nothing to fix gives an empty patch") {
    const auto wf = flatten(load_view_tree(kFixtures + "/clean.json"));
    const Settings s;
    const auto plan = plan_fix(wf, {}, shared_model(), published_calibration(), s.thresholds,
                               s.fix_options(shared_model(), 1));
    CHECK(plan.patch.empty());
    CHECK(plan.patch.unfixable.empty());
  }

  TEST_CASE("login fixture is repaired") {
    const auto tree = load_view_tree(kFixtures + "/login.xml");
    const auto wf = flatten(tree);
    const Settings s;
    const auto issues = detect_issues(wf, s.thresholds);
    const auto plan = plan_fix(wf, issues, shared_model(), published_calibration(), s.thresholds,
                               s.fix_options(shared_model(), 1), &tree);
    const auto after = detect_issues(flatten(apply_patch(tree, plan.patch)), s.thresholds);
    CHECK(after.empty());
    CHECK(plan.patch.unfixable.empty());
    CHECK_FALSE(plan.patch.partial);
  }

  TEST_CASE("repairs never add issues, only grow primary targets and stay on screen") {
    const Settings s;
    const auto& model = shared_model();
    const auto cal = published_calibration();
    std::size_t before_total = 0, after_total = 0;
    for (const auto& c : injected_cases(30, 12)) {
      const auto plan = plan_fix(c.wf, c.issues, model, cal, s.thresholds, s.fix_options(model, 5), &c.tree);
      const auto fixed = apply_patch(c.tree, plan.patch);
      const auto after = detect_issues(flatten(fixed), s.thresholds);
      const auto pre = keys(c.issues);
      for (const auto& k : keys(after)) CHECK(pre.count(k));
      before_total += c.issues.size();
      after_total += after.size();

      const Rect screen{0, 0, double(c.tree.screen.width_px), double(c.tree.screen.height_px)};
      std::set<std::pair<std::string, int>> seen;
      for (const auto& ch : plan.patch.changes) {
        CHECK(seen.insert({ch.component_id, int(ch.field)}).second);
        if (ch.field != ChangeField::Bounds) continue;
        CHECK(screen.contains(ch.new_bounds_px));
        CHECK(ch.new_bounds_px.w == std::round(ch.new_bounds_px.w));
        CHECK(ch.new_bounds_px.x == std::round(ch.new_bounds_px.x));
        if (ch.minor) {
          // Co-adjustments stay within the relative cap.
          CHECK(std::abs(ch.new_bounds_px.w / ch.old_bounds_px.w - 1.0) <= 0.05 + 1.0 / ch.old_bounds_px.w);
        } else {
          CHECK(ch.new_bounds_px.w >= ch.old_bounds_px.w);
          CHECK(ch.new_bounds_px.h >= ch.old_bounds_px.h);
        }
      }
      for (const auto& u : plan.patch.unfixable) {
        if (u.kind == IssueKind::LowContrast) {
          const auto i = c.wf.component_index(u.component_id);
          REQUIRE(i);
          CHECK(c.wf.components[*i].view_class == ViewClass::Image);
        }
      }
    }
    CHECK(before_total > 0);
    CHECK(after_total < before_total);
  }

  TEST_CASE("image contrast issues are reported as unfixable") {
    for (const auto& c : injected_cases(40, 3)) {
      for (const auto& is : c.issues) {
        if (is.kind != IssueKind::LowContrast) continue;
        if (c.wf.components[*c.wf.component_index(is.component_id)].view_class != ViewClass::Image) continue;
        const Settings s;
        const std::vector<Issue> one{is};
        const auto plan = plan_fix(c.wf, one, shared_model(), published_calibration(), s.thresholds,
                                   s.fix_options(shared_model(), 1), &c.tree);
        REQUIRE(plan.patch.unfixable.size() == 1);
        CHECK(plan.patch.unfixable[0].component_id == is.component_id);
        return;
      }
    }
    FAIL("no washed-out image in the corpus");
  }

  TEST_CASE("planning is deterministic") {
    const Settings s;
    for (const auto& c : injected_cases(5, 44)) {
      const auto a = plan_fix(c.wf, c.issues, shared_model(), published_calibration(), s.thresholds,
                              s.fix_options(shared_model(), 9), &c.tree);
      const auto b = plan_fix(c.wf, c.issues, shared_model(), published_calibration(), s.thresholds,
                              s.fix_options(shared_model(), 9), &c.tree);
      CHECK(patch_to_json(a.patch) == patch_to_json(b.patch));
    }
  }
}
