#include <doctest.h>

#include "guifix/detect.hpp"
#include "guifix/error.hpp"
#include "guifix/synth.hpp"
#include "guifix/wireframe.hpp"

using namespace guifix;

TEST_SUITE("synth") {
  TEST_CASE("generated GUIs are clean across seeds") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      SynthConfig cfg;
      cfg.seed = seed;
      for (const auto& g : gen_accessible(cfg, 4)) {
        const auto issues = detect_issues(flatten(g.tree), cfg.thresholds);
        CAPTURE(seed);
        CAPTURE(g.name);
        CHECK(issues.empty());
      }
    }
  }

  TEST_CASE("generation is deterministic and names are sequential") {
    SynthConfig cfg;
    cfg.seed = 9;
    const auto a = gen_accessible(cfg, 6);
    const auto b = gen_accessible(cfg, 6);
    REQUIRE(a.size() == 6);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].tree == b[i].tree);
      CHECK(a[i].seed == b[i].seed);
    }
    CHECK(a[0].name == "gui_000");
    CHECK(a[5].name == "gui_005");
    cfg.seed = 10;
    CHECK_FALSE(gen_accessible(cfg, 1)[0].tree == a[0].tree);
  }

  TEST_CASE("components respect the configured ranges where the screen has room") {
    SynthConfig cfg;
    cfg.seed = 4;
    cfg.min_containers = 2;
    cfg.max_containers = 3;
    cfg.min_components = 2;
    cfg.max_components = 4;
    for (const auto& g : gen_accessible(cfg, 30)) {
      const auto wf = flatten(g.tree);
      CHECK(wf.screen.width_dp() == doctest::Approx(cfg.screen_width_dp));
      CHECK(wf.screen.density == cfg.density);
      CHECK(wf.containers.size() >= 1);
      CHECK(wf.containers.size() <= 3);
      const Rect screen = wf.screen.screen_dp();
      for (const auto& ct : wf.containers) {
        std::size_t held = 0;
        for (const auto& c : wf.components) held += c.container_id == ct.id;
        CHECK(held >= 1);
        CHECK(held <= 4);
        if (&ct == &wf.containers.front()) CHECK(held >= 2);  // the first always has room
      }
      for (const auto& c : wf.components) {
        CHECK(screen.contains(c.bounds));
        CHECK(std::min(c.bounds.w, c.bounds.h) >= cfg.min_size - 1e-9);
        CHECK(std::max(c.bounds.w, c.bounds.h) <= cfg.max_size + 1e-9);
        CHECK(c.color.has_value());
      }
    }
  }

  TEST_CASE("invalid generator settings are rejected") {
    SynthConfig cfg;
    cfg.min_size = 40;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.max_components = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.min_contrast = 2.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.patterns.clear();
    CHECK_THROWS_AS(cfg.validate(), Error);
  }

  TEST_CASE("size-only injection shrinks buttons into the severity range") {
    SynthConfig cfg;
    cfg.seed = 15;
    InjectionMix mix;
    mix.p_size = 1.0;
    mix.p_interval = 0.0;
    mix.p_contrast = 0.0;
    std::size_t total = 0;
    for (const auto& g : gen_accessible(cfg, 20)) {
      const auto inj = inject_issues(g.tree, mix, g.seed, cfg.thresholds);
      std::size_t buttons = 0;
      for (const auto& c : flatten(g.tree).components) buttons += c.view_class == ViewClass::Button;
      CHECK(inj.issues.size() == buttons);
      for (const auto& is : inj.issues) {
        CHECK(is.kind == IssueKind::SmallSize);
        CHECK(is.measured >= mix.min_shrunk - 1e-9);
        CHECK(is.measured <= mix.max_shrunk + 1e-9);
      }
      total += inj.issues.size();
    }
    CHECK(total > 0);
  }

  TEST_CASE("an all-zero mix leaves the GUI unchanged") {
    SynthConfig cfg;
    cfg.seed = 2;
    InjectionMix mix;
    mix.p_size = mix.p_interval = mix.p_contrast = 0.0;
    for (const auto& g : gen_accessible(cfg, 10)) {
      const auto inj = inject_issues(g.tree, mix, 1, cfg.thresholds);
      CHECK(inj.tree == g.tree);
      CHECK(inj.issues.empty());
    }
  }

  TEST_CASE("washout lands within the configured distance below the threshold") {
    SynthConfig cfg;
    cfg.seed = 6;
    InjectionMix mix;
    mix.p_size = mix.p_interval = 0.0;
    mix.p_contrast = 1.0;
    std::size_t seen = 0;
    for (const auto& g : gen_accessible(cfg, 20)) {
      const auto inj = inject_issues(g.tree, mix, g.seed, cfg.thresholds);
      for (const auto& is : inj.issues) {
        REQUIRE(is.kind == IssueKind::LowContrast);
        CHECK(is.measured < is.threshold);
        CHECK(is.measured >= std::max(1.0, is.threshold - mix.max_washout) - 1e-12);
        ++seen;
      }
    }
    CHECK(seen > 0);
  }

  TEST_CASE("squeezed pairs are detected with their peer") {
    SynthConfig cfg;
    cfg.seed = 8;
    InjectionMix mix;
    mix.p_size = mix.p_contrast = 0.0;
    mix.p_interval = 1.0;
    std::size_t seen = 0;
    for (const auto& g : gen_accessible(cfg, 20)) {
      const auto inj = inject_issues(g.tree, mix, g.seed, cfg.thresholds);
      for (const auto& is : inj.issues) {
        if (is.kind != IssueKind::NarrowInterval) continue;
        CHECK(is.peer_id.has_value());
        CHECK(is.measured < cfg.thresholds.min_interval_dp);
        ++seen;
      }
    }
    CHECK(seen > 0);
  }

  TEST_CASE("injection rejects severities that would not create issues") {
    SynthConfig cfg;
    const auto g = gen_accessible(cfg, 1)[0];
    InjectionMix mix;
    mix.max_shrunk = 50.0;
    CHECK_THROWS_AS(inject_issues(g.tree, mix, 1, cfg.thresholds), Error);
  }

  TEST_CASE("manifest json round trip") {
    Manifest m;
    m.seed = 42;
    m.injected = true;
    ManifestEntry e;
    e.file = "gui_000.json";
    e.seed = 123456789012345ULL;
    e.injected.push_back({"b1", IssueKind::SmallSize, 30.5, 48.0, std::nullopt});
    e.injected.push_back({"b1", IssueKind::NarrowInterval, 4.0, 8.0, std::string("b2")});
    e.notes.push_back("skipped");
    m.entries.push_back(e);
    m.entries.push_back({"gui_001.json", 7, {}, {}});
    CHECK(manifest_from_json(manifest_to_json(m)) == m);
    CHECK_THROWS_AS(manifest_from_json("{}"), ParseError);
  }
}
