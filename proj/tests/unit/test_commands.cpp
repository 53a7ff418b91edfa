#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "guifix/calibrate.hpp"
#include "guifix/io.hpp"
#include "guifix/synth.hpp"
#include "png_writer.hpp"
#include "temp_dir.hpp"

using namespace guifix;
using namespace guifix::cli;
using nlohmann::json;

namespace {

const std::string kFixtures = GUIFIX_FIXTURES;

struct Captured {
  std::ostringstream out, err;
  Streams io() { return {out, err}; }
};

GlobalOptions with_out(const std::filesystem::path& p, std::uint64_t seed = 1) {
  GlobalOptions g;
  g.seed = seed;
  g.out = p;
  return g;
}

// Small, fast settings for end-to-end runs.
std::filesystem::path quick_config(const testing::TempDir& dir) {
  const auto p = dir / "quick.ini";
  write_file_atomic(p, "[train]\nepochs = 30\ndim = 8\n[predict]\nmax_iterations = 60\n");
  return p;
}

}  // namespace

TEST_SUITE("commands") {
  TEST_CASE("detect exit codes") {
    Captured c;
    CHECK(cmd_detect({}, kFixtures + "/clean.json", c.io()) == kExitOk);
    const auto clean = json::parse(c.out.str());
    CHECK(clean["issues"].empty());
    CHECK(clean.contains("config"));

    Captured d;
    CHECK(cmd_detect({}, kFixtures + "/login.xml", d.io()) == kExitIssues);
    CHECK(json::parse(d.out.str())["issues"].size() == 3);

    Captured e;
    CHECK(guarded(e.err, [&] { return cmd_detect({}, kFixtures + "/missing.json", e.io()); }) == kExitError);
    CHECK(e.err.str().find("error:") == 0);
  }

  TEST_CASE("a sibling screenshot supplies missing colors") {
    testing::TempDir dir("shot");
    write_file_atomic(dir / "g.json", R"({"screen":{"width_px":100,"height_px":100,"density":1,"background_color":[0,0,0]},
      "root":{"id":"root","class":"FrameLayout","bounds":[0,0,100,100],"color":null,"text":null,"children":[
        {"id":"b","class":"Button","bounds":[10,10,60,60],"color":null,"text":"Go","children":[]}]}})");
    Captured before;
    CHECK(cmd_detect({}, dir / "g.json", before.io()) == kExitOk);

    testing::write_png(dir / "g.png", 100, 100, {255, 255, 255}, 10, 10, 60, 60, {250, 250, 250});
    Captured after;
    CHECK(cmd_detect({}, dir / "g.json", after.io()) == kExitIssues);
    const auto issues = json::parse(after.out.str())["issues"];
    REQUIRE(issues.size() == 1);
    CHECK(issues[0]["component_id"] == "b");
    CHECK(issues[0]["kind"] == "LowContrast");

    testing::write_png(dir / "g.png", 50, 100, {255, 255, 255});
    Captured wrong;
    CHECK(guarded(wrong.err, [&] { return cmd_detect({}, dir / "g.json", wrong.io()); }) == kExitError);
  }

  TEST_CASE("commands that write files insist on --out") {
    Captured c;
    CHECK(guarded(c.err, [&] { return cmd_synth({}, 3, false, c.io()); }) == kExitError);
    CHECK(c.err.str().find("--out") != std::string::npos);
  }

  TEST_CASE("preset calibration") {
    testing::TempDir dir("preset");
    Captured c;
    CHECK(cmd_calibrate(with_out(dir / "p.cal"), std::nullopt, std::nullopt, true, c.io()) == kExitOk);
    CHECK(load_calibration(dir / "p.cal") == published_calibration());
    CHECK(json::parse(c.out.str())["provenance"] == "published");
  }

  TEST_CASE("empty and dirty corpora") {
    testing::TempDir dir("corpora");
    std::filesystem::create_directories(dir / "empty");
    Captured c;
    CHECK(guarded(c.err, [&] { return cmd_train(with_out(dir / "m.model"), dir / "empty", c.io()); }) == kExitError);
    CHECK(c.err.str().find("empty") != std::string::npos);

    Captured s;
    REQUIRE(cmd_synth(with_out(dir / "dirty"), 8, true, s.io()) == kExitOk);
    Captured t;
    auto g = with_out(dir / "m.model");
    g.config = quick_config(dir);
    REQUIRE(cmd_train(g, dir / "dirty", t.io()) == kExitOk);
    Captured k;
    const int code = guarded(k.err, [&] {
      return cmd_calibrate(with_out(dir / "x.cal"), dir / "m.model", dir / "dirty", false, k.io());
    });
    CHECK(code == kExitError);
    CHECK(k.err.str().find("not clean") != std::string::npos);
  }

  TEST_CASE("synth, train, calibrate and eval end to end") {
    testing::TempDir dir("pipeline");
    const auto cfg = quick_config(dir);
    auto g = [&](const std::filesystem::path& out, std::uint64_t seed) {
      auto o = with_out(out, seed);
      o.config = cfg;
      return o;
    };
    Captured a, b, c, d, e;
    REQUIRE(cmd_synth(g(dir / "clean", 3), 20, false, a.io()) == kExitOk);
    REQUIRE(cmd_synth(g(dir / "bad", 4), 8, true, b.io()) == kExitOk);
    CHECK(corpus_files(dir / "clean").size() == 20);

    REQUIRE(cmd_train(g(dir / "m.model", 1), dir / "clean", c.io()) == kExitOk);
    const auto tj = json::parse(c.out.str());
    CHECK(tj["graphs_train"] == 16);
    CHECK(tj["graphs_heldout"] == 4);
    CHECK(std::filesystem::exists(dir / "m.model.loss.csv"));

    REQUIRE(cmd_calibrate(g(dir / "c.cal", 1), dir / "m.model", dir / "clean", false, d.io()) == kExitOk);
    CHECK(load_calibration(dir / "c.cal").provenance == Provenance::Fitted);
    CHECK(std::filesystem::exists(dir / "c.cal.mapping.csv"));

    REQUIRE(cmd_eval(g(dir / "eval", 1), dir / "bad" / "manifest.json", dir / "m.model", dir / "c.cal", e.io()) ==
            kExitOk);
    const auto ej = json::parse(e.out.str());
    CHECK(ej["guis"] == 8);
    CHECK(ej["extra"] == 0);
    CHECK(std::filesystem::exists(dir / "eval" / "report.txt"));
    CHECK(corpus_files(dir / "eval" / "patches").size() == 8);

    Captured f;
    REQUIRE(cmd_fix(g(dir / "fixed", 1), dir / "bad" / "gui_000.json", dir / "m.model", dir / "c.cal", f.io()) ==
            kExitOk);
    CHECK(std::filesystem::exists(dir / "fixed" / "gui_000.patch.json"));
    CHECK(std::filesystem::exists(dir / "fixed" / "gui_000.fixed.json"));
    CHECK(json::parse(f.out.str()).contains("config"));
  }

  TEST_CASE("eval refuses a manifest that disagrees with detection") {
    testing::TempDir dir("mismatch");
    Captured s;
    REQUIRE(cmd_synth(with_out(dir / "bad", 5), 3, true, s.io()) == kExitOk);
    auto m = manifest_from_json(read_file(dir / "bad" / "manifest.json"));
    m.entries[0].injected.push_back({"ghost", IssueKind::SmallSize, 1, 48, std::nullopt});
    write_file_atomic(dir / "bad" / "manifest.json", manifest_to_json(m));
    Captured c;
    const int code = guarded(c.err, [&] {
      return cmd_eval({}, dir / "bad" / "manifest.json", kFixtures + "/none.model", kFixtures + "/none.cal", c.io());
    });
    CHECK(code == kExitError);
    CHECK(c.err.str().find("manifest mismatch") != std::string::npos);
  }
}
