#include <doctest.h>

#include "guifix/error.hpp"
#include "guifix/settings.hpp"

using namespace guifix;

TEST_SUITE("settings") {
  TEST_CASE("defaults survive an echo round trip") {
    const Settings s;
    const auto text = settings_to_ini(s);
    CHECK(text.find("[thresholds]") != std::string::npos);
    CHECK(text.find("min_touch_dp = 48") != std::string::npos);
    CHECK(settings_to_ini(parse_settings(text)) == text);
  }

  TEST_CASE("values are applied and shared thresholds reach the generator") {
    const auto s = parse_settings(
        "[thresholds]\nmin_touch_dp = 44\n[train]\nepochs = 7\nlearning_rate = 0.02\n"
        "[fix]\nrecolor_mode = per_channel\n[synth]\nmin_size = 44\npatterns = row, grid\n");
    CHECK(s.thresholds.min_touch_dp == 44.0);
    CHECK(s.synth.thresholds.min_touch_dp == 44.0);
    CHECK(s.train.epochs == 7);
    CHECK(s.fix.recolor_mode == RecolorMode::PerChannel);
    CHECK(s.synth.patterns == std::vector<LayoutPattern>{LayoutPattern::Row, LayoutPattern::Grid});

    TrainedModel m;
    m.config = s.train;
    CHECK(s.fix_options(m, 3).predict.learning_rate == doctest::Approx(0.002));
    CHECK(s.fix_options(m, 3).seed == 3);
    CHECK(s.mapping_protocol(m, 3).predict.learning_rate == doctest::Approx(0.002));
  }

  TEST_CASE("unknown names and bad values are rejected") {
    CHECK_THROWS_AS(parse_settings("[thresholds]\nmin_touch = 3\n"), ParseError);
    CHECK_THROWS_AS(parse_settings("[nonsense]\na = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_settings("[train]\nepochs = many\n"), Error);
    CHECK_THROWS_AS(parse_settings("[train]\nepochs = 0\n"), Error);
    CHECK_THROWS_AS(parse_settings("[synth]\npatterns = Spiral\n"), Error);
    CHECK_THROWS_AS(parse_settings("[thresholds]\nmin_text_contrast = 2\n"), Error);
  }
}
