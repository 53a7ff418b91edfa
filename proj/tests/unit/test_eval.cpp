#include <doctest.h>

#include "guifix/eval.hpp"

using namespace guifix;

namespace {

Wireframe two_buttons() {
  Wireframe wf;
  wf.screen.width_px = 360;
  wf.screen.height_px = 640;
  wf.background_color = {255, 255, 255};
  wf.containers.push_back({"A", {0, 0, 360, 640}});
  for (int i = 0; i < 2; ++i) {
    Component c;
    c.id = "b" + std::to_string(i);
    c.bounds = {10.0 + 100.0 * i, 10, 40, 40};
    c.color = Rgb{0, 0, 0};
    c.container_id = "A";
    wf.components.push_back(c);
  }
  return wf;
}

Issue small(std::string id) { return {std::move(id), IssueKind::SmallSize, 40, 48, std::nullopt}; }

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("verdicts depend on presence and on the changed attribute") {
    const auto before = two_buttons();
    auto after = before;
    after.components[0].bounds.w = after.components[0].bounds.h = 48;  // fixed
    after.components[1].bounds.w = 44;                                 // touched but still small
    const std::vector<Issue> pre{small("b0"), small("b1")};
    const std::vector<Issue> post{small("b1")};
    const auto r = classify("g", before, after, pre, post);
    REQUIRE(r.outcomes.size() == 2);
    CHECK(r.outcomes[0].verdict == Verdict::Fixed);
    CHECK(r.outcomes[1].verdict == Verdict::HalfBaked);
    CHECK(r.extra.empty());

    const auto untouched = classify("g", before, before, pre, pre);
    CHECK(untouched.count(Verdict::Unfixed) == 2);
  }

  TEST_CASE("a recolor does not count as touching a size issue") {
    const auto before = two_buttons();
    auto after = before;
    after.components[0].color = Rgb{50, 50, 50};
    const std::vector<Issue> pre{small("b0")};
    CHECK(classify("g", before, after, pre, pre).outcomes[0].verdict == Verdict::Unfixed);
  }

  TEST_CASE("new issues are extra") {
    const auto wf = two_buttons();
    const std::vector<Issue> pre{small("b0")};
    const std::vector<Issue> post{small("b0"), small("b1")};
    const auto r = classify("g", wf, wf, pre, post);
    CHECK(r.extra.size() == 1);
    CHECK(r.post_issues == 2);
  }

  TEST_CASE("aggregation partitions every issue once") {
    const auto before = two_buttons();
    auto after = before;
    after.components[0].bounds.w = after.components[0].bounds.h = 48;
    const std::vector<Issue> pre{small("b0"), small("b1"),
                                 {"b0", IssueKind::LowContrast, 2.0, 3.0, std::nullopt}};
    const std::vector<Issue> post{small("b1"), {"b0", IssueKind::LowContrast, 2.0, 3.0, std::nullopt}};
    const auto rep = aggregate({classify("a", before, after, pre, post), classify("b", before, before, pre, pre)});
    CHECK(rep.total.issues == 6);
    CHECK(rep.total.fixed + rep.total.half_baked + rep.total.unfixed == rep.total.issues);
    std::size_t per_kind_sum = 0;
    for (const auto& k : rep.per_kind) per_kind_sum += k.issues;
    CHECK(per_kind_sum == rep.total.issues);
    CHECK(rep.total.fixed == 1);
    CHECK(rep.post_issues == 5);
    REQUIRE(rep.reduction());
    CHECK(*rep.reduction() == doctest::Approx(1.0 - 5.0 / 6.0));
    CHECK(*rep.per_kind[0].repair_rate() == doctest::Approx(0.25));
  }

  TEST_CASE("undefined ratios print as n/a") {
    const auto rep = aggregate({});
    CHECK_FALSE(rep.reduction());
    const auto table = eval_report_to_table(rep);
    CHECK(table.find("n/a") != std::string::npos);
    CHECK(table.find("nan") == std::string::npos);
    CHECK(eval_report_to_json(rep).find("\"reduction\": \"n/a\"") != std::string::npos);
  }

  TEST_CASE("reduction is clamped when more issues remain than were found") {
    const auto wf = two_buttons();
    const std::vector<Issue> pre{small("b0")};
    const std::vector<Issue> post{small("b0"), small("b1")};
    const auto rep = aggregate({classify("g", wf, wf, pre, post)});
    CHECK(*rep.reduction() == 0.0);
    CHECK(rep.extra == 1);
  }
}
