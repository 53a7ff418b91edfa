#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "guifix/detect.hpp"
#include "guifix/fix.hpp"
#include "guifix/wireframe.hpp"

namespace guifix {

enum class Verdict { Fixed, HalfBaked, Unfixed };

std::string_view to_string(Verdict v);

struct IssueOutcome {
  Issue issue;
  Verdict verdict = Verdict::Unfixed;
};

/// Outcome of fixing one GUI.
struct FixReport {
  std::string name;
  std::vector<IssueOutcome> outcomes;  // one per pre-fix issue
  std::vector<Issue> extra;            // post-fix issues absent before
  std::size_t post_issues = 0;
  bool partial = false;

  std::size_t count(Verdict v) const;
};

/// Fixed: the issue is gone.  HalfBaked: still present although the
/// attribute it concerns changed (bounds of the component or its peer for
/// size and interval, color for contrast).  Unfixed: present and untouched.
FixReport classify(std::string name, const Wireframe& before, const Wireframe& after,
                   std::span<const Issue> pre, std::span<const Issue> post);

struct KindStats {
  std::size_t issues = 0;
  std::size_t fixed = 0;
  std::size_t half_baked = 0;
  std::size_t unfixed = 0;

  /// Fixed / issues, or nullopt without issues.
  std::optional<double> repair_rate() const;
};

struct EvalReport {
  std::vector<FixReport> guis;
  KindStats total;
  std::array<KindStats, 3> per_kind;  // indexed by IssueKind
  std::size_t post_issues = 0;
  std::size_t extra = 0;

  /// 1 - post/pre clamped to [0, 1], or nullopt without pre-fix issues.
  std::optional<double> reduction() const;
};

EvalReport aggregate(std::vector<FixReport> guis);

std::string fix_report_to_json(const FixReport& r);
std::string eval_report_to_json(const EvalReport& r);
/// Aggregate table; undefined ratios print as "n/a".
std::string eval_report_to_table(const EvalReport& r);

}  // namespace guifix
