#include "guifix/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

namespace guifix {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Fixed: return "Fixed";
    case Verdict::HalfBaked: return "HalfBaked";
    case Verdict::Unfixed: return "Unfixed";
  }
  return "Unfixed";
}

std::size_t FixReport::count(Verdict v) const {
  return static_cast<std::size_t>(
      std::count_if(outcomes.begin(), outcomes.end(), [&](const IssueOutcome& o) { return o.verdict == v; }));
}

namespace {

const Component* find_component(const Wireframe& wf, const std::string& id) {
  const auto i = wf.component_index(id);
  return i ? &wf.components[*i] : nullptr;
}

bool bounds_changed(const Wireframe& a, const Wireframe& b, const std::string& id) {
  const auto* x = find_component(a, id);
  const auto* y = find_component(b, id);
  return x && y && !(x->bounds == y->bounds);
}

bool attribute_changed(const Wireframe& before, const Wireframe& after, const Issue& is) {
  switch (is.kind) {
    case IssueKind::SmallSize: return bounds_changed(before, after, is.component_id);
    case IssueKind::NarrowInterval:
      return bounds_changed(before, after, is.component_id) ||
             (is.peer_id && bounds_changed(before, after, *is.peer_id));
    case IssueKind::LowContrast: {
      const auto* x = find_component(before, is.component_id);
      const auto* y = find_component(after, is.component_id);
      return x && y && x->color != y->color;
    }
  }
  return false;
}

}  // namespace

FixReport classify(std::string name, const Wireframe& before, const Wireframe& after, std::span<const Issue> pre,
                   std::span<const Issue> post) {
  FixReport r;
  r.name = std::move(name);
  r.post_issues = post.size();
  std::set<std::tuple<std::string, IssueKind, std::optional<std::string>>> pre_keys, post_keys;
  for (const auto& is : pre) pre_keys.insert(is.key());
  for (const auto& is : post) post_keys.insert(is.key());
  for (const auto& is : pre) {
    Verdict v = Verdict::Fixed;
    if (post_keys.count(is.key())) v = attribute_changed(before, after, is) ? Verdict::HalfBaked : Verdict::Unfixed;
    r.outcomes.push_back({is, v});
  }
  for (const auto& is : post) {
    if (!pre_keys.count(is.key())) r.extra.push_back(is);
  }
  return r;
}

std::optional<double> KindStats::repair_rate() const {
  if (issues == 0) return std::nullopt;
  return static_cast<double>(fixed) / static_cast<double>(issues);
}

std::optional<double> EvalReport::reduction() const {
  if (total.issues == 0) return std::nullopt;
  const double r = 1.0 - static_cast<double>(post_issues) / static_cast<double>(total.issues);
  return std::clamp(r, 0.0, 1.0);
}

EvalReport aggregate(std::vector<FixReport> guis) {
  EvalReport rep;
  rep.guis = std::move(guis);
  for (const auto& g : rep.guis) {
    rep.post_issues += g.post_issues;
    rep.extra += g.extra.size();
    for (const auto& o : g.outcomes) {
      for (KindStats* s : {&rep.total, &rep.per_kind[static_cast<std::size_t>(o.issue.kind)]}) {
        ++s->issues;
        if (o.verdict == Verdict::Fixed) ++s->fixed;
        else if (o.verdict == Verdict::HalfBaked) ++s->half_baked;
        else ++s->unfixed;
      }
    }
  }
  return rep;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson issue_json(const Issue& is) {
  ojson j;
  j["component_id"] = is.component_id;
  j["kind"] = to_string(is.kind);
  j["measured"] = is.measured;
  j["threshold"] = is.threshold;
  j["peer_id"] = is.peer_id ? ojson(*is.peer_id) : ojson(nullptr);
  return j;
}

ojson fix_report_json(const FixReport& r) {
  ojson j;
  j["name"] = r.name;
  j["partial"] = r.partial;
  ojson outcomes = ojson::array();
  for (const auto& o : r.outcomes) {
    ojson x = issue_json(o.issue);
    x["verdict"] = to_string(o.verdict);
    outcomes.push_back(std::move(x));
  }
  j["outcomes"] = std::move(outcomes);
  ojson extra = ojson::array();
  for (const auto& is : r.extra) extra.push_back(issue_json(is));
  j["extra"] = std::move(extra);
  j["counts"] = {{"pre", r.outcomes.size()},
                 {"post", r.post_issues},
                 {"fixed", r.count(Verdict::Fixed)},
                 {"half_baked", r.count(Verdict::HalfBaked)},
                 {"unfixed", r.count(Verdict::Unfixed)},
                 {"extra", r.extra.size()}};
  return j;
}

ojson optional_ratio(std::optional<double> v) { return v ? ojson(*v) : ojson("n/a"); }

ojson stats_json(const KindStats& s) {
  return {{"issues", s.issues},
          {"fixed", s.fixed},
          {"half_baked", s.half_baked},
          {"unfixed", s.unfixed},
          {"repair_rate", optional_ratio(s.repair_rate())}};
}

std::string ratio_text(std::optional<double> v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", *v * 100.0);
  return buf;
}

}  // namespace

std::string fix_report_to_json(const FixReport& r) { return fix_report_json(r).dump(2) + "\n"; }

std::string eval_report_to_json(const EvalReport& r) {
  ojson j;
  j["guis"] = r.guis.size();
  j["pre_issues"] = r.total.issues;
  j["post_issues"] = r.post_issues;
  j["reduction"] = optional_ratio(r.reduction());
  j["extra"] = r.extra;
  j["total"] = stats_json(r.total);
  j["per_kind"] = {{"SmallSize", stats_json(r.per_kind[0])},
                   {"NarrowInterval", stats_json(r.per_kind[1])},
                   {"LowContrast", stats_json(r.per_kind[2])}};
  ojson guis = ojson::array();
  for (const auto& g : r.guis) guis.push_back(fix_report_json(g));
  j["per_gui"] = std::move(guis);
  return j.dump(2) + "\n";
}

std::string eval_report_to_table(const EvalReport& r) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %8s %8s %10s %8s %10s\n", "kind", "issues", "fixed", "half-baked",
                "unfixed", "rate");
  os << buf;
  auto row = [&](const char* name, const KindStats& s) {
    std::snprintf(buf, sizeof buf, "%-16s %8zu %8zu %10zu %8zu %10s\n", name, s.issues, s.fixed, s.half_baked,
                  s.unfixed, ratio_text(s.repair_rate()).c_str());
    os << buf;
  };
  row("SmallSize", r.per_kind[0]);
  row("NarrowInterval", r.per_kind[1]);
  row("LowContrast", r.per_kind[2]);
  row("total", r.total);
  os << "guis: " << r.guis.size() << "  pre-fix issues: " << r.total.issues << "  post-fix issues: " << r.post_issues
     << "  extra: " << r.extra << "  reduction: " << ratio_text(r.reduction()) << '\n';
  return os.str();
}

}  // namespace guifix
