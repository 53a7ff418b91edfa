#include "guifix/fix.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "guifix/error.hpp"
#include "guifix/graph.hpp"
#include "guifix/random.hpp"

namespace guifix {

// --- Targets -------------------------------------------------------------

Target target_size(const StableSignal& sig, const Calibration& cal, const Thresholds& th) {
  Target t;
  t.raw = cal.size(sig.value);
  t.value = t.raw;
  if (!(t.value >= th.min_touch_dp)) {
    t.value = th.min_touch_dp;
    t.clamps.push_back("threshold");
  }
  return t;
}

Target target_interval(const StableSignal& a, const StableSignal& b, const Calibration& cal, const Thresholds& th) {
  Target t;
  t.raw = cal.interval(a.value, b.value);
  t.value = t.raw;
  if (!(t.value >= th.min_interval_dp)) {
    t.value = th.min_interval_dp;
    t.clamps.push_back("threshold");
  }
  return t;
}

Target mean_interval(std::span<const StableSignal> ordered, const Calibration& cal, const Thresholds& th) {
  if (ordered.size() < 3) throw Error("mean interval needs at least three components");
  Target t;
  double sum = 0.0;
  for (std::size_t m = 1; m < ordered.size(); ++m) sum += cal.interval(ordered[m].value, ordered[m - 1].value);
  t.raw = sum / static_cast<double>(ordered.size() - 1);
  t.value = t.raw;
  if (!(t.value >= th.min_interval_dp)) {
    t.value = th.min_interval_dp;
    t.clamps.push_back("threshold");
  }
  return t;
}

Target target_contrast(const StableSignal& sig, const Calibration& cal, const Thresholds& th, bool is_text,
                       double text_height_dp) {
  Target t;
  t.raw = cal.color(sig.value);
  t.value = t.raw;
  const double required = th.contrast_threshold(is_text ? ViewClass::Text : ViewClass::Button, text_height_dp);
  if (!(t.value >= required)) {
    t.value = required;
    t.clamps.push_back("threshold");
  }
  if (t.value > 21.0) {
    t.value = 21.0;
    t.clamps.push_back("max_ratio");
  }
  return t;
}

// --- Planning ------------------------------------------------------------

namespace {

constexpr double kTol = kGeometryTolerance;

bool contains_tol(const Rect& outer, const Rect& r) {
  return r.x >= outer.x - kTol && r.y >= outer.y - kTol && r.right() <= outer.right() + kTol &&
         r.bottom() <= outer.bottom() + kTol;
}

Rect shifted(const Rect& r, Axis axis, double delta) {
  return axis == Axis::X ? r.translated(delta, 0.0) : r.translated(0.0, delta);
}

// Centered resize; odd differences put the extra pixel right and bottom so
// integral inputs stay integral.
Rect grown(const Rect& r, double w, double h) {
  return {r.x - std::floor((w - r.w) / 2.0), r.y - std::floor((h - r.h) / 2.0), w, h};
}

double px_ceil(double v) { return std::ceil(v - 1e-7); }

// Geometry and relations of the original wireframe.
struct Layout {
  const Wireframe& wf;
  const Thresholds& th;
  double density = 1.0;
  Rect screen;
  std::vector<Rect> container;          // per component, dp
  std::vector<bool> inside;             // originally inside its container
  std::vector<std::vector<std::size_t>> peers;  // same container, no containment
  std::vector<bool> interactive_class;  // Button or Image

  Layout(const Wireframe& w, const Thresholds& t) : wf(w), th(t) {
    density = wf.screen.density;
    screen = wf.screen.screen_dp();
    const std::size_t n = wf.components.size();
    container.resize(n);
    inside.resize(n);
    peers.resize(n);
    interactive_class.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = wf.components[i];
      container[i] = wf.container_of(c).bounds;
      inside[i] = contains_tol(container[i], c.bounds);
      interactive_class[i] = c.view_class == ViewClass::Button || c.view_class == ViewClass::Image;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || wf.components[i].container_id != wf.components[j].container_id) continue;
        const auto& a = wf.components[i].bounds;
        const auto& b = wf.components[j].bounds;
        if (a.contains(b) || b.contains(a)) continue;
        peers[i].push_back(j);
      }
    }
  }
};

struct Work {
  std::vector<Rect> px;
  std::vector<std::optional<Rgb>> color;
  std::vector<std::vector<ChangeNote>> bounds_notes;
  std::vector<std::vector<ChangeNote>> color_notes;
  std::vector<bool> primary;  // touched by a primary op
  std::vector<bool> co_adjusted;
  std::vector<UnfixableEntry> unfixable;
};

class Planner {
 public:
  Planner(const Layout& layout, const Calibration& cal, const std::vector<StableSignal>& signals,
          const std::vector<double>& first_samples, const FixOptions& opts)
      : L_(layout), cal_(cal), sig_(signals), first_(first_samples), opts_(opts) {}

  // level: 0 normal, 1 clamp targets to thresholds, 2 leave untouched.
  Work run(std::span<const Issue> issues, const std::map<std::string, int>& level,
           const std::set<std::string>& no_coadjust) const;

 private:
  Rect dp(const Work& w, std::size_t i) const { return px_to_dp(w.px[i], L_.density); }

  bool feasible(const Work& w, std::size_t i, const Rect& cand_px, const std::set<std::size_t>& skip = {}) const {
    const Rect c = px_to_dp(cand_px, L_.density);
    if (!contains_tol(L_.screen, c)) return false;
    if (L_.inside[i] && !contains_tol(L_.container[i], c)) return false;
    const Rect cur = dp(w, i);
    for (std::size_t j : L_.peers[i]) {
      if (skip.count(j)) continue;
      const Rect o = dp(w, j);
      const double required = std::min(L_.th.min_interval_dp, separation(cur, o));
      if (separation(c, o) < required - kTol) return false;
    }
    return true;
  }

  // Largest integer px shift in [0, limit] keeping i feasible.
  double room(const Work& w, std::size_t i, Axis axis, double dir, double limit) const {
    double lo = 0.0, hi = std::max(0.0, limit);
    while (lo < hi) {
      const double mid = std::floor((lo + hi + 1.0) / 2.0);
      if (feasible(w, i, shifted(w.px[i], axis, dir * mid))) lo = mid;
      else hi = mid - 1.0;
    }
    return lo;
  }

  void note(Work& w, std::size_t i, ChangeField f, ChangeNote n) const {
    (f == ChangeField::Bounds ? w.bounds_notes : w.color_notes)[i].push_back(std::move(n));
  }

  void unfixable(Work& w, const Issue& is, std::string reason) const {
    w.unfixable.push_back({is.component_id, is.kind, is.peer_id, std::move(reason)});
  }

  bool separate_pair(Work& w, std::size_t a, std::size_t b, Axis axis, const Target& target, const Issue& is) const;
  bool respace_chain(Work& w, const std::vector<std::size_t>& chain, Axis axis, const Target& target) const;
  void grow(Work& w, std::size_t i, const Target& target, const Issue& is) const;
  void recolor_component(Work& w, std::size_t i, bool clamp, const Issue& is) const;
  void co_adjust(Work& w, std::size_t i) const;

  const Layout& L_;
  const Calibration& cal_;
  const std::vector<StableSignal>& sig_;
  const std::vector<double>& first_;
  const FixOptions& opts_;
};

bool Planner::separate_pair(Work& w, std::size_t a, std::size_t b, Axis axis, const Target& target,
                            const Issue& is) const {
  Rect ra = dp(w, a), rb = dp(w, b);
  if (axis == Axis::X ? ra.x > rb.x : ra.y > rb.y) {
    std::swap(a, b);
    std::swap(ra, rb);
  }
  const double gap = facing_interval(ra, rb, axis);
  const double need = px_ceil((target.value - gap) * L_.density);
  if (need <= 0.0) return true;
  const double min_need = std::max(0.0, px_ceil((L_.th.min_interval_dp - gap) * L_.density));

  const double room_a = room(w, a, axis, -1.0, need);
  const double room_b = room(w, b, axis, +1.0, need);
  double da = std::min(std::ceil(need / 2.0), room_a);
  const double db = std::min(need - da, room_b);
  da = std::min(need - db, room_a);
  if (da + db < min_need) {
    unfixable(w, is, "not enough room in the container to widen the interval");
    return false;
  }
  w.px[a] = shifted(w.px[a], axis, -da);
  w.px[b] = shifted(w.px[b], axis, db);

  ChangeNote n{std::string(to_string(IssueKind::NarrowInterval)),
               std::abs(sig_[a].value - sig_[b].value),
               "f_interval",
               target.raw,
               target.value,
               target.clamps};
  if (da + db < need) n.clamps.push_back("room");
  note(w, a, ChangeField::Bounds, n);
  note(w, b, ChangeField::Bounds, n);
  w.primary[a] = w.primary[b] = true;
  return true;
}

bool Planner::respace_chain(Work& w, const std::vector<std::size_t>& chain, Axis axis, const Target& target) const {
  const std::set<std::size_t> members(chain.begin(), chain.end());
  auto layout = [&](double gap_px) {
    Work t = w;
    for (std::size_t m = 1; m < chain.size(); ++m) {
      const Rect& prev = t.px[chain[m - 1]];
      Rect r = t.px[chain[m]];
      if (axis == Axis::X) r.x = prev.right() + gap_px;
      else r.y = prev.bottom() + gap_px;
      t.px[chain[m]] = r;
    }
    return t;
  };
  auto ok = [&](double gap_px) {
    const Work t = layout(gap_px);
    for (std::size_t m = 1; m < chain.size(); ++m) {
      if (!feasible(w, chain[m], t.px[chain[m]], members)) return false;
    }
    return true;
  };

  const double lo_px = px_ceil(L_.th.min_interval_dp * L_.density);
  const double want_px = std::max(lo_px, px_ceil(target.value * L_.density));
  if (!ok(lo_px)) return false;
  double lo = lo_px, hi = want_px;
  while (lo < hi) {
    const double mid = std::floor((lo + hi + 1.0) / 2.0);
    if (ok(mid)) lo = mid;
    else hi = mid - 1.0;
  }
  Work t = layout(lo);
  w.px = std::move(t.px);

  for (std::size_t m = 0; m < chain.size(); ++m) {
    ChangeNote n{std::string(to_string(IssueKind::NarrowInterval)), sig_[chain[m]].value, "mean f_interval",
                 target.raw, target.value, target.clamps};
    if (lo < want_px) n.clamps.push_back("room");
    if (m > 0) note(w, chain[m], ChangeField::Bounds, n);
    w.primary[chain[m]] = true;
  }
  return true;
}

void Planner::grow(Work& w, std::size_t i, const Target& target, const Issue& is) const {
  const Rect cur = w.px[i];
  // Per axis: 0 grows about the center, 1 keeps the start edge, 2 keeps the
  // end edge.  Centered growth is preferred; the others help next to a
  // neighbor or a container edge.
  auto place = [&](double start, double len, double s, int anchor) {
    if (anchor == 1) return start;
    if (anchor == 2) return start + len - s;
    return start - std::floor((s - len) / 2.0);
  };
  auto at = [&](double s_px, int ax, int ay) {
    const double sw = std::max(cur.w, s_px), sh = std::max(cur.h, s_px);
    return Rect{place(cur.x, cur.w, sw, ax), place(cur.y, cur.h, sh, ay), sw, sh};
  };
  const double lo_px = px_ceil(L_.th.min_touch_dp * L_.density);
  const double want_px = std::max(lo_px, px_ceil(target.value * L_.density));
  constexpr std::array<std::pair<int, int>, 9> kAnchors{
      {{0, 0}, {1, 0}, {2, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 1}, {2, 2}}};
  double best = -1.0;
  Rect best_rect;
  for (const auto& [ax, ay] : kAnchors) {
    if (!feasible(w, i, at(lo_px, ax, ay))) continue;
    double lo = lo_px, hi = want_px;
    while (lo < hi) {
      const double mid = std::floor((lo + hi + 1.0) / 2.0);
      if (feasible(w, i, at(mid, ax, ay))) lo = mid;
      else hi = mid - 1.0;
    }
    if (lo > best) {
      best = lo;
      best_rect = at(lo, ax, ay);
    }
    if (best >= want_px) break;
  }
  if (best < 0.0) {
    unfixable(w, is, "container cannot admit a compliant size");
    return;
  }
  const double lo = best;
  w.px[i] = best_rect;
  ChangeNote n{std::string(to_string(IssueKind::SmallSize)), sig_[i].value, "f_size", target.raw, target.value,
               target.clamps};
  if (lo < want_px) n.clamps.push_back("room");
  note(w, i, ChangeField::Bounds, std::move(n));
  w.primary[i] = true;
}

void Planner::recolor_component(Work& w, std::size_t i, bool clamp, const Issue& is) const {
  const auto& c = L_.wf.components[i];
  if (c.view_class == ViewClass::Image) {
    unfixable(w, is, "rendered as an image; no adjustable text color");
    return;
  }
  if (!w.color[i]) {
    unfixable(w, is, "component color unknown");
    return;
  }
  const Rect r = dp(w, i);
  const bool is_text = c.view_class == ViewClass::Text;
  const double required = L_.th.contrast_threshold(c.view_class, r.h);
  Target target = target_contrast(sig_[i], cal_, L_.th, is_text, r.h);
  if (clamp) {
    target.value = required;
    target.clamps.push_back("validation");
  }
  const Rgb bg = L_.wf.background_color;
  const double best = max_contrast_against(bg);
  if (best < required) {
    unfixable(w, is, "background admits no compliant color");
    return;
  }
  if (target.value > best) {
    target.value = best;
    target.clamps.push_back("gamut");
  }
  const auto res = recolor(*w.color[i], bg, target.value, opts_.recolor_mode);
  if (!res.feasible) {
    unfixable(w, is, "background admits no compliant color");
    return;
  }
  w.color[i] = res.color;
  ChangeNote n{std::string(to_string(IssueKind::LowContrast)), sig_[i].value, "f_color", target.raw, target.value,
               target.clamps};
  if (res.out_of_gamut) n.clamps.push_back("out_of_gamut");
  note(w, i, ChangeField::Color, std::move(n));
  w.primary[i] = true;
}

void Planner::co_adjust(Work& w, std::size_t i) const {
  const double f0 = first_[i];
  const double shift = (sig_[i].value - f0) / std::max(std::abs(f0), 1e-9);
  if (!(std::abs(shift) > opts_.co_adjust_trigger)) return;
  const double delta = std::clamp(shift, -opts_.co_adjust_cap, opts_.co_adjust_cap);
  const auto& c = L_.wf.components[i];
  const auto& th = L_.th;
  ChangeNote base{"co-adjust", sig_[i].value, "relative signal shift", shift, delta, {}};
  if (delta != shift) base.clamps.push_back("cap");

  const Rect cur_px = w.px[i];
  const Rect cur = dp(w, i);
  const Rect cand_px = grown(cur_px, std::round(cur_px.w * (1.0 + delta)), std::round(cur_px.h * (1.0 + delta)));
  const Rect cand = px_to_dp(cand_px, L_.density);
  bool size_ok = feasible(w, i, cand_px);
  if (L_.interactive_class[i] && std::min(cur.w, cur.h) >= th.min_touch_dp - kTol &&
      std::min(cand.w, cand.h) < th.min_touch_dp - kTol) {
    size_ok = false;
  }
  if (size_ok && w.color[i]) {
    // A text height change may move the component to a stricter threshold.
    const double cr = contrast_ratio(*w.color[i], L_.wf.background_color);
    if (cr >= th.contrast_threshold(c.view_class, cur.h) && cr < th.contrast_threshold(c.view_class, cand.h)) {
      size_ok = false;
    }
  }
  if (size_ok) {
    w.px[i] = cand_px;
    note(w, i, ChangeField::Bounds, base);
    w.co_adjusted[i] = true;
  }

  if (!w.color[i] || c.view_class == ViewClass::Image) return;
  const Rgb bg = L_.wf.background_color;
  const double cr = contrast_ratio(*w.color[i], bg);
  const double required = th.contrast_threshold(c.view_class, dp(w, i).h);
  double target = std::min({cr * (1.0 + delta), 21.0, max_contrast_against(bg)});
  if (cr >= required) target = std::max(target, required);
  target = std::max(target, 1.0);
  const auto res = recolor(*w.color[i], bg, target, RecolorMode::Luminance);
  if (!res.feasible || res.color == *w.color[i]) return;
  if (cr >= required && res.achieved < required) return;
  w.color[i] = res.color;
  ChangeNote cn = base;
  cn.target = target;
  note(w, i, ChangeField::Color, std::move(cn));
  w.co_adjusted[i] = true;
}

// Narrow pairs of one container and axis that form a simple path of at
// least three components, ordered along the axis.
std::vector<std::pair<std::vector<std::size_t>, Axis>> find_chains(const Wireframe& wf,
                                                                     const std::vector<AdjacentPair>& narrow) {
  std::map<std::pair<std::string, int>, std::vector<const AdjacentPair*>> groups;
  for (const auto& p : narrow) {
    groups[{wf.components[p.a].container_id, static_cast<int>(p.axis)}].push_back(&p);
  }
  std::vector<std::pair<std::vector<std::size_t>, Axis>> out;
  for (const auto& [key, pairs] : groups) {
    std::map<std::size_t, std::vector<std::size_t>> adj;
    for (const auto* p : pairs) {
      adj[p->a].push_back(p->b);
      adj[p->b].push_back(p->a);
    }
    std::set<std::size_t> seen;
    for (const auto& [start, _] : adj) {
      if (seen.count(start)) continue;
      std::vector<std::size_t> comp;
      std::vector<std::size_t> stack{start};
      seen.insert(start);
      while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        comp.push_back(v);
        for (auto u : adj[v]) {
          if (seen.insert(u).second) stack.push_back(u);
        }
      }
      if (comp.size() < 3) continue;
      std::size_t edges = 0;
      bool path = true;
      for (auto v : comp) {
        edges += adj[v].size();
        if (adj[v].size() > 2) path = false;
      }
      if (!path || edges / 2 != comp.size() - 1) continue;
      const Axis axis = static_cast<Axis>(key.second);
      std::sort(comp.begin(), comp.end(), [&](std::size_t x, std::size_t y) {
        const auto& rx = wf.components[x].bounds;
        const auto& ry = wf.components[y].bounds;
        return axis == Axis::X ? std::tie(rx.x, x) < std::tie(ry.x, y) : std::tie(rx.y, x) < std::tie(ry.y, y);
      });
      bool consecutive = true;
      for (std::size_t m = 1; m < comp.size(); ++m) {
        const auto& nb = adj[comp[m - 1]];
        if (std::find(nb.begin(), nb.end(), comp[m]) == nb.end()) consecutive = false;
      }
      if (consecutive) out.emplace_back(std::move(comp), axis);
    }
  }
  return out;
}

Work Planner::run(std::span<const Issue> issues, const std::map<std::string, int>& level,
                  const std::set<std::string>& no_coadjust) const {
  const auto& wf = L_.wf;
  const std::size_t n = wf.components.size();
  Work w;
  for (const auto& c : wf.components) {
    w.px.push_back(c.bounds.scaled(L_.density));
    w.color.push_back(c.color);
  }
  w.bounds_notes.resize(n);
  w.color_notes.resize(n);
  w.primary.assign(n, false);
  w.co_adjusted.assign(n, false);

  auto level_of = [&](const std::string& id) {
    auto it = level.find(id);
    return it == level.end() ? 0 : it->second;
  };
  auto index = [&](const std::string& id) {
    auto i = wf.component_index(id);
    if (!i) throw Error("issue references unknown component '" + id + "'");
    return *i;
  };

  std::set<std::string> problem;
  for (const auto& is : issues) {
    problem.insert(is.component_id);
    if (is.peer_id) problem.insert(*is.peer_id);
  }

  // Intervals.
  const auto pairs = adjacent_pairs(wf);
  std::vector<AdjacentPair> narrow;
  std::vector<const Issue*> narrow_issue;
  for (const auto& is : issues) {
    if (is.kind != IssueKind::NarrowInterval || !is.peer_id) continue;
    const auto a = index(is.component_id), b = index(*is.peer_id);
    auto it = std::find_if(pairs.begin(), pairs.end(), [&](const AdjacentPair& p) {
      return (p.a == a && p.b == b) || (p.a == b && p.b == a);
    });
    if (it == pairs.end()) throw Error("interval issue between non-adjacent components " + is.component_id);
    narrow.push_back(*it);
    narrow_issue.push_back(&is);
  }
  std::set<std::size_t> done_pairs;
  for (const auto& [chain, axis] : find_chains(wf, narrow)) {
    bool blocked = false;
    bool clamp = false;
    for (auto c : chain) {
      const int lv = level_of(wf.components[c].id);
      blocked |= lv >= 2;
      clamp |= lv == 1;
    }
    if (blocked) continue;
    std::vector<StableSignal> ordered;
    for (auto c : chain) ordered.push_back(sig_[c]);
    Target t = mean_interval(ordered, cal_, L_.th);
    if (clamp) {
      t.value = L_.th.min_interval_dp;
      t.clamps.push_back("validation");
    }
    if (respace_chain(w, chain, axis, t)) {
      for (std::size_t k = 0; k < narrow.size(); ++k) {
        const bool in_chain = std::count(chain.begin(), chain.end(), narrow[k].a) &&
                              std::count(chain.begin(), chain.end(), narrow[k].b);
        if (in_chain) done_pairs.insert(k);
      }
    }
  }
  for (std::size_t k = 0; k < narrow.size(); ++k) {
    if (done_pairs.count(k)) continue;
    const auto& p = narrow[k];
    const Issue& is = *narrow_issue[k];
    const int lv = std::max(level_of(wf.components[p.a].id), level_of(wf.components[p.b].id));
    if (lv >= 2) {
      unfixable(w, is, "reverted by validation");
      continue;
    }
    Target t = target_interval(sig_[p.a], sig_[p.b], cal_, L_.th);
    if (lv == 1) {
      t.value = L_.th.min_interval_dp;
      t.clamps.push_back("validation");
    }
    separate_pair(w, p.a, p.b, p.axis, t, is);
  }

  // Sizes.
  for (const auto& is : issues) {
    if (is.kind != IssueKind::SmallSize) continue;
    const auto i = index(is.component_id);
    const int lv = level_of(is.component_id);
    if (lv >= 2) {
      unfixable(w, is, "reverted by validation");
      continue;
    }
    Target t = target_size(sig_[i], cal_, L_.th);
    if (lv == 1) {
      t.value = L_.th.min_touch_dp;
      t.clamps.push_back("validation");
    }
    grow(w, i, t, is);
  }

  // Contrast.
  for (const auto& is : issues) {
    if (is.kind != IssueKind::LowContrast) continue;
    const auto i = index(is.component_id);
    const int lv = level_of(is.component_id);
    if (lv >= 2) {
      unfixable(w, is, "reverted by validation");
      continue;
    }
    recolor_component(w, i, lv == 1, is);
  }

  // Co-adjustments of untouched components.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = wf.components[i].id;
    if (problem.count(id) || no_coadjust.count(id) || w.primary[i]) continue;
    co_adjust(w, i);
  }
  return w;
}

Patch to_patch(const Wireframe& wf, const Work& w, double density) {
  Patch p;
  for (std::size_t i = 0; i < wf.components.size(); ++i) {
    const auto& c = wf.components[i];
    const Rect old_px = c.bounds.scaled(density);
    if (!(w.px[i] == old_px)) {
      Change ch;
      ch.component_id = c.id;
      ch.field = ChangeField::Bounds;
      ch.old_bounds_px = old_px;
      ch.new_bounds_px = w.px[i];
      ch.old_bounds = c.bounds;
      ch.new_bounds = px_to_dp(w.px[i], density);
      ch.notes = w.bounds_notes[i];
      ch.minor = std::all_of(ch.notes.begin(), ch.notes.end(),
                             [](const ChangeNote& n) { return n.reason == "co-adjust"; });
      p.changes.push_back(std::move(ch));
    }
    if (c.color && w.color[i] && !(*c.color == *w.color[i])) {
      Change ch;
      ch.component_id = c.id;
      ch.field = ChangeField::Color;
      ch.old_color = *c.color;
      ch.new_color = *w.color[i];
      ch.notes = w.color_notes[i];
      ch.minor = std::all_of(ch.notes.begin(), ch.notes.end(),
                             [](const ChangeNote& n) { return n.reason == "co-adjust"; });
      p.changes.push_back(std::move(ch));
    }
  }
  p.unfixable = w.unfixable;
  std::sort(p.unfixable.begin(), p.unfixable.end(), [](const UnfixableEntry& a, const UnfixableEntry& b) {
    return std::tie(a.component_id, a.kind, a.peer_id) < std::tie(b.component_id, b.kind, b.peer_id);
  });
  p.unfixable.erase(std::unique(p.unfixable.begin(), p.unfixable.end(),
                                [](const UnfixableEntry& a, const UnfixableEntry& b) {
                                  return std::tie(a.component_id, a.kind, a.peer_id) ==
                                         std::tie(b.component_id, b.kind, b.peer_id);
                                }),
                    p.unfixable.end());
  return p;
}

}  // namespace

ViewTree apply_patch(const ViewTree& tree, const Patch& p) {
  ViewTree out = tree;
  for (const auto& ch : p.changes) {
    ViewNode* node = find_node(out.root, ch.component_id);
    if (!node) throw Error("patch references unknown component '" + ch.component_id + "'");
    if (ch.field == ChangeField::Bounds) set_bounds_px(*node, ch.new_bounds_px, out.screen.density);
    else node->color = ch.new_color;
  }
  return out;
}

FixPlan plan_fix(const Wireframe& wf, std::span<const Issue> issues, const TrainedModel& model,
                 const Calibration& cal, const Thresholds& th, const FixOptions& opts, const ViewTree* tree) {
  th.validate();
  FixPlan plan;
  if (issues.empty()) return plan;

  // Signals from the prediction loop on the graph without problem edges.
  const GuiGraph g = build_graph(wf);
  std::set<std::string> problem;
  for (const auto& is : issues) {
    problem.insert(is.component_id);
    if (is.peer_id) problem.insert(*is.peer_id);
  }
  for (const auto& id : problem) {
    if (!wf.component_index(id)) throw Error("issue references unknown component '" + id + "'");
  }
  const auto removal = remove_edges_for(g, problem);
  std::vector<std::string> ids;
  for (const auto& node : g.nodes) ids.push_back(node.id);
  std::vector<int> watched;
  for (std::size_t i = 0; i < g.component_count(); ++i) watched.push_back(static_cast<int>(i));
  SignalRecorder recorder(ids, opts.spectral, watched);
  PredictOptions popts = opts.predict;
  popts.seed = mix_seed(opts.seed, 0x9F);
  const auto prediction = predict_links(model, removal.graph, removal.removed, recorder, popts);
  plan.prediction_iterations = prediction.iterations;
  plan.prediction_converged = prediction.converged;

  std::vector<double> first;
  for (std::size_t i = 0; i < wf.components.size(); ++i) {
    const auto& t = recorder.trace(static_cast<int>(i));
    if (t.samples.size() < opts.spectral.window) {
      // Too few iterations for a window; treat the single pass as stable.
      StableSignal s{t.node_id, t.samples.empty() ? 0.0 : t.samples.back(), t.start_iteration, false};
      plan.signals.push_back(s);
    } else {
      plan.signals.push_back(recorder.signal(static_cast<int>(i)));
    }
    first.push_back(t.samples.empty() ? 0.0 : t.samples.front());
  }

  const Layout layout(wf, th);
  const Planner planner(layout, cal, plan.signals, first, opts);
  const ViewTree base_tree = tree ? *tree : to_view_tree(wf);
  std::set<std::tuple<std::string, IssueKind, std::optional<std::string>>> before;
  for (const auto& is : detect_issues(flatten(base_tree), th)) before.insert(is.key());

  std::map<std::string, int> level;
  std::set<std::string> no_coadjust;
  const std::size_t max_rounds = static_cast<std::size_t>(std::max(0, opts.validation_rounds));
  bool partial = false;
  for (std::size_t round = 1;; ++round) {
    Patch patch = to_patch(wf, planner.run(issues, level, no_coadjust), wf.screen.density);
    plan.validation_rounds_used = static_cast<int>(round);
    const auto after = detect_issues(flatten(apply_patch(base_tree, patch)), th);
    std::set<std::string> offenders;
    for (const auto& is : after) {
      if (before.count(is.key())) continue;
      offenders.insert(is.component_id);
      if (is.peer_id) offenders.insert(*is.peer_id);
    }
    if (offenders.empty()) {
      patch.partial = partial;
      if (!plan.prediction_converged) {
        patch.warnings.push_back("signals did not converge within " + std::to_string(prediction.iterations) +
                                 " iterations; using the final window");
      }
      plan.patch = std::move(patch);
      return plan;
    }

    const bool escalate_fully = round >= max_rounds;
    if (escalate_fully) partial = true;
    bool progress = false;
    auto changed = [&](const std::string& id, bool minor_only) {
      return std::any_of(patch.changes.begin(), patch.changes.end(), [&](const Change& c) {
        return c.component_id == id && (!minor_only || c.minor);
      });
    };
    for (const auto& id : offenders) {
      const bool has_co = changed(id, true) && !no_coadjust.count(id);
      if (has_co) {
        no_coadjust.insert(id);
        progress = true;
      }
      if (changed(id, false) && !has_co) {
        int& lv = level[id];
        const int next = escalate_fully ? 2 : lv + 1;
        if (next > lv && lv < 2) {
          lv = std::min(next, 2);
          progress = true;
        }
      }
    }
    if (!progress) {
      // Nothing attributable left to undo: emit no changes at all.
      Patch empty;
      empty.partial = true;
      for (const auto& is : issues) {
        empty.unfixable.push_back({is.component_id, is.kind, is.peer_id, "validation did not converge"});
      }
      empty.warnings.push_back("validation did not converge; all changes reverted");
      plan.patch = std::move(empty);
      return plan;
    }
  }
}

// --- Serialization -------------------------------------------------------

namespace {

using ojson = nlohmann::ordered_json;

ojson rect_json(const Rect& r) { return ojson::array({r.x, r.y, r.w, r.h}); }

Rect rect_from(const ojson& j) {
  if (!j.is_array() || j.size() != 4) throw ParseError("patch: bounds must be [x, y, w, h]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

std::string patch_to_json(const Patch& p) {
  ojson changes = ojson::array();
  for (const auto& c : p.changes) {
    ojson j;
    j["component_id"] = c.component_id;
    if (c.field == ChangeField::Bounds) {
      j["field"] = "bounds";
      j["old"] = rect_json(c.old_bounds);
      j["new"] = rect_json(c.new_bounds);
      j["old_px"] = rect_json(c.old_bounds_px);
      j["new_px"] = rect_json(c.new_bounds_px);
    } else {
      j["field"] = "color";
      j["old"] = to_hex(c.old_color);
      j["new"] = to_hex(c.new_color);
    }
    j["minor"] = c.minor;
    ojson notes = ojson::array();
    for (const auto& n : c.notes) {
      notes.push_back({{"reason", n.reason},
                       {"signal", n.signal},
                       {"curve", n.curve},
                       {"raw", n.raw},
                       {"target", n.target},
                       {"clamps", n.clamps}});
    }
    j["provenance"] = std::move(notes);
    changes.push_back(std::move(j));
  }
  ojson unfixable = ojson::array();
  for (const auto& u : p.unfixable) {
    ojson j;
    j["component_id"] = u.component_id;
    j["kind"] = to_string(u.kind);
    j["peer_id"] = u.peer_id ? ojson(*u.peer_id) : ojson(nullptr);
    j["reason"] = u.reason;
    unfixable.push_back(std::move(j));
  }
  ojson root;
  root["changes"] = std::move(changes);
  root["unfixable"] = std::move(unfixable);
  root["partial"] = p.partial;
  root["warnings"] = p.warnings;
  return root.dump(2) + "\n";
}

Patch patch_from_json(std::string_view text) {
  Patch p;
  try {
    const auto root = ojson::parse(text);
    for (const auto& j : root.at("changes")) {
      Change c;
      c.component_id = j.at("component_id").get<std::string>();
      const auto field = j.at("field").get<std::string>();
      if (field == "bounds") {
        c.field = ChangeField::Bounds;
        c.old_bounds = rect_from(j.at("old"));
        c.new_bounds = rect_from(j.at("new"));
        c.old_bounds_px = rect_from(j.at("old_px"));
        c.new_bounds_px = rect_from(j.at("new_px"));
      } else if (field == "color") {
        c.field = ChangeField::Color;
        c.old_color = parse_hex(j.at("old").get<std::string>());
        c.new_color = parse_hex(j.at("new").get<std::string>());
      } else {
        throw ParseError("patch: unknown field '" + field + "'");
      }
      c.minor = j.value("minor", false);
      for (const auto& n : j.value("provenance", ojson::array())) {
        c.notes.push_back({n.at("reason").get<std::string>(), n.at("signal").get<double>(),
                           n.at("curve").get<std::string>(), n.at("raw").get<double>(),
                           n.at("target").get<double>(), n.at("clamps").get<std::vector<std::string>>()});
      }
      p.changes.push_back(std::move(c));
    }
    for (const auto& j : root.value("unfixable", ojson::array())) {
      UnfixableEntry u;
      u.component_id = j.at("component_id").get<std::string>();
      u.kind = issue_kind_from_string(j.at("kind").get<std::string>());
      if (j.contains("peer_id") && !j["peer_id"].is_null()) u.peer_id = j["peer_id"].get<std::string>();
      u.reason = j.value("reason", "");
      p.unfixable.push_back(std::move(u));
    }
    p.partial = root.value("partial", false);
    p.warnings = root.value("warnings", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed patch: ") + e.what());
  }
  return p;
}

}  // namespace guifix
