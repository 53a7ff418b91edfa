#include <algorithm>
#include <array>
#include <cmath>

#include "guifix/detect.hpp"
#include "guifix/error.hpp"
#include "guifix/fix.hpp"

namespace guifix {

namespace {

constexpr std::array<double, 3> kWeights{0.2126, 0.7152, 0.0722};
constexpr std::array<double, 3> kLiteralWeights{0.2126, 0.7125, 0.0722};

double linearize(int c) {
  const double s = c / 255.0;
  return s <= 0.03928 ? s / 12.92 : std::pow((s + 0.055) / 1.055, 2.4);
}

int delinearize(double lin) {
  lin = std::clamp(lin, 0.0, 1.0);
  const double s = lin <= 0.03928 / 12.92 ? lin * 12.92 : 1.055 * std::pow(lin, 1.0 / 2.4) - 0.055;
  return std::clamp(static_cast<int>(std::lround(s * 255.0)), 0, 255);
}

using Linear = std::array<double, 3>;

Linear to_linear(Rgb c) { return {linearize(c.r), linearize(c.g), linearize(c.b)}; }
Rgb from_linear(const Linear& l) { return {delinearize(l[0]), delinearize(l[1]), delinearize(l[2])}; }

double luminance(const Linear& l) { return kWeights[0] * l[0] + kWeights[1] * l[1] + kWeights[2] * l[2]; }

// Linear color with luminance `target`, keeping the hue of `base` where the
// gamut allows and blending toward white (or using gray) otherwise.
Linear hit_luminance(const Linear& base, double target) {
  const double current = luminance(base);
  if (current <= 0.0) return {target, target, target};
  Linear out;
  const double s = target / current;
  for (std::size_t k = 0; k < 3; ++k) out[k] = std::min(1.0, base[k] * s);
  const double clipped = luminance(out);
  if (clipped < target && clipped < 1.0) {
    // Luminance is linear along the blend, so the blend factor is exact.
    const double t = (target - clipped) / (1.0 - clipped);
    for (auto& v : out) v = (1.0 - t) * v + t;
  }
  return out;
}

}  // namespace

std::string_view to_string(RecolorMode m) { return m == RecolorMode::Luminance ? "luminance" : "per_channel"; }

RecolorMode recolor_mode_from_string(std::string_view s) {
  if (s == "luminance") return RecolorMode::Luminance;
  if (s == "per_channel") return RecolorMode::PerChannel;
  throw Error("unknown recolor mode '" + std::string(s) + "' (expected luminance or per_channel)");
}

double max_contrast_against(Rgb bg) {
  return std::max(contrast_ratio({0, 0, 0}, bg), contrast_ratio({255, 255, 255}, bg));
}

RecolorResult recolor(Rgb fg, Rgb bg, double cr, RecolorMode mode) {
  if (!(cr >= 1.0 && cr <= 21.0)) throw Error("target contrast must lie in [1, 21]");
  if (!fg.valid() || !bg.valid()) throw Error("color channel outside [0, 255]");

  RecolorResult res;
  res.max_achievable = max_contrast_against(bg);
  const double l_bg = relative_luminance(bg);

  if (mode == RecolorMode::PerChannel) {
    Linear lin;
    for (std::size_t k = 0; k < 3; ++k) {
      lin[k] = (l_bg + 0.05) / (cr * kLiteralWeights[k]);
      if (lin[k] > 1.0 || lin[k] < 0.0) res.out_of_gamut = true;
    }
    res.color = from_linear(lin);
    res.achieved = contrast_ratio(res.color, bg);
    res.feasible = res.max_achievable >= cr;
    return res;
  }

  const double current = contrast_ratio(fg, bg);
  if (current >= cr && current - cr <= 0.2) {
    res.color = fg;
    res.achieved = current;
    return res;
  }

  const double l_dark = (l_bg + 0.05) / cr - 0.05;
  const double l_light = cr * (l_bg + 0.05) - 0.05;
  const bool dark_ok = l_dark >= 0.0;
  const bool light_ok = l_light <= 1.0;
  if (!dark_ok && !light_ok) {
    res.color = fg;
    res.feasible = false;
    res.achieved = current;
    return res;
  }
  const Linear base = to_linear(fg);
  const bool prefer_dark = luminance(base) <= l_bg;
  const bool dark = prefer_dark ? dark_ok : !light_ok;

  Linear lin = hit_luminance(base, dark ? l_dark : l_light);
  res.color = from_linear(lin);
  res.achieved = contrast_ratio(res.color, bg);
  // Rounding to 8 bits can land just short of the target; push further
  // from the background in small linear steps until it is reached.
  for (int step = 1; res.achieved < cr && step <= 2000; ++step) {
    const double f = step * 5e-4;
    const double target = dark ? l_dark * (1.0 - f) : l_light + f * (1.0 - l_light);
    lin = hit_luminance(base, target);
    res.color = from_linear(lin);
    res.achieved = contrast_ratio(res.color, bg);
  }
  if (res.achieved < cr) {
    res.color = dark ? Rgb{0, 0, 0} : Rgb{255, 255, 255};
    res.achieved = contrast_ratio(res.color, bg);
  }
  return res;
}

}  // namespace guifix
