#include "instrsynth/layout.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <iomanip>
#include <optional>
#include <sstream>

namespace instrsynth {

using nlohmann::json;

std::string_view to_string(Arrangement a) {
  switch (a) {
    case Arrangement::top: return "top";
    case Arrangement::middle: return "middle";
    case Arrangement::bottom: return "bottom";
    case Arrangement::horizontal_left: return "horizontal_left";
    case Arrangement::horizontal_right: return "horizontal_right";
    case Arrangement::vertical: return "vertical";
  }
  return "unknown";
}

std::string EffectiveArea::tag() const {
  std::string t(to_string(arrangement));
  if (arrangement == Arrangement::vertical) t += "_" + std::to_string(stack_index);
  return t;
}

std::string sides_to_string(SideSet s) {
  std::string out;
  const std::pair<Side, const char*> names[] = {{kLeft, "left"}, {kRight, "right"}, {kTop, "top"}, {kBottom, "bottom"}};
  for (const auto& [side, name] : names) {
    if (!(s & side)) continue;
    if (!out.empty()) out += "|";
    out += name;
  }
  return out.empty() ? "none" : out;
}

std::pair<int, int> area_dims(double alpha, double beta, int page_w, int page_h) {
  return {static_cast<int>(std::lround(alpha * page_w)), static_cast<int>(std::lround(beta * page_h))};
}

std::vector<EffectiveArea> sample_effective_areas(Rng& rng, int page_w, int page_h, const LayoutOptions& opts) {
  std::vector<EffectiveArea> areas;
  const int n_areas = 1 + static_cast<int>(rng.index(2));
  const int margin = static_cast<int>(std::lround(opts.margin * page_h));

  if (n_areas == 1) {
    constexpr Arrangement kSingle[] = {Arrangement::top, Arrangement::middle, Arrangement::bottom};
    EffectiveArea a;
    a.arrangement = kSingle[rng.index(3)];
    a.alpha = rng.uniform(0.7, 0.9);
    a.beta = a.arrangement == Arrangement::middle ? rng.uniform(0.6, 0.8) : rng.uniform(0.4, 0.6);
    const auto [w, h] = area_dims(a.alpha, a.beta, page_w, page_h);
    int y = (page_h - h) / 2;
    if (a.arrangement == Arrangement::top) y = margin;
    if (a.arrangement == Arrangement::bottom) y = page_h - margin - h;
    a.rect = {(page_w - w) / 2, std::clamp(y, 0, page_h - h), w, h};
    areas.push_back(a);
    return areas;
  }

  if (rng.index(2) == 0) {
    // Side by side, each centred in its half of the page.
    const int half = page_w / 2;
    for (int i = 0; i < 2; ++i) {
      EffectiveArea a;
      a.arrangement = i == 0 ? Arrangement::horizontal_left : Arrangement::horizontal_right;
      a.alpha = 0.5;
      a.beta = rng.uniform(0.7, 0.9);
      auto [w, h] = area_dims(a.alpha, a.beta, page_w, page_h);
      w = std::min(w, half);  // odd page widths
      const int x = i == 0 ? (half - w) / 2 : half + (page_w - half - w) / 2;
      a.rect = {x, (page_h - h) / 2, w, h};
      areas.push_back(a);
    }
    return areas;
  }

  // Stacked: β in sixths {2, 3, 4} so the Σβ ≤ 1 test is exact.
  areas.resize(2);
  for (int i = 0; i < 2; ++i) {
    areas[i].arrangement = Arrangement::vertical;
    areas[i].stack_index = i;
    areas[i].alpha = rng.uniform(0.7, 0.9);
  }
  int k0 = 0, k1 = 0;
  do {
    k0 = 2 + static_cast<int>(rng.index(3));
    k1 = 2 + static_cast<int>(rng.index(3));
  } while (k0 + k1 > 6);
  areas[0].beta = k0 / 6.0;
  areas[1].beta = k1 / 6.0;
  auto [w0, h0] = area_dims(areas[0].alpha, areas[0].beta, page_w, page_h);
  auto [w1, h1] = area_dims(areas[1].alpha, areas[1].beta, page_w, page_h);
  if (h0 + h1 > page_h) h1 -= h0 + h1 - page_h;  // two halves of an odd height
  const int gap = (page_h - h0 - h1) / 3;
  areas[0].rect = {(page_w - w0) / 2, gap, w0, h0};
  areas[1].rect = {(page_w - w1) / 2, gap + h0 + gap, w1, h1};
  return areas;
}

SideSet touched_sides(const BoxI& target, const BoxI& area) {
  SideSet s = 0;
  if (target.x == area.x) s |= kLeft;
  if (target.right() == area.right()) s |= kRight;
  if (target.y == area.y) s |= kTop;
  if (target.bottom() == area.bottom()) s |= kBottom;
  return s;
}

namespace {

struct Sized {
  int w = 0;
  int h = 0;
  double scale = 1.0;
};

Sized fit(const ComponentPatch& patch, const BoxI& area, const LayoutOptions& opts, double shrink) {
  const int cap_w = std::max(1, static_cast<int>(std::floor(opts.scale_cap * area.w)));
  const int cap_h = std::max(1, static_cast<int>(std::floor(opts.scale_cap * area.h)));
  const double s =
      std::min({1.0, static_cast<double>(cap_w) / patch.native_w, static_cast<double>(cap_h) / patch.native_h}) *
      shrink;
  return {std::clamp(static_cast<int>(std::lround(patch.native_w * s)), 1, cap_w),
          std::clamp(static_cast<int>(std::lround(patch.native_h * s)), 1, cap_h), s};
}

bool clear_of(const BoxI& box, const std::vector<Placement>& placed) {
  return std::none_of(placed.begin(), placed.end(), [&](const Placement& p) { return overlaps(box, p.target); });
}

// Candidate position for a component of size (w, h) against the requested
// sides. Corners are fixed; a single side or the interior is sampled.
std::optional<BoxI> propose(Rng& rng, const BoxI& a, SideSet sides, int w, int h) {
  auto free_range = [&rng](int lo, int hi) -> std::optional<int> {
    if (hi < lo) return std::nullopt;
    return rng.between(lo, hi);
  };
  std::optional<int> x, y;
  if (sides & kLeft)
    x = a.x;
  else if (sides & kRight)
    x = a.right() - w;
  else
    x = free_range(a.x + 1, a.right() - w - 1);
  if (sides & kTop)
    y = a.y;
  else if (sides & kBottom)
    y = a.bottom() - h;
  else
    y = free_range(a.y + 1, a.bottom() - h - 1);
  if (!x || !y) return std::nullopt;
  return BoxI{*x, *y, w, h};
}

bool is_fixed(SideSet sides) {
  const bool horizontal = sides & (kLeft | kRight);
  const bool vertical = sides & (kTop | kBottom);
  return horizontal && vertical;
}

struct Slot {
  SideSet sides = 0;
  Category category = Category::speech_bubble;
};

std::optional<Placement> place(Rng& rng, const EffectiveArea& area, int area_index, const ComponentBank& bank,
                               std::size_t component, SideSet sides, bool mandatory,
                               const std::vector<Placement>& placed, const LayoutOptions& opts) {
  const ComponentPatch& patch = bank.at(component);
  const int rounds = mandatory ? opts.mandatory_retries + 1 : 1;
  double shrink = 1.0;
  for (int round = 0; round < rounds; ++round, shrink *= opts.retry_shrink) {
    const Sized size = fit(patch, area.rect, opts, shrink);
    const int tries = is_fixed(sides) ? 1 : std::max(1, opts.attempts);
    for (int t = 0; t < tries; ++t) {
      const auto target = propose(rng, area.rect, sides, size.w, size.h);
      if (!target || !clear_of(*target, placed)) continue;
      if (touched_sides(*target, area.rect) != sides) continue;
      return Placement{component, patch.category, sides == 0 ? Role::center : Role::edge, *target, sides,
                       area_index, size.scale};
    }
  }
  return std::nullopt;
}

std::size_t choose(Rng& rng, const ComponentBank& bank, Category c) {
  const auto& ids = bank.of(c);
  return ids[rng.index(ids.size())];
}

}  // namespace

std::vector<Placement> plan_components(Rng& rng, const EffectiveArea& area, int area_index, const ComponentBank& bank,
                                       const LayoutOptions& opts) {
  for (Category c : {Category::stage_number, Category::assembly_group, Category::speech_bubble})
    if (bank.of(c).empty()) throw DataError("component bank has no " + std::string(to_string(c)) + " patches");

  constexpr SideSet kTopLeft = kTop | kLeft, kTopRight = kTop | kRight;
  constexpr SideSet kBottomLeft = kBottom | kLeft, kBottomRight = kBottom | kRight;

  std::vector<Slot> slots{{kTopLeft, Category::stage_number}};
  const int n_edge = 2 + static_cast<int>(rng.index(3));
  if (n_edge == 2) {
    slots.push_back({kBottomRight});
  } else if (n_edge == 3) {
    constexpr SideSet kOthers[] = {kTopRight, kBottomLeft, kBottomRight};
    const SideSet corner = kOthers[rng.index(3)];
    slots.push_back({corner});
    // The single-side slot prefers a side no corner already shares.
    std::vector<SideSet> open;
    for (Side s : {kLeft, kRight, kTop, kBottom})
      if (!((kTopLeft | corner) & s)) open.push_back(s);
    if (open.empty()) open = {kLeft, kRight, kTop, kBottom};
    slots.push_back({open[rng.index(open.size())]});
  } else {
    slots.push_back({kTopRight});
    slots.push_back({kBottomLeft});
    slots.push_back({kBottomRight});
  }
  slots[1 + rng.index(slots.size() - 1)].category = Category::assembly_group;

  std::vector<Placement> placed;
  for (const Slot& slot : slots) {
    const std::size_t component = choose(rng, bank, slot.category);
    const bool mandatory = slot.category != Category::speech_bubble;
    auto p = place(rng, area, area_index, bank, component, slot.sides, mandatory, placed, opts);
    if (p)
      placed.push_back(*p);
    else if (mandatory)
      throw DataError("cannot fit the " + std::string(to_string(slot.category)) + " in area " +
                      std::to_string(area_index) + "; layout options are too tight");
  }

  const int n_center = static_cast<int>(rng.index(3));
  for (int i = 0; i < n_center; ++i) {
    const std::size_t component = choose(rng, bank, Category::speech_bubble);
    if (auto p = place(rng, area, area_index, bank, component, 0, false, placed, opts)) placed.push_back(*p);
  }
  return placed;
}

LayoutPlan plan_page(Rng& rng, int page_w, int page_h, const ComponentBank& bank, const LayoutOptions& opts) {
  LayoutPlan plan;
  plan.page_w = page_w;
  plan.page_h = page_h;
  plan.areas = sample_effective_areas(rng, page_w, page_h, opts);
  for (std::size_t i = 0; i < plan.areas.size(); ++i) {
    auto placements = plan_components(rng, plan.areas[i], static_cast<int>(i), bank, opts);
    plan.placements.insert(plan.placements.end(), placements.begin(), placements.end());
  }
  return plan;
}

std::vector<std::string> validate_plan(const LayoutPlan& plan) {
  std::vector<std::string> errors;
  const BoxI page{0, 0, plan.page_w, plan.page_h};
  if (plan.areas.empty() || plan.areas.size() > 2)
    errors.push_back("plan has " + std::to_string(plan.areas.size()) + " effective areas");
  for (std::size_t i = 0; i < plan.areas.size(); ++i) {
    const BoxI& r = plan.areas[i].rect;
    if (r.w <= 0 || r.h <= 0 || !contains(page, r)) errors.push_back("area " + std::to_string(i) + " outside page");
  }
  for (std::size_t i = 0; i < plan.areas.size(); ++i) {
    for (std::size_t j = i + 1; j < plan.areas.size(); ++j)
      if (overlaps(plan.areas[i].rect, plan.areas[j].rect)) errors.push_back("areas overlap");
  }

  struct Tally {
    int stage = 0, group = 0, edges = 0;
    bool corner_is_stage = false;
  };
  std::vector<Tally> tally(plan.areas.size());
  for (std::size_t k = 0; k < plan.placements.size(); ++k) {
    const Placement& p = plan.placements[k];
    const std::string who = "placement " + std::to_string(k);
    if (p.area_index < 0 || static_cast<std::size_t>(p.area_index) >= plan.areas.size()) {
      errors.push_back(who + " refers to a missing area");
      continue;
    }
    const BoxI& a = plan.areas[static_cast<std::size_t>(p.area_index)].rect;
    Tally& t = tally[static_cast<std::size_t>(p.area_index)];
    if (p.target.w <= 0 || p.target.h <= 0) errors.push_back(who + " has an empty target");
    if (!contains(a, p.target)) errors.push_back(who + " leaves its area");
    const SideSet derived = touched_sides(p.target, a);
    if (derived != p.touched)
      errors.push_back(who + " records sides " + sides_to_string(p.touched) + " but touches " +
                       sides_to_string(derived));
    const int n_sides = std::popcount(derived);
    if (p.role == Role::edge && (n_sides < 1 || n_sides > 2))
      errors.push_back(who + " is an edge component touching " + std::to_string(n_sides) + " sides");
    if (p.role == Role::center && n_sides != 0) errors.push_back(who + " is a center component touching a side");
    if (p.role == Role::edge) ++t.edges;
    if (p.category == Category::stage_number) ++t.stage;
    if (p.category == Category::assembly_group) ++t.group;
    if (derived == (kTop | kLeft) && p.category == Category::stage_number) t.corner_is_stage = true;
    if (derived == (kTop | kLeft) && p.category != Category::stage_number)
      errors.push_back(who + " occupies the top-left corner but is " + std::string(to_string(p.category)));
  }
  for (std::size_t i = 0; i < tally.size(); ++i) {
    const std::string who = "area " + std::to_string(i);
    if (tally[i].stage != 1) errors.push_back(who + " has " + std::to_string(tally[i].stage) + " stage numbers");
    if (tally[i].group != 1) errors.push_back(who + " has " + std::to_string(tally[i].group) + " assembly groups");
    if (tally[i].edges < 2 || tally[i].edges > 4)
      errors.push_back(who + " has " + std::to_string(tally[i].edges) + " edge components");
    if (!tally[i].corner_is_stage) errors.push_back(who + " has no stage number in the top-left corner");
  }
  for (std::size_t i = 0; i < plan.placements.size(); ++i)
    for (std::size_t j = i + 1; j < plan.placements.size(); ++j)
      if (overlaps(plan.placements[i].target, plan.placements[j].target))
        errors.push_back("placements " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
  return errors;
}

std::string LayoutPlan::to_json() const {
  json areas_j = json::array();
  for (const auto& a : areas)
    areas_j.push_back({{"rect", {a.rect.x, a.rect.y, a.rect.w, a.rect.h}},
                       {"arrangement", a.tag()},
                       {"alpha", a.alpha},
                       {"beta", a.beta}});
  json placements_j = json::array();
  for (const auto& p : placements) {
    json sides = json::array();
    for (const auto& [side, name] : {std::pair{kLeft, "left"}, {kRight, "right"}, {kTop, "top"}, {kBottom, "bottom"}})
      if (p.touched & side) sides.push_back(name);
    placements_j.push_back({{"component", p.component},
                            {"category", std::string(to_string(p.category))},
                            {"role", p.role == Role::edge ? "edge" : "center"},
                            {"target", {p.target.x, p.target.y, p.target.w, p.target.h}},
                            {"touched", std::move(sides)},
                            {"area", p.area_index},
                            {"scale", p.scale}});
  }
  json doc = {{"page_w", page_w}, {"page_h", page_h}, {"areas", std::move(areas_j)}, {"placements", std::move(placements_j)}};
  return doc.dump(2) + "\n";
}

std::string LayoutPlan::hash() const {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(to_json());
  return os.str();
}

}  // namespace instrsynth
