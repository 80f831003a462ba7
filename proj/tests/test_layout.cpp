#include "doctest.h"
#include "support.hpp"

#include "instrsynth/layout.hpp"

#include <bit>
#include <cmath>
#include <set>

using namespace instrsynth;

namespace {

bool in(double v, double lo, double hi) { return v >= lo && v <= hi; }

// Areas of a plan keyed by the number of edge placements they received.
std::map<int, std::vector<std::vector<Placement>>> by_edge_count(int seeds, const ComponentBank& bank) {
  std::map<int, std::vector<std::vector<Placement>>> out;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(derive_seed(99, static_cast<std::uint64_t>(s)));
    EffectiveArea area;
    area.rect = {20, 30, 500, 400};
    const auto ps = plan_components(rng, area, 0, bank);
    int edges = 0;
    for (const auto& p : ps) edges += p.role == Role::edge;
    out[edges].push_back(ps);
  }
  return out;
}

}  // namespace

TEST_CASE("area_dims rounds the scaled page size") {
  CHECK(area_dims(0.8, 0.5, 2339, 1654) == std::pair{1871, 827});
  CHECK(area_dims(1.0, 1.0, 1166, 1654) == std::pair{1166, 1654});
  CHECK(area_dims(1.0, 1.0, 2339, 1654) == std::pair{2339, 1654});
  CHECK(area_dims(0.5, 1.0 / 3.0, 1166, 1654) == std::pair{583, 551});
}

TEST_CASE("effective areas follow the sampling rules") {
  std::set<std::string> tags;
  for (int s = 0; s < 2000; ++s) {
    Rng rng(static_cast<std::uint64_t>(s));
    const auto areas = sample_effective_areas(rng, 1166, 1654);
    REQUIRE((areas.size() == 1 || areas.size() == 2));
    for (const auto& a : areas) {
      tags.insert(std::string(to_string(a.arrangement)));
      CHECK(a.rect.x >= 0);
      CHECK(a.rect.y >= 0);
      CHECK(a.rect.right() <= 1166);
      CHECK(a.rect.bottom() <= 1654);
      CHECK(a.rect.w == std::lround(a.alpha * 1166));
      CHECK(a.rect.h == std::lround(a.beta * 1654));
      switch (a.arrangement) {
        case Arrangement::top:
        case Arrangement::bottom:
          CHECK(in(a.alpha, 0.7, 0.9));
          CHECK(in(a.beta, 0.4, 0.6));
          break;
        case Arrangement::middle:
          CHECK(in(a.alpha, 0.7, 0.9));
          CHECK(in(a.beta, 0.6, 0.8));
          break;
        case Arrangement::horizontal_left:
        case Arrangement::horizontal_right:
          CHECK(a.alpha == 0.5);
          CHECK(in(a.beta, 0.7, 0.9));
          break;
        case Arrangement::vertical:
          CHECK(in(a.alpha, 0.7, 0.9));
          CHECK((a.beta == 1.0 / 3 || a.beta == 0.5 || a.beta == 2.0 / 3));
          break;
      }
    }
    if (areas.size() == 2) {
      CHECK(areas[0].arrangement != Arrangement::top);
      CHECK_FALSE(overlaps(areas[0].rect, areas[1].rect));
      if (areas[0].arrangement == Arrangement::vertical) CHECK(areas[0].beta + areas[1].beta <= 1.0 + 1e-12);
    }
    if (areas.size() == 1 && areas[0].arrangement == Arrangement::top) CHECK(areas[0].rect.y == std::lround(0.02 * 1654));
    if (areas.size() == 1 && areas[0].arrangement == Arrangement::bottom)
      CHECK(areas[0].rect.bottom() == 1654 - std::lround(0.02 * 1654));
  }
  CHECK(tags.size() == 6);
}

TEST_CASE("effective areas on odd page sizes stay disjoint and inside") {
  for (int s = 0; s < 500; ++s) {
    Rng rng(static_cast<std::uint64_t>(s));
    const auto areas = sample_effective_areas(rng, 1001, 1333);
    for (const auto& a : areas) CHECK(contains(BoxI{0, 0, 1001, 1333}, a.rect));
    if (areas.size() == 2) CHECK_FALSE(overlaps(areas[0].rect, areas[1].rect));
  }
}

TEST_CASE("two edge components: stage number top-left, group bottom-right") {
  const auto groups = by_edge_count(300, testing::fixture_bank());
  REQUIRE(groups.count(2));
  for (const auto& ps : groups.at(2)) {
    std::map<SideSet, Category> edges;
    for (const auto& p : ps)
      if (p.role == Role::edge) edges[p.touched] = p.category;
    CHECK(edges.size() == 2);
    CHECK(edges[kTop | kLeft] == Category::stage_number);
    CHECK(edges[kBottom | kRight] == Category::assembly_group);
  }
}

TEST_CASE("three edge components: one more corner and one single side") {
  const auto groups = by_edge_count(300, testing::fixture_bank());
  REQUIRE(groups.count(3));
  std::set<SideSet> corners_seen;
  for (const auto& ps : groups.at(3)) {
    int corners = 0, singles = 0, groups_n = 0, bubbles = 0;
    for (const auto& p : ps) {
      if (p.role != Role::edge) continue;
      const int n = std::popcount(p.touched);
      if (n == 2) {
        ++corners;
        if (p.touched != (kTop | kLeft)) corners_seen.insert(p.touched);
      }
      singles += n == 1;
      groups_n += p.category == Category::assembly_group;
      bubbles += p.category == Category::speech_bubble;
    }
    CHECK(corners == 2);
    CHECK(singles == 1);
    CHECK(groups_n == 1);
    CHECK(bubbles >= 1);
  }
  CHECK(corners_seen.size() == 3);
}

TEST_CASE("four edge components fill all corners") {
  const auto groups = by_edge_count(300, testing::fixture_bank());
  REQUIRE(groups.count(4));
  for (const auto& ps : groups.at(4)) {
    std::map<Category, int> cats;
    std::set<SideSet> sides;
    for (const auto& p : ps) {
      if (p.role != Role::edge) continue;
      ++cats[p.category];
      sides.insert(p.touched);
    }
    CHECK(sides == std::set<SideSet>{kTop | kLeft, kTop | kRight, kBottom | kLeft, kBottom | kRight});
    CHECK(cats[Category::stage_number] == 1);
    CHECK(cats[Category::assembly_group] == 1);
    CHECK(cats[Category::speech_bubble] == 2);
  }
  CHECK(groups.size() == 3);
}

TEST_CASE("center bubbles: zero to two, strictly inside") {
  std::set<int> seen;
  for (int s = 0; s < 300; ++s) {
    Rng rng(static_cast<std::uint64_t>(s));
    EffectiveArea area;
    area.rect = {0, 0, 800, 600};
    int centers = 0;
    for (const auto& p : plan_components(rng, area, 0, testing::fixture_bank())) {
      if (p.role != Role::center) continue;
      ++centers;
      CHECK(p.category == Category::speech_bubble);
      CHECK(p.touched == 0);
      CHECK(p.target.x > area.rect.x);
      CHECK(p.target.y > area.rect.y);
      CHECK(p.target.right() < area.rect.right());
      CHECK(p.target.bottom() < area.rect.bottom());
    }
    seen.insert(centers);
  }
  CHECK(seen == std::set<int>{0, 1, 2});
}

TEST_CASE("bank lacking a required category is rejected") {
  const ComponentBank& full = testing::fixture_bank();
  for (Category missing : {Category::stage_number, Category::assembly_group, Category::speech_bubble}) {
    std::vector<ComponentPatch> kept;
    for (const auto& p : full.patches())
      if (p.category != missing) kept.push_back(p);
    const ComponentBank bank(kept);
    Rng rng(1);
    EffectiveArea area;
    area.rect = {0, 0, 800, 600};
    CHECK_THROWS_AS(plan_components(rng, area, 0, bank), DataError);
  }
}

TEST_CASE("same seed, same plan") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng a(s), b(s);
    const LayoutPlan pa = plan_page(a, 1166, 1654, testing::fixture_bank());
    const LayoutPlan pb = plan_page(b, 1166, 1654, testing::fixture_bank());
    CHECK(pa.to_json() == pb.to_json());
    CHECK(pa.hash() == pb.hash());
  }
  Rng a(1), b(2);
  CHECK(plan_page(a, 1166, 1654, testing::fixture_bank()).hash() !=
        plan_page(b, 1166, 1654, testing::fixture_bank()).hash());
}

TEST_CASE("generated plans pass the validator") {
  for (std::uint64_t s = 0; s < 500; ++s) {
    Rng rng(s);
    const LayoutPlan plan = plan_page(rng, 1166, 1654, testing::fixture_bank());
    const auto errors = validate_plan(plan);
    CAPTURE(s);
    CHECK(errors.empty());
  }
}

TEST_CASE("small banks and pages force the downscale path") {
  // Components larger than the cap get shrunk; plans stay valid.
  const ComponentBank bank = testing::tiny_bank(300);
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(s);
    const LayoutPlan plan = plan_page(rng, 400, 500, bank);
    CHECK(validate_plan(plan).empty());
    for (const auto& p : plan.placements) CHECK(p.scale < 1.0);
  }
}

TEST_CASE("validator catches broken plans") {
  Rng rng(4);
  const LayoutPlan good = plan_page(rng, 1166, 1654, testing::fixture_bank());
  REQUIRE(validate_plan(good).empty());

  auto stage_index = [&] {
    for (std::size_t i = 0; i < good.placements.size(); ++i)
      if (good.placements[i].category == Category::stage_number) return i;
    return std::size_t{0};
  }();

  LayoutPlan moved = good;
  moved.placements[stage_index].target.x += 1;  // no longer touches the left side
  CHECK_FALSE(validate_plan(moved).empty());

  LayoutPlan relabeled = good;
  relabeled.placements[stage_index].category = Category::speech_bubble;
  CHECK_FALSE(validate_plan(relabeled).empty());

  LayoutPlan doubled = good;
  doubled.placements.push_back(good.placements[stage_index]);
  CHECK_FALSE(validate_plan(doubled).empty());

  LayoutPlan outside = good;
  outside.placements[0].target.x -= 5;
  CHECK_FALSE(validate_plan(outside).empty());

  LayoutPlan none = good;
  none.areas.clear();
  none.placements.clear();
  CHECK_FALSE(validate_plan(none).empty());
}

TEST_CASE("touched_sides from coordinates") {
  const BoxI area{10, 10, 100, 50};
  CHECK(touched_sides({10, 10, 5, 5}, area) == (kTop | kLeft));
  CHECK(touched_sides({105, 55, 5, 5}, area) == (kBottom | kRight));
  CHECK(touched_sides({50, 10, 5, 5}, area) == kTop);
  CHECK(touched_sides({50, 30, 5, 5}, area) == 0u);
}
