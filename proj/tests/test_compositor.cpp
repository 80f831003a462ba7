#include "doctest.h"
#include "oracle.hpp"
#include "support.hpp"

#include "instrsynth/compositor.hpp"
#include "instrsynth/png_io.hpp"

#include <array>
#include <json.hpp>

using namespace instrsynth;
using testing::TempDir;

namespace {

LayoutPlan bare_plan(int w, int h) {
  LayoutPlan plan;
  plan.page_w = w;
  plan.page_h = h;
  return plan;
}

Placement at(std::size_t component, Category c, BoxI target) {
  Placement p;
  p.component = component;
  p.category = c;
  p.target = target;
  return p;
}

std::array<long, 256> histogram(const Image& img, const Mask* mask = nullptr) {
  std::array<long, 256> h{};
  for (Eigen::Index r = 0; r < img.rows(); ++r)
    for (Eigen::Index c = 0; c < img.cols(); ++c)
      if (!mask || (*mask)(r, c)) ++h[img(r, c)];
  return h;
}

}  // namespace

TEST_CASE("empty plan renders a white page with no annotations") {
  const SynthPage page = render(bare_plan(64, 48), testing::tiny_bank());
  CHECK(page.width() == 64);
  CHECK(page.height() == 48);
  CHECK((page.image == 255).all());
  CHECK(page.annotations.empty());
}

TEST_CASE("unscaled bubble: outline is the source outline translated") {
  const Corpus& corpus = testing::fixture_corpus();
  const ComponentBank& bank = testing::fixture_bank();
  for (std::size_t idx : bank.of(Category::speech_bubble)) {
    const ComponentPatch& patch = bank.at(idx);
    const AnnotatedPage* src = corpus.find(patch.source_page);
    // The page outline the patch was cut from.
    const PolygonI* page_poly = nullptr;
    for (const auto& inst : src->instances)
      if (inst.is_polygon() && contains(patch.source_rect, bounds(inst.polygon()))) page_poly = &inst.polygon();
    REQUIRE(page_poly);
    const int x0 = 37, y0 = 53;
    LayoutPlan plan = bare_plan(600, 600);
    plan.placements.push_back(at(idx, Category::speech_bubble, {x0, y0, patch.native_w, patch.native_h}));
    const SynthPage page = render(plan, bank);
    REQUIRE(page.annotations.size() == 1);
    const PolygonI& out = page.annotations[0].polygon();
    REQUIRE(out.cols() == page_poly->cols());
    for (Eigen::Index i = 0; i < out.cols(); ++i) {
      CHECK(out(0, i) == (*page_poly)(0, i) + x0 - patch.source_rect.x);
      CHECK(out(1, i) == (*page_poly)(1, i) + y0 - patch.source_rect.y);
    }
    // Pixels under the mask are the crop pixels.
    const Image crop = src->image.block(patch.source_rect.y, patch.source_rect.x, patch.native_h, patch.native_w);
    const Image placed = page.image.block(y0, x0, patch.native_h, patch.native_w);
    for (int r = 0; r < patch.native_h; ++r)
      for (int c = 0; c < patch.native_w; ++c) CHECK(placed(r, c) == (patch.mask(r, c) ? crop(r, c) : 255));
  }
}

TEST_CASE("two disjoint placements: histogram and background count") {
  const ComponentBank bank = testing::tiny_bank(10);
  LayoutPlan plan = bare_plan(64, 64);
  plan.placements.push_back(at(2, Category::speech_bubble, {5, 5, 10, 10}));
  plan.placements.push_back(at(1, Category::assembly_group, {30, 40, 12, 12}));
  plan.placements.push_back(at(0, Category::stage_number, {50, 2, 8, 10}));
  const SynthPage page = render(plan, bank);

  std::array<long, 256> expected{};
  long masked = 0;
  for (const auto& p : plan.placements) {
    const ComponentPatch& patch = bank.at(p.component);
    const auto h = histogram(patch.image, &patch.mask);
    for (int v = 0; v < 256; ++v) expected[v] += h[v];
    masked += static_cast<long>(patch.mask.count());
  }
  expected[255] += 64 * 64 - masked;
  CHECK(histogram(page.image) == expected);
  CHECK(expected[255] == 64 * 64 - masked);
  CHECK(histogram(page.image)[100] == bank.at(2).mask.count());
}

TEST_CASE("disjoint placements composite in any order") {
  const ComponentBank& bank = testing::fixture_bank();
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    LayoutPlan plan = plan_page(rng, 1166, 1654, bank);
    const Image ref = render(plan, bank).image;
    rng.shuffle(std::span<Placement>(plan.placements));
    CHECK((render(plan, bank).image == ref).all());
  }
}

TEST_CASE("rendered plans: white background, annotations within targets") {
  const ComponentBank& bank = testing::fixture_bank();
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    const LayoutPlan plan = plan_page(rng, 1166, 1654, bank);
    const SynthPage page = render(plan, bank);
    REQUIRE(page.annotations.size() == plan.placements.size());
    Mask covered = Mask::Zero(page.height(), page.width());
    for (std::size_t i = 0; i < plan.placements.size(); ++i) {
      const BoxI& t = plan.placements[i].target;
      covered.block(t.y, t.x, t.h, t.w) = true;
      const Instance& a = page.annotations[i];
      CHECK(a.category == plan.placements[i].category);
      if (a.is_polygon()) {
        const BoxI b = bounds(a.polygon());
        CHECK(b.x >= t.x);
        CHECK(b.y >= t.y);
        CHECK(b.right() <= t.right() + 1);
        CHECK(b.bottom() <= t.bottom() + 1);
      } else {
        CHECK(a.box() == t);
      }
    }
    CHECK((covered || page.image == 255).all());
  }
}

// The disagreement is a one-pixel boundary band, so its share grows as bubbles
// shrink; below roughly 110 px across it passes 1%.
TEST_CASE("scaled bubbles: outline raster agrees with the pasted mask") {
  const ComponentBank& bank = testing::fixture_bank();
  for (std::size_t idx : bank.of(Category::speech_bubble)) {
    const ComponentPatch& patch = bank.at(idx);
    for (double s : {1.0, 0.9, 0.8, 0.7, 0.64}) {
      const int w = static_cast<int>(patch.native_w * s), h = static_cast<int>(patch.native_h * s);
      LayoutPlan plan = bare_plan(400, 400);
      plan.placements.push_back(at(idx, Category::speech_bubble, {11, 17, w, h}));
      const SynthPage page = render(plan, bank);
      const auto ref = oracle::pip_raster(oracle::points(page.annotations[0].polygon()), 400, 400);
      const PastedMask& pm = page.pasted[0];
      long differ = 0;
      for (int r = 0; r < 400; ++r)
        for (int c = 0; c < 400; ++c) {
          const bool in_mask = r >= pm.target.y && r < pm.target.bottom() && c >= pm.target.x &&
                               c < pm.target.right() && pm.mask(r - pm.target.y, c - pm.target.x);
          differ += in_mask != static_cast<bool>(ref[static_cast<std::size_t>(r) * 400 + c]);
        }
      CAPTURE(s);
      CHECK(static_cast<double>(differ) / static_cast<double>(pm.mask.count()) <= 0.01);
    }
  }
}

TEST_CASE("dangling component is an error") {
  LayoutPlan plan = bare_plan(64, 64);
  plan.placements.push_back(at(17, Category::speech_bubble, {0, 0, 5, 5}));
  CHECK_THROWS_AS(render(plan, testing::tiny_bank()), DataError);
}

TEST_CASE("resampling") {
  Image img(2, 2);
  img << 0, 100, 200, 255;
  CHECK((resample_bilinear(img, 2, 2) == img).all());
  const Image up = resample_bilinear(img, 4, 4);
  CHECK(up(0, 0) == 0);
  CHECK(up(3, 3) == 255);
  Mask m(2, 2);
  m << true, false, false, true;
  const Mask mu = resample_nearest(m, 4, 4);
  CHECK(mu.count() == 8);
  CHECK(mu(1, 1));
  CHECK_FALSE(mu(1, 2));
}

TEST_CASE("min_blend only touches masked pixels") {
  Image canvas = Image::Constant(4, 4, 120);
  Image patch = Image::Constant(2, 2, 200);
  patch(0, 0) = 10;
  Mask mask = Mask::Constant(2, 2, true);
  mask(1, 1) = false;
  patch(1, 1) = 0;
  min_blend(canvas, {1, 1, 2, 2}, patch, mask);
  CHECK(canvas(1, 1) == 10);
  CHECK(canvas(1, 2) == 120);
  CHECK(canvas(2, 2) == 120);
  CHECK(canvas(0, 0) == 120);
}

TEST_CASE("write_dataset: empty list gives a valid empty dataset") {
  TempDir out;
  const DatasetManifest m = write_dataset(std::vector<SynthPage>{}, out.path(), 3, "context");
  CHECK(m.pages.empty());
  const auto doc = nlohmann::json::parse(testing::slurp(out / "manifest.json"));
  CHECK(doc["count"] == 0);
  CHECK(doc["seed"] == 3);
  CHECK(doc["generator_version"] == generator_version());
  CHECK(load_corpus(out.path()).pages.empty());
}

TEST_CASE("write_dataset output reloads and is reproducible") {
  const ComponentBank& bank = testing::fixture_bank();
  auto make = [&](std::size_t i) {
    Rng rng(derive_seed(5, i));
    SynthPage p = render(plan_page(rng, 300, 420, bank), bank);
    p.id = "page_" + std::to_string(i);
    p.provenance.seed = derive_seed(5, i);
    return p;
  };
  TempDir a, b;
  write_dataset(6, make, a.path(), 5, "context", 1);
  write_dataset(6, make, b.path(), 5, "context", 3);
  CHECK(validate_corpus(a.path()).empty());
  const Corpus c = load_corpus(a.path());
  REQUIRE(c.pages.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    const SynthPage p = make(i);
    CHECK((c.pages[i].image == p.image).all());
    CHECK(c.pages[i].instances.size() == p.annotations.size());
  }
  for (const auto& entry : std::filesystem::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), a.path());
    CHECK(testing::slurp(entry.path()) == testing::slurp(b.path() / rel));
  }
}

TEST_CASE("write_dataset reports unwritable output") {
  TempDir dir;
  write_text(dir / "blocker", "file");
  CHECK_THROWS(write_dataset(std::vector<SynthPage>{}, dir / "blocker" / "sub", 0, "context"));
}
