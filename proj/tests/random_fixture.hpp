#pragma once

#include "instrsynth/corpus.hpp"
#include "instrsynth/metrics.hpp"
#include "instrsynth/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace testing {

struct EvalFixture {
  instrsynth::Corpus truth;
  std::vector<instrsynth::Prediction> preds;
};

inline constexpr int kFixturePage = 40;

// Star-shaped integer outline inside [x0, x0+size) x [y0, y0+size).
inline instrsynth::PolygonI random_outline(instrsynth::Rng& rng, int x0, int y0, int size) {
  const int n = rng.between(3, 8);
  std::vector<double> angles;
  for (int i = 0; i < n; ++i) angles.push_back(rng.uniform(0, 2 * M_PI));
  std::sort(angles.begin(), angles.end());
  const double c = (size - 1) / 2.0;
  instrsynth::PolygonI p(2, n);
  for (int i = 0; i < n; ++i) {
    const double r = rng.uniform(0.4, 1.0) * c;
    p(0, i) = x0 + static_cast<int>(std::lround(c + r * std::cos(angles[i])));
    p(1, i) = y0 + static_cast<int>(std::lround(c + r * std::sin(angles[i])));
  }
  return p;
}

inline instrsynth::BoxI random_box(instrsynth::Rng& rng, int x0, int y0, int size) {
  const int w = rng.between(2, size), h = rng.between(2, size);
  return {x0 + rng.between(0, size - w), y0 + rng.between(0, size - h), w, h};
}

// Up to four ground truths over one or two pages and two categories (one
// polygon-annotated, one box-annotated), and up to four predictions that are
// jittered copies of ground truths or free shapes. With `disjoint`, ground
// truths sit in separate page quadrants.
inline EvalFixture random_eval_fixture(instrsynth::Rng& rng, bool disjoint = false) {
  using namespace instrsynth;
  EvalFixture f;
  const int n_pages = rng.between(1, 2);
  const char* names[] = {"pg_b", "pg_a", "pg_c"};
  const std::size_t first = rng.index(3);
  for (int i = 0; i < n_pages; ++i) {
    AnnotatedPage p;
    p.id = names[(first + static_cast<std::size_t>(i)) % 3];
    p.width = p.height = kFixturePage;
    f.truth.pages.push_back(p);
  }
  const int n_gt = rng.between(0, 4);
  std::vector<int> quadrant_used(static_cast<std::size_t>(n_pages * 4), 0);
  for (int g = 0; g < n_gt; ++g) {
    const std::size_t pi = rng.index(static_cast<std::size_t>(n_pages));
    AnnotatedPage& page = f.truth.pages[pi];
    int x0 = 0, y0 = 0, size = kFixturePage;
    if (disjoint) {
      int q = static_cast<int>(rng.index(4));
      while (quadrant_used[pi * 4 + static_cast<std::size_t>(q)]) q = (q + 1) % 4;
      quadrant_used[pi * 4 + static_cast<std::size_t>(q)] = 1;
      x0 = (q % 2) * 20 + 1, y0 = (q / 2) * 20 + 1, size = 18;
    }
    Instance inst;
    inst.id = g + 1;
    if (rng.index(2) == 0) {
      inst.category = Category::speech_bubble;
      inst.geometry = random_outline(rng, x0, y0, size);
    } else {
      inst.category = Category::tool;
      inst.geometry = random_box(rng, x0, y0, size);
    }
    page.instances.push_back(inst);
  }
  std::vector<const Instance*> all;
  std::vector<std::string> owner;
  for (const auto& p : f.truth.pages)
    for (const auto& inst : p.instances) {
      all.push_back(&inst);
      owner.push_back(p.id);
    }
  const int n_pred = rng.between(0, 4);
  const double tie_scores[] = {0.3, 0.6, 0.9};
  for (int k = 0; k < n_pred; ++k) {
    Prediction pr;
    pr.score = rng.index(3) == 0 ? tie_scores[rng.index(3)] : rng.uniform01();
    if (!all.empty() && rng.index(4) != 0) {
      const std::size_t g = rng.index(all.size());
      pr.page_id = owner[g];
      pr.category = rng.index(8) == 0 ? Category::part : all[g]->category;
      const double dx = rng.uniform(-3, 3), dy = rng.uniform(-3, 3);
      if (all[g]->is_polygon()) {
        PolygonD p = all[g]->polygon().cast<double>();
        const double s = rng.uniform(0.8, 1.2);
        const Eigen::Vector2d c = p.rowwise().mean();
        p = ((p.colwise() - c) * s).colwise() + c + Eigen::Vector2d(dx, dy);
        if (rng.index(3) == 0)
          pr.geometry = BoxD{p.row(0).minCoeff(), p.row(1).minCoeff(), p.row(0).maxCoeff() - p.row(0).minCoeff(),
                             p.row(1).maxCoeff() - p.row(1).minCoeff()};
        else
          pr.geometry = p;
      } else {
        const BoxI& b = all[g]->box();
        pr.geometry = BoxD{b.x + dx, b.y + dy, std::max(0.5, b.w + rng.uniform(-3, 3)),
                           std::max(0.5, b.h + rng.uniform(-3, 3))};
      }
    } else {
      pr.page_id = f.truth.pages[rng.index(f.truth.pages.size())].id;
      pr.category = rng.index(2) == 0 ? Category::speech_bubble : Category::tool;
      if (rng.index(2) == 0)
        pr.geometry = random_outline(rng, 0, 0, kFixturePage).cast<double>().eval();
      else
        pr.geometry = random_box(rng, 0, 0, kFixturePage).cast<double>();
    }
    f.preds.push_back(pr);
  }
  return f;
}

}  // namespace testing
