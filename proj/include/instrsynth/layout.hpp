#pragma once

#include "instrsynth/corpus.hpp"
#include "instrsynth/rng.hpp"
#include "instrsynth/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace instrsynth {

enum class Arrangement { top, middle, bottom, horizontal_left, horizontal_right, vertical };

std::string_view to_string(Arrangement a);

struct EffectiveArea {
  BoxI rect;
  Arrangement arrangement = Arrangement::middle;
  int stack_index = 0;  // position within a vertical stack
  double alpha = 1.0;   // width ratio to the page
  double beta = 1.0;    // height ratio to the page

  /// "top", "horizontal_left", "vertical_1", ...
  std::string tag() const;
};

/// Sides of an effective area, usable as a bit set.
enum Side : unsigned { kLeft = 1, kRight = 2, kTop = 4, kBottom = 8 };
using SideSet = unsigned;

std::string sides_to_string(SideSet s);

enum class Role { edge, center };

struct Placement {
  std::size_t component = 0;  // index into the ComponentBank
  Category category = Category::speech_bubble;
  Role role = Role::edge;
  BoxI target;
  SideSet touched = 0;
  int area_index = 0;
  double scale = 1.0;
};

struct LayoutPlan {
  int page_w = 0;
  int page_h = 0;
  std::vector<EffectiveArea> areas;
  std::vector<Placement> placements;

  /// Canonical JSON form.
  std::string to_json() const;
  std::string hash() const;
};

/// Tunables for the context-aware layout.
struct LayoutOptions {
  double margin = 0.02;     // page-height fraction above a top area / below a bottom area
  double scale_cap = 0.45;  // components fit within this fraction of the area per axis
  int attempts = 20;        // rejection-sampling tries per free placement
  int mandatory_retries = 4;
  double retry_shrink = 0.8;
};

/// (round(alpha·W), round(beta·H)).
std::pair<int, int> area_dims(double alpha, double beta, int page_w, int page_h);

/// Draws the number, arrangement, and size ratios of the effective areas and
/// positions them on the page.
///
/// Draw order: N_A, arrangement, then per area α and β (for vertical stacks all
/// α first, then β pairs from {1/3, 1/2, 2/3} redrawn until they sum to at
/// most one).
std::vector<EffectiveArea> sample_effective_areas(Rng& rng, int page_w, int page_h,
                                                  const LayoutOptions& opts = {});

/// Places the key components of one effective area.
///
/// Two to four edge components: the top-left corner always holds the stage
/// number, one other edge slot holds the assembly group, and the rest hold
/// speech bubbles. With three edge components the second one sits in another
/// corner and the third touches a single side. Zero to two speech bubbles are
/// then placed strictly inside the area; those that cannot be placed without
/// overlap are dropped.
std::vector<Placement> plan_components(Rng& rng, const EffectiveArea& area, int area_index,
                                       const ComponentBank& bank, const LayoutOptions& opts = {});

/// Full page plan: areas followed by the components of each area.
LayoutPlan plan_page(Rng& rng, int page_w, int page_h, const ComponentBank& bank,
                     const LayoutOptions& opts = {});

/// Sides of `area` that `target` touches, derived from coordinates.
SideSet touched_sides(const BoxI& target, const BoxI& area);

/// Every structural rule of a plan; empty when the plan is valid.
std::vector<std::string> validate_plan(const LayoutPlan& plan);

}  // namespace instrsynth
