#pragma once

#include "instrsynth/compositor.hpp"
#include "instrsynth/corpus.hpp"
#include "instrsynth/rng.hpp"

#include <utility>

namespace instrsynth {

/// Component counts for one naive cut-paste page.
struct NaiveQuantities {
  int n_key = 0;
  int n_bubble = 0;
  int n_number = 0;
  int n_group = 0;
};

/// n_key uniform on [2, 8]; n_bubble = min(4, n_key - 2); the remainder split
/// uniformly over the (n_number, n_group) pairs that sum to it.
NaiveQuantities sample_naive_quantities(Rng& rng);

/// Minimum visible fraction of a pasted mask for its annotation to survive.
inline constexpr double kNaiveVisibilityCutoff = 0.25;

/// Pastes randomly chosen components at uniformly random positions on a white
/// page. Later pastes overwrite earlier ones; boxes shrink to their visible
/// pixels and instances with under a quarter of their mask visible are
/// dropped.
SynthPage naive_cut_paste(Rng& rng, const ComponentBank& bank, int page_w, int page_h);

/// Swaps one speech bubble between two distinct corpus pages. Each donor
/// bubble (polygon-masked crop of its bounding box) is resized onto the other
/// bubble's bounding box after that bubble has been erased to white. Returns
/// the two edited pages in selection order.
std::pair<SynthPage, SynthPage> instance_switch(Rng& rng, const Corpus& corpus);

/// Page-level bounding box of a bubble outline: the crop that holds every
/// pixel whose center lies inside it.
BoxI bubble_crop(const PolygonI& poly);

}  // namespace instrsynth
