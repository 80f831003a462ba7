#include "instrsynth/baselines.hpp"

#include "instrsynth/geometry.hpp"

#include <cmath>
#include <sstream>

namespace instrsynth {

NaiveQuantities sample_naive_quantities(Rng& rng) {
  NaiveQuantities q;
  q.n_key = rng.between(2, 8);
  q.n_bubble = std::min(4, q.n_key - 2);
  const int rest = q.n_key - q.n_bubble;
  // rest + 1 valid (n_number, n_group) pairs.
  q.n_number = rng.between(0, rest);
  q.n_group = rest - q.n_number;
  return q;
}

BoxI bubble_crop(const PolygonI& poly) { return bounds(poly); }

SynthPage naive_cut_paste(Rng& rng, const ComponentBank& bank, int page_w, int page_h) {
  for (Category c : {Category::stage_number, Category::assembly_group, Category::speech_bubble})
    if (bank.of(c).empty()) throw DataError("component bank has no " + std::string(to_string(c)) + " patches");

  const NaiveQuantities q = sample_naive_quantities(rng);
  std::vector<Category> order;
  order.insert(order.end(), static_cast<std::size_t>(q.n_number), Category::stage_number);
  order.insert(order.end(), static_cast<std::size_t>(q.n_group), Category::assembly_group);
  order.insert(order.end(), static_cast<std::size_t>(q.n_bubble), Category::speech_bubble);
  rng.shuffle(std::span<Category>(order));

  SynthPage page;
  page.image = Image::Constant(page_h, page_w, 255);
  page.provenance.method = "naive";
  page.provenance.bank_version = bank.version();
  using Owners = Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Owners owner = Owners::Constant(page_h, page_w, -1);

  struct Pasted {
    std::size_t component;
    BoxI target;
    Mask mask;
  };
  std::vector<Pasted> pasted;
  std::ostringstream trace;
  for (Category c : order) {
    const auto& ids = bank.of(c);
    const std::size_t component = ids[rng.index(ids.size())];
    const ComponentPatch& patch = bank.at(component);
    const double s = std::min({1.0, static_cast<double>(page_w) / patch.native_w,
                               static_cast<double>(page_h) / patch.native_h});
    const int w = std::clamp(static_cast<int>(std::lround(patch.native_w * s)), 1, page_w);
    const int h = std::clamp(static_cast<int>(std::lround(patch.native_h * s)), 1, page_h);
    const BoxI target{rng.between(0, page_w - w), rng.between(0, page_h - h), w, h};
    const Image pixels = resample_bilinear(patch.image, w, h);
    Mask mask = resample_nearest(patch.mask, w, h);

    auto region = page.image.block(target.y, target.x, h, w);
    region = mask.select(pixels, region);
    auto owners = owner.block(target.y, target.x, h, w);
    owners = mask.select(Owners::Constant(h, w, static_cast<int>(pasted.size())), owners);
    trace << component << "@" << target.x << "," << target.y << "," << w << "," << h << ";";
    pasted.push_back({component, target, std::move(mask)});
  }

  int next_id = 1;
  for (std::size_t k = 0; k < pasted.size(); ++k) {
    const Pasted& p = pasted[k];
    const Mask visible = owner.block(p.target.y, p.target.x, p.target.h, p.target.w) == static_cast<int>(k);
    const long shown = visible.count();
    const long total = p.mask.count();
    if (static_cast<double>(shown) < kNaiveVisibilityCutoff * static_cast<double>(total)) continue;

    const ComponentPatch& patch = bank.at(p.component);
    Instance inst;
    inst.id = next_id++;
    inst.category = patch.category;
    if (patch.category == Category::speech_bubble && patch.polygon) {
      const auto map = fit_affine({0.0, 0.0, static_cast<double>(patch.native_w), static_cast<double>(patch.native_h)},
                                  p.target.cast<double>());
      inst.geometry = round_polygon(map.apply(*patch.polygon), p.target);
    } else if (shown == total) {
      inst.geometry = p.target;
    } else {
      // Shrink the box to the pixels still visible.
      Eigen::Index r0 = visible.rows(), r1 = -1, c0 = visible.cols(), c1 = -1;
      for (Eigen::Index r = 0; r < visible.rows(); ++r)
        for (Eigen::Index c = 0; c < visible.cols(); ++c)
          if (visible(r, c)) {
            r0 = std::min(r0, r), r1 = std::max(r1, r);
            c0 = std::min(c0, c), c1 = std::max(c1, c);
          }
      inst.geometry = BoxI{p.target.x + static_cast<int>(c0), p.target.y + static_cast<int>(r0),
                           static_cast<int>(c1 - c0 + 1), static_cast<int>(r1 - r0 + 1)};
    }
    page.annotations.push_back(std::move(inst));
    page.pasted.push_back({p.target, p.mask});
  }
  page.provenance.plan_hash = [&] {
    std::ostringstream os;
    os << std::hex << fnv1a64(trace.str());
    return os.str();
  }();
  return page;
}

namespace {

SynthPage switch_into(const AnnotatedPage& dst, std::size_t dst_instance, const AnnotatedPage& donor,
                      std::size_t donor_instance) {
  const PolygonI& dst_poly = dst.instances[dst_instance].polygon();
  const PolygonI& donor_poly = donor.instances[donor_instance].polygon();
  const BoxI dst_box = bubble_crop(dst_poly);
  const BoxI donor_box = bubble_crop(donor_poly);

  SynthPage page;
  page.id = dst.id;
  page.image = dst.image;
  page.annotations = dst.instances;
  page.pasted.resize(dst.instances.size());

  // Erase the original bubble.
  auto region = page.image.block(dst_box.y, dst_box.x, dst_box.h, dst_box.w);
  const Mask hole = rasterize(dst_poly, dst_box.w, dst_box.h, Eigen::Vector2d(dst_box.x, dst_box.y));
  region = hole.select(Image::Constant(dst_box.h, dst_box.w, 255), region);

  const Image donor_pixels = donor.image.block(donor_box.y, donor_box.x, donor_box.h, donor_box.w);
  const Mask donor_mask =
      rasterize(donor_poly, donor_box.w, donor_box.h, Eigen::Vector2d(donor_box.x, donor_box.y));
  const Image pixels = resample_bilinear(donor_pixels, dst_box.w, dst_box.h);
  Mask mask = resample_nearest(donor_mask, dst_box.w, dst_box.h);
  min_blend(page.image, dst_box, pixels, mask);

  const ScaleTranslate map = fit_affine(donor_box.cast<double>(), dst_box.cast<double>());
  // Vertices may sit on the far edge of the box, as the originals do.
  const BoxI clip{dst_box.x, dst_box.y, dst_box.w + 1, dst_box.h + 1};
  page.annotations[dst_instance].geometry = round_polygon(map.apply(donor_poly), clip);
  page.pasted[dst_instance] = {dst_box, std::move(mask)};

  page.provenance.method = "switch";
  std::ostringstream os;
  os << std::hex << fnv1a64(dst.id + "#" + std::to_string(dst.instances[dst_instance].id) + "<-" + donor.id + "#" +
                            std::to_string(donor.instances[donor_instance].id));
  page.provenance.plan_hash = os.str();
  return page;
}

}  // namespace

std::pair<SynthPage, SynthPage> instance_switch(Rng& rng, const Corpus& corpus) {
  std::vector<const AnnotatedPage*> eligible;
  for (const auto& page : corpus.pages) {
    const bool has_bubble = std::any_of(page.instances.begin(), page.instances.end(), [](const Instance& i) {
      return i.category == Category::speech_bubble && i.is_polygon();
    });
    if (has_bubble) eligible.push_back(&page);
  }
  if (eligible.size() < 2)
    throw DataError("instance switching needs at least 2 pages with speech bubbles, found " +
                    std::to_string(eligible.size()));

  const std::size_t a = rng.index(eligible.size());
  std::size_t b = rng.index(eligible.size() - 1);
  if (b >= a) ++b;

  auto pick_bubble = [&rng](const AnnotatedPage& page) {
    std::vector<std::size_t> bubbles;
    for (std::size_t i = 0; i < page.instances.size(); ++i)
      if (page.instances[i].category == Category::speech_bubble && page.instances[i].is_polygon())
        bubbles.push_back(i);
    return bubbles[rng.index(bubbles.size())];
  };
  const AnnotatedPage& pa = *eligible[a];
  const AnnotatedPage& pb = *eligible[b];
  if (pa.image.size() == 0 || pb.image.size() == 0) throw DataError("instance switching needs page pixels");
  const std::size_t ia = pick_bubble(pa);
  const std::size_t ib = pick_bubble(pb);
  return {switch_into(pa, ia, pb, ib), switch_into(pb, ib, pa, ia)};
}

}  // namespace instrsynth
