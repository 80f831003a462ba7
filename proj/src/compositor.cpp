#include "instrsynth/compositor.hpp"

#include "instrsynth/geometry.hpp"
#include "instrsynth/parallel.hpp"
#include "instrsynth/png_io.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <sstream>

namespace instrsynth {

using nlohmann::json;

std::string generator_version() {
  static const std::string version = [] {
    constexpr const char* kRelease = "1.0.0";
    std::ostringstream os;
    os << "instrsynth " << kRelease << "+" << std::hex << std::setw(8) << std::setfill('0')
       << (fnv1a64(std::string("instrsynth/") + kRelease + "/layout-v1/naive-v1/switch-v1") & 0xffffffffULL);
    return os.str();
  }();
  return version;
}

Image resample_bilinear(const Image& src, int w, int h) {
  const Eigen::Index sw = src.cols(), sh = src.rows();
  if (sw == w && sh == h) return src;
  Image out(h, w);
  const double kx = static_cast<double>(sw) / w;
  const double ky = static_cast<double>(sh) / h;
  for (int r = 0; r < h; ++r) {
    const double sy = std::clamp((r + 0.5) * ky - 0.5, 0.0, static_cast<double>(sh - 1));
    const auto y0 = static_cast<Eigen::Index>(sy);
    const Eigen::Index y1 = std::min(y0 + 1, sh - 1);
    const double fy = sy - static_cast<double>(y0);
    for (int c = 0; c < w; ++c) {
      const double sx = std::clamp((c + 0.5) * kx - 0.5, 0.0, static_cast<double>(sw - 1));
      const auto x0 = static_cast<Eigen::Index>(sx);
      const Eigen::Index x1 = std::min(x0 + 1, sw - 1);
      const double fx = sx - static_cast<double>(x0);
      const double top = src(y0, x0) + fx * (src(y0, x1) - src(y0, x0));
      const double bot = src(y1, x0) + fx * (src(y1, x1) - src(y1, x0));
      out(r, c) = static_cast<std::uint8_t>(std::clamp(std::lround(top + fy * (bot - top)), 0L, 255L));
    }
  }
  return out;
}

Mask resample_nearest(const Mask& src, int w, int h) {
  const Eigen::Index sw = src.cols(), sh = src.rows();
  if (sw == w && sh == h) return src;
  Mask out(h, w);
  for (int r = 0; r < h; ++r) {
    const Eigen::Index sy = std::min(static_cast<Eigen::Index>((r + 0.5) * sh / h), sh - 1);
    for (int c = 0; c < w; ++c) {
      const Eigen::Index sx = std::min(static_cast<Eigen::Index>((c + 0.5) * sw / w), sw - 1);
      out(r, c) = src(sy, sx);
    }
  }
  return out;
}

void min_blend(Image& canvas, const BoxI& target, const Image& patch, const Mask& mask) {
  auto region = canvas.block(target.y, target.x, target.h, target.w);
  region = mask.select(region.min(patch), region);
}

SynthPage render(const LayoutPlan& plan, const ComponentBank& bank) {
  SynthPage page;
  page.image = Image::Constant(plan.page_h, plan.page_w, 255);
  page.provenance.method = "context";
  page.provenance.plan_hash = plan.hash();
  page.provenance.bank_version = bank.version();
  const BoxI bounds_box{0, 0, plan.page_w, plan.page_h};
  int next_id = 1;
  for (const Placement& p : plan.placements) {
    if (p.component >= bank.size())
      throw DataError("placement refers to missing component " + std::to_string(p.component));
    if (!contains(bounds_box, p.target)) throw DataError("placement target leaves the page");
    const ComponentPatch& patch = bank.at(p.component);
    const Image pixels = resample_bilinear(patch.image, p.target.w, p.target.h);
    Mask mask = resample_nearest(patch.mask, p.target.w, p.target.h);
    min_blend(page.image, p.target, pixels, mask);

    Instance inst;
    inst.id = next_id++;
    inst.category = patch.category;
    if (patch.category == Category::speech_bubble && patch.polygon) {
      const auto map = fit_affine({0.0, 0.0, static_cast<double>(patch.native_w), static_cast<double>(patch.native_h)},
                                  p.target.cast<double>());
      inst.geometry = round_polygon(map.apply(*patch.polygon), p.target);
    } else {
      inst.geometry = p.target;
    }
    page.annotations.push_back(std::move(inst));
    page.pasted.push_back({p.target, std::move(mask)});
  }
  return page;
}

AnnotatedPage as_record(const SynthPage& sp) {
  AnnotatedPage page;
  page.id = sp.id;
  page.file = "images/" + sp.id + ".png";
  page.width = sp.width();
  page.height = sp.height();
  page.instances = sp.annotations;
  page.source_id = sp.id;
  return page;
}

std::string DatasetManifest::to_json() const {
  json list = json::array();
  for (std::size_t i = 0; i < pages.size(); ++i)
    list.push_back({{"file", files[i]},
                    {"seed", pages[i].seed},
                    {"method", pages[i].method},
                    {"plan_hash", pages[i].plan_hash},
                    {"bank_version", pages[i].bank_version}});
  json doc = {{"generator_version", generator_version},
              {"method", method},
              {"seed", seed},
              {"count", pages.size()},
              {"pages", std::move(list)}};
  return doc.dump(2) + "\n";
}

DatasetManifest write_dataset(std::size_t count, const std::function<SynthPage(std::size_t)>& make_page,
                              const std::filesystem::path& out, std::uint64_t seed, const std::string& method,
                              unsigned threads) {
  std::error_code ec;
  std::filesystem::create_directories(out / "images", ec);
  if (ec) throw IoError("cannot create " + (out / "images").string() + ": " + ec.message());

  Corpus corpus;
  corpus.pages.resize(count);
  std::vector<Provenance> provenance(count);
  parallel_for(count, threads, [&](std::size_t i) {
    const SynthPage page = make_page(i);
    corpus.pages[i] = as_record(page);
    provenance[i] = page.provenance;
    write_png(out / corpus.pages[i].file, page.image);
  });

  DatasetManifest manifest;
  manifest.generator_version = generator_version();
  manifest.method = method;
  manifest.seed = seed;
  for (std::size_t i = 0; i < count; ++i) manifest.files.push_back(corpus.pages[i].file);
  manifest.pages = std::move(provenance);
  write_text(out / kAnnotationFile, annotation_json(corpus));
  write_text(out / kManifestFile, manifest.to_json());
  return manifest;
}

DatasetManifest write_dataset(const std::vector<SynthPage>& pages, const std::filesystem::path& out,
                              std::uint64_t seed, const std::string& method, unsigned threads) {
  return write_dataset(
      pages.size(), [&](std::size_t i) { return pages[i]; }, out, seed, method, threads);
}

}  // namespace instrsynth
