#pragma once

#include "instrsynth/corpus.hpp"
#include "instrsynth/layout.hpp"
#include "instrsynth/types.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace instrsynth {

inline constexpr int kDefaultPageWidth = 1166;
inline constexpr int kDefaultPageHeight = 1654;

/// Generator version recorded in every dataset manifest.
std::string generator_version();

struct Provenance {
  std::uint64_t seed = 0;
  std::string method;  // "context", "naive" or "switch"
  std::string plan_hash;
  std::string bank_version;
};

/// A pasted mask in page coordinates, kept alongside each annotation so
/// annotation/pixel agreement can be audited.
struct PastedMask {
  BoxI target;
  Mask mask;  // target.h × target.w
};

struct SynthPage {
  std::string id;
  Image image;
  std::vector<Instance> annotations;
  std::vector<PastedMask> pasted;  // parallel to annotations
  Provenance provenance;

  int width() const { return static_cast<int>(image.cols()); }
  int height() const { return static_cast<int>(image.rows()); }
};

/// Bilinear resample of an image to w × h (pixel-center aligned, edges clamped).
Image resample_bilinear(const Image& src, int w, int h);

/// Nearest-neighbour resample of a mask to w × h.
Mask resample_nearest(const Mask& src, int w, int h);

/// out = min(canvas, patch) wherever mask is set, inside `target`.
void min_blend(Image& canvas, const BoxI& target, const Image& patch, const Mask& mask);

/// Renders a layout plan on a white page. Speech-bubble annotations are the
/// source outline under the paste transform; other components are annotated
/// with their target rect.
SynthPage render(const LayoutPlan& plan, const ComponentBank& bank);

struct DatasetManifest {
  std::string generator_version;
  std::string method;
  std::uint64_t seed = 0;
  std::vector<std::string> files;
  std::vector<Provenance> pages;

  std::string to_json() const;
};

inline constexpr const char* kManifestFile = "manifest.json";

/// Writes images/<id>.png per page, annotations.json in the corpus schema,
/// and manifest.json. Pages are rendered and encoded on `threads` workers and
/// dropped once written; file contents do not depend on the thread count.
DatasetManifest write_dataset(std::size_t count, const std::function<SynthPage(std::size_t)>& make_page,
                              const std::filesystem::path& out, std::uint64_t seed, const std::string& method,
                              unsigned threads = 1);

DatasetManifest write_dataset(const std::vector<SynthPage>& pages, const std::filesystem::path& out,
                              std::uint64_t seed, const std::string& method, unsigned threads = 1);

/// The annotation record write_dataset stores for a page (no pixels).
AnnotatedPage as_record(const SynthPage& page);

}  // namespace instrsynth
