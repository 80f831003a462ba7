#pragma once

#include "instrsynth/corpus.hpp"
#include "instrsynth/geometry.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

namespace testing {

namespace fs = std::filesystem;

inline fs::path fixture_dir() { return FIXTURE_DIR; }
inline fs::path fixture_corpus_dir() { return fixture_dir() / "corpus"; }
inline fs::path fixture_manifest() { return fixture_dir() / "manifest.json"; }

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("instrsynth_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const instrsynth::Corpus& fixture_corpus() {
  static const instrsynth::Corpus c = instrsynth::load_corpus(fixture_corpus_dir());
  return c;
}

inline const instrsynth::ComponentBank& fixture_bank() {
  static const instrsynth::ComponentBank b =
      instrsynth::extract_components(fixture_corpus(), instrsynth::load_manifest(fixture_manifest()));
  return b;
}

// Small in-memory bank with flat-valued patches: stage numbers are 0, groups
// 50, bubbles 100 inside an octagon outline.
inline instrsynth::ComponentBank tiny_bank(int size = 10) {
  using namespace instrsynth;
  std::vector<ComponentPatch> patches;
  auto flat = [&](const char* id, Category c, int w, int h, std::uint8_t v) {
    ComponentPatch p;
    p.id = id;
    p.category = c;
    p.image = Image::Constant(h, w, v);
    p.mask = Mask::Constant(h, w, true);
    p.native_w = w;
    p.native_h = h;
    p.source_page = "synthetic";
    p.source_rect = {0, 0, w, h};
    return p;
  };
  patches.push_back(flat("c0000", Category::stage_number, size - 2, size, 0));
  patches.push_back(flat("c0001", Category::assembly_group, size + 2, size + 2, 50));
  ComponentPatch b = flat("c0002", Category::speech_bubble, size, size, 100);
  const int s = size, q = size / 3;
  PolygonI poly(2, 8);
  poly << q, s - 1 - q, s - 1, s - 1, s - 1 - q, q, 0, 0,  //
      0, 0, q, s - 1 - q, s - 1, s - 1, s - 1 - q, q;
  b.polygon = poly;
  b.mask = rasterize(poly, s, s);
  b.image = Image::Constant(s, s, 255);
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < s; ++c)
      if (b.mask(r, c)) b.image(r, c) = 100;
  patches.push_back(b);
  return ComponentBank(std::move(patches));
}

}  // namespace testing
