#pragma once

#include "instrsynth/types.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace instrsynth {

inline constexpr const char* kAnnotationFile = "annotations.json";
inline constexpr const char* kBankFile = "bank.json";
inline constexpr int kDefaultInkThreshold = 250;

using Geometry = std::variant<BoxI, PolygonI>;

struct Instance {
  int id = 0;
  Category category = Category::speech_bubble;
  Geometry geometry;

  bool is_polygon() const { return std::holds_alternative<PolygonI>(geometry); }
  const PolygonI& polygon() const { return std::get<PolygonI>(geometry); }
  const BoxI& box() const { return std::get<BoxI>(geometry); }
};

struct AnnotatedPage {
  std::string id;
  std::string file;  // relative to the corpus directory
  int width = 0;
  int height = 0;
  Image image;  // empty when loaded without pixels
  std::vector<Instance> instances;
  std::string source_id;
};

struct Corpus {
  std::vector<AnnotatedPage> pages;

  const AnnotatedPage* find(std::string_view page_id) const;
};

/// One validation finding, tied to a page and optionally an instance.
struct Diagnostic {
  std::string page_id;
  std::optional<int> instance_id;
  std::string message;

  std::string str() const;
};

/// Load failure carrying every finding.
class CorpusError : public DataError {
 public:
  explicit CorpusError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Checks an instance against page bounds and the geometry rules of its
/// category. Returns the problem, if any.
std::optional<std::string> check_instance(const Instance& inst, int page_w, int page_h);

/// Parses and validates `dir/annotations.json` and, when `with_images`, every
/// referenced PNG. Throws CorpusError listing all findings, or IoError when the
/// annotation file itself cannot be read.
Corpus load_corpus(const std::filesystem::path& dir, bool with_images = true);

/// Same checks as load_corpus, reporting instead of throwing.
std::vector<Diagnostic> validate_corpus(const std::filesystem::path& dir);

/// Canonical annotation document: sorted keys, integer coordinates, two-space
/// indent, trailing newline.
std::string annotation_json(const Corpus& corpus);

/// Parses an annotation document. Findings are appended to `diagnostics`;
/// pages with broken records are skipped. Images are not touched.
Corpus parse_annotation_json(std::string_view text, std::vector<Diagnostic>& diagnostics);

/// Writes annotations.json plus a PNG for every page that carries pixels.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

// --- statistics ------------------------------------------------------------

struct CategoryCount {
  long instances = 0;
  long images = 0;

  friend bool operator==(const CategoryCount&, const CategoryCount&) = default;
};

struct CorpusStats {
  std::map<Category, CategoryCount> counts;

  CategoryCount at(Category c) const;
  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

CorpusStats stats(const Corpus& corpus);

/// Instance / annotation type / instance count / image count table.
std::string format_stats(const CorpusStats& s);

// --- component bank --------------------------------------------------------

struct ManifestEntry {
  std::string page_id;
  BoxI rect;
  Category category = Category::stage_number;
};

using ComponentManifest = std::vector<ManifestEntry>;

ComponentManifest parse_manifest(std::string_view text);
ComponentManifest load_manifest(const std::filesystem::path& path);

struct ComponentPatch {
  std::string id;
  Category category = Category::stage_number;
  Image image;
  Mask mask;
  int native_w = 0;
  int native_h = 0;
  std::string source_page;
  BoxI source_rect;
  /// Outline in crop-local coordinates; set for speech bubbles only.
  std::optional<PolygonI> polygon;
};

class ComponentBank {
 public:
  ComponentBank() = default;
  explicit ComponentBank(std::vector<ComponentPatch> patches);

  const std::vector<ComponentPatch>& patches() const { return patches_; }
  const ComponentPatch& at(std::size_t index) const { return patches_.at(index); }
  std::size_t size() const { return patches_.size(); }

  /// Indices of patches with the given category, in bank order.
  const std::vector<std::size_t>& of(Category c) const;

  /// Content hash over the bank description and pixels.
  const std::string& version() const { return version_; }

  /// Canonical bank.json text.
  std::string describe() const;

 private:
  std::vector<ComponentPatch> patches_;
  std::map<Category, std::vector<std::size_t>> by_category_;
  std::string version_;
};

/// Cuts one patch per manifest entry. Speech-bubble masks come from the
/// largest annotated bubble polygon lying inside the crop; the other
/// categories use an ink threshold (pixel < threshold is foreground).
ComponentBank extract_components(const Corpus& corpus, const ComponentManifest& manifest,
                                 int ink_threshold = kDefaultInkThreshold);

void save_bank(const ComponentBank& bank, const std::filesystem::path& dir);
ComponentBank load_bank(const std::filesystem::path& dir);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace instrsynth
