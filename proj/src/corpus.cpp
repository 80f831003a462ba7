#include "instrsynth/corpus.hpp"

#include "instrsynth/geometry.hpp"
#include "instrsynth/png_io.hpp"
#include "instrsynth/rng.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace instrsynth {

using nlohmann::json;

namespace {

constexpr std::pair<Category, std::string_view> kCategoryNames[] = {
    {Category::speech_bubble, "speech_bubble"}, {Category::part, "part"},
    {Category::tool, "tool"},                   {Category::symbol, "symbol"},
    {Category::text, "text"},                   {Category::stage_number, "stage_number"},
    {Category::assembly_group, "assembly_group"},
};

bool all_integers(const json& arr) {
  return std::all_of(arr.begin(), arr.end(), [](const json& v) { return v.is_number_integer(); });
}

json polygon_json(const PolygonI& poly) {
  json pts = json::array();
  for (Eigen::Index i = 0; i < poly.cols(); ++i) pts.push_back({poly(0, i), poly(1, i)});
  return pts;
}

json box_json(const BoxI& b) { return {b.x, b.y, b.w, b.h}; }

std::optional<BoxI> parse_box(const json& v) {
  if (!v.is_array() || v.size() != 4 || !all_integers(v)) return std::nullopt;
  return BoxI{v[0].get<int>(), v[1].get<int>(), v[2].get<int>(), v[3].get<int>()};
}

std::optional<PolygonI> parse_polygon(const json& v) {
  if (!v.is_array()) return std::nullopt;
  PolygonI poly(2, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& p = v[i];
    if (!p.is_array() || p.size() != 2 || !all_integers(p)) return std::nullopt;
    poly(0, static_cast<Eigen::Index>(i)) = p[0].get<int>();
    poly(1, static_cast<Eigen::Index>(i)) = p[1].get<int>();
  }
  return poly;
}

json instance_json(const Instance& inst) {
  json j;
  j["id"] = inst.id;
  j["category"] = std::string(to_string(inst.category));
  if (inst.is_polygon())
    j["polygon"] = polygon_json(inst.polygon());
  else
    j["bbox"] = box_json(inst.box());
  return j;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

std::string_view to_string(Category c) {
  for (const auto& [cat, name] : kCategoryNames)
    if (cat == c) return name;
  return "unknown";
}

std::optional<Category> parse_category(std::string_view name) {
  for (const auto& [cat, n] : kCategoryNames)
    if (n == name) return cat;
  return std::nullopt;
}

const AnnotatedPage* Corpus::find(std::string_view page_id) const {
  for (const auto& p : pages)
    if (p.id == page_id) return &p;
  return nullptr;
}

std::string Diagnostic::str() const {
  std::string s = "page '" + page_id + "'";
  if (instance_id) s += " instance " + std::to_string(*instance_id);
  return s + ": " + message;
}

namespace {
std::string join(const std::vector<Diagnostic>& ds) {
  std::string s;
  for (const auto& d : ds) {
    if (!s.empty()) s += "\n";
    s += d.str();
  }
  return s;
}
}  // namespace

CorpusError::CorpusError(std::vector<Diagnostic> diagnostics)
    : DataError(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::optional<std::string> check_instance(const Instance& inst, int page_w, int page_h) {
  const bool wants_polygon = inst.category == Category::speech_bubble;
  if (wants_polygon != inst.is_polygon())
    return std::string(to_string(inst.category)) + " requires " +
           (wants_polygon ? "polygon" : "bbox") + " geometry";
  if (inst.is_polygon()) {
    const PolygonI& poly = inst.polygon();
    if (poly.cols() < 3) return "polygon has fewer than 3 vertices";
    for (Eigen::Index i = 0; i < poly.cols(); ++i) {
      const int x = poly(0, i), y = poly(1, i);
      if (x < 0 || y < 0 || x >= page_w || y >= page_h) {
        std::ostringstream os;
        os << "polygon vertex (" << x << ", " << y << ") out of bounds for " << page_w << "x"
           << page_h << " page";
        return os.str();
      }
    }
    if (!is_simple(poly)) return "polygon is degenerate or self-intersecting";
  } else {
    const BoxI& b = inst.box();
    if (b.w <= 0 || b.h <= 0) return "bbox has non-positive size";
    if (b.x < 0 || b.y < 0 || b.right() > page_w || b.bottom() > page_h) {
      std::ostringstream os;
      os << "bbox [" << b.x << ", " << b.y << ", " << b.w << ", " << b.h
         << "] out of bounds for " << page_w << "x" << page_h << " page";
      return os.str();
    }
  }
  return std::nullopt;
}

Corpus parse_annotation_json(std::string_view text, std::vector<Diagnostic>& diagnostics) {
  Corpus corpus;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    diagnostics.push_back({"", std::nullopt, std::string("annotation file is not JSON: ") + e.what()});
    return corpus;
  }
  if (!doc.is_object() || !doc.contains("pages") || !doc["pages"].is_array()) {
    diagnostics.push_back({"", std::nullopt, "annotation file lacks a \"pages\" array"});
    return corpus;
  }
  std::set<std::string> seen_pages;
  std::size_t ordinal = 0;
  for (const json& jp : doc["pages"]) {
    const std::string fallback_id = "#" + std::to_string(ordinal++);
    if (!jp.is_object()) {
      diagnostics.push_back({fallback_id, std::nullopt, "page record is not an object"});
      continue;
    }
    AnnotatedPage page;
    page.id = jp.contains("id") && jp["id"].is_string() ? jp["id"].get<std::string>() : fallback_id;
    const auto fail = [&](std::string msg) { diagnostics.push_back({page.id, std::nullopt, std::move(msg)}); };
    if (!jp.contains("id") || !jp["id"].is_string()) {
      fail("page record lacks a string \"id\"");
      continue;
    }
    if (!jp.contains("file") || !jp["file"].is_string()) {
      fail("page record lacks a string \"file\"");
      continue;
    }
    if (!jp.contains("width") || !jp["width"].is_number_integer() || !jp.contains("height") ||
        !jp["height"].is_number_integer() || jp["width"].get<long>() <= 0 || jp["height"].get<long>() <= 0) {
      fail("page record needs positive integer \"width\" and \"height\"");
      continue;
    }
    if (!jp.contains("instances") || !jp["instances"].is_array()) {
      fail("page record lacks an \"instances\" array");
      continue;
    }
    if (!seen_pages.insert(page.id).second) {
      fail("duplicate page id");
      continue;
    }
    page.file = jp["file"].get<std::string>();
    page.width = jp["width"].get<int>();
    page.height = jp["height"].get<int>();
    page.source_id = page.id;

    std::set<int> seen_instances;
    bool page_ok = true;
    for (const json& ji : jp["instances"]) {
      if (!ji.is_object() || !ji.contains("id") || !ji["id"].is_number_integer()) {
        fail("instance record lacks an integer \"id\"");
        page_ok = false;
        continue;
      }
      Instance inst;
      inst.id = ji["id"].get<int>();
      const auto ifail = [&](std::string msg) {
        diagnostics.push_back({page.id, inst.id, std::move(msg)});
        page_ok = false;
      };
      if (!seen_instances.insert(inst.id).second) {
        ifail("duplicate instance id");
        continue;
      }
      const auto cat = ji.contains("category") && ji["category"].is_string()
                           ? parse_category(ji["category"].get<std::string>())
                           : std::nullopt;
      if (!cat) {
        ifail("unknown or missing category" +
              (ji.contains("category") ? " " + ji["category"].dump() : std::string()));
        continue;
      }
      inst.category = *cat;
      const bool has_poly = ji.contains("polygon");
      const bool has_box = ji.contains("bbox");
      if (has_poly == has_box) {
        ifail("instance needs exactly one of \"polygon\" or \"bbox\"");
        continue;
      }
      if (has_poly) {
        auto poly = parse_polygon(ji["polygon"]);
        if (!poly) {
          ifail("malformed polygon (expected [[x, y], ...] with integer coordinates)");
          continue;
        }
        inst.geometry = std::move(*poly);
      } else {
        auto box = parse_box(ji["bbox"]);
        if (!box) {
          ifail("malformed bbox (expected [x, y, w, h] integers)");
          continue;
        }
        inst.geometry = *box;
      }
      if (auto problem = check_instance(inst, page.width, page.height)) {
        ifail(*problem);
        continue;
      }
      page.instances.push_back(std::move(inst));
    }
    if (page_ok) corpus.pages.push_back(std::move(page));
  }
  return corpus;
}

namespace {

Corpus parse_dir(const std::filesystem::path& dir, bool with_images, std::vector<Diagnostic>& diagnostics) {
  const std::filesystem::path ann = dir / kAnnotationFile;
  if (!std::filesystem::is_regular_file(ann)) throw IoError("missing annotation file " + ann.string());
  Corpus corpus = parse_annotation_json(read_text(ann), diagnostics);
  if (!with_images) return corpus;
  for (auto& page : corpus.pages) {
    const std::filesystem::path img = dir / page.file;
    if (!std::filesystem::is_regular_file(img)) {
      diagnostics.push_back({page.id, std::nullopt, "missing image file " + img.string()});
      continue;
    }
    try {
      page.image = read_png(img);
    } catch (const IoError& e) {
      diagnostics.push_back({page.id, std::nullopt, e.what()});
      continue;
    }
    if (page.image.cols() != page.width || page.image.rows() != page.height) {
      std::ostringstream os;
      os << "image " << img.string() << " is " << page.image.cols() << "x" << page.image.rows()
         << " but the record says " << page.width << "x" << page.height;
      diagnostics.push_back({page.id, std::nullopt, os.str()});
    }
  }
  return corpus;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& dir, bool with_images) {
  std::vector<Diagnostic> diagnostics;
  Corpus corpus = parse_dir(dir, with_images, diagnostics);
  if (!diagnostics.empty()) throw CorpusError(std::move(diagnostics));
  return corpus;
}

std::vector<Diagnostic> validate_corpus(const std::filesystem::path& dir) {
  std::vector<Diagnostic> diagnostics;
  parse_dir(dir, true, diagnostics);
  return diagnostics;
}

std::string annotation_json(const Corpus& corpus) {
  json pages = json::array();
  for (const auto& page : corpus.pages) {
    json instances = json::array();
    for (const auto& inst : page.instances) instances.push_back(instance_json(inst));
    pages.push_back({{"id", page.id},
                     {"file", page.file},
                     {"width", page.width},
                     {"height", page.height},
                     {"instances", std::move(instances)}});
  }
  json doc = {{"pages", std::move(pages)}};
  return doc.dump(2) + "\n";
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& page : corpus.pages) {
    if (page.image.size() == 0) continue;
    const auto path = dir / page.file;
    std::filesystem::create_directories(path.parent_path());
    write_png(path, page.image);
  }
  write_text(dir / kAnnotationFile, annotation_json(corpus));
}

// --- statistics ------------------------------------------------------------

CategoryCount CorpusStats::at(Category c) const {
  auto it = counts.find(c);
  return it == counts.end() ? CategoryCount{} : it->second;
}

CorpusStats stats(const Corpus& corpus) {
  CorpusStats s;
  for (Category c : kAllCategories) s.counts[c] = {};
  for (const auto& page : corpus.pages) {
    std::set<Category> present;
    for (const auto& inst : page.instances) {
      ++s.counts[inst.category].instances;
      present.insert(inst.category);
    }
    for (Category c : present) ++s.counts[c].images;
  }
  return s;
}

std::string format_stats(const CorpusStats& s) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "Instance" << std::setw(12) << "Annotation" << std::right
     << std::setw(12) << "Instances" << std::setw(10) << "Images" << "\n";
  for (Category c : kAllCategories) {
    const CategoryCount n = s.at(c);
    const bool component_only = c == Category::stage_number || c == Category::assembly_group;
    if (component_only && n.instances == 0) continue;
    os << std::left << std::setw(16) << to_string(c) << std::setw(12)
       << (c == Category::speech_bubble ? "Polygon" : "BBOX") << std::right << std::setw(12)
       << n.instances << std::setw(10) << n.images << "\n";
  }
  return os.str();
}

// --- component bank --------------------------------------------------------

ComponentManifest parse_manifest(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("manifest is not JSON: ") + e.what());
  }
  if (!doc.is_array()) throw DataError("manifest must be a JSON list");
  ComponentManifest manifest;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& e = doc[i];
    const std::string where = "manifest entry " + std::to_string(i);
    if (!e.is_object() || !e.contains("page_id") || !e["page_id"].is_string())
      throw DataError(where + ": missing \"page_id\"");
    const auto rect = e.contains("rect") ? parse_box(e["rect"]) : std::nullopt;
    if (!rect) throw DataError(where + ": \"rect\" must be [x, y, w, h] integers");
    const auto cat = e.contains("category") && e["category"].is_string()
                         ? parse_category(e["category"].get<std::string>())
                         : std::nullopt;
    if (!cat || !is_component_category(*cat))
      throw DataError(where + ": category must be stage_number, speech_bubble or assembly_group");
    manifest.push_back({e["page_id"].get<std::string>(), *rect, *cat});
  }
  return manifest;
}

ComponentManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text(path));
}

ComponentBank::ComponentBank(std::vector<ComponentPatch> patches) : patches_(std::move(patches)) {
  for (Category c : kAllCategories)
    if (is_component_category(c)) by_category_[c];
  std::string pixels;
  for (std::size_t i = 0; i < patches_.size(); ++i) {
    const auto& p = patches_[i];
    if (!is_component_category(p.category)) throw DataError("patch " + p.id + " has a non-component category");
    if (p.image.rows() != p.mask.rows() || p.image.cols() != p.mask.cols())
      throw DataError("patch " + p.id + " mask and image sizes differ");
    if (!p.mask.any()) throw DataError("patch " + p.id + " has an empty mask");
    by_category_[p.category].push_back(i);
    pixels.append(reinterpret_cast<const char*>(p.image.data()), static_cast<std::size_t>(p.image.size()));
    pixels.append(reinterpret_cast<const char*>(p.mask.data()), static_cast<std::size_t>(p.mask.size()));
  }
  version_ = hex64(fnv1a64(describe()) ^ splitmix64(fnv1a64(pixels)));
}

const std::vector<std::size_t>& ComponentBank::of(Category c) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = by_category_.find(c);
  return it == by_category_.end() ? kEmpty : it->second;
}

std::string ComponentBank::describe() const {
  json list = json::array();
  for (const auto& p : patches_) {
    json j = {{"id", p.id},
              {"category", std::string(to_string(p.category))},
              {"native_w", p.native_w},
              {"native_h", p.native_h},
              {"source", {{"page_id", p.source_page}, {"rect", box_json(p.source_rect)}}},
              {"image", p.id + ".png"},
              {"mask", p.id + "_mask.png"}};
    if (p.polygon) j["polygon"] = polygon_json(*p.polygon);
    list.push_back(std::move(j));
  }
  return json{{"patches", std::move(list)}}.dump(2) + "\n";
}

ComponentBank extract_components(const Corpus& corpus, const ComponentManifest& manifest, int ink_threshold) {
  std::vector<ComponentPatch> patches;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const ManifestEntry& e = manifest[i];
    const std::string where = "manifest entry " + std::to_string(i) + " (page '" + e.page_id + "')";
    const AnnotatedPage* page = corpus.find(e.page_id);
    if (!page) throw DataError(where + ": unknown page");
    if (page->image.size() == 0) throw DataError(where + ": page has no pixels loaded");
    const BoxI& r = e.rect;
    if (r.w <= 0 || r.h <= 0 || r.x < 0 || r.y < 0 || r.right() > page->width || r.bottom() > page->height)
      throw DataError(where + ": crop rect out of page bounds");

    ComponentPatch patch;
    char id[16];
    std::snprintf(id, sizeof id, "c%04zu", i);
    patch.id = id;
    patch.category = e.category;
    patch.native_w = r.w;
    patch.native_h = r.h;
    patch.source_page = page->id;
    patch.source_rect = r;
    patch.image = page->image.block(r.y, r.x, r.h, r.w);

    if (e.category == Category::speech_bubble) {
      const PolygonI* best = nullptr;
      double best_area = -1.0;
      for (const auto& inst : page->instances) {
        if (inst.category != Category::speech_bubble || !inst.is_polygon()) continue;
        const BoxI b = bounds(inst.polygon());
        // Vertices must stay inside the crop's pixel range so mapped outlines
        // never reach the far edge of a pasted target.
        if (b.x < r.x || b.y < r.y || b.right() > r.right() - 1 || b.bottom() > r.bottom() - 1) continue;
        const double a = std::abs(signed_area(inst.polygon()));
        if (a > best_area) {
          best_area = a;
          best = &inst.polygon();
        }
      }
      if (!best) throw DataError(where + ": crop contains no speech_bubble polygon");
      PolygonI local = best->colwise() - Eigen::Vector2i(r.x, r.y);
      patch.mask = rasterize(local, r.w, r.h);
      patch.polygon = std::move(local);
    } else {
      patch.mask = patch.image < static_cast<std::uint8_t>(std::clamp(ink_threshold, 0, 255));
    }
    if (!patch.mask.any()) throw DataError(where + ": empty mask");
    patches.push_back(std::move(patch));
  }
  return ComponentBank(std::move(patches));
}

void save_bank(const ComponentBank& bank, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& p : bank.patches()) {
    write_png(dir / (p.id + ".png"), p.image);
    const Image mask = p.mask.select(Image::Constant(p.mask.rows(), p.mask.cols(), 255),
                                     Image::Zero(p.mask.rows(), p.mask.cols()));
    write_png(dir / (p.id + "_mask.png"), mask);
  }
  write_text(dir / kBankFile, bank.describe());
}

ComponentBank load_bank(const std::filesystem::path& dir) {
  json doc;
  try {
    doc = json::parse(read_text(dir / kBankFile));
  } catch (const json::parse_error& e) {
    throw DataError(std::string("bank.json is not JSON: ") + e.what());
  }
  if (!doc.contains("patches") || !doc["patches"].is_array()) throw DataError("bank.json lacks \"patches\"");
  std::vector<ComponentPatch> patches;
  for (const json& j : doc["patches"]) {
    try {
      ComponentPatch p;
      p.id = j.at("id").get<std::string>();
      const auto cat = parse_category(j.at("category").get<std::string>());
      if (!cat) throw DataError("patch " + p.id + ": unknown category");
      p.category = *cat;
      p.native_w = j.at("native_w").get<int>();
      p.native_h = j.at("native_h").get<int>();
      p.source_page = j.at("source").at("page_id").get<std::string>();
      const auto rect = parse_box(j.at("source").at("rect"));
      if (!rect) throw DataError("patch " + p.id + ": malformed source rect");
      p.source_rect = *rect;
      if (j.contains("polygon")) {
        auto poly = parse_polygon(j["polygon"]);
        if (!poly) throw DataError("patch " + p.id + ": malformed polygon");
        p.polygon = std::move(*poly);
      }
      p.image = read_png(dir / j.at("image").get<std::string>());
      p.mask = read_png(dir / j.at("mask").get<std::string>()) >= std::uint8_t{128};
      if (p.image.cols() != p.native_w || p.image.rows() != p.native_h)
        throw DataError("patch " + p.id + ": image size disagrees with native size");
      patches.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw DataError(std::string("malformed bank.json record: ") + e.what());
    }
  }
  return ComponentBank(std::move(patches));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace instrsynth
