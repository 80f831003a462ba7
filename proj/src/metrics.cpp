#include "instrsynth/metrics.hpp"

#include <json.hpp>

#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace instrsynth {

using nlohmann::json;

double iou_threshold(int i) { return (50 + 5 * i) / 100.0; }
double recall_point(int j) { return j / 100.0; }

double iou_raster(const Raster& a, const Raster& b) {
  if (a.area == 0 || b.area == 0) return 0.0;
  const BoxI o = intersect(a.window, b.window);
  long inter = 0;
  if (o.w > 0 && o.h > 0) {
    inter = (a.mask.block(o.y - a.window.y, o.x - a.window.x, o.h, o.w) &&
             b.mask.block(o.y - b.window.y, o.x - b.window.x, o.h, o.w))
                .count();
  }
  return static_cast<double>(inter) / static_cast<double>(a.area + b.area - inter);
}

namespace {

IouType resolve(IouType type, const Instance& gt) {
  if (type != IouType::automatic) return type;
  return gt.is_polygon() ? IouType::mask : IouType::box;
}

BoxD pred_box(const PredGeometry& g) {
  if (const auto* b = std::get_if<BoxD>(&g)) return *b;
  return bounds(std::get<PolygonD>(g));
}

PolygonD pred_polygon(const PredGeometry& g) {
  if (const auto* p = std::get_if<PolygonD>(&g)) return *p;
  return box_polygon(std::get<BoxD>(g));
}

BoxD gt_box(const Instance& gt) {
  return gt.is_polygon() ? bounds(gt.polygon()).cast<double>() : gt.box().cast<double>();
}

PolygonD gt_polygon(const Instance& gt) {
  return gt.is_polygon() ? PolygonD(gt.polygon().cast<double>()) : box_polygon(gt.box().cast<double>());
}

// Dense IoU table for one page and category, rasterizing each shape once.
std::vector<std::vector<double>> iou_table(const std::vector<const Prediction*>& dets,
                                           const std::vector<const Instance*>& gts, int page_w, int page_h,
                                           IouType type) {
  std::vector<std::vector<double>> table(dets.size(), std::vector<double>(gts.size(), 0.0));
  std::vector<std::optional<Raster>> det_rasters(dets.size());
  std::vector<std::optional<Raster>> gt_rasters(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g) {
    const IouType t = resolve(type, *gts[g]);
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (t == IouType::box) {
        table[d][g] = iou_box(pred_box(dets[d]->geometry), gt_box(*gts[g]));
        continue;
      }
      if (!gt_rasters[g]) gt_rasters[g] = make_raster(gt_polygon(*gts[g]), page_w, page_h);
      if (!det_rasters[d]) det_rasters[d] = make_raster(pred_polygon(dets[d]->geometry), page_w, page_h);
      table[d][g] = iou_raster(*det_rasters[d], *gt_rasters[g]);
    }
  }
  return table;
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct Ranked {
  double score;
  std::size_t page;  // index in page-id order
  std::size_t rank;  // position within the page's sorted detections
  bool tp;
};

}  // namespace

double pair_iou(const PredGeometry& pred, const Instance& gt, int page_w, int page_h, IouType type) {
  if (resolve(type, gt) == IouType::box) return iou_box(pred_box(pred), gt_box(gt));
  return iou_mask(pred_polygon(pred), gt_polygon(gt), page_w, page_h);
}

EvalReport evaluate(const std::vector<Prediction>& preds, const Corpus& truth, const EvalOptions& opts) {
  EvalReport report;

  // Pages in id order so tie-breaking is independent of page order.
  std::vector<const AnnotatedPage*> pages;
  for (const auto& p : truth.pages) pages.push_back(&p);
  std::stable_sort(pages.begin(), pages.end(),
                   [](const AnnotatedPage* a, const AnnotatedPage* b) { return a->id < b->id; });
  std::unordered_map<std::string, std::size_t> page_index;
  for (std::size_t i = 0; i < pages.size(); ++i) page_index.emplace(pages[i]->id, i);

  std::map<Category, std::vector<std::vector<const Prediction*>>> dets_by;
  for (const auto& pr : preds) {
    auto it = page_index.find(pr.page_id);
    if (it == page_index.end()) continue;
    auto& per_page = dets_by[pr.category];
    per_page.resize(pages.size());
    per_page[it->second].push_back(&pr);
  }

  std::vector<double> all_best_iou;  // instance mIoU over every GT
  for (Category cat : kAllCategories) {
    std::vector<std::vector<const Instance*>> gts(pages.size());
    long num_gt = 0;
    for (std::size_t p = 0; p < pages.size(); ++p)
      for (const auto& inst : pages[p]->instances)
        if (inst.category == cat) {
          gts[p].push_back(&inst);
          ++num_gt;
        }
    if (num_gt == 0) continue;

    CategoryReport cr;
    cr.num_gt = num_gt;
    auto& dets = dets_by[cat];
    dets.resize(pages.size());
    std::vector<std::vector<std::vector<double>>> ious(pages.size());
    for (std::size_t p = 0; p < pages.size(); ++p) {
      auto& d = dets[p];
      std::stable_sort(d.begin(), d.end(), [](const Prediction* a, const Prediction* b) { return a->score > b->score; });
      if (d.size() > static_cast<std::size_t>(opts.max_detections)) d.resize(static_cast<std::size_t>(opts.max_detections));
      cr.num_pred += static_cast<long>(d.size());
      ious[p] = iou_table(d, gts[p], pages[p]->width, pages[p]->height, opts.iou_type);
    }

    std::vector<double> ap_t(kNumThresholds), rec_t(kNumThresholds);
    for (int t = 0; t < kNumThresholds; ++t) {
      const double thr = iou_threshold(t);
      std::vector<Ranked> ranked;
      for (std::size_t p = 0; p < pages.size(); ++p) {
        std::vector<bool> taken(gts[p].size(), false);
        for (std::size_t d = 0; d < dets[p].size(); ++d) {
          int best = -1;
          for (std::size_t g = 0; g < gts[p].size(); ++g) {
            if (taken[g] || ious[p][d][g] < thr) continue;
            if (best < 0 || ious[p][d][g] > ious[p][d][static_cast<std::size_t>(best)]) best = static_cast<int>(g);
          }
          if (best >= 0) taken[static_cast<std::size_t>(best)] = true;
          ranked.push_back({dets[p][d]->score, p, d, best >= 0});
        }
      }
      std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.page != b.page) return a.page < b.page;
        return a.rank < b.rank;
      });
      std::vector<double> recall(ranked.size()), precision(ranked.size());
      long tp = 0;
      for (std::size_t k = 0; k < ranked.size(); ++k) {
        tp += ranked[k].tp ? 1 : 0;
        recall[k] = static_cast<double>(tp) / static_cast<double>(num_gt);
        precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
      }
      for (std::size_t k = precision.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
      std::array<double, kNumRecallPoints> q{};
      for (int j = 0; j < kNumRecallPoints; ++j) {
        const auto it = std::lower_bound(recall.begin(), recall.end(), recall_point(j));
        q[static_cast<std::size_t>(j)] = it == recall.end() ? 0.0 : precision[static_cast<std::size_t>(it - recall.begin())];
      }
      ap_t[static_cast<std::size_t>(t)] = std::accumulate(q.begin(), q.end(), 0.0) / kNumRecallPoints;
      rec_t[static_cast<std::size_t>(t)] = static_cast<double>(tp) / static_cast<double>(num_gt);
      cr.precision.push_back(q);
      cr.recall[static_cast<std::size_t>(t)] = rec_t[static_cast<std::size_t>(t)];
    }
    cr.ap = mean_of(ap_t);
    cr.ap50 = ap_t[0];
    cr.ap75 = ap_t[5];
    cr.ar = mean_of(rec_t);

    if (opts.miou_mode == MiouMode::instance) {
      std::vector<double> best_iou;
      for (std::size_t p = 0; p < pages.size(); ++p)
        for (std::size_t g = 0; g < gts[p].size(); ++g) {
          double best = 0.0;
          for (std::size_t d = 0; d < dets[p].size(); ++d) best = std::max(best, ious[p][d][g]);
          best_iou.push_back(best);
        }
      cr.miou = mean_of(best_iou);
      all_best_iou.insert(all_best_iou.end(), best_iou.begin(), best_iou.end());
    } else {
      long inter = 0, uni = 0;
      for (std::size_t p = 0; p < pages.size(); ++p) {
        const int w = pages[p]->width, h = pages[p]->height;
        Mask truth_mask = Mask::Zero(h, w), pred_mask = Mask::Zero(h, w);
        for (const Instance* g : gts[p]) truth_mask = truth_mask || rasterize(gt_polygon(*g), w, h);
        for (const Prediction* d : dets[p])
          if (d->score >= opts.pixel_score_threshold) pred_mask = pred_mask || rasterize(pred_polygon(d->geometry), w, h);
        inter += static_cast<long>((truth_mask && pred_mask).count());
        uni += static_cast<long>((truth_mask || pred_mask).count());
      }
      cr.miou = uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
    }
    report.categories.emplace(cat, std::move(cr));
  }

  if (report.categories.empty()) return report;
  std::vector<double> ap, ap50, ap75, ar, miou;
  report.precision.assign(kNumThresholds, {});
  for (const auto& [cat, cr] : report.categories) {
    ap.push_back(*cr.ap);
    ap50.push_back(*cr.ap50);
    ap75.push_back(*cr.ap75);
    ar.push_back(*cr.ar);
    miou.push_back(*cr.miou);
    for (int t = 0; t < kNumThresholds; ++t)
      for (int j = 0; j < kNumRecallPoints; ++j)
        report.precision[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] +=
            cr.precision[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] /
            static_cast<double>(report.categories.size());
  }
  report.ap = mean_of(ap);
  report.ap50 = mean_of(ap50);
  report.ap75 = mean_of(ap75);
  report.ar = mean_of(ar);
  report.miou = opts.miou_mode == MiouMode::instance ? mean_of(all_best_iou) : mean_of(miou);
  return report;
}

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string cell(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << *v;
  return os.str();
}

}  // namespace

std::string EvalReport::to_json() const {
  json thresholds = json::array();
  for (int t = 0; t < kNumThresholds; ++t) thresholds.push_back(iou_threshold(t));
  json cats = json::object();
  for (const auto& [cat, cr] : categories) {
    json rec = json::array();
    for (double r : cr.recall) rec.push_back(r);
    cats[std::string(to_string(cat))] = {{"num_gt", cr.num_gt},     {"num_pred", cr.num_pred},
                                         {"ap", opt_json(cr.ap)},     {"ap50", opt_json(cr.ap50)},
                                         {"ap75", opt_json(cr.ap75)}, {"ar", opt_json(cr.ar)},
                                         {"miou", opt_json(cr.miou)}, {"recall", rec}};
  }
  json curves = json::array();
  for (const auto& q : precision) curves.push_back(json(std::vector<double>(q.begin(), q.end())));
  json doc = {{"ap", opt_json(ap)},          {"ap50", opt_json(ap50)},    {"ap75", opt_json(ap75)},
              {"ar", opt_json(ar)},          {"miou", opt_json(miou)},    {"iou_thresholds", thresholds},
              {"precision", curves},         {"categories", cats}};
  return doc.dump(2) + "\n";
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  const auto row = [&os](std::string_view name, const auto& r) {
    os << std::left << std::setw(16) << name << std::right;
    for (const auto* v : {&r.ap, &r.ap50, &r.ap75, &r.ar, &r.miou}) os << std::setw(8) << cell(*v);
    os << "\n";
  };
  os << std::left << std::setw(16) << "Category" << std::right;
  for (const char* h : {"AP", "AP50", "AP75", "AR", "mIoU"}) os << std::setw(8) << h;
  os << "\n";
  row("all", *this);
  for (const auto& [cat, cr] : categories) row(to_string(cat), cr);
  return os.str();
}

std::vector<Prediction> parse_predictions(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("prediction file is not JSON: ") + e.what());
  }
  if (!doc.is_array()) throw DataError("prediction file must be a JSON list");
  std::vector<Prediction> preds;
  preds.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& e = doc[i];
    const std::string where = "prediction " + std::to_string(i);
    if (!e.is_object()) throw DataError(where + ": not an object");
    Prediction p;
    if (!e.contains("page_id") || !e["page_id"].is_string()) throw DataError(where + ": missing \"page_id\"");
    p.page_id = e["page_id"].get<std::string>();
    const auto cat = e.contains("category") && e["category"].is_string()
                         ? parse_category(e["category"].get<std::string>())
                         : std::nullopt;
    if (!cat) throw DataError(where + ": unknown or missing category");
    p.category = *cat;
    if (!e.contains("score") || !e["score"].is_number()) throw DataError(where + ": missing \"score\"");
    p.score = e["score"].get<double>();
    if (!(p.score >= 0.0 && p.score <= 1.0)) throw DataError(where + ": score outside [0, 1]");
    const bool has_poly = e.contains("polygon"), has_box = e.contains("bbox");
    if (has_poly == has_box) throw DataError(where + ": needs exactly one of \"polygon\" or \"bbox\"");
    if (has_box) {
      const json& b = e["bbox"];
      if (!b.is_array() || b.size() != 4 || !std::all_of(b.begin(), b.end(), [](const json& v) { return v.is_number(); }))
        throw DataError(where + ": \"bbox\" must be [x, y, w, h]");
      BoxD box{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
      if (box.w < 0 || box.h < 0) throw DataError(where + ": negative bbox size");
      p.geometry = box;
    } else {
      const json& v = e["polygon"];
      if (!v.is_array() || v.size() < 3) throw DataError(where + ": polygon needs at least 3 vertices");
      PolygonD poly(2, static_cast<Eigen::Index>(v.size()));
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (!v[k].is_array() || v[k].size() != 2 || !v[k][0].is_number() || !v[k][1].is_number())
          throw DataError(where + ": malformed polygon vertex");
        poly(0, static_cast<Eigen::Index>(k)) = v[k][0].get<double>();
        poly(1, static_cast<Eigen::Index>(k)) = v[k][1].get<double>();
      }
      p.geometry = std::move(poly);
    }
    preds.push_back(std::move(p));
  }
  return preds;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_text(path));
}

std::string predictions_json(const std::vector<Prediction>& preds) {
  json list = json::array();
  for (const auto& p : preds) {
    json j = {{"page_id", p.page_id}, {"category", std::string(to_string(p.category))}, {"score", p.score}};
    if (const auto* b = std::get_if<BoxD>(&p.geometry)) {
      j["bbox"] = {b->x, b->y, b->w, b->h};
    } else {
      const auto& poly = std::get<PolygonD>(p.geometry);
      json pts = json::array();
      for (Eigen::Index i = 0; i < poly.cols(); ++i) pts.push_back({poly(0, i), poly(1, i)});
      j["polygon"] = std::move(pts);
    }
    list.push_back(std::move(j));
  }
  return list.dump(2) + "\n";
}

std::vector<Prediction> predictions_from(const Corpus& corpus) {
  std::vector<Prediction> preds;
  for (const auto& page : corpus.pages)
    for (const auto& inst : page.instances) {
      Prediction p;
      p.page_id = page.id;
      p.category = inst.category;
      p.score = 1.0;
      if (inst.is_polygon())
        p.geometry = PolygonD(inst.polygon().cast<double>());
      else
        p.geometry = inst.box().cast<double>();
      preds.push_back(std::move(p));
    }
  return preds;
}

}  // namespace instrsynth
