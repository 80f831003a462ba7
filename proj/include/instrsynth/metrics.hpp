#pragma once

#include "instrsynth/corpus.hpp"
#include "instrsynth/geometry.hpp"
#include "instrsynth/types.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace instrsynth {

using PredGeometry = std::variant<BoxD, PolygonD>;

struct Prediction {
  std::string page_id;
  Category category = Category::speech_bubble;
  PredGeometry geometry;
  double score = 0.0;
};

/// COCO IoU thresholds 0.50:0.05:0.95.
inline constexpr int kNumThresholds = 10;
inline constexpr int kNumRecallPoints = 101;
double iou_threshold(int i);
double recall_point(int j);

template <typename Scalar>
double iou_box(const Box<Scalar>& a, const Box<Scalar>& b) {
  const double ix = std::max(0.0, std::min<double>(a.right(), b.right()) - std::max<double>(a.x, b.x));
  const double iy = std::max(0.0, std::min<double>(a.bottom(), b.bottom()) - std::max<double>(a.y, b.y));
  const double inter = ix * iy;
  const double uni = static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

/// Polygon rasterized inside its own clipped bounding window.
struct Raster {
  BoxI window;
  Mask mask;
  long area = 0;
};

template <typename Scalar>
Raster make_raster(const Polygon<Scalar>& poly, int page_w, int page_h) {
  Raster r;
  if (poly.cols() < 3 || signed_area(poly) == 0.0) return r;
  const Eigen::Matrix2Xd p = poly.template cast<double>();
  const int x0 = std::clamp(static_cast<int>(std::floor(p.row(0).minCoeff())), 0, page_w);
  const int y0 = std::clamp(static_cast<int>(std::floor(p.row(1).minCoeff())), 0, page_h);
  const int x1 = std::clamp(static_cast<int>(std::ceil(p.row(0).maxCoeff())), 0, page_w);
  const int y1 = std::clamp(static_cast<int>(std::ceil(p.row(1).maxCoeff())), 0, page_h);
  r.window = {x0, y0, x1 - x0, y1 - y0};
  if (r.window.w <= 0 || r.window.h <= 0) return r;
  r.mask = rasterize(poly, r.window.w, r.window.h, Eigen::Vector2d(x0, y0));
  r.area = static_cast<long>(r.mask.count());
  return r;
}

double iou_raster(const Raster& a, const Raster& b);

/// IoU of the scanline-rasterized masks at page resolution. Zero-area
/// polygons score 0 against anything.
template <typename Scalar>
double iou_mask(const Polygon<Scalar>& a, const Polygon<Scalar>& b, int page_w, int page_h) {
  return iou_raster(make_raster(a, page_w, page_h), make_raster(b, page_w, page_h));
}

enum class IouType { automatic, box, mask };
enum class MiouMode { instance, pixel };

struct EvalOptions {
  IouType iou_type = IouType::automatic;  // mask when the ground truth is a polygon
  int max_detections = 100;               // per page and category
  MiouMode miou_mode = MiouMode::instance;
  double pixel_score_threshold = 0.5;     // predictions kept for pixel-level mIoU
};

struct CategoryReport {
  long num_gt = 0;
  long num_pred = 0;
  std::optional<double> ap, ap50, ap75, ar, miou;
  /// Interpolated precision at the 101 recall points, per IoU threshold.
  std::vector<std::array<double, kNumRecallPoints>> precision;
  std::array<double, kNumThresholds> recall{};
};

/// Scores; a metric is nullopt when no ground truth defines it.
struct EvalReport {
  std::optional<double> ap, ap50, ap75, ar, miou;
  /// Category-mean interpolated precision per IoU threshold.
  std::vector<std::array<double, kNumRecallPoints>> precision;
  std::map<Category, CategoryReport> categories;

  std::string to_json() const;
  /// AP / AP50 / AP75 / AR / mIoU table, overall row first.
  std::string to_table() const;
};

/// COCO-style evaluation against the ground truth pages. Predictions on pages
/// absent from `truth`, or in categories without ground truth, are ignored.
EvalReport evaluate(const std::vector<Prediction>& preds, const Corpus& truth, const EvalOptions& opts = {});

/// IoU between a prediction and a ground-truth instance under `type`.
double pair_iou(const PredGeometry& pred, const Instance& gt, int page_w, int page_h, IouType type);

std::vector<Prediction> parse_predictions(std::string_view text);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);
std::string predictions_json(const std::vector<Prediction>& preds);

/// Ground truth echoed back as score-1 predictions.
std::vector<Prediction> predictions_from(const Corpus& corpus);

}  // namespace instrsynth
