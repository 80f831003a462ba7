#include "instrsynth/geometry.hpp"

#include <vector>

namespace instrsynth {

namespace {

using Pt = Eigen::Matrix<long long, 2, 1>;

long long cross(const Pt& o, const Pt& a, const Pt& b) {
  return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
}

int sign(long long v) { return (v > 0) - (v < 0); }

bool on_segment(const Pt& p, const Pt& a, const Pt& b) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

// Closed-segment intersection, touching included.
bool segments_meet(const Pt& p1, const Pt& p2, const Pt& q1, const Pt& q2) {
  const int d1 = sign(cross(q1, q2, p1));
  const int d2 = sign(cross(q1, q2, p2));
  const int d3 = sign(cross(p1, p2, q1));
  const int d4 = sign(cross(p1, p2, q2));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment(p1, q1, q2)) return true;
  if (d2 == 0 && on_segment(p2, q1, q2)) return true;
  if (d3 == 0 && on_segment(q1, p1, p2)) return true;
  if (d4 == 0 && on_segment(q2, p1, p2)) return true;
  return false;
}

std::vector<Pt> points_of(const PolygonI& poly) {
  std::vector<Pt> pts;
  pts.reserve(static_cast<std::size_t>(poly.cols()));
  for (Eigen::Index i = 0; i < poly.cols(); ++i) pts.emplace_back(poly(0, i), poly(1, i));
  return pts;
}

PolygonI polygon_of(const std::vector<Pt>& pts) {
  PolygonI poly(2, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    poly(0, static_cast<Eigen::Index>(i)) = static_cast<int>(pts[i].x());
    poly(1, static_cast<Eigen::Index>(i)) = static_cast<int>(pts[i].y());
  }
  return poly;
}

// Drops repeated vertices and vertices where the outline doubles back on itself.
void prune(std::vector<Pt>& pts) {
  bool changed = true;
  while (changed && pts.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < pts.size() && pts.size() >= 3; ++i) {
      const std::size_t n = pts.size();
      const Pt& prev = pts[(i + n - 1) % n];
      const Pt& cur = pts[i];
      const Pt& next = pts[(i + 1) % n];
      const bool repeated = cur == next;
      const bool spike = cross(prev, cur, next) == 0 && (cur - prev).dot(next - cur) <= 0;
      if (repeated || spike) {
        pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  if (pts.size() == 2 && pts[0] == pts[1]) pts.pop_back();
}

}  // namespace

ScaleTranslate fit_affine(const BoxD& from, const BoxD& to) {
  ScaleTranslate t;
  t.scale = {from.w > 0 ? to.w / from.w : 1.0, from.h > 0 ? to.h / from.h : 1.0};
  t.offset = Eigen::Vector2d(to.x, to.y) - t.scale.cwiseProduct(Eigen::Vector2d(from.x, from.y));
  return t;
}

bool is_simple(const PolygonI& poly) {
  const auto pts = points_of(poly);
  const std::size_t n = pts.size();
  if (n < 3) return false;
  if (signed_area(poly) == 0.0) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Pt& a = pts[i];
    const Pt& b = pts[(i + 1) % n];
    const Pt& c = pts[(i + 2) % n];
    if (a == b) return false;
    if (cross(a, b, c) == 0 && (b - a).dot(c - b) < 0) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
      if (segments_meet(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n])) return false;
    }
  }
  return true;
}

PolygonI convex_hull(const PolygonI& poly) {
  auto pts = points_of(poly);
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return polygon_of(pts);
  std::vector<Pt> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Pt& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return polygon_of(hull);
}

PolygonI round_polygon(const PolygonD& poly, const BoxI& clip) {
  std::vector<Pt> pts;
  pts.reserve(static_cast<std::size_t>(poly.cols()));
  for (Eigen::Index i = 0; i < poly.cols(); ++i) {
    const long long x = std::clamp<long long>(std::llround(poly(0, i)), clip.x, clip.right() - 1);
    const long long y = std::clamp<long long>(std::llround(poly(1, i)), clip.y, clip.bottom() - 1);
    pts.emplace_back(x, y);
  }
  prune(pts);
  PolygonI out = polygon_of(pts);
  if (is_simple(out)) return out;
  return convex_hull(out);
}

}  // namespace instrsynth
