#pragma once

#include "instrsynth/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace instrsynth {

/// Tight bounds of the vertex set. For integer polygons the box covers every
/// pixel whose center can fall inside the polygon.
template <typename Scalar>
Box<Scalar> bounds(const Polygon<Scalar>& poly) {
  if (poly.cols() == 0) return {};
  const auto lo = poly.rowwise().minCoeff();
  const auto hi = poly.rowwise().maxCoeff();
  return {lo(0), lo(1), hi(0) - lo(0), hi(1) - lo(1)};
}

/// Shoelace area, positive for counter-clockwise in y-up coordinates.
template <typename Scalar>
double signed_area(const Polygon<Scalar>& poly) {
  const Eigen::Index n = poly.cols();
  double twice = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = (i + 1) % n;
    twice += static_cast<double>(poly(0, i)) * static_cast<double>(poly(1, j)) -
             static_cast<double>(poly(0, j)) * static_cast<double>(poly(1, i));
  }
  return 0.5 * twice;
}

template <typename Scalar>
Polygon<Scalar> box_polygon(const Box<Scalar>& b) {
  Polygon<Scalar> p(2, 4);
  p << b.x, b.right(), b.right(), b.x,  //
      b.y, b.y, b.bottom(), b.bottom();
  return p;
}

/// Scanline rasterization with the half-open pixel-center rule: pixel (c, r)
/// is set iff its center (c + 0.5, r + 0.5) is inside the polygon under the
/// even-odd rule. Pixels are addressed relative to `origin`, so the result
/// covers [origin.x, origin.x + width) × [origin.y, origin.y + height).
/// Geometry outside that window is clipped.
template <typename Scalar>
Mask rasterize(const Polygon<Scalar>& poly, int width, int height, Eigen::Vector2d origin = {0, 0}) {
  Mask mask = Mask::Zero(height, width);
  const Eigen::Index n = poly.cols();
  if (n < 3 || width <= 0 || height <= 0) return mask;
  const Eigen::Matrix2Xd pts = poly.template cast<double>().colwise() - origin;
  const double ymin = pts.row(1).minCoeff();
  const double ymax = pts.row(1).maxCoeff();
  const int r0 = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
  const int r1 = std::min(height - 1, static_cast<int>(std::ceil(ymax)));
  std::vector<double> xs;
  for (int r = r0; r <= r1; ++r) {
    const double yc = r + 0.5;
    xs.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index j = (i + 1) % n;
      const double y0 = pts(1, i), y1 = pts(1, j);
      if ((y0 <= yc && yc < y1) || (y1 <= yc && yc < y0)) {
        const double x0 = pts(0, i), x1 = pts(0, j);
        xs.push_back(x0 + (yc - y0) * (x1 - x0) / (y1 - y0));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Centers c + 0.5 in [xs[k], xs[k+1]).
      const int c0 = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      const int c1 = std::min(width, static_cast<int>(std::ceil(xs[k + 1] - 0.5)));
      for (int c = c0; c < c1; ++c) mask(r, c) = true;
    }
  }
  return mask;
}

/// Pixel area of the rasterized polygon.
template <typename Scalar>
long raster_area(const Polygon<Scalar>& poly, int width, int height) {
  return static_cast<long>(rasterize(poly, width, height).count());
}

/// Anisotropic scale followed by translation: p ↦ offset + scale ⊙ p.
struct ScaleTranslate {
  Eigen::Vector2d scale{1.0, 1.0};
  Eigen::Vector2d offset{0.0, 0.0};

  template <typename Scalar>
  PolygonD apply(const Polygon<Scalar>& poly) const {
    return (scale.asDiagonal() * poly.template cast<double>()).colwise() + offset;
  }
};

/// Map taking `from` onto `to` corner-to-corner.
ScaleTranslate fit_affine(const BoxD& from, const BoxD& to);

/// Simple polygon check for annotation geometry: at least three distinct
/// vertices, nonzero area, no repeated consecutive vertices, no edge folding
/// back onto its neighbour, and no contact between non-adjacent edges.
bool is_simple(const PolygonI& poly);

/// Convex hull (counter-clockwise in y-up coordinates, no collinear points).
PolygonI convex_hull(const PolygonI& poly);

/// Rounds vertices to integers, clamps them to `clip` (inclusive of its last
/// pixel column/row), and drops repeated or spike vertices. Falls back to the
/// convex hull when rounding leaves a non-simple outline.
PolygonI round_polygon(const PolygonD& poly, const BoxI& clip);

}  // namespace instrsynth
