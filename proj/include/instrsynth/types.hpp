#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace instrsynth {

/// Row-major 8-bit luminance raster; rows = height, cols = width.
using Image = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Binary raster with the same layout as Image.
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Closed polygon as a 2×N vertex matrix (row 0 = x, row 1 = y). The closing
/// edge from the last vertex back to the first is implicit.
template <typename Scalar>
using Polygon = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;

/// Axis-aligned box covering [x, x+w) × [y, y+h).
template <typename Scalar>
struct Box {
  Scalar x{};
  Scalar y{};
  Scalar w{};
  Scalar h{};

  Scalar right() const { return x + w; }
  Scalar bottom() const { return y + h; }
  Scalar area() const { return w * h; }

  template <typename Other>
  Box<Other> cast() const {
    return {static_cast<Other>(x), static_cast<Other>(y), static_cast<Other>(w),
            static_cast<Other>(h)};
  }

  friend bool operator==(const Box&, const Box&) = default;
};

using BoxI = Box<int>;
using BoxD = Box<double>;
using PolygonI = Polygon<int>;
using PolygonD = Polygon<double>;

template <typename Scalar>
Box<Scalar> intersect(const Box<Scalar>& a, const Box<Scalar>& b) {
  const Scalar x0 = std::max(a.x, b.x);
  const Scalar y0 = std::max(a.y, b.y);
  const Scalar x1 = std::min(a.right(), b.right());
  const Scalar y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return {x0, y0, Scalar{0}, Scalar{0}};
  return {x0, y0, x1 - x0, y1 - y0};
}

/// True when the open interiors overlap; boxes sharing only an edge are disjoint.
template <typename Scalar>
bool overlaps(const Box<Scalar>& a, const Box<Scalar>& b) {
  return a.x < b.right() && b.x < a.right() && a.y < b.bottom() && b.y < a.bottom();
}

template <typename Scalar>
bool contains(const Box<Scalar>& outer, const Box<Scalar>& inner) {
  return inner.x >= outer.x && inner.y >= outer.y && inner.right() <= outer.right() &&
         inner.bottom() <= outer.bottom();
}

/// Annotation and component categories. The first five are the annotated
/// corpus classes; stage_number and assembly_group label pasted components in
/// synthesized pages.
enum class Category {
  speech_bubble,
  part,
  tool,
  symbol,
  text,
  stage_number,
  assembly_group,
};

inline constexpr Category kAllCategories[] = {
    Category::speech_bubble, Category::part,         Category::tool,
    Category::symbol,        Category::text,         Category::stage_number,
    Category::assembly_group};

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view name);

/// Categories a ComponentPatch may carry.
inline bool is_component_category(Category c) {
  return c == Category::speech_bubble || c == Category::stage_number ||
         c == Category::assembly_group;
}

/// Thrown for malformed input data (annotation files, manifests, predictions).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a filesystem read or write fails.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace instrsynth
