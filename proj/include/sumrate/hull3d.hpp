#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

namespace sumrate::geometry {

/// Quickhull in three dimensions.
///
/// Points closer than `eps` to a facet plane count as on the plane, so exactly
/// coplanar input (common on grids) never creates new facets. Facets near
/// the apex plane that would pinch the horizon or produce degenerate or
/// inward-facing cone facets are replaced as well, which can leave input
/// points outside the hull by a small multiple of `eps`. Input within
/// 100 `eps` of a plane counts as planar: `dimension()` then reports fewer
/// than three dimensions and no facets are produced; callers handle those
/// cases themselves.
class ConvexHull3 {
 public:
  struct Facet {
    std::array<int, 3> v;     // counter-clockwise seen from outside
    Eigen::Vector3d normal;   // unit outward normal
    double offset;            // normal . x == offset on the plane
  };

  ConvexHull3(const std::vector<Eigen::Vector3d>& points, double eps);

  int dimension() const { return dimension_; }
  const std::vector<Facet>& facets() const { return facets_; }
  const std::vector<Eigen::Vector3d>& points() const { return points_; }
  /// Indices of three affinely independent input points (valid when dimension() >= 2).
  std::array<int, 3> base_triangle() const { return base_; }

 private:
  std::vector<Eigen::Vector3d> points_;
  std::vector<Facet> facets_;
  std::array<int, 3> base_{};
  int dimension_ = 0;
};

}  // namespace sumrate::geometry
