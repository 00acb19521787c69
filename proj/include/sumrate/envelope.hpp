#pragma once

#include <Eigen/Core>
#include <cassert>
#include <stdexcept>
#include <vector>

#include "sumrate/extended_real.hpp"

namespace sumrate {

/// Upper concave envelope of a sampled profile, evaluated back on the same
/// coordinates.
///
/// `xs` must be strictly increasing. Entries of `ys` equal to -inf (BOTTOM)
/// are ignored when hulling; coordinates outside the interval spanned by the
/// finite entries come back as BOTTOM. `out` may alias `ys`.
///
/// Follows the Eigen convention for writable expression arguments, so rows,
/// columns and strided blocks of arrays can be passed directly.
template <typename DerivedX, typename DerivedY, typename DerivedOut>
void upper_concave_envelope(const Eigen::DenseBase<DerivedX>& xs, const Eigen::DenseBase<DerivedY>& ys,
                            const Eigen::DenseBase<DerivedOut>& out_) {
  using Scalar = typename DerivedY::Scalar;
  auto& out = const_cast<Eigen::DenseBase<DerivedOut>&>(out_);
  const Eigen::Index n = xs.size();
  assert(ys.size() == n && out.size() == n);

  // Monotone chain over the finite points; collinear middles are dropped.
  std::vector<Eigen::Index> hull;
  hull.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    if (is_bottom(ys(k))) continue;
    while (hull.size() >= 2) {
      const Eigen::Index a = hull[hull.size() - 2];
      const Eigen::Index b = hull.back();
      const Scalar cross = (xs(b) - xs(a)) * (ys(k) - ys(a)) - (ys(b) - ys(a)) * (xs(k) - xs(a));
      if (cross >= Scalar(0))
        hull.pop_back();
      else
        break;
    }
    hull.push_back(k);
  }

  if (hull.empty()) {
    for (Eigen::Index k = 0; k < n; ++k) out(k) = bottom<Scalar>();
    return;
  }

  // Copy hull vertex values first: `out` may alias `ys`.
  std::vector<Scalar> hy(hull.size());
  for (std::size_t m = 0; m < hull.size(); ++m) hy[m] = ys(hull[m]);

  for (Eigen::Index k = 0; k < hull.front(); ++k) out(k) = bottom<Scalar>();
  for (std::size_t m = 0; m + 1 < hull.size(); ++m) {
    const Eigen::Index a = hull[m], b = hull[m + 1];
    const Scalar xa = xs(a), xb = xs(b), ya = hy[m], yb = hy[m + 1];
    out(a) = ya;
    for (Eigen::Index k = a + 1; k < b; ++k) out(k) = ya + (yb - ya) * ((xs(k) - xa) / (xb - xa));
  }
  out(hull.back()) = hy.back();
  for (Eigen::Index k = hull.back() + 1; k < n; ++k) out(k) = bottom<Scalar>();
}

/// A 1-D profile: strictly increasing coordinates with extended-real values.
struct Profile1D {
  std::vector<double> xs;
  std::vector<ExtendedRealD> ys;

  void validate() const {
    if (xs.size() != ys.size() || xs.empty()) throw std::invalid_argument("profile needs matching, non-empty xs and ys");
    for (std::size_t k = 1; k < xs.size(); ++k)
      if (!(xs[k] > xs[k - 1])) throw std::invalid_argument("profile coordinates must be strictly increasing");
  }
};

Profile1D upper_concave_envelope_1d(const Profile1D& profile);

/// Finite samples (u, v, rho) over a rectangle. BOTTOM samples are simply
/// not stored.
struct PointCloud2D {
  struct Point {
    double u, v, rho;
  };
  struct Rect {
    double u_min = 0, u_max = 1, v_min = 0, v_max = 1;
  };

  std::vector<Point> points;
  Rect domain;

  void add(double u, double v, double rho);
};

struct QueryNode {
  double u, v;
};

/// Least concave majorant of the cloud over its 2-D convex hull, evaluated at
/// each query; BOTTOM outside the hull of the (u, v) projections.
std::vector<ExtendedRealD> upper_concave_envelope_2d(const PointCloud2D& cloud, const std::vector<QueryNode>& queries);

/// Grid form used by the iterations: values(a, b) sits at (us(a), vs(b)),
/// -inf marks BOTTOM, and the envelope is evaluated on the same grid.
Eigen::ArrayXXd upper_concave_envelope_grid(const Eigen::ArrayXd& us, const Eigen::ArrayXd& vs,
                                            const Eigen::ArrayXXd& values);

}  // namespace sumrate
