#include "sumrate/envelope.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "sumrate/hull3d.hpp"

namespace sumrate {

namespace {

// Distance tolerance for the lifted hull, relative to the coordinate scale.
constexpr double kPlaneTol = 1e-12;
// Facets whose unit normal has a smaller rho-component are vertical walls.
constexpr double kUpperNormalTol = 1e-12;
// Query location tolerance (barycentric weights, distance to a carrier line).
constexpr double kLocateTol = 1e-9;

struct Triangle {
  Eigen::Vector2d a, b, c;
  double ra, rb, rc;
};

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Evaluates the max over all triangles containing each query of the linear
// interpolant; BOTTOM where no triangle contains the query.
std::vector<ExtendedRealD> evaluate_triangles(const std::vector<Triangle>& tris, const std::vector<QueryNode>& queries,
                                              double length_tol) {
  std::vector<ExtendedRealD> out(queries.size(), ExtendedRealD::bottom());
  if (tris.empty() || queries.empty()) return out;

  double u0 = queries[0].u, u1 = u0, v0 = queries[0].v, v1 = v0;
  for (const auto& q : queries) {
    u0 = std::min(u0, q.u), u1 = std::max(u1, q.u);
    v0 = std::min(v0, q.v), v1 = std::max(v1, q.v);
  }
  const int side = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(queries.size()))), 1, 1024);
  const double du = (u1 - u0) > 0 ? (u1 - u0) / side : 1.0;
  const double dv = (v1 - v0) > 0 ? (v1 - v0) / side : 1.0;
  auto cell = [&](double x, double lo, double d) { return std::clamp(static_cast<int>(std::floor((x - lo) / d)), 0, side - 1); };

  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(side) * side);
  for (int k = 0; k < static_cast<int>(queries.size()); ++k)
    buckets[static_cast<std::size_t>(cell(queries[k].u, u0, du)) * side + cell(queries[k].v, v0, dv)].push_back(k);

  for (const Triangle& t : tris) {
    const double area = cross2(t.a, t.b, t.c);
    if (!(std::abs(area) > 0)) continue;
    const double tu0 = std::min({t.a.x(), t.b.x(), t.c.x()}) - length_tol;
    const double tu1 = std::max({t.a.x(), t.b.x(), t.c.x()}) + length_tol;
    const double tv0 = std::min({t.a.y(), t.b.y(), t.c.y()}) - length_tol;
    const double tv1 = std::max({t.a.y(), t.b.y(), t.c.y()}) + length_tol;
    if (tu1 < u0 || tu0 > u1 || tv1 < v0 || tv0 > v1) continue;
    const int cu0 = cell(tu0, u0, du), cu1 = cell(tu1, u0, du);
    const int cv0 = cell(tv0, v0, dv), cv1 = cell(tv1, v0, dv);
    for (int cu = cu0; cu <= cu1; ++cu)
      for (int cv = cv0; cv <= cv1; ++cv)
        for (int k : buckets[static_cast<std::size_t>(cu) * side + cv]) {
          const Eigen::Vector2d x(queries[k].u, queries[k].v);
          const double la = cross2(x, t.b, t.c) / area;
          const double lb = cross2(t.a, x, t.c) / area;
          const double lc = 1.0 - la - lb;
          if (la < -kLocateTol || lb < -kLocateTol || lc < -kLocateTol) continue;
          const double value = la * t.ra + lb * t.rb + lc * t.rc;
          if (out[k].is_bottom() || value > out[k].value()) out[k] = value;
        }
  }
  return out;
}

// Cloud points sorted lexicographically by (u, v); duplicates keep the max rho.
std::vector<PointCloud2D::Point> canonical_points(const PointCloud2D& cloud) {
  std::vector<PointCloud2D::Point> pts = cloud.points;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    if (a.u != b.u) return a.u < b.u;
    if (a.v != b.v) return a.v < b.v;
    return a.rho > b.rho;
  });
  auto last = std::unique(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.u == b.u && a.v == b.v; });
  pts.erase(last, pts.end());
  return pts;
}

// Clouds whose projections lie on one line: 1-D envelope along that line.
std::vector<ExtendedRealD> collinear_envelope(const std::vector<PointCloud2D::Point>& pts, const Eigen::Vector2d& origin,
                                              const Eigen::Vector2d& dir, const std::vector<QueryNode>& queries,
                                              double length_tol) {
  std::vector<std::pair<double, double>> line;  // (s, rho)
  line.reserve(pts.size());
  for (const auto& p : pts) line.emplace_back((Eigen::Vector2d(p.u, p.v) - origin).dot(dir), p.rho);
  std::sort(line.begin(), line.end(), [](const auto& a, const auto& b) { return a.first != b.first ? a.first < b.first : a.second > b.second; });
  line.erase(std::unique(line.begin(), line.end(), [](const auto& a, const auto& b) { return a.first == b.first; }), line.end());

  std::vector<std::pair<double, double>> hull;
  for (const auto& c : line) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      if ((b.first - a.first) * (c.second - a.second) - (b.second - a.second) * (c.first - a.first) >= 0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(c);
  }

  std::vector<ExtendedRealD> out(queries.size(), ExtendedRealD::bottom());
  for (std::size_t k = 0; k < queries.size(); ++k) {
    const Eigen::Vector2d w = Eigen::Vector2d(queries[k].u, queries[k].v) - origin;
    const double s = w.dot(dir);
    if ((w - s * dir).norm() > length_tol) continue;
    if (s < hull.front().first - length_tol || s > hull.back().first + length_tol) continue;
    if (hull.size() == 1) {
      out[k] = hull.front().second;
      continue;
    }
    const double sc = std::clamp(s, hull.front().first, hull.back().first);
    auto it = std::upper_bound(hull.begin(), hull.end(), sc, [](double x, const auto& h) { return x < h.first; });
    if (it == hull.end()) --it;
    if (it == hull.begin()) ++it;
    const auto& a = *(it - 1);
    const auto& b = *it;
    out[k] = a.second + (b.second - a.second) * ((sc - a.first) / (b.first - a.first));
  }
  return out;
}

// Fan triangulation of the 2-D convex hull of the projections.
std::vector<Eigen::Vector2d> projected_hull(const std::vector<PointCloud2D::Point>& pts) {
  std::vector<Eigen::Vector2d> sorted;
  sorted.reserve(pts.size());
  for (const auto& p : pts) sorted.emplace_back(p.u, p.v);  // already lexicographic
  std::vector<Eigen::Vector2d> h(2 * sorted.size());
  std::size_t k = 0;
  for (const auto& p : sorted) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = sorted.size() - 1, lo = k + 1; i-- > 0;) {
    while (k >= lo && cross2(h[k - 2], h[k - 1], sorted[i]) <= 0) --k;
    h[k++] = sorted[i];
  }
  h.resize(k - 1);
  return h;
}

}  // namespace

Profile1D upper_concave_envelope_1d(const Profile1D& profile) {
  profile.validate();
  const auto n = static_cast<Eigen::Index>(profile.xs.size());
  const Eigen::Map<const Eigen::ArrayXd> xs(profile.xs.data(), n);
  Eigen::ArrayXd ys(n);
  for (Eigen::Index k = 0; k < n; ++k) ys(k) = profile.ys[static_cast<std::size_t>(k)].raw();
  upper_concave_envelope(xs, ys, ys);
  Profile1D out{profile.xs, {}};
  out.ys.reserve(profile.ys.size());
  for (Eigen::Index k = 0; k < n; ++k) out.ys.emplace_back(ys(k));
  return out;
}

void PointCloud2D::add(double u, double v, double rho) {
  if (is_bottom(rho)) return;
  if (u < domain.u_min || u > domain.u_max || v < domain.v_min || v > domain.v_max)
    throw std::invalid_argument("cloud point outside its domain rectangle");
  points.push_back({u, v, rho});
}

std::vector<ExtendedRealD> upper_concave_envelope_2d(const PointCloud2D& cloud, const std::vector<QueryNode>& queries) {
  std::vector<ExtendedRealD> out(queries.size(), ExtendedRealD::bottom());
  const std::vector<PointCloud2D::Point> pts = canonical_points(cloud);
  if (pts.empty()) return out;

  const double extent = std::max({cloud.domain.u_max - cloud.domain.u_min, cloud.domain.v_max - cloud.domain.v_min, 1e-300});
  const double length_tol = kLocateTol * extent;

  // Affine dimension of the projections.
  const Eigen::Vector2d origin(pts.front().u, pts.front().v);
  std::size_t far = 0;
  double far_d = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double d = (Eigen::Vector2d(pts[k].u, pts[k].v) - origin).norm();
    if (d > far_d) far_d = d, far = k;
  }
  if (far_d <= length_tol) {
    for (std::size_t k = 0; k < queries.size(); ++k)
      if ((Eigen::Vector2d(queries[k].u, queries[k].v) - origin).norm() <= length_tol) out[k] = pts.front().rho;
    return out;
  }
  const Eigen::Vector2d dir = (Eigen::Vector2d(pts[far].u, pts[far].v) - origin) / far_d;
  double off_line = 0;
  for (const auto& p : pts) {
    const Eigen::Vector2d w = Eigen::Vector2d(p.u, p.v) - origin;
    off_line = std::max(off_line, std::abs(w.x() * dir.y() - w.y() * dir.x()));
  }
  if (off_line <= length_tol) return collinear_envelope(pts, origin, dir, queries, length_tol);

  double scale = 1.0;
  std::vector<Eigen::Vector3d> lifted;
  lifted.reserve(pts.size());
  for (const auto& p : pts) {
    lifted.emplace_back(p.u, p.v, p.rho);
    scale = std::max({scale, std::abs(p.u), std::abs(p.v), std::abs(p.rho)});
  }
  const geometry::ConvexHull3 hull(lifted, kPlaneTol * scale);

  std::vector<Triangle> tris;
  if (hull.dimension() == 2) {
    // All lifted points on one non-vertical plane: the envelope is that plane.
    Eigen::MatrixXd a(static_cast<Eigen::Index>(pts.size()), 3);
    Eigen::VectorXd b(a.rows());
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
      const auto& p = pts[static_cast<std::size_t>(k)];
      a.row(k) << p.u, p.v, 1.0;
      b(k) = p.rho;
    }
    const Eigen::Vector3d plane = a.colPivHouseholderQr().solve(b);
    auto eval = [&](const Eigen::Vector2d& x) { return plane(0) * x.x() + plane(1) * x.y() + plane(2); };
    const auto poly = projected_hull(pts);
    for (std::size_t k = 1; k + 1 < poly.size(); ++k)
      tris.push_back({poly[0], poly[k], poly[k + 1], eval(poly[0]), eval(poly[k]), eval(poly[k + 1])});
  } else {
    const auto& hp = hull.points();
    for (const auto& f : hull.facets()) {
      if (f.normal.z() <= kUpperNormalTol) continue;
      const auto& a = hp[static_cast<std::size_t>(f.v[0])];
      const auto& b = hp[static_cast<std::size_t>(f.v[1])];
      const auto& c = hp[static_cast<std::size_t>(f.v[2])];
      tris.push_back({a.head<2>(), b.head<2>(), c.head<2>(), a.z(), b.z(), c.z()});
    }
  }
  return evaluate_triangles(tris, queries, length_tol);
}

Eigen::ArrayXXd upper_concave_envelope_grid(const Eigen::ArrayXd& us, const Eigen::ArrayXd& vs, const Eigen::ArrayXXd& values) {
  if (values.rows() != us.size() || values.cols() != vs.size()) throw std::invalid_argument("grid envelope: shape mismatch");

  // Only points on both their row and column 1-D envelopes can be vertices
  // of the lifted hull; the rest lie under a chord of finite samples.
  Eigen::ArrayXXd along_u(values.rows(), values.cols()), along_v(values.rows(), values.cols());
  for (Eigen::Index b = 0; b < values.cols(); ++b) upper_concave_envelope(us, values.col(b), along_u.col(b));
  for (Eigen::Index a = 0; a < values.rows(); ++a) upper_concave_envelope(vs, values.row(a), along_v.row(a));

  PointCloud2D cloud;
  cloud.domain = {us.minCoeff(), us.maxCoeff(), vs.minCoeff(), vs.maxCoeff()};
  std::vector<QueryNode> queries;
  queries.reserve(static_cast<std::size_t>(values.size()));
  for (Eigen::Index a = 0; a < values.rows(); ++a)
    for (Eigen::Index b = 0; b < values.cols(); ++b) {
      queries.push_back({us(a), vs(b)});
      const double r = values(a, b);
      if (is_bottom(r) || r < along_u(a, b) || r < along_v(a, b)) continue;
      cloud.points.push_back({us(a), vs(b), r});
    }

  const auto env = upper_concave_envelope_2d(cloud, queries);
  Eigen::ArrayXXd out(values.rows(), values.cols());
  std::size_t k = 0;
  for (Eigen::Index a = 0; a < values.rows(); ++a)
    for (Eigen::Index b = 0; b < values.cols(); ++b, ++k) out(a, b) = std::max(env[k].raw(), values(a, b));
  return out;
}

}  // namespace sumrate
