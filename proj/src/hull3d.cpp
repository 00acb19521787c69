#include "sumrate/hull3d.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace sumrate::geometry {

namespace {

constexpr double kLineTol = 1e3;
constexpr double kFlatTol = 1e2;

struct Face {
  std::array<int, 3> v;
  std::array<int, 3> nb;  // nb[k] is across edge (v[k], v[(k+1)%3])
  Eigen::Vector3d normal;
  double offset = 0;
  std::vector<int> outside;
  bool alive = true;
  int visit = -1;
};

class Builder {
 public:
  Builder(const std::vector<Eigen::Vector3d>& pts, double eps) : pts_(pts), eps_(eps) {}

  double distance(const Face& f, int p) const { return f.normal.dot(pts_[p]) - f.offset; }

  double line_distance(int a, int b, int p) const {
    const Eigen::Vector3d d = pts_[b] - pts_[a];
    const double len = d.norm();
    if (len == 0) return (pts_[p] - pts_[a]).norm();
    return d.cross(pts_[p] - pts_[a]).norm() / len;
  }

  // Whether the cone facet (a, b, apex) would face inwards; only hidden
  // facets g nearly coplanar with the apex can cause that.
  bool flipped(int a, int b, int apex, const Face& g) const {
    if (distance(g, apex) <= -kLineTol * eps_) return false;
    const Eigen::Vector3d n = (pts_[b] - pts_[a]).cross(pts_[apex] - pts_[a]);
    const double len = n.norm();
    return len > 0 && n.dot(interior_ - pts_[a]) / len > -eps_;
  }

  // True when the directed edges a[k] -> b[k] form a single cycle.
  static bool simple_loop(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<std::pair<int, int>> edges;
    for (std::size_t k = 0; k < a.size(); ++k) edges.emplace_back(a[k], b[k]);
    std::sort(edges.begin(), edges.end());
    for (std::size_t k = 1; k < edges.size(); ++k)
      if (edges[k].first == edges[k - 1].first) return false;
    if (edges.empty()) return false;
    int at = edges.front().first;
    for (std::size_t step = 0; step < edges.size(); ++step) {
      const auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(at, -1));
      if (it == edges.end() || it->first != at) return false;
      at = it->second;
      if (at == edges.front().first) return step + 1 == edges.size();
    }
    return false;
  }

  int make_face(int a, int b, int c) {
    Face f;
    f.v = {a, b, c};
    f.nb = {-1, -1, -1};
    Eigen::Vector3d n = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
    const double len = n.norm();
    f.normal = len > 0 ? Eigen::Vector3d(n / len) : Eigen::Vector3d::Zero();
    f.offset = f.normal.dot(pts_[a]);
    faces_.push_back(std::move(f));
    return static_cast<int>(faces_.size()) - 1;
  }

  static int edge_index(const Face& f, int a, int b) {
    for (int k = 0; k < 3; ++k)
      if (f.v[k] == a && f.v[(k + 1) % 3] == b) return k;
    return -1;
  }

  void link(int f, int a, int b, int g) {
    const int k = edge_index(faces_[f], a, b);
    if (k < 0) throw std::logic_error("quickhull: edge not found on face");
    faces_[f].nb[k] = g;
  }

  // Returns the affine dimension of the input and fills `base`.
  int initial_simplex(std::array<int, 4>& s) const {
    const int n = static_cast<int>(pts_.size());
    if (n == 0) return -1;
    auto lex_less = [&](int i, int j) {
      const auto &a = pts_[i], &b = pts_[j];
      return std::tie(a.x(), a.y(), a.z()) < std::tie(b.x(), b.y(), b.z());
    };
    int i0 = 0;
    for (int i = 1; i < n; ++i)
      if (lex_less(i, i0)) i0 = i;
    int i1 = -1;
    double best = eps_;
    for (int i = 0; i < n; ++i) {
      const double d = (pts_[i] - pts_[i0]).norm();
      if (d > best) best = d, i1 = i;
    }
    s[0] = i0;
    if (i1 < 0) return 0;
    s[1] = i1;
    const Eigen::Vector3d dir = (pts_[i1] - pts_[i0]).normalized();
    int i2 = -1;
    best = eps_;
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector3d w = pts_[i] - pts_[i0];
      const double d = (w - w.dot(dir) * dir).norm();
      if (d > best) best = d, i2 = i;
    }
    if (i2 < 0) return 1;
    s[2] = i2;
    const Eigen::Vector3d nrm = (pts_[i1] - pts_[i0]).cross(pts_[i2] - pts_[i0]).normalized();
    int i3 = -1;
    best = kFlatTol * eps_;
    for (int i = 0; i < n; ++i) {
      const double d = std::abs(nrm.dot(pts_[i] - pts_[i0]));
      if (d > best) best = d, i3 = i;
    }
    if (i3 < 0) return 2;
    s[3] = i3;
    return 3;
  }

  void build(std::array<int, 4> s) {
    // Orient the base triangle so the fourth vertex is behind it.
    int a = s[0], b = s[1], c = s[2], d = s[3];
    {
      const Eigen::Vector3d n = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
      if (n.dot(pts_[d] - pts_[a]) > 0) std::swap(b, c);
    }
    interior_ = (pts_[a] + pts_[b] + pts_[c] + pts_[d]) / 4.0;
    const int f0 = make_face(a, b, c);
    const int f1 = make_face(a, d, b);
    const int f2 = make_face(b, d, c);
    const int f3 = make_face(c, d, a);
    link(f0, a, b, f1), link(f1, b, a, f0);
    link(f0, b, c, f2), link(f2, c, b, f0);
    link(f0, c, a, f3), link(f3, a, c, f0);
    link(f1, a, d, f3), link(f3, d, a, f1);
    link(f1, d, b, f2), link(f2, b, d, f1);
    link(f2, d, c, f3), link(f3, c, d, f2);

    const int n = static_cast<int>(pts_.size());
    for (int p = 0; p < n; ++p) {
      if (p == a || p == b || p == c || p == d) continue;
      assign(p, {f0, f1, f2, f3});
    }

    std::vector<int> stack = {f0, f1, f2, f3};
    std::vector<int> visible, horizon_face, horizon_a, horizon_b;
    std::vector<int> start_of(static_cast<std::size_t>(n), -1);
    int round = 0;
    while (!stack.empty()) {
      const int fid = stack.back();
      stack.pop_back();
      if (!faces_[fid].alive || faces_[fid].outside.empty()) continue;

      int apex = -1;
      double far = -1;
      for (int p : faces_[fid].outside) {
        const double dist = distance(faces_[fid], p);
        if (dist > far || (dist == far && p < apex)) far = dist, apex = p;
      }

      // Visible region by flood fill; horizon edges keep the orientation of
      // the visible face they belong to.
      ++round;
      visible.assign(1, fid);
      faces_[fid].visit = round;
      auto flood = [&](std::size_t from) {
        for (std::size_t k = from; k < visible.size(); ++k) {
          const Face& f = faces_[visible[k]];
          for (int e = 0; e < 3; ++e) {
            Face& gf = faces_[f.nb[e]];
            if (gf.visit != round && distance(gf, apex) > eps_) {
              gf.visit = round;
              visible.push_back(f.nb[e]);
            }
          }
        }
      };
      flood(0);
      // Faces within eps of the apex plane can pinch the horizon or leave a
      // hole in the visible region; absorb them until the horizon is a loop.
      for (;;) {
        horizon_face.clear(), horizon_a.clear(), horizon_b.clear();
        for (int v : visible) {
          const Face& f = faces_[v];
          for (int e = 0; e < 3; ++e)
            if (faces_[f.nb[e]].visit != round) {
              horizon_face.push_back(f.nb[e]);
              horizon_a.push_back(f.v[e]);
              horizon_b.push_back(f.v[(e + 1) % 3]);
            }
        }
        const std::size_t before = visible.size();
        // A cone facet over an edge collinear with the apex would be
        // degenerate, and one folding back over its hidden neighbour would
        // face inwards; in both cases that neighbour is coplanar with the
        // apex and is absorbed instead.
        for (std::size_t k = 0; k < horizon_face.size(); ++k) {
          const int g = horizon_face[k];
          if (faces_[g].visit != round && (line_distance(horizon_a[k], horizon_b[k], apex) <= kLineTol * eps_ ||
                                           flipped(horizon_a[k], horizon_b[k], apex, faces_[g]))) {
            faces_[g].visit = round;
            visible.push_back(g);
          }
        }
        if (visible.size() != before) {
          flood(before);
          continue;
        }
        if (simple_loop(horizon_a, horizon_b)) break;
        for (int g : horizon_face)
          if (faces_[g].visit != round && distance(faces_[g], apex) > -eps_) {
            faces_[g].visit = round;
            visible.push_back(g);
          }
        if (visible.size() == before) throw std::runtime_error("quickhull: horizon is not a simple loop");
        flood(before);
      }
      std::vector<int> new_faces;
      new_faces.reserve(horizon_face.size());
      for (std::size_t k = 0; k < horizon_face.size(); ++k) {
        const int ha = horizon_a[k], hb = horizon_b[k];
        const int nf = make_face(ha, hb, apex);
        faces_[nf].nb[0] = horizon_face[k];
        link(horizon_face[k], hb, ha, nf);
        new_faces.push_back(nf);
      }
      // Stitch the cone around the apex; start_of entries from earlier
      // rounds are recognised by their stale visit stamp.
      for (int nf : new_faces) {
        const int ha = faces_[nf].v[0];
        start_of[ha] = nf;
        faces_[nf].visit = -round - 1;
      }
      for (int nf : new_faces) {
        const int hb = faces_[nf].v[1];
        const int next = start_of[hb];
        if (next < 0 || faces_[next].visit != -round - 1) throw std::runtime_error("quickhull: open horizon");
        faces_[nf].nb[1] = next;  // edge (hb, apex)
        faces_[next].nb[2] = nf;  // edge (apex, hb)
      }

      std::vector<int> orphans;
      for (int f : visible) {
        Face& vf = faces_[f];
        vf.alive = false;
        for (int p : vf.outside)
          if (p != apex) orphans.push_back(p);
        vf.outside.clear();
        vf.outside.shrink_to_fit();
      }
      std::sort(orphans.begin(), orphans.end());
      for (int p : orphans) assign(p, new_faces);
      for (int nf : new_faces) {
        faces_[nf].visit = 0;
        if (!faces_[nf].outside.empty()) stack.push_back(nf);
      }
    }
  }


  void assign(int p, const std::vector<int>& candidates) {
    int best_face = -1;
    double best = eps_;
    for (int f : candidates) {
      const double d = distance(faces_[f], p);
      if (d > best) best = d, best_face = f;
    }
    if (best_face >= 0) faces_[best_face].outside.push_back(p);
  }

  std::vector<Face>& faces() { return faces_; }

 private:
  const std::vector<Eigen::Vector3d>& pts_;
  double eps_;
  Eigen::Vector3d interior_ = Eigen::Vector3d::Zero();
  std::vector<Face> faces_;
};

}  // namespace

ConvexHull3::ConvexHull3(const std::vector<Eigen::Vector3d>& points, double eps) : points_(points) {
  Builder b(points_, eps);
  std::array<int, 4> s{};
  dimension_ = b.initial_simplex(s);
  base_ = {s[0], s[1], s[2]};
  if (dimension_ < 3) return;
  b.build(s);
  for (const Face& f : b.faces())
    if (f.alive) facets_.push_back({f.v, f.normal, f.offset});
}

}  // namespace sumrate::geometry
