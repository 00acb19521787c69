#include "property_checks.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "sumrate/cli.hpp"
#include "sumrate/core.hpp"
#include "sumrate/iteration.hpp"

namespace sumrate::testing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void note(PropertyResult& r, double violation, double tol, const std::string& what) {
  if (violation > r.worst) r.worst = violation;
  if (violation > tol && r.passed) {
    r.passed = false;
    r.detail = what;
  }
}

double mismatch(double a, double b) {
  const bool ba = is_bottom(a), bb = is_bottom(b);
  if (ba || bb) return ba == bb ? 0.0 : kInf;
  return std::abs(a - b);
}

struct RandomProfile {
  Eigen::ArrayXd xs, ys;
};

RandomProfile random_profile(std::mt19937_64& rng, int max_points) {
  std::uniform_int_distribution<int> size(1, max_points);
  std::uniform_real_distribution<double> gap(0.01, 1.0), value(-2.0, 2.0), unit(0.0, 1.0);
  const int n = size(rng);
  RandomProfile p{Eigen::ArrayXd(n), Eigen::ArrayXd(n)};
  const bool equispaced = unit(rng) < 0.5;
  double x = value(rng);
  for (int k = 0; k < n; ++k) {
    x += equispaced ? 0.125 : gap(rng);
    p.xs(k) = x;
    p.ys(k) = unit(rng) < 0.2 ? bottom() : value(rng);
  }
  return p;
}

Eigen::ArrayXd envelope_of(const Eigen::ArrayXd& xs, const Eigen::ArrayXd& ys) {
  Eigen::ArrayXd out(ys.size());
  upper_concave_envelope(xs, ys, out);
  return out;
}

double cross(double ou, double ov, double au, double av, double bu, double bv) {
  return (au - ou) * (bv - ov) - (av - ov) * (bu - ou);
}

}  // namespace

Eigen::ArrayXd chord_envelope_1d(const Eigen::ArrayXd& xs, const Eigen::ArrayXd& ys) {
  const Eigen::Index n = xs.size();
  Eigen::ArrayXd out = Eigen::ArrayXd::Constant(n, bottom());
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index a = 0; a <= k; ++a) {
      if (is_bottom(ys(a))) continue;
      for (Eigen::Index b = k; b < n; ++b) {
        if (is_bottom(ys(b))) continue;
        const double v = a == b ? ys(a) : ys(a) + (ys(b) - ys(a)) * (xs(k) - xs(a)) / (xs(b) - xs(a));
        out(k) = std::max(out(k), v);
      }
    }
  return out;
}

std::vector<ExtendedRealD> triple_envelope_2d(const PointCloud2D& cloud, const std::vector<QueryNode>& queries) {
  constexpr double kTol = 1e-12;
  const auto& pts = cloud.points;
  const std::size_t m = pts.size();
  std::vector<ExtendedRealD> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    double best = bottom();
    for (std::size_t a = 0; a < m; ++a) {
      if (std::abs(pts[a].u - q.u) <= kTol && std::abs(pts[a].v - q.v) <= kTol) best = std::max(best, pts[a].rho);
      for (std::size_t b = a + 1; b < m; ++b) {
        const double du = pts[b].u - pts[a].u, dv = pts[b].v - pts[a].v;
        const double len2 = du * du + dv * dv;
        if (len2 > 0 && std::abs(cross(pts[a].u, pts[a].v, pts[b].u, pts[b].v, q.u, q.v)) <= kTol * std::sqrt(len2)) {
          const double t = ((q.u - pts[a].u) * du + (q.v - pts[a].v) * dv) / len2;
          if (t >= -kTol && t <= 1 + kTol) best = std::max(best, pts[a].rho + t * (pts[b].rho - pts[a].rho));
        }
        for (std::size_t c = b + 1; c < m; ++c) {
          const double area = cross(pts[a].u, pts[a].v, pts[b].u, pts[b].v, pts[c].u, pts[c].v);
          if (std::abs(area) <= kTol) continue;
          const double wa = cross(q.u, q.v, pts[b].u, pts[b].v, pts[c].u, pts[c].v) / area;
          const double wb = cross(pts[a].u, pts[a].v, q.u, q.v, pts[c].u, pts[c].v) / area;
          const double wc = 1.0 - wa - wb;
          if (wa < -kTol || wb < -kTol || wc < -kTol) continue;
          best = std::max(best, wa * pts[a].rho + wb * pts[b].rho + wc * pts[c].rho);
        }
      }
    }
    out.emplace_back(best);
  }
  return out;
}

PropertyResult envelope_profile_properties(int profiles, std::uint64_t seed) {
  constexpr double kTol = 1e-12;
  std::mt19937_64 rng(seed);
  PropertyResult r;
  for (int n = 0; n < profiles; ++n) {
    const auto p = random_profile(rng, 64);
    const Eigen::ArrayXd env = envelope_of(p.xs, p.ys);
    const Eigen::ArrayXd again = envelope_of(p.xs, env);
    for (Eigen::Index k = 0; k < p.xs.size(); ++k) {
      if (!is_bottom(p.ys(k)))
        note(r, is_bottom(env(k)) ? kInf : p.ys(k) - env(k), kTol, "majorization fails on profile " + std::to_string(n));
      note(r, mismatch(env(k), again(k)), kTol, "idempotence fails on profile " + std::to_string(n));
    }
    // Finite nodes of the envelope form one contiguous run.
    std::vector<Eigen::Index> fin;
    for (Eigen::Index k = 0; k < env.size(); ++k)
      if (!is_bottom(env(k))) fin.push_back(k);
    if (!fin.empty())
      note(r, fin.back() - fin.front() + 1 == static_cast<Eigen::Index>(fin.size()) ? 0.0 : kInf, kTol,
           "finite support has holes on profile " + std::to_string(n));
    for (std::size_t k = 1; k + 1 < fin.size(); ++k) {
      const Eigen::Index a = fin[k - 1], b = fin[k], c = fin[k + 1];
      const double chord = env(a) + (env(c) - env(a)) * (p.xs(b) - p.xs(a)) / (p.xs(c) - p.xs(a));
      note(r, chord - env(b), kTol, "concavity fails on profile " + std::to_string(n));
    }
  }
  return r;
}

PropertyResult chord_oracle_equivalence(int profiles, std::uint64_t seed) {
  constexpr double kTol = 1e-12;
  std::mt19937_64 rng(seed);
  PropertyResult r;
  for (int n = 0; n < profiles; ++n) {
    const auto p = random_profile(rng, 64);
    const Eigen::ArrayXd env = envelope_of(p.xs, p.ys);
    const Eigen::ArrayXd oracle = chord_envelope_1d(p.xs, p.ys);
    for (Eigen::Index k = 0; k < env.size(); ++k)
      note(r, mismatch(env(k), oracle(k)), kTol, "chord oracle differs on profile " + std::to_string(n));
  }
  return r;
}

PropertyResult triple_oracle_equivalence(int clouds, std::uint64_t seed) {
  constexpr double kTol = 1e-9;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0), value(-1.0, 1.0);
  PropertyResult r;
  for (int n = 0; n < clouds; ++n) {
    PointCloud2D cloud;
    std::vector<QueryNode> queries;
    const int kind = n % 5;
    if (kind == 0 || kind == 3) {
      // 9 x 9 grid: random values, or an affine function (coplanar cloud).
      const double a = value(rng), b = value(rng), c = value(rng);
      const double bottom_share = kind == 0 ? 0.25 * unit(rng) : 0.1;
      for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) {
          const double u = i / 8.0, v = j / 8.0;
          queries.push_back({u, v});
          if (unit(rng) < bottom_share) continue;
          cloud.add(u, v, kind == 0 ? value(rng) : a * u + b * v + c);
        }
    } else if (kind == 1) {
      const int m = 3 + static_cast<int>(unit(rng) * 28);
      for (int k = 0; k < m; ++k) {
        const double u = unit(rng), v = unit(rng);
        cloud.add(u, v, value(rng));
        queries.push_back({u, v});
      }
      for (int k = 0; k < 40; ++k) queries.push_back({unit(rng), unit(rng)});
    } else if (kind == 2) {
      // Collinear projections: one grid row, queried on and off the row.
      const int row = static_cast<int>(unit(rng) * 9);
      for (int i = 0; i < 9; ++i) {
        if (unit(rng) < 0.2) continue;
        cloud.add(i / 8.0, row / 8.0, value(rng));
      }
      for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) queries.push_back({i / 8.0, j / 8.0});
    } else {
      // Few points, including duplicates and a lone point.
      const int m = 1 + static_cast<int>(unit(rng) * 4);
      for (int k = 0; k < m; ++k) {
        const double u = std::round(unit(rng) * 4) / 4, v = std::round(unit(rng) * 4) / 4;
        cloud.add(u, v, value(rng));
      }
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) queries.push_back({i / 4.0, j / 4.0});
    }

    const auto env = upper_concave_envelope_2d(cloud, queries);
    const auto oracle = triple_envelope_2d(cloud, queries);
    for (std::size_t k = 0; k < queries.size(); ++k)
      note(r, mismatch(env[k].raw(), oracle[k].raw()), kTol,
           "triple oracle differs on cloud " + std::to_string(n) + " (kind " + std::to_string(kind) + ")");
  }
  return r;
}

PropertyResult iteration_monotonicity(std::ptrdiff_t grid_size) {
  constexpr double kTol = 1e-12;
  PropertyResult r;
  std::vector<std::pair<std::string, FunctionSpec>> specs{{"and-both", FunctionSpec::and_both()},
                                                          {"and-at-b", FunctionSpec::and_at_b()}};
  for (int bits = 0; bits < 256; ++bits) {
    // Low nibble: f_a, high nibble: f_b, one binary output per input pair.
    std::string table;
    for (int k = 0; k < 8; ++k) table += ((k < 4 ? bits : bits >> 4) >> (k % 4)) & 1 ? '1' : '0';
    specs.emplace_back("custom:" + table, FunctionSpec::from_truth_table(table));
  }

  for (const auto& [name, f] : specs) {
    IterationConfig cfg;
    cfg.grid_size = grid_size;
    cfg.max_messages = 12;
    cfg.tolerance = 1e-13;
    cfg.track_history = true;
    const auto result = iterate(f, cfg);
    for (std::size_t t = 1; t < result.history.size(); ++t) {
      const auto& before = result.history[t - 1].values();
      const auto& after = result.history[t].values();
      for (Eigen::Index k = 0; k < after.size(); ++k) {
        if (is_bottom(before(k))) continue;
        const double drop = is_bottom(after(k)) ? kInf : before(k) - after(k);
        note(r, drop, kTol, name + ": rho decreases at t = " + std::to_string(t));
      }
    }
  }

  for (const auto& f : {FunctionSpec::and_both(), FunctionSpec::and_at_b()}) {
    IterationConfig cfg;
    cfg.grid_size = grid_size;
    cfg.max_messages = 100000;
    cfg.tolerance = 1e-9;
    const auto result = iterate(f, cfg);
    if (!result.trace.converged) note(r, kInf, 0, "iteration did not converge");
    for (Terminal t : {Terminal::A, Terminal::B})
      note(r, sup_change(result.final_field, half_step(result.final_field, t)), cfg.tolerance,
           "converged field moves under a further half-step");
    const RateField once = half_step_A(result.final_field);
    note(r, sup_change(once, half_step_A(once)), kTol, "half-step is not idempotent");
  }
  return r;
}

namespace {

int run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

PropertyResult manifest_determinism(const std::filesystem::path& scratch) {
  PropertyResult r;
  const std::vector<std::pair<std::string, std::vector<std::string>>> runs{
      {"iterate",
       {"iterate", "--function", "and-at-b", "--n", "41", "--t-max", "8", "--oracle", "--history", "--threads", "3"}},
      {"achievability",
       {"achievability", "--p", "0.3", "--q", "0.4", "--messages", "8", "--mc-samples", "2000", "--seed", "7"}},
      {"rd", {"rd", "--mode", "single-terminal", "--p", "0.3", "--np", "21", "--nd", "11"}},
      {"rd-hz", {"rd", "--mode", "hamming-zero", "--function", "and-both", "--n", "11", "--nd", "5", "--t-max", "4"}},
  };
  for (const auto& [tag, args] : runs) {
    auto first = args;
    first.insert(first.end(), {"--out", (scratch / tag).string()});
    if (run_cli(first) != 0) {
      note(r, kInf, 0, tag + ": run failed");
      continue;
    }
    const auto replayed = scratch / (tag + "-replay");
    if (run_cli({"replay", "--manifest", (scratch / tag / "manifest.json").string(), "--out", replayed.string()}) != 0)
      note(r, kInf, 0, tag + ": replay differs");
  }

  // Thread count must not change results.
  const auto single = scratch / "threads-1", many = scratch / "threads-4";
  run_cli({"iterate", "--function", "and-both", "--n", "61", "--t-max", "6", "--threads", "1", "--out", single.string()});
  run_cli({"iterate", "--function", "and-both", "--n", "61", "--t-max", "6", "--threads", "4", "--out", many.string()});
  if (slurp(single / "rho_final.csv").empty() || slurp(single / "rho_final.csv") != slurp(many / "rho_final.csv"))
    note(r, kInf, 0, "thread count changes rho_final.csv");
  return r;
}

std::filesystem::path scratch_directory(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("sumrate-" + tag + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace sumrate::testing
