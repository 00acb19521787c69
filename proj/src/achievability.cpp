#include "sumrate/achievability.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "sumrate/entropy.hpp"

namespace sumrate {

namespace {

constexpr double kCurveTol = 1e-12;
constexpr double kQuadTol = 1e-9;

template <typename F>
double simpson_step(const F& f, double a, double fa, double b, double fb, double m, double fm, double whole, double tol,
                    int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::domain_error(what);
}

}  // namespace

double weighted_tail_entropy(double v, double r) {
  require(v < 1.0, "weighted_tail_entropy: v must be below 1");
  const double ratio = r / (1.0 - v);
  require(ratio <= 1.0 + kCurveTol, "weighted_tail_entropy: v beyond 1 - r");
  return (1.0 - v) * binary_entropy(std::min(ratio, 1.0));
}

double weight(double v, double r) { return std::log2((1.0 - v) / (1.0 - r - v)); }

void RateAllocationCurve::validate() const {
  require(vertices.size() >= 2, "curve needs at least two vertices");
  require(p > 0 && p < 1 && q > 0 && q < 1, "curve source parameters must lie in (0,1)");
  require(vertices.front().cwiseAbs().maxCoeff() <= kCurveTol, "curve must start at (0,0)");
  for (std::size_t k = 1; k < vertices.size(); ++k)
    require((vertices[k] - vertices[k - 1]).minCoeff() >= -kCurveTol, "curve components must be non-decreasing");
  const Eigen::Vector2d end = vertices.back();
  require(std::abs(end.x() - (1.0 - p)) <= kCurveTol, "curve must end at alpha = 1-p");
  if (target == CurveTarget::Both) {
    require(std::abs(end.y() - (1.0 - q)) <= kCurveTol, "curve for both terminals must end at beta = 1-q");
  } else {
    require(end.y() >= -kCurveTol && end.y() <= 1.0 - 2.0 * q + kCurveTol, "curve must end with beta in [0, 1-2q]");
  }
}

Eigen::Vector2d RateAllocationCurve::at(double s) const {
  if (s >= 1.0) return vertices.back();
  if (s <= 0.0) return vertices.front();
  double total = 0;
  for (std::size_t k = 1; k < vertices.size(); ++k) total += (vertices[k] - vertices[k - 1]).norm();
  if (total == 0) return vertices.back();
  double remaining = s * total;
  for (std::size_t k = 1; k < vertices.size(); ++k) {
    const double len = (vertices[k] - vertices[k - 1]).norm();
    if (len > 0 && remaining <= len) return vertices[k - 1] + (remaining / len) * (vertices[k] - vertices[k - 1]);
    remaining -= len;
  }
  return vertices.back();
}

Partition Partition::uniform(int intervals) {
  if (intervals < 1) throw std::invalid_argument("partition needs at least one interval");
  Partition part;
  part.breakpoints.resize(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) part.breakpoints[static_cast<std::size_t>(i)] = static_cast<double>(i) / intervals;
  return part;
}

double Partition::mesh() const {
  double m = 0;
  for (std::size_t k = 1; k < breakpoints.size(); ++k) m = std::max(m, breakpoints[k] - breakpoints[k - 1]);
  return m;
}

void Partition::validate() const {
  if (breakpoints.size() < 2 || breakpoints.front() != 0.0 || breakpoints.back() != 1.0)
    throw std::invalid_argument("partition must run from 0 to 1");
  for (std::size_t k = 1; k < breakpoints.size(); ++k)
    if (!(breakpoints[k] > breakpoints[k - 1])) throw std::invalid_argument("partition breakpoints must increase strictly");
}

RateAllocationCurve gamma1(double p, double q) {
  require(0 < p && p <= q && q <= 0.5, "gamma1 needs 0 < p <= q <= 1/2");
  return {{{0, 0}, {1 - p / q, 0}, {1 - 2 * p, 1 - 2 * q}, {1 - p, 1 - 2 * q}}, p, q, CurveTarget::AtB};
}

RateAllocationCurve gamma2(double p, double q) {
  require(0 < q && q <= p && p <= 0.5, "gamma2 needs 0 < q <= p <= 1/2");
  return {{{0, 0}, {0, 1 - q / p}, {1 - 2 * p, 1 - 2 * q}, {1 - p, 1 - 2 * q}}, p, q, CurveTarget::AtB};
}

double strip_rate_B(const RateAllocationCurve& curve, double, double q, int i, const Partition& partition) {
  require(i >= 1 && i <= partition.intervals(), "strip index out of range");
  const auto lo = curve.at(partition.breakpoints[static_cast<std::size_t>(i - 1)]);
  const auto hi = curve.at(partition.breakpoints[static_cast<std::size_t>(i)]);
  const bool singular = curve.target == CurveTarget::Both ? hi.y() > 1.0 - q : hi.y() >= 1.0 - q;
  require(!singular, "strip_rate_B: beta reaches the singularity at 1-q");
  if (hi.y() == lo.y() || hi.x() >= 1.0) return 0.0;
  return (1.0 - hi.x()) * (weighted_tail_entropy(lo.y(), q) - weighted_tail_entropy(hi.y(), q));
}

double strip_rate_A(const RateAllocationCurve& curve, double p, double, int i, const Partition& partition) {
  require(i >= 1 && i <= partition.intervals(), "strip index out of range");
  const auto lo = curve.at(partition.breakpoints[static_cast<std::size_t>(i - 1)]);
  const auto hi = curve.at(partition.breakpoints[static_cast<std::size_t>(i)]);
  require(hi.x() <= 1.0 - p + kCurveTol, "strip_rate_A: alpha beyond 1-p");
  if (hi.x() == lo.x() || lo.y() >= 1.0) return 0.0;
  return (1.0 - lo.y()) * (weighted_tail_entropy(lo.x(), p) - weighted_tail_entropy(hi.x(), p));
}

SchemeRates scheme_sum_rate(const RateAllocationCurve& curve, double p, double q, const Partition& partition) {
  curve.validate();
  partition.validate();
  SchemeRates rates;
  rates.per_message.reserve(2 * static_cast<std::size_t>(partition.intervals()));
  for (int i = 1; i <= partition.intervals(); ++i) {
    rates.per_message.push_back(strip_rate_A(curve, p, q, i, partition));
    rates.per_message.push_back(strip_rate_B(curve, p, q, i, partition));
  }
  for (double r : rates.per_message) rates.total += r;
  return rates;
}

double integral_sum_rate(const RateAllocationCurve& curve, double p, double q) {
  curve.validate();
  double total = 0;
  for (std::size_t k = 1; k < curve.vertices.size(); ++k) {
    const Eigen::Vector2d a = curve.vertices[k - 1], b = curve.vertices[k];
    const double da = b.x() - a.x(), db = b.y() - a.y();

    // Region swept by B's descriptions: width (1 - alpha), weight w_y(beta).
    if (db > 0) {
      if (da == 0) {
        total += (1.0 - a.x()) * (weighted_tail_entropy(a.y(), q) - weighted_tail_entropy(b.y(), q));
      } else {
        total += adaptive_simpson([&](double t) { return (1.0 - (a.x() + t * da)) * weight(a.y() + t * db, q) * db; }, 0.0,
                                  1.0, kQuadTol);
      }
    }
    // Region swept by A's descriptions: height (1 - beta), weight w_x(alpha).
    if (da > 0) {
      if (db == 0) {
        total += (1.0 - a.y()) * (weighted_tail_entropy(a.x(), p) - weighted_tail_entropy(b.x(), p));
      } else {
        total += adaptive_simpson([&](double t) { return (1.0 - (a.y() + t * db)) * weight(a.x() + t * da, p) * da; }, 0.0,
                                  1.0, kQuadTol);
      }
    }
  }
  return total;
}

MonteCarloReport monte_carlo_p2_check(double p, double q, const RateAllocationCurve& curve, const Partition& partition,
                                      std::uint64_t samples, std::uint64_t seed) {
  curve.validate();
  partition.validate();
  const int m = partition.intervals();
  std::vector<double> alpha(static_cast<std::size_t>(m) + 1), beta(static_cast<std::size_t>(m) + 1);
  for (int i = 0; i <= m; ++i) {
    const auto g = curve.at(partition.breakpoints[static_cast<std::size_t>(i)]);
    alpha[static_cast<std::size_t>(i)] = g.x();
    beta[static_cast<std::size_t>(i)] = g.y();
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  MonteCarloReport report;
  report.samples = samples;
  for (std::uint64_t n = 0; n < samples; ++n) {
    const double vx = uniform(rng), vy = uniform(rng);
    const bool x = vx >= 1.0 - p;
    const bool y = vy >= 1.0 - q;
    bool prev = true, chain_ok = true, last = true;
    for (int i = 1; i <= m; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const bool odd = vx >= alpha[ii] && vy >= beta[ii - 1];
      const bool even = vx >= alpha[ii] && vy >= beta[ii];
      if (odd > prev || even > odd) chain_ok = false;
      prev = even;
      last = even;
    }
    if (!chain_ok) ++report.p1_violations;
    if ((last && y) != (x && y)) ++report.p2_errors;
  }
  return report;
}

}  // namespace sumrate
