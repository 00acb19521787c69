#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace sumrate {

/// Which decoding requirement the curve serves. For AND at B the curve ends
/// with beta(1) in [0, 1-q]; when both terminals need the AND it must end at
/// beta(1) = 1-q.
enum class CurveTarget { AtB, Both };

/// Piecewise-linear monotone curve (alpha(s), beta(s)) from (0, 0) to
/// alpha = 1-p, coordinating how far each terminal has described its source.
/// Parameterized by normalized chord length.
struct RateAllocationCurve {
  std::vector<Eigen::Vector2d> vertices;
  double p = 0, q = 0;
  CurveTarget target = CurveTarget::AtB;

  /// Throws std::domain_error when the curve is not a valid allocation curve
  /// for (p, q).
  void validate() const;
  /// Point at parameter s in [0, 1]; s = 1 returns the last vertex exactly.
  Eigen::Vector2d at(double s) const;
};

/// 0 = s_0 < s_1 < ... < s_m = 1. Each interval carries two messages.
struct Partition {
  std::vector<double> breakpoints;

  static Partition uniform(int intervals);
  int intervals() const { return static_cast<int>(breakpoints.size()) - 1; }
  double mesh() const;
  void validate() const;
};

/// Vertices (0,0), (1-p/q, 0), (1-2p, 1-2q), (1-p, 1-2q); needs 0 < p <= q <= 1/2.
RateAllocationCurve gamma1(double p, double q);
/// Vertices (0,0), (0, 1-q/p), (1-2p, 1-2q), (1-p, 1-2q); needs 0 < q <= p <= 1/2.
RateAllocationCurve gamma2(double p, double q);

/// Rate of message 2i (B to A, a horizontal bar), i in 1..m.
double strip_rate_B(const RateAllocationCurve& curve, double p, double q, int i, const Partition& partition);
/// Rate of message 2i-1 (A to B, a vertical bar), i in 1..m.
double strip_rate_A(const RateAllocationCurve& curve, double p, double q, int i, const Partition& partition);

struct SchemeRates {
  std::vector<double> per_message;  // message 1 (from A), 2 (from B), ...
  double total = 0;
};

SchemeRates scheme_sum_rate(const RateAllocationCurve& curve, double p, double q, const Partition& partition);

/// Infinite-message limit: weighted areas of the two regions cut out by the curve.
double integral_sum_rate(const RateAllocationCurve& curve, double p, double q);

struct MonteCarloReport {
  std::uint64_t samples = 0;
  std::uint64_t p2_errors = 0;      // U_t AND Y differs from X AND Y
  std::uint64_t p1_violations = 0;  // U_1 >= U_2 >= ... >= U_t fails
  double error_rate() const { return samples ? static_cast<double>(p2_errors) / static_cast<double>(samples) : 0.0; }
};

/// Simulates the nested-rectangle auxiliaries from uniform (V_x, V_y).
MonteCarloReport monte_carlo_p2_check(double p, double q, const RateAllocationCurve& curve, const Partition& partition,
                                      std::uint64_t samples, std::uint64_t seed);

/// (1 - v) h2(r / (1 - v)): the antiderivative, up to sign, of the weight
/// log2((1 - v) / (1 - r - v)).
double weighted_tail_entropy(double v, double r);

/// log2((1 - v) / (1 - r - v)).
double weight(double v, double r);

}  // namespace sumrate
