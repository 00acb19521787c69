// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every tolerance lives in the constants below.

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "property_checks.hpp"
#include "sumrate/achievability.hpp"
#include "sumrate/core.hpp"
#include "sumrate/distortion.hpp"
#include "sumrate/entropy.hpp"
#include "sumrate/iteration.hpp"
#include "sumrate/oracles.hpp"
#include "sumrate/parallel.hpp"

using namespace sumrate;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr double kFloorTol = 0.02;
constexpr double kHalvingLo = 0.35;
constexpr double kHalvingHi = 0.65;
constexpr double kRuntimeLimit = 60.0;
constexpr double kLandmarkTol = 0.01;
constexpr double kMembershipSlack = 1e-9;
constexpr double kIntegralTol = 1e-6;
constexpr double kSchemeTol = 1e-3;
constexpr double kRefinementSlack = 1e-12;
constexpr double kSingleTerminalTol = 0.02;
constexpr double kZeroRateTol = 1e-9;
constexpr double kHammingZeroTol = 1e-9;
constexpr double kWzBelow = 0.03;
constexpr double kWzAbove = 0.05;

constexpr Eigen::Index kCoarse = 201;
constexpr Eigen::Index kFine = 401;
constexpr int kTMax = 50;
constexpr double kTol = 1e-6;

struct Outcome {
  bool passed;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct FloorRun {
  double gap, seconds;
  bool converged;
  int messages;
};

FloorRun floor_run(ClosedForm which, Eigen::Index n) {
  IterationConfig cfg;
  cfg.grid_size = n;
  cfg.max_messages = kTMax;
  cfg.tolerance = kTol;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = iterate(function_for(which), cfg);
  const double secs = seconds_since(t0);
  const double gap = max_oracle_gap(r.final_field, rho_star_field(ProductPmfGrid(n), which));
  return {gap, secs, r.trace.converged, r.messages()};
}

Outcome closed_form_agreement(ClosedForm which) {
  set_thread_count(1);
  const FloorRun coarse = floor_run(which, kCoarse);
  const FloorRun fine = floor_run(which, kFine);
  set_thread_count(0);
  const double ratio = fine.gap / coarse.gap;
  const bool ok = coarse.gap <= kFloorTol && ratio >= kHalvingLo && ratio <= kHalvingHi &&
                  coarse.seconds <= kRuntimeLimit && fine.seconds <= kRuntimeLimit;
  std::ostringstream s;
  s << "N=201 gap " << fmt(coarse.gap) << " after " << coarse.messages << " messages ("
    << (coarse.converged ? "converged" : "tolerance not reached") << ", " << fmt(coarse.seconds) << " s); N=401 gap "
    << fmt(fine.gap) << " (" << fmt(fine.seconds) << " s); floor ratio " << fmt(ratio);
  return {ok, s.str()};
}

Outcome landmarks() {
  IterationConfig cfg;
  cfg.grid_size = kCoarse;
  cfg.max_messages = 2;
  cfg.tolerance = std::numeric_limits<double>::min();
  cfg.track_history = true;
  const auto r = iterate(FunctionSpec::and_at_b(), cfg);
  const ProductPmfGrid grid(kCoarse);
  const RateField one = sum_rate_field(r.history.at(1));
  const RateField two = sum_rate_field(r.history.at(2));
  const Eigen::Index half = grid.nearest(0.5);
  double worst = std::abs(one.values()(half, grid.nearest(0.25)) - 1.0);
  for (double q : {0.1, 0.2, 0.3, 0.4})
    worst = std::max(worst, std::abs(two.values()(half, grid.nearest(q)) - binary_entropy(q)));
  const bool labels = r.history[1].label() == "rho_1^A" && r.history[2].label() == "rho_2^B";
  return {worst <= kLandmarkTol && labels, "worst landmark deviation " + fmt(worst) + " bits, fields " +
                                               r.history[1].label() + ", " + r.history[2].label()};
}

Outcome membership() {
  const ProductPmfGrid grid(kFine);
  bool ok = true;
  std::string detail;
  for (ClosedForm which : {ClosedForm::AndAtB, ClosedForm::AndBoth}) {
    const auto report = verify_family_membership(rho_star_field(grid, which), function_for(which), kMembershipSlack);
    ok = ok && report.passed();
    detail += std::string(which == ClosedForm::AndAtB ? "and-at-b" : "and-both") + " worst violations " +
              fmt(report.majorization.worst) + "/" + fmt(report.row_concavity.worst) + "/" +
              fmt(report.column_concavity.worst) + "; ";
  }
  return {ok, detail + "slack " + fmt(kMembershipSlack)};
}

Outcome achievability_integral() {
  const std::vector<double> sample{0.1, 0.2, 0.3, 0.4, 0.5};
  double worst_integral = 0, worst_scheme = 0, worst_rise = -kInf;
  for (double p : sample)
    for (double q : sample) {
      const auto curve = p <= q ? gamma1(p, q) : gamma2(p, q);
      const double integral = integral_sum_rate(curve, p, q);
      worst_integral = std::max(worst_integral, std::abs(integral - r_star_and_at_b(p, q)));
      double previous = kInf;
      for (int m = 2; m <= 1024; m *= 2) {
        const double total = scheme_sum_rate(curve, p, q, Partition::uniform(m)).total;
        worst_rise = std::max(worst_rise, total - previous);
        previous = total;
      }
      worst_scheme = std::max(worst_scheme, std::abs(previous - integral));
    }
  const bool ok = worst_integral <= kIntegralTol && worst_scheme <= kSchemeTol && worst_rise <= kRefinementSlack;
  return {ok, "integral error " + fmt(worst_integral) + ", m=1024 error " + fmt(worst_scheme) +
                  ", largest change under refinement " + fmt(worst_rise)};
}

RateAllocationCurve random_curve(std::mt19937_64& rng, double p, double q) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int pieces = std::uniform_int_distribution<int>(1, 6)(rng);
  std::vector<double> dx(pieces), dy(pieces);
  for (int k = 0; k < pieces; ++k) {
    dx[k] = unit(rng) < 0.3 ? 0.0 : unit(rng);
    dy[k] = unit(rng) < 0.3 ? 0.0 : unit(rng);
  }
  dx.back() += 1e-3;
  dy.back() += 1e-3;
  double sx = 0, sy = 0;
  for (int k = 0; k < pieces; ++k) sx += dx[k], sy += dy[k];
  const double end_y = unit(rng) * (1.0 - 2.0 * q);
  RateAllocationCurve c{{Eigen::Vector2d::Zero()}, p, q, CurveTarget::AtB};
  Eigen::Vector2d at = Eigen::Vector2d::Zero();
  for (int k = 0; k < pieces; ++k) {
    at += Eigen::Vector2d(dx[k] / sx * (1.0 - p), dy[k] / sy * end_y);
    c.vertices.push_back(at);
  }
  c.vertices.back() = Eigen::Vector2d(1.0 - p, end_y);
  return c;
}

Partition random_partition(std::mt19937_64& rng) {
  const int interior = std::uniform_int_distribution<int>(1, 40)(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> b{0.0, 1.0};
  for (int k = 0; k < interior; ++k) b.push_back(unit(rng));
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return Partition{b};
}

Outcome scheme_correctness() {
  constexpr std::uint64_t kSamples = 100000;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> pq(0.05, 0.45);
  std::uint64_t errors = 0, violations = 0, total = 0;
  std::string kinds;
  for (int config = 0; config < 10; ++config) {
    double p = pq(rng), q = pq(rng);
    RateAllocationCurve curve;
    if (config % 2 == 0) {
      if ((p <= q) != (config % 4 == 0)) std::swap(p, q);
      curve = p <= q ? gamma1(p, q) : gamma2(p, q);
      kinds += p <= q ? '1' : '2';
    } else {
      curve = random_curve(rng, p + 0.5 * (config % 4 == 1 ? p : 0.0), q);
      kinds += 'r';
    }
    curve.validate();
    const Partition partition = random_partition(rng);
    const auto report = monte_carlo_p2_check(curve.p, curve.q, curve, partition, kSamples, rng());
    errors += report.p2_errors;
    violations += report.p1_violations;
    total += report.samples;
  }
  return {errors == 0 && violations == 0, std::to_string(total) + " samples over configs [" + kinds + "], " +
                                              std::to_string(errors) + " P2 errors, " + std::to_string(violations) +
                                              " P1 violations"};
}

double field_gap(const RateField& plain, const RDField& rd) {
  double worst = 0;
  for (Eigen::Index i = 0; i < plain.grid().size(); ++i)
    for (Eigen::Index j = 0; j < plain.grid().size(); ++j) {
      const double a = plain.values()(i, j), b = rd.value(i, j, 0);
      if (is_bottom(a) || is_bottom(b))
        worst = std::max(worst, is_bottom(a) == is_bottom(b) ? 0.0 : kInf);
      else
        worst = std::max(worst, std::abs(a - b));
    }
  return worst;
}

Outcome rate_distortion() {
  const DistortionModel hamming = DistortionModel::hamming_on_x();
  const RDDomain dom = RDDomain::product(201, 1, 101, hamming.d_max);
  IterationConfig one;
  one.max_messages = 1;
  const RDField rate =
      rd_sum_rate(rd_iterate(dom, hamming, FunctionSpec::from_truth_table("00000000"), one).final_field);
  const Eigen::Index i = 60;  // p = 0.3
  const double r01 = rate.value(i, 0, 10);
  const double want = binary_entropy(0.3) - binary_entropy(0.1);
  double worst_zero = 0;
  for (Eigen::Index k = 0; k < dom.n_d; ++k)
    if (dom.d(k) >= 0.3) worst_zero = std::max(worst_zero, std::abs(rate.value(i, 0, k)));

  constexpr Eigen::Index kN = 101;
  double worst_step = 0;
  std::size_t steps = 0;
  for (const auto& f : {FunctionSpec::and_at_b(), FunctionSpec::and_both()}) {
    IterationConfig cfg;
    cfg.grid_size = kN;
    cfg.max_messages = kTMax;
    cfg.tolerance = kTol;
    cfg.track_history = true;
    const auto plain = iterate(f, cfg);
    const auto model = DistortionModel::hamming_on_function(f);
    const auto rd = rd_iterate(RDDomain::product(kN, kN, 11, model.d_max), model, f, cfg);
    if (plain.history.size() != rd.history.size()) worst_step = kInf;
    for (std::size_t t = 0; t < std::min(plain.history.size(), rd.history.size()); ++t)
      worst_step = std::max(worst_step, field_gap(plain.history[t], rd.history[t]));
    steps += plain.history.size();
  }
  const bool ok = std::abs(r01 - want) <= kSingleTerminalTol && worst_zero <= kZeroRateTol &&
                  worst_step <= kHammingZeroTol;
  return {ok, "R(0.1) at p=0.3 " + fmt(r01) + " vs " + fmt(want) + "; max |R| for D>=0.3 " + fmt(worst_zero) +
                  "; hamming-zero vs iterate over " + std::to_string(steps) + " fields " + fmt(worst_step)};
}

Outcome wyner_ziv() {
  const DistortionModel hamming = DistortionModel::hamming_on_x();
  Eigen::Matrix2d channel;
  channel << 0.75, 0.25, 0.25, 0.75;
  const RDDomain dom = RDDomain::fixed_conditional(201, channel, 101, hamming.d_max);
  const auto rates = wyner_ziv_rate(dom, hamming, 0.5);
  std::vector<double> levels;
  for (Eigen::Index k = 0; k < dom.n_d; ++k) levels.push_back(dom.d(k));
  const auto bf = brute_force_wz(0.5, channel, hamming, levels, 3);
  double below = 0, above = 0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    below = std::max(below, bf[k] - rates[k]);
    above = std::max(above, rates[k] - bf[k]);
  }
  return {below <= kWzBelow && above <= kWzAbove,
          "max shortfall below brute force " + fmt(below) + ", max excess " + fmt(above) + " over 101 levels"};
}

Outcome property_suites() {
  using namespace sumrate::testing;
  const std::vector<std::pair<std::string, std::function<PropertyResult()>>> suites{
      {"envelope properties", [] { return envelope_profile_properties(1000, 11); }},
      {"chord oracle", [] { return chord_oracle_equivalence(1000, 12); }},
      {"triple oracle", [] { return triple_oracle_equivalence(60, 13); }},
      {"iteration monotonicity", [] { return iteration_monotonicity(21); }},
      {"manifest determinism", [] { return manifest_determinism(scratch_directory("acceptance")); }},
  };
  bool ok = true;
  std::string detail;
  for (const auto& [name, suite] : suites) {
    const PropertyResult r = suite();
    ok = ok && r.passed;
    detail += name + (r.passed ? " ok" : " FAILED (" + r.detail + ")") + "; ";
  }
  return {ok, detail.substr(0, detail.size() - 2)};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{
      [] { return closed_form_agreement(ClosedForm::AndAtB); },
      [] { return closed_form_agreement(ClosedForm::AndBoth); },
      landmarks,
      membership,
      achievability_integral,
      scheme_correctness,
      rate_distortion,
      wyner_ziv,
      property_suites,
  };
  int failures = 0;
  for (std::size_t n = 0; n < criteria.size(); ++n) {
    Outcome o;
    try {
      o = criteria[n]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.passed;
    std::cout << "criterion " << n + 1 << ' ' << (o.passed ? "PASS" : "FAIL") << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
