#include "sumrate/oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sumrate {

namespace {

constexpr double kSeamTol = 1e-9;
const double kLog2e = std::numbers::log2e;

// h2(p) + p h2(q) + p log2 q + p (1 - c q) log2 e, valid for p <= q; c = 1 or 2.
double and_branch(double p, double q, double c) {
  if (p == 0.0 || q == 0.0) return 0.0;
  return binary_entropy(p) + p * binary_entropy(q) + p * std::log2(q) + p * (1.0 - c * q) * kLog2e;
}

void check_seam(double a, double b, const char* where) {
  if (std::abs(a - b) > kSeamTol) throw std::logic_error(std::string("closed form disagrees across seam: ") + where);
}

}  // namespace

double r_star_and_both(double p, double q) {
  if (!(p >= 0 && p <= 1 && q >= 0 && q <= 1)) throw std::domain_error("r_star_and_both: (p, q) outside [0,1]^2");
  if (p == q) {
    const double v = and_branch(p, q, 1.0);
    check_seam(v, and_branch(q, p, 1.0), "p = q");
    return v;
  }
  return p < q ? and_branch(p, q, 1.0) : and_branch(q, p, 1.0);
}

double r_star_and_at_b(double p, double q) {
  if (!(p >= 0 && p <= 1 && q >= 0 && q <= 1)) throw std::domain_error("r_star_and_at_b: (p, q) outside [0,1]^2");
  if (q >= 0.5) {
    const double v = binary_entropy(p);
    if (q == 0.5) check_seam(v, r_star_and_at_b(p, std::nextafter(0.5, 0.0)), "q = 1/2");
    return v;
  }
  if (p > 0.5) return r_star_and_at_b(1.0 - p, q);
  if (p == q) {
    const double v = and_branch(p, q, 2.0);
    check_seam(v, and_branch(q, p, 2.0), "p = q");
    return v;
  }
  return p < q ? and_branch(p, q, 2.0) : and_branch(q, p, 2.0);
}

double r_star(ClosedForm which, double p, double q) {
  return which == ClosedForm::AndBoth ? r_star_and_both(p, q) : r_star_and_at_b(p, q);
}

FunctionSpec function_for(ClosedForm which) {
  return which == ClosedForm::AndBoth ? FunctionSpec::and_both() : FunctionSpec::and_at_b();
}

RateField rho_star_field(const ProductPmfGrid& grid, ClosedForm which) {
  const Eigen::Index n = grid.size();
  Eigen::ArrayXXd v(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = grid.node(i), q = grid.node(j);
      v(i, j) = conditional_entropy_sum(p, q) - r_star(which, p, q);
    }
  return RateField(grid, std::move(v), "rho_star");
}

namespace {

// Midpoint concavity along a line of n values read through `at(k)`.
template <typename At>
void check_line(Eigen::Index n, At at, double slack, MembershipCheck& check, Eigen::Index line, bool line_is_row) {
  auto record = [&](double violation, Eigen::Index k) {
    if (violation > check.worst || check.i < 0) {
      check.worst = violation;
      check.i = line_is_row ? k : line;
      check.j = line_is_row ? line : k;
    }
    if (violation > slack) check.passed = false;
  };

  Eigen::Index first = -1, last = -1;
  for (Eigen::Index k = 0; k < n; ++k)
    if (!is_bottom(at(k))) {
      if (first < 0) first = k;
      last = k;
    }
  if (first < 0) return;
  for (Eigen::Index k = first + 1; k < last; ++k)
    if (is_bottom(at(k))) record(std::numeric_limits<double>::infinity(), k);

  for (Eigen::Index k = 1; k + 1 < n; ++k) {
    const double a = at(k - 1), b = at(k), c = at(k + 1);
    if (is_bottom(a) || is_bottom(b) || is_bottom(c)) continue;
    record(0.5 * (a + c) - b, k);
  }
}

}  // namespace

MembershipReport verify_family_membership(const RateField& rho, const RateField& rho0, double slack) {
  if (!(rho.grid() == rho0.grid())) throw std::invalid_argument("verify_family_membership: grid mismatch");
  if (slack < 0) throw std::invalid_argument("verify_family_membership: negative slack");
  const Eigen::Index n = rho.grid().size();
  const auto& r = rho.values();
  const auto& r0 = rho0.values();

  MembershipReport report;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      if (is_bottom(r0(i, j))) continue;
      const double deficit = is_bottom(r(i, j)) ? std::numeric_limits<double>::infinity() : r0(i, j) - r(i, j);
      auto& c = report.majorization;
      if (deficit > c.worst || c.i < 0) c.worst = deficit, c.i = i, c.j = j;
      if (deficit > slack) c.passed = false;
    }
  for (Eigen::Index j = 0; j < n; ++j)
    check_line(n, [&](Eigen::Index k) { return r(k, j); }, slack, report.row_concavity, j, true);
  for (Eigen::Index i = 0; i < n; ++i)
    check_line(n, [&](Eigen::Index k) { return r(i, k); }, slack, report.column_concavity, i, false);
  return report;
}

MembershipReport verify_family_membership(const RateField& rho, const FunctionSpec& f, double slack) {
  return verify_family_membership(rho, rho0_field(rho.grid(), f), slack);
}

std::vector<Landmark> landmark_values() {
  return {
      {0.5, 0.25, 1, Terminal::A, 1.0, "one message from A: log2 2"},
      {0.5, 0.25, 2, Terminal::B, binary_entropy(0.25), "two messages, B first, reach h2(q)"},
      {0.3, 0.7, 1, Terminal::A, binary_entropy(0.3), "q >= 1/2: sending X is optimal"},
  };
}

}  // namespace sumrate
