#pragma once

#include <string>
#include <vector>

#include "sumrate/core.hpp"
#include "sumrate/iteration.hpp"

namespace sumrate {

/// Closed-form infinite-message sum-rates for independent Ber(p), Ber(q) sources.
enum class ClosedForm { AndBoth, AndAtB };

/// AND wanted at both terminals. Zero when p = 0 or q = 0.
double r_star_and_both(double p, double q);
/// AND wanted at terminal B only. Four branches, including the p -> 1-p
/// reflection for p >= 1/2 and h2(p) for q >= 1/2.
double r_star_and_at_b(double p, double q);
double r_star(ClosedForm which, double p, double q);

FunctionSpec function_for(ClosedForm which);

/// rho* = h2(p) + h2(q) - R*(p, q) at every node; always finite.
RateField rho_star_field(const ProductPmfGrid& grid, ClosedForm which);

struct MembershipCheck {
  bool passed = true;
  double worst = 0;  // largest violation found (+inf for a BOTTOM gap)
  Eigen::Index i = -1, j = -1;
};

struct MembershipReport {
  MembershipCheck majorization;      // rho >= rho_0 - slack
  MembershipCheck row_concavity;     // along X-marginal perturbation sets
  MembershipCheck column_concavity;  // along Y-marginal perturbation sets

  bool passed() const { return majorization.passed && row_concavity.passed && column_concavity.passed; }
};

/// Numerical test that rho belongs to the rho_0-majorizing, marginal-perturbation-concave
/// family. Concavity uses the midpoint test on consecutive finite nodes; a
/// BOTTOM node strictly between finite nodes of a line is a violation.
MembershipReport verify_family_membership(const RateField& rho, const FunctionSpec& f, double slack);
/// Same, against an explicit rho_0 (throws std::invalid_argument on grid mismatch).
MembershipReport verify_family_membership(const RateField& rho, const RateField& rho0, double slack);

/// Finite-message sum-rates known exactly for AND at B.
struct Landmark {
  double p, q;
  int messages;
  Terminal opener;  // terminal sending the first message
  double sum_rate;
  std::string note;
};

std::vector<Landmark> landmark_values();

}  // namespace sumrate
