#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <utility>

#include "sumrate/entropy.hpp"
#include "sumrate/extended_real.hpp"
#include "sumrate/function_spec.hpp"

namespace sumrate {

/// Uniform N x N grid over product pmfs Ber(p) x Ber(q), p = i/(N-1), q = j/(N-1).
///
/// Row j (fixed q, p varying) is the discretized X-marginal perturbation set;
/// column i (fixed p, q varying) is the Y-marginal perturbation set.
class ProductPmfGrid {
 public:
  explicit ProductPmfGrid(Eigen::Index n) : n_(n) {
    if (n < 2) throw std::invalid_argument("grid size must be at least 2");
  }

  Eigen::Index size() const { return n_; }
  double step() const { return 1.0 / static_cast<double>(n_ - 1); }
  double node(Eigen::Index i) const { return static_cast<double>(i) / static_cast<double>(n_ - 1); }
  Eigen::ArrayXd nodes() const {
    Eigen::ArrayXd a(n_);
    for (Eigen::Index i = 0; i < n_; ++i) a(i) = node(i);
    return a;
  }

  /// Index of the node closest to coordinate x in [0,1].
  Eigen::Index nearest(double x) const;

  friend bool operator==(const ProductPmfGrid&, const ProductPmfGrid&) = default;

 private:
  Eigen::Index n_;
};

/// Extended-real field over a ProductPmfGrid. values()(i, j) is the value at
/// (p_i, q_j); BOTTOM is stored as -inf. Immutable after construction.
class RateField {
 public:
  RateField(ProductPmfGrid grid, Eigen::ArrayXXd values, std::string label)
      : grid_(grid), values_(std::move(values)), label_(std::move(label)) {
    if (values_.rows() != grid_.size() || values_.cols() != grid_.size())
      throw std::invalid_argument("field shape does not match grid");
  }

  const ProductPmfGrid& grid() const { return grid_; }
  const Eigen::ArrayXXd& values() const { return values_; }
  const std::string& label() const { return label_; }

  ExtendedRealD at(Eigen::Index i, Eigen::Index j) const { return ExtendedRealD(values_(i, j)); }
  bool is_bottom(Eigen::Index i, Eigen::Index j) const { return sumrate::is_bottom(values_(i, j)); }

  RateField relabeled(std::string label) const { return RateField(grid_, values_, std::move(label)); }

 private:
  ProductPmfGrid grid_;
  Eigen::ArrayXXd values_;
  std::string label_;
};

/// True iff both functions are computable with zero messages for Ber(p) x Ber(q):
/// f_a(x, .) constant on supp(q) for every x in supp(p), and f_b(., y) constant
/// on supp(p) for every y in supp(q).
bool zero_message_feasible(double p, double q, const FunctionSpec& f);

/// rho_0 = h2(p) + h2(q) on zero-message-feasible nodes, BOTTOM elsewhere.
RateField rho0_field(const ProductPmfGrid& grid, const FunctionSpec& f);

/// Support of Ber(r) as a pair of flags {0 in supp, 1 in supp}.
inline std::pair<bool, bool> bernoulli_support(double r) { return {r != 1.0, r != 0.0}; }

}  // namespace sumrate
