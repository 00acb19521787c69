#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sumrate {

/// h2(r) in bits with 0 log 0 := 0. Throws std::domain_error outside [0,1].
template <typename Scalar>
Scalar binary_entropy(Scalar r) {
  if (!(r >= Scalar(0) && r <= Scalar(1))) throw std::domain_error("binary_entropy: argument outside [0,1]");
  if (r == Scalar(0) || r == Scalar(1)) return Scalar(0);
  const Scalar inv_ln2 = Scalar(1) / std::numbers::ln2_v<Scalar>;
  return -(r * std::log(r) + (Scalar(1) - r) * std::log1p(-r)) * inv_ln2;
}

/// -x log2 x with the 0 log 0 convention.
template <typename Scalar>
Scalar entropy_term(Scalar x) {
  if (x <= Scalar(0)) return Scalar(0);
  return -x * std::log(x) / std::numbers::ln2_v<Scalar>;
}

/// H(X|Y) + H(Y|X) for independent X ~ Ber(p), Y ~ Ber(q), i.e. h2(p) + h2(q).
template <typename Scalar>
Scalar conditional_entropy_sum(Scalar p, Scalar q) {
  return binary_entropy(p) + binary_entropy(q);
}

/// H(X|Y) + H(Y|X) for a general 2x2 joint pmf (rows x, columns y).
template <typename Derived>
typename Derived::Scalar conditional_entropy_sum(const Eigen::DenseBase<Derived>& joint) {
  using Scalar = typename Derived::Scalar;
  Scalar h_xy = 0, h_x = 0, h_y = 0;
  for (Eigen::Index x = 0; x < joint.rows(); ++x) h_x += entropy_term<Scalar>(joint.row(x).sum());
  for (Eigen::Index y = 0; y < joint.cols(); ++y) h_y += entropy_term<Scalar>(joint.col(y).sum());
  for (Eigen::Index x = 0; x < joint.rows(); ++x)
    for (Eigen::Index y = 0; y < joint.cols(); ++y) h_xy += entropy_term<Scalar>(joint(x, y));
  return Scalar(2) * h_xy - h_x - h_y;
}

}  // namespace sumrate
