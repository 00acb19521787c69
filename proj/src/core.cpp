#include "sumrate/core.hpp"

#include <algorithm>
#include <cmath>

namespace sumrate {

Eigen::Index ProductPmfGrid::nearest(double x) const {
  const auto i = static_cast<Eigen::Index>(std::lround(x * static_cast<double>(n_ - 1)));
  return std::clamp<Eigen::Index>(i, 0, n_ - 1);
}

bool zero_message_feasible(double p, double q, const FunctionSpec& f) {
  const auto [x0, x1] = bernoulli_support(p);
  const auto [y0, y1] = bernoulli_support(q);
  const bool in_x[2] = {x0, x1};
  const bool in_y[2] = {y0, y1};

  for (int x = 0; x < 2; ++x) {
    if (!in_x[x] || !in_y[0] || !in_y[1]) continue;
    if (f.a(x, 0) != f.a(x, 1)) return false;
  }
  for (int y = 0; y < 2; ++y) {
    if (!in_y[y] || !in_x[0] || !in_x[1]) continue;
    if (f.b(0, y) != f.b(1, y)) return false;
  }
  return true;
}

RateField rho0_field(const ProductPmfGrid& grid, const FunctionSpec& f) {
  const Eigen::Index n = grid.size();
  Eigen::ArrayXXd v(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double q = grid.node(j);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = grid.node(i);
      v(i, j) = zero_message_feasible(p, q, f) ? conditional_entropy_sum(p, q) : bottom();
    }
  }
  return RateField(grid, std::move(v), "rho_0");
}

}  // namespace sumrate
