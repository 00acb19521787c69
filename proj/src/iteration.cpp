#include "sumrate/iteration.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sumrate/envelope.hpp"
#include "sumrate/parallel.hpp"

namespace sumrate {

namespace {

std::string field_label(int t, Terminal terminal) { return "rho_" + std::to_string(t) + "^" + terminal_name(terminal); }

}  // namespace

void IterationConfig::validate() const {
  if (grid_size < 2) throw std::invalid_argument("grid size must be at least 2");
  if (max_messages < 1) throw std::invalid_argument("max messages must be at least 1");
  if (!(tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
}

RateField half_step_A(const RateField& prev) {
  const Eigen::ArrayXd xs = prev.grid().nodes();
  Eigen::ArrayXXd out(prev.values().rows(), prev.values().cols());
  parallel_for(out.cols(), [&](std::ptrdiff_t j) { upper_concave_envelope(xs, prev.values().col(j), out.col(j)); });
  return RateField(prev.grid(), std::move(out), "rho^A");
}

RateField half_step_B(const RateField& prev) {
  const Eigen::ArrayXd xs = prev.grid().nodes();
  Eigen::ArrayXXd out(prev.values().rows(), prev.values().cols());
  parallel_for(out.rows(), [&](std::ptrdiff_t i) { upper_concave_envelope(xs, prev.values().row(i), out.row(i)); });
  return RateField(prev.grid(), std::move(out), "rho^B");
}

RateField half_step(const RateField& prev, Terminal terminal) {
  return terminal == Terminal::A ? half_step_A(prev) : half_step_B(prev);
}

double sup_change(const RateField& a, const RateField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("sup_change: grid mismatch");
  double worst = 0;
  const auto& x = a.values();
  const auto& y = b.values();
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const bool bx = is_bottom(x(k)), by = is_bottom(y(k));
    if (bx && by) continue;
    if (bx != by) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(x(k) - y(k)));
  }
  return worst;
}

double max_oracle_gap(const RateField& rho, const RateField& oracle) {
  if (!(rho.grid() == oracle.grid())) throw std::invalid_argument("max_oracle_gap: grid mismatch");
  double worst = -std::numeric_limits<double>::infinity();
  const auto& r = rho.values();
  const auto& o = oracle.values();
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    if (is_bottom(o(k))) continue;
    if (is_bottom(r(k))) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, o(k) - r(k));
  }
  return worst;
}

IterationResult iterate(const FunctionSpec& f, const IterationConfig& cfg, const std::optional<RateField>& oracle) {
  cfg.validate();
  const ProductPmfGrid grid(cfg.grid_size);
  if (oracle && !(oracle->grid() == grid)) throw std::invalid_argument("oracle field is on a different grid");

  IterationResult result{{}, rho0_field(grid, f), {}};
  if (cfg.track_history) result.history.push_back(result.final_field);

  Terminal terminal = cfg.start;
  for (int t = 1; t <= cfg.max_messages; ++t, terminal = other(terminal)) {
    const auto started = std::chrono::steady_clock::now();
    RateField next = half_step(result.final_field, terminal).relabeled(field_label(t, terminal));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    const auto& before = result.final_field.values();
    const auto& after = next.values();
    for (Eigen::Index k = 0; k < after.size(); ++k)
      if (!is_bottom(before(k)) && is_bottom(after(k))) throw std::logic_error("envelope step lost finite support");

    TraceRecord rec;
    rec.t = t;
    rec.terminal = terminal;
    rec.sup_change = sup_change(result.final_field, next);
    if (oracle) rec.max_oracle_gap = max_oracle_gap(next, *oracle);
    rec.seconds = seconds;
    result.trace.records.push_back(rec);

    if (cfg.track_history) result.history.push_back(next);
    result.final_field = std::move(next);
    if (rec.sup_change <= cfg.tolerance) {
      result.trace.converged = true;
      break;
    }
  }
  return result;
}

RateField sum_rate_field(const RateField& rho) {
  const auto& grid = rho.grid();
  const Eigen::Index n = grid.size();
  Eigen::ArrayXXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = rho.values()(i, j);
      out(i, j) = is_bottom(r) ? std::numeric_limits<double>::infinity()
                               : conditional_entropy_sum(grid.node(i), grid.node(j)) - r;
    }
  return RateField(grid, std::move(out), "R_sum(" + rho.label() + ")");
}

}  // namespace sumrate
