#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "sumrate/extended_real.hpp"
#include "sumrate/function_spec.hpp"
#include "sumrate/iteration.hpp"

namespace sumrate {

/// Single-letter distortion d_B(x, y, z) for terminal B over binary sources
/// and a finite reconstruction alphabet. Terminal A has no distortion
/// constraint (d_A is identically zero).
struct DistortionModel {
  Eigen::Array<double, 4, Eigen::Dynamic> d_b;  // row 2*x + y, column z
  double d_max = 0;

  double at(int x, int y, Eigen::Index z) const { return d_b(2 * x + y, z); }
  Eigen::Index reconstructions() const { return d_b.cols(); }

  void validate() const;

  /// d_max is the largest table entry.
  static DistortionModel from_table(const Eigen::Array<double, 4, Eigen::Dynamic>& table);
  /// 1{x != z}: B reconstructs A's source.
  static DistortionModel hamming_on_x();
  /// 1{f_b(x, y) != z} over the distinct output symbols of f_b.
  static DistortionModel hamming_on_function(const FunctionSpec& f);
  /// Reads whitespace-separated rows "x y z d" (comments start with '#').
  static DistortionModel load(const std::string& path);
};

/// Joint-pmf family swept by the rate-distortion iteration, together with a
/// uniform distortion axis on [0, d_max].
///
/// Product: X ~ Ber(p), Y ~ Ber(q) independent over an n_p x n_q grid; n_q = 1
/// pins q = 0 (no side information).
/// FixedConditional: X ~ Ber(p) over n_p nodes, Y drawn through a fixed
/// channel (rows x, columns y). Only X-marginal perturbations stay inside this
/// family, so it supports one A half-step.
struct RDDomain {
  enum class Family { Product, FixedConditional };

  Family family = Family::Product;
  Eigen::Index n_p = 2, n_q = 1, n_d = 2;
  double d_max = 1;
  Eigen::Matrix2d channel = Eigen::Matrix2d::Identity();

  static RDDomain product(Eigen::Index n_p, Eigen::Index n_q, Eigen::Index n_d, double d_max);
  static RDDomain fixed_conditional(Eigen::Index n_p, const Eigen::Matrix2d& channel, Eigen::Index n_d, double d_max);

  void validate() const;

  double p(Eigen::Index i) const;
  double q(Eigen::Index j) const;
  double d(Eigen::Index k) const;
  Eigen::ArrayXd p_nodes() const;
  Eigen::ArrayXd q_nodes() const;
  Eigen::ArrayXd d_nodes() const;

  /// Joint pmf (rows x, columns y) at parameter node (i, j).
  Eigen::Matrix2d joint(Eigen::Index i, Eigen::Index j) const;
};

/// Field over (p, q, D). slices[j](i, k) is the value at (p_i, q_j, D_k);
/// -inf marks BOTTOM.
class RDField {
 public:
  RDField(RDDomain domain, std::vector<Eigen::ArrayXXd> slices, std::string label);

  const RDDomain& domain() const { return domain_; }
  const std::vector<Eigen::ArrayXXd>& slices() const { return slices_; }
  const Eigen::ArrayXXd& slice(Eigen::Index j) const { return slices_[static_cast<std::size_t>(j)]; }
  const std::string& label() const { return label_; }

  double value(Eigen::Index i, Eigen::Index j, Eigen::Index k) const { return slice(j)(i, k); }
  ExtendedRealD at(Eigen::Index i, Eigen::Index j, Eigen::Index k) const { return ExtendedRealD(value(i, j, k)); }

  RDField relabeled(std::string label) const { return RDField(domain_, slices_, std::move(label)); }

 private:
  RDDomain domain_;
  std::vector<Eigen::ArrayXXd> slices_;
  std::string label_;
};

/// H(X|Y) + H(Y|X) at (i, j, D_k) when f_a is computable at A from X alone and
/// some decoder of Y alone meets E[d_B] <= D; BOTTOM otherwise.
ExtendedRealD rho0_distortion(Eigen::Index i, Eigen::Index j, Eigen::Index k, const RDDomain& domain,
                              const DistortionModel& model, const FunctionSpec& f);
RDField rho0_distortion_field(const RDDomain& domain, const DistortionModel& model, const FunctionSpec& f);

/// Envelope over (p, D) for every q: one message from A.
RDField rd_half_step_A(const RDField& prev);
/// Envelope over (q, D) for every p: one message from B (product family only).
RDField rd_half_step_B(const RDField& prev);

double sup_change(const RDField& a, const RDField& b);

struct RDIterationResult {
  std::vector<RDField> history;  // rho_0 .. rho_t when tracked
  RDField final_field;
  IterationTrace trace;
};

/// Alternating envelopes from rho0_distortion. cfg.grid_size is ignored; the
/// domain fixes the grids. FixedConditional domains allow one A half-step.
RDIterationResult rd_iterate(const RDDomain& domain, const DistortionModel& model, const FunctionSpec& f,
                             const IterationConfig& cfg);

/// H(X|Y) + H(Y|X) - rho per node, +inf where rho is BOTTOM.
RDField rd_sum_rate(const RDField& rho);

/// One-message rate from A over the D grid at the parameter node nearest p_x.
std::vector<double> wyner_ziv_rate(const RDDomain& domain, const DistortionModel& model, double p_x);

/// min I(X;U|Y) over test channels p(u|x) with |U| = u_card in {2, 3} and
/// decoders z(u, y) meeting E[d_B] <= D. Grid search at step 1/64 followed by
/// coordinate descent; +inf when no channel on the search grid meets D.
double brute_force_wz(double p_x, const Eigen::Matrix2d& channel, const DistortionModel& model, double d, int u_card);

/// Same search over several distortion levels at once.
std::vector<double> brute_force_wz(double p_x, const Eigen::Matrix2d& channel, const DistortionModel& model,
                                   const std::vector<double>& levels, int u_card);

}  // namespace sumrate
