#include "sumrate/distortion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "sumrate/entropy.hpp"
#include "sumrate/envelope.hpp"
#include "sumrate/parallel.hpp"

namespace sumrate {

namespace {

constexpr double kFeasibleTol = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform_node(Eigen::Index k, Eigen::Index n, double hi) {
  return n == 1 ? 0.0 : hi * static_cast<double>(k) / static_cast<double>(n - 1);
}

Eigen::ArrayXd uniform_nodes(Eigen::Index n, double hi) {
  Eigen::ArrayXd a(n);
  for (Eigen::Index k = 0; k < n; ++k) a(k) = uniform_node(k, n, hi);
  return a;
}

// Smallest E[d_B] reachable by a decoder that sees only y.
double min_distortion_from_y(const Eigen::Matrix2d& joint, const DistortionModel& model) {
  double total = 0;
  for (int y = 0; y < 2; ++y) {
    double best = kInf;
    for (Eigen::Index z = 0; z < model.reconstructions(); ++z)
      best = std::min(best, joint(0, y) * model.at(0, y, z) + joint(1, y) * model.at(1, y, z));
    total += best;
  }
  return total;
}

bool f_a_computable(const Eigen::Matrix2d& joint, const FunctionSpec& f) {
  for (int x = 0; x < 2; ++x)
    if (joint(x, 0) > 0 && joint(x, 1) > 0 && f.a(x, 0) != f.a(x, 1)) return false;
  return true;
}

std::string rd_label(int t, Terminal terminal) { return "rho_" + std::to_string(t) + "^" + terminal_name(terminal); }

}  // namespace

void DistortionModel::validate() const {
  if (d_b.cols() < 1) throw std::invalid_argument("distortion model needs at least one reconstruction symbol");
  if (!std::isfinite(d_max) || d_max < 0) throw std::invalid_argument("distortion bound must be finite and non-negative");
  for (Eigen::Index k = 0; k < d_b.size(); ++k)
    if (!(d_b(k) >= 0 && d_b(k) <= d_max)) throw std::invalid_argument("distortion entries must lie in [0, d_max]");
}

DistortionModel DistortionModel::from_table(const Eigen::Array<double, 4, Eigen::Dynamic>& table) {
  DistortionModel m{table, table.size() ? table.maxCoeff() : 0.0};
  m.validate();
  return m;
}

DistortionModel DistortionModel::hamming_on_x() {
  Eigen::Array<double, 4, Eigen::Dynamic> t(4, 2);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) t(2 * x + y, z) = x == z ? 0.0 : 1.0;
  return from_table(t);
}

DistortionModel DistortionModel::hamming_on_function(const FunctionSpec& f) {
  std::vector<char> symbols;
  for (char c : f.f_b)
    if (std::find(symbols.begin(), symbols.end(), c) == symbols.end()) symbols.push_back(c);
  // A constant f_b still gets a second, always-wrong symbol so d_max = 1.
  if (symbols.size() == 1) symbols.push_back(static_cast<char>(symbols[0] + 1));
  Eigen::Array<double, 4, Eigen::Dynamic> t(4, static_cast<Eigen::Index>(symbols.size()));
  for (int k = 0; k < 4; ++k)
    for (std::size_t z = 0; z < symbols.size(); ++z) t(k, static_cast<Eigen::Index>(z)) = f.f_b[k] == symbols[z] ? 0.0 : 1.0;
  return from_table(t);
}

DistortionModel DistortionModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open distortion model: " + path);
  std::map<std::tuple<int, int, int>, double> entries;
  int z_max = -1;
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    std::istringstream row(line);
    int x, y, z;
    double d;
    if (!(row >> x)) continue;
    if (!(row >> y >> z >> d) || x < 0 || x > 1 || y < 0 || y > 1 || z < 0)
      throw std::runtime_error("malformed distortion model row: " + line);
    entries[{x, y, z}] = d;
    z_max = std::max(z_max, z);
  }
  if (z_max < 0) throw std::runtime_error("distortion model is empty: " + path);
  Eigen::Array<double, 4, Eigen::Dynamic> t(4, z_max + 1);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z <= z_max; ++z) {
        const auto it = entries.find({x, y, z});
        if (it == entries.end()) throw std::runtime_error("distortion model misses an entry for some (x, y, z)");
        t(2 * x + y, z) = it->second;
      }
  return from_table(t);
}

RDDomain RDDomain::product(Eigen::Index n_p, Eigen::Index n_q, Eigen::Index n_d, double d_max) {
  RDDomain d;
  d.family = Family::Product;
  d.n_p = n_p, d.n_q = n_q, d.n_d = n_d, d.d_max = d_max;
  d.validate();
  return d;
}

RDDomain RDDomain::fixed_conditional(Eigen::Index n_p, const Eigen::Matrix2d& channel, Eigen::Index n_d, double d_max) {
  RDDomain d;
  d.family = Family::FixedConditional;
  d.n_p = n_p, d.n_q = 1, d.n_d = n_d, d.d_max = d_max;
  d.channel = channel;
  d.validate();
  return d;
}

void RDDomain::validate() const {
  if (n_p < 2) throw std::invalid_argument("parameter grid needs at least 2 nodes");
  if (n_q < 1) throw std::invalid_argument("q grid needs at least 1 node");
  if (n_d < 2) throw std::invalid_argument("distortion grid needs at least 2 nodes");
  if (!(d_max > 0) || !std::isfinite(d_max)) throw std::invalid_argument("distortion range must be positive");
  if (family == Family::FixedConditional) {
    if (n_q != 1) throw std::invalid_argument("fixed-conditional domain has no q axis");
    if ((channel.array() < 0).any() || (channel.array() > 1).any() ||
        ((channel.rowwise().sum().array() - 1.0).abs() > 1e-12).any())
      throw std::invalid_argument("channel rows must be pmfs");
  }
}

double RDDomain::p(Eigen::Index i) const { return uniform_node(i, n_p, 1.0); }
double RDDomain::q(Eigen::Index j) const { return uniform_node(j, n_q, 1.0); }
double RDDomain::d(Eigen::Index k) const { return uniform_node(k, n_d, d_max); }
Eigen::ArrayXd RDDomain::p_nodes() const { return uniform_nodes(n_p, 1.0); }
Eigen::ArrayXd RDDomain::q_nodes() const { return uniform_nodes(n_q, 1.0); }
Eigen::ArrayXd RDDomain::d_nodes() const { return uniform_nodes(n_d, d_max); }

Eigen::Matrix2d RDDomain::joint(Eigen::Index i, Eigen::Index j) const {
  const Eigen::Vector2d px(1.0 - p(i), p(i));
  if (family == Family::FixedConditional) return px.asDiagonal() * channel;
  const Eigen::Vector2d qy(1.0 - q(j), q(j));
  return px * qy.transpose();
}

RDField::RDField(RDDomain domain, std::vector<Eigen::ArrayXXd> slices, std::string label)
    : domain_(std::move(domain)), slices_(std::move(slices)), label_(std::move(label)) {
  if (static_cast<Eigen::Index>(slices_.size()) != domain_.n_q) throw std::invalid_argument("one slice per q node expected");
  for (const auto& s : slices_)
    if (s.rows() != domain_.n_p || s.cols() != domain_.n_d) throw std::invalid_argument("slice shape does not match domain");
}

ExtendedRealD rho0_distortion(Eigen::Index i, Eigen::Index j, Eigen::Index k, const RDDomain& domain,
                              const DistortionModel& model, const FunctionSpec& f) {
  const Eigen::Matrix2d joint = domain.joint(i, j);
  if (!f_a_computable(joint, f)) return ExtendedRealD::bottom();
  if (min_distortion_from_y(joint, model) > domain.d(k) + kFeasibleTol) return ExtendedRealD::bottom();
  return ExtendedRealD(conditional_entropy_sum(joint));
}

RDField rho0_distortion_field(const RDDomain& domain, const DistortionModel& model, const FunctionSpec& f) {
  domain.validate();
  model.validate();
  std::vector<Eigen::ArrayXXd> slices(static_cast<std::size_t>(domain.n_q));
  for (Eigen::Index j = 0; j < domain.n_q; ++j) {
    auto& s = slices[static_cast<std::size_t>(j)];
    s.resize(domain.n_p, domain.n_d);
    for (Eigen::Index i = 0; i < domain.n_p; ++i)
      for (Eigen::Index k = 0; k < domain.n_d; ++k) s(i, k) = rho0_distortion(i, j, k, domain, model, f).raw();
  }
  return RDField(domain, std::move(slices), "rho_0");
}

RDField rd_half_step_A(const RDField& prev) {
  const auto& dom = prev.domain();
  const Eigen::ArrayXd ps = dom.p_nodes(), ds = dom.d_nodes();
  std::vector<Eigen::ArrayXXd> out(static_cast<std::size_t>(dom.n_q));
  parallel_for(dom.n_q, [&](std::ptrdiff_t j) {
    out[static_cast<std::size_t>(j)] = upper_concave_envelope_grid(ps, ds, prev.slice(j));
  });
  return RDField(dom, std::move(out), "rho^A");
}

RDField rd_half_step_B(const RDField& prev) {
  const auto& dom = prev.domain();
  if (dom.family != RDDomain::Family::Product)
    throw std::invalid_argument("B half-steps leave the fixed-conditional family");
  const Eigen::ArrayXd qs = dom.q_nodes(), ds = dom.d_nodes();
  std::vector<Eigen::ArrayXXd> out(static_cast<std::size_t>(dom.n_q), Eigen::ArrayXXd(dom.n_p, dom.n_d));
  parallel_for(dom.n_p, [&](std::ptrdiff_t i) {
    Eigen::ArrayXXd line(dom.n_q, dom.n_d);
    for (Eigen::Index j = 0; j < dom.n_q; ++j) line.row(j) = prev.slice(j).row(i);
    const Eigen::ArrayXXd env = upper_concave_envelope_grid(qs, ds, line);
    for (Eigen::Index j = 0; j < dom.n_q; ++j) out[static_cast<std::size_t>(j)].row(i) = env.row(j);
  });
  return RDField(dom, std::move(out), "rho^B");
}

double sup_change(const RDField& a, const RDField& b) {
  if (a.slices().size() != b.slices().size()) throw std::invalid_argument("sup_change: domain mismatch");
  double worst = 0;
  for (std::size_t j = 0; j < a.slices().size(); ++j) {
    const auto& x = a.slices()[j];
    const auto& y = b.slices()[j];
    if (x.rows() != y.rows() || x.cols() != y.cols()) throw std::invalid_argument("sup_change: domain mismatch");
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const bool bx = is_bottom(x(k)), by = is_bottom(y(k));
      if (bx && by) continue;
      if (bx != by) return kInf;
      worst = std::max(worst, std::abs(x(k) - y(k)));
    }
  }
  return worst;
}

RDIterationResult rd_iterate(const RDDomain& domain, const DistortionModel& model, const FunctionSpec& f,
                             const IterationConfig& cfg) {
  if (cfg.max_messages < 1) throw std::invalid_argument("max messages must be at least 1");
  if (!(cfg.tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
  if (domain.family == RDDomain::Family::FixedConditional && (cfg.max_messages > 1 || cfg.start != Terminal::A))
    throw std::invalid_argument("fixed-conditional domains support a single A half-step");

  RDIterationResult result{{}, rho0_distortion_field(domain, model, f), {}};
  if (cfg.track_history) result.history.push_back(result.final_field);

  Terminal terminal = cfg.start;
  for (int t = 1; t <= cfg.max_messages; ++t, terminal = other(terminal)) {
    const auto started = std::chrono::steady_clock::now();
    RDField next = (terminal == Terminal::A ? rd_half_step_A(result.final_field) : rd_half_step_B(result.final_field))
                       .relabeled(rd_label(t, terminal));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    for (std::size_t j = 0; j < next.slices().size(); ++j) {
      const auto& before = result.final_field.slices()[j];
      const auto& after = next.slices()[j];
      for (Eigen::Index k = 0; k < after.size(); ++k)
        if (!is_bottom(before(k)) && is_bottom(after(k))) throw std::logic_error("envelope step lost finite support");
    }

    TraceRecord rec;
    rec.t = t;
    rec.terminal = terminal;
    rec.sup_change = sup_change(result.final_field, next);
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

RDField rd_sum_rate(const RDField& rho) {
  const auto& dom = rho.domain();
  std::vector<Eigen::ArrayXXd> out(rho.slices());
  for (Eigen::Index j = 0; j < dom.n_q; ++j)
    for (Eigen::Index i = 0; i < dom.n_p; ++i) {
      const double h = conditional_entropy_sum(dom.joint(i, j));
      for (Eigen::Index k = 0; k < dom.n_d; ++k) {
        double& v = out[static_cast<std::size_t>(j)](i, k);
        v = is_bottom(v) ? kInf : h - v;
      }
    }
  return RDField(dom, std::move(out), "R_sum(" + rho.label() + ")");
}

std::vector<double> wyner_ziv_rate(const RDDomain& domain, const DistortionModel& model, double p_x) {
  if (domain.family != RDDomain::Family::FixedConditional)
    throw std::invalid_argument("wyner_ziv_rate needs a fixed-conditional domain");
  const double pos = p_x * static_cast<double>(domain.n_p - 1);
  const auto i = static_cast<Eigen::Index>(std::lround(pos));
  if (!(p_x >= 0 && p_x <= 1) || std::abs(pos - static_cast<double>(i)) > 1e-9)
    throw std::invalid_argument("p_x must be a node of the parameter grid");

  IterationConfig cfg;
  cfg.max_messages = 1;
  const RDField rate = rd_sum_rate(rd_iterate(domain, model, FunctionSpec::from_truth_table("00000000"), cfg).final_field);
  std::vector<double> out(static_cast<std::size_t>(domain.n_d));
  for (Eigen::Index k = 0; k < domain.n_d; ++k) out[static_cast<std::size_t>(k)] = rate.value(i, 0, k);
  return out;
}

namespace {

// Test channel p(u|x): row x, column u.
using TestChannel = Eigen::Matrix<double, 2, Eigen::Dynamic, Eigen::RowMajor, 2, 3>;

struct WzEval {
  double rate, distortion;
};

class WzProblem {
 public:
  WzProblem(double p_x, const Eigen::Matrix2d& channel, const DistortionModel& model) : model_(model) {
    joint_xy_ = Eigen::Vector2d(1.0 - p_x, p_x).asDiagonal() * channel;
    h_x_given_y_ = 0;
    for (int y = 0; y < 2; ++y) {
      const double py = joint_xy_.col(y).sum();
      h_x_given_y_ += entropy_term(joint_xy_(0, y)) + entropy_term(joint_xy_(1, y)) - entropy_term(py);
    }
  }

  // I(X;U|Y) = H(X|Y) - H(X|U,Y), and the best decoder z(u, y).
  WzEval evaluate(const TestChannel& c) const {
    double h_x_given_uy = 0, distortion = 0;
    for (Eigen::Index u = 0; u < c.cols(); ++u)
      for (int y = 0; y < 2; ++y) {
        const double m0 = joint_xy_(0, y) * c(0, u), m1 = joint_xy_(1, y) * c(1, u);
        h_x_given_uy += entropy_term(m0) + entropy_term(m1) - entropy_term(m0 + m1);
        double best = kInf;
        for (Eigen::Index z = 0; z < model_.reconstructions(); ++z)
          best = std::min(best, m0 * model_.at(0, y, z) + m1 * model_.at(1, y, z));
        distortion += best;
      }
    return {std::max(0.0, h_x_given_y_ - h_x_given_uy), distortion};
  }

 private:
  const DistortionModel& model_;
  Eigen::Matrix2d joint_xy_;
  double h_x_given_y_;
};

// Every row-stochastic |U|-column channel with entries on the 1/steps lattice.
std::vector<TestChannel> lattice_channels(int u_card, int steps) {
  std::vector<Eigen::RowVectorXd> rows;
  if (u_card == 2) {
    for (int a = 0; a <= steps; ++a) {
      Eigen::RowVectorXd r(2);
      r << 1.0 - a / static_cast<double>(steps), a / static_cast<double>(steps);
      rows.push_back(r);
    }
  } else {
    for (int a = 0; a <= steps; ++a)
      for (int b = 0; a + b <= steps; ++b) {
        Eigen::RowVectorXd r(3);
        r << a / static_cast<double>(steps), b / static_cast<double>(steps), (steps - a - b) / static_cast<double>(steps);
        rows.push_back(r);
      }
  }
  std::vector<TestChannel> out;
  out.reserve(rows.size() * rows.size());
  for (const auto& r0 : rows)
    for (const auto& r1 : rows) {
      TestChannel c(2, u_card);
      c.row(0) = r0;
      c.row(1) = r1;
      out.push_back(c);
    }
  return out;
}

TestChannel refine(const WzProblem& problem, TestChannel c, double level, double step0, int rounds) {
  // Elementary moves shift mass between two columns of one row. A move that
  // breaks the distortion constraint is repaired by bisecting on the amount
  // of a second move, so the search can slide along the constraint.
  struct Move {
    int x;
    Eigen::Index from, to;
  };
  std::vector<Move> moves;
  for (int x = 0; x < 2; ++x)
    for (Eigen::Index from = 0; from < c.cols(); ++from)
      for (Eigen::Index to = 0; to < c.cols(); ++to)
        if (from != to) moves.push_back({x, from, to});
  auto apply = [](TestChannel t, const Move& m, double step) {
    const double amount = std::min(step, t(m.x, m.from));
    t(m.x, m.from) -= amount;
    t(m.x, m.to) += amount;
    return t;
  };
  auto feasible = [level](const WzEval& e) { return e.distortion <= level + kFeasibleTol; };

  WzEval cur = problem.evaluate(c);
  double step = step0;
  for (int round = 0; round < rounds; ++round) {
    bool improved = false;
    auto offer = [&](const TestChannel& t, const WzEval& e) {
      if (feasible(e) && e.rate < cur.rate) {
        c = t;
        cur = e;
        improved = true;
      }
    };
    for (const Move& a : moves) {
      const TestChannel base = apply(c, a, step);
      const WzEval base_eval = problem.evaluate(base);
      offer(base, base_eval);
      for (const Move& b : moves) {
        if (feasible(base_eval)) {
          for (double ratio : {0.5, 1.0, 2.0}) {
            const TestChannel t = apply(base, b, ratio * step);
            offer(t, problem.evaluate(t));
          }
          continue;
        }
        double lo = 0, hi = 4 * step;
        TestChannel t = apply(base, b, hi);
        WzEval e = problem.evaluate(t);
        if (!feasible(e)) continue;
        for (int it = 0; it < 50; ++it) {
          const double mid = 0.5 * (lo + hi);
          const TestChannel tm = apply(base, b, mid);
          const WzEval em = problem.evaluate(tm);
          if (feasible(em)) {
            hi = mid;
            t = tm;
            e = em;
          } else {
            lo = mid;
          }
        }
        offer(t, e);
      }
    }
    if (!improved) step *= 0.5;
  }
  return c;
}

}  // namespace

std::vector<double> brute_force_wz(double p_x, const Eigen::Matrix2d& channel, const DistortionModel& model,
                                   const std::vector<double>& levels, int u_card) {
  if (u_card != 2 && u_card != 3) throw std::invalid_argument("brute_force_wz: u_card must be 2 or 3");
  if (!(p_x >= 0 && p_x <= 1)) throw std::invalid_argument("brute_force_wz: p_x outside [0,1]");
  model.validate();
  constexpr int kSteps = 64;
  constexpr int kRounds = 200;

  std::vector<std::size_t> order(levels.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return levels[a] < levels[b]; });
  std::vector<double> sorted(levels.size());
  for (std::size_t k = 0; k < order.size(); ++k) sorted[k] = levels[order[k]];

  // Bucket each lattice channel by the first level it meets, then sweep
  // prefix minima so every level sees all channels that meet it.
  const WzProblem problem(p_x, channel, model);
  const auto candidates = lattice_channels(u_card, kSteps);
  std::vector<double> bucket_rate(sorted.size(), kInf);
  std::vector<std::ptrdiff_t> bucket_arg(sorted.size(), -1);
  for (std::size_t n = 0; n < candidates.size(); ++n) {
    const WzEval e = problem.evaluate(candidates[n]);
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), e.distortion - kFeasibleTol);
    if (it == sorted.end()) continue;
    const auto b = static_cast<std::size_t>(it - sorted.begin());
    if (e.rate < bucket_rate[b]) bucket_rate[b] = e.rate, bucket_arg[b] = static_cast<std::ptrdiff_t>(n);
  }

  std::vector<double> out(levels.size(), kInf);
  double best = kInf;
  std::ptrdiff_t arg = -1;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (bucket_rate[k] < best) best = bucket_rate[k], arg = bucket_arg[k];
    if (arg < 0) continue;
    const TestChannel c = refine(problem, candidates[static_cast<std::size_t>(arg)], sorted[k], 1.0 / kSteps, kRounds);
    out[order[k]] = std::min(best, problem.evaluate(c).rate);
  }
  return out;
}

double brute_force_wz(double p_x, const Eigen::Matrix2d& channel, const DistortionModel& model, double d, int u_card) {
  return brute_force_wz(p_x, channel, model, std::vector<double>{d}, u_card).front();
}

}  // namespace sumrate
