#include "sumrate/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "sumrate/achievability.hpp"
#include "sumrate/distortion.hpp"
#include "sumrate/field_io.hpp"
#include "sumrate/iteration.hpp"
#include "sumrate/oracles.hpp"
#include "sumrate/parallel.hpp"

namespace sumrate::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Collects output files of one run and writes its manifest.
class Run {
 public:
  Run(std::string subcommand, json params, std::optional<fs::path> dir, std::ostream& out)
      : subcommand_(std::move(subcommand)), params_(std::move(params)), dir_(std::move(dir)), out_(out) {
    if (dir_) {
      std::error_code ec;
      fs::create_directories(*dir_, ec);
      if (ec) throw std::runtime_error("cannot create " + dir_->string() + ": " + ec.message());
    }
  }

  const json& params() const { return params_; }
  std::ostream& out() { return out_; }
  bool writes_files() const { return dir_.has_value(); }

  std::string file(const std::string& name) {
    outputs_.push_back(name);
    return (*dir_ / name).string();
  }

  void finish(double seconds) {
    if (!dir_) return;
    json m;
    m["subcommand"] = subcommand_;
    m["parameters"] = params_;
    m["seed"] = params_.value("seed", std::uint64_t{0});
    m["version"] = kVersion;
    m["wall_time_seconds"] = seconds;
    m["outputs"] = outputs_;
    const std::string path = (*dir_ / "manifest.json").string();
    std::ofstream f(path, std::ios::binary);
    f << m.dump(2) << '\n';
    if (!f) throw std::runtime_error("cannot write " + path);
  }

 private:
  std::string subcommand_;
  json params_;
  std::optional<fs::path> dir_;
  std::ostream& out_;
  std::vector<std::string> outputs_;
};

Terminal parse_terminal(const std::string& s) {
  if (s == "A") return Terminal::A;
  if (s == "B") return Terminal::B;
  throw UsageError("terminal must be A or B");
}

std::optional<ClosedForm> closed_form_for(const std::string& function) {
  if (function == "and-both") return ClosedForm::AndBoth;
  if (function == "and-at-b") return ClosedForm::AndAtB;
  return std::nullopt;
}

void run_iterate(Run& run) {
  const json& p = run.params();
  const std::string function = p.at("function");
  const FunctionSpec f = FunctionSpec::parse(function);

  IterationConfig cfg;
  cfg.grid_size = p.at("n");
  cfg.max_messages = p.at("t_max");
  cfg.tolerance = p.at("tol");
  cfg.start = parse_terminal(p.at("start"));
  cfg.track_history = p.at("history");

  std::optional<RateField> oracle;
  if (p.at("oracle").get<bool>()) {
    const auto which = closed_form_for(function);
    if (!which) throw UsageError("--oracle needs --function and-both or and-at-b");
    oracle = rho_star_field(ProductPmfGrid(cfg.grid_size), *which);
  }

  const IterationResult result = iterate(f, cfg, oracle);
  write_field_csv(run.file("rho_final.csv"), result.final_field);
  write_field_csv(run.file("rsum_final.csv"), sum_rate_field(result.final_field));
  write_trace_csv(run.file("trace.csv"), result.trace);
  for (std::size_t t = 0; t < result.history.size(); ++t)
    write_field_csv(run.file("rho_" + std::to_string(t) + ".csv"), result.history[t]);

  run.out() << "final " << result.final_field.label() << " after " << result.messages() << " messages, "
            << (result.trace.converged ? "converged" : "not converged") << '\n';
  if (oracle && !result.trace.records.empty())
    run.out() << "max oracle gap " << format_double(*result.trace.records.back().max_oracle_gap) << '\n';
}

RateAllocationCurve load_curve(const std::string& path, double p, double q, CurveTarget target) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open curve file: " + path);
  RateAllocationCurve curve{{}, p, q, target};
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    std::istringstream row(line);
    double a, b;
    if (!(row >> a)) continue;
    if (!(row >> b)) throw std::runtime_error("malformed curve row: " + line);
    curve.vertices.emplace_back(a, b);
  }
  return curve;
}

void run_achievability(Run& run) {
  const json& prm = run.params();
  const double p = prm.at("p"), q = prm.at("q");
  const std::string curve_name = prm.at("curve");
  const std::string messages = prm.at("messages");
  const CurveTarget target = prm.at("target") == "both" ? CurveTarget::Both : CurveTarget::AtB;

  RateAllocationCurve curve;
  if (curve_name == "gamma1")
    curve = gamma1(p, q);
  else if (curve_name == "gamma2")
    curve = gamma2(p, q);
  else if (curve_name.rfind("file:", 0) == 0)
    curve = load_curve(curve_name.substr(5), p, q, target);
  else
    throw UsageError("--curve must be gamma1, gamma2 or file:<path>");

  int intervals = prm.at("mc_intervals");
  std::ostream& out = run.out();
  if (messages == "integral") {
    const double v = integral_sum_rate(curve, p, q);
    out << "integral sum-rate " << format_double(v) << '\n';
    if (run.writes_files()) write_columns_csv(run.file("integral.csv"), "p", {p}, "sum_rate", {v});
  } else {
    int t = 0;
    try {
      std::size_t used = 0;
      t = std::stoi(messages, &used);
      if (used != messages.size()) throw std::invalid_argument(messages);
    } catch (const std::exception&) {
      throw UsageError("--messages must be a positive even integer or 'integral'");
    }
    if (t < 2 || t % 2) throw UsageError("--messages must be a positive even integer or 'integral'");
    intervals = t / 2;
    const SchemeRates rates = scheme_sum_rate(curve, p, q, Partition::uniform(intervals));
    std::vector<double> index;
    for (std::size_t k = 0; k < rates.per_message.size(); ++k) {
      index.push_back(static_cast<double>(k + 1));
      out << "message " << k + 1 << " from " << (k % 2 ? 'B' : 'A') << ' ' << format_double(rates.per_message[k]) << '\n';
    }
    out << "total " << format_double(rates.total) << '\n';
    if (run.writes_files()) write_columns_csv(run.file("rates.csv"), "message", index, "rate", rates.per_message);
  }

  const std::uint64_t samples = prm.at("mc_samples");
  if (samples > 0) {
    const auto report = monte_carlo_p2_check(p, q, curve, Partition::uniform(intervals), samples, prm.at("seed"));
    out << "monte carlo samples " << report.samples << " p2_errors " << report.p2_errors << " p1_violations "
        << report.p1_violations << '\n';
    if (run.writes_files()) {
      std::ofstream f(run.file("monte_carlo.csv"), std::ios::binary);
      f << "samples,p2_errors,p1_violations\n" << report.samples << ',' << report.p2_errors << ',' << report.p1_violations << '\n';
    }
  }
}

DistortionModel model_from(const json& prm, const DistortionModel& fallback) {
  const std::string path = prm.at("model");
  return path.empty() ? fallback : DistortionModel::load(path);
}

void write_rate_table(Run& run, const RDDomain& dom, const std::vector<double>& rates,
                      const std::vector<double>* brute_force) {
  std::ostringstream csv;
  csv << "D,rate" << (brute_force ? ",brute_force" : "") << '\n';
  for (Eigen::Index k = 0; k < dom.n_d; ++k) {
    csv << format_double(dom.d(k)) << ',' << format_double(rates[static_cast<std::size_t>(k)]);
    if (brute_force) csv << ',' << format_double((*brute_force)[static_cast<std::size_t>(k)]);
    csv << '\n';
  }
  run.out() << csv.str();
  if (run.writes_files()) {
    std::ofstream f(run.file("rate.csv"), std::ios::binary);
    f << csv.str();
  }
}

Eigen::Index parameter_node(const RDDomain& dom, double p) {
  const double pos = p * static_cast<double>(dom.n_p - 1);
  const auto i = static_cast<Eigen::Index>(std::lround(pos));
  if (!(p >= 0 && p <= 1) || std::abs(pos - static_cast<double>(i)) > 1e-9)
    throw std::invalid_argument("--p must be a node of the parameter grid");
  return i;
}

void run_rd(Run& run) {
  const json& prm = run.params();
  const std::string mode = prm.at("mode");
  const double d_max_flag = prm.at("d_max");

  if (mode == "single-terminal") {
    const DistortionModel model = model_from(prm, DistortionModel::hamming_on_x());
    const RDDomain dom = RDDomain::product(prm.at("np"), 1, prm.at("nd"), d_max_flag > 0 ? d_max_flag : model.d_max);
    const Eigen::Index i = parameter_node(dom, prm.at("p"));
    IterationConfig cfg;
    cfg.max_messages = 1;
    const auto result = rd_iterate(dom, model, FunctionSpec::from_truth_table("00000000"), cfg);
    const RDField rate = rd_sum_rate(result.final_field);
    std::vector<double> rates;
    for (Eigen::Index k = 0; k < dom.n_d; ++k) rates.push_back(rate.value(i, 0, k));
    write_rate_table(run, dom, rates, nullptr);
    if (run.writes_files()) write_rd_field_csv(run.file("rho_1.csv"), result.final_field);
  } else if (mode == "wyner-ziv") {
    const DistortionModel model = model_from(prm, DistortionModel::hamming_on_x());
    const std::vector<double> w = prm.at("channel");
    Eigen::Matrix2d channel;
    channel << w[0], w[1], w[2], w[3];
    const RDDomain dom =
        RDDomain::fixed_conditional(prm.at("np"), channel, prm.at("nd"), d_max_flag > 0 ? d_max_flag : model.d_max);
    const double p = prm.at("p");
    parameter_node(dom, p);
    const auto rates = wyner_ziv_rate(dom, model, p);
    const int u_card = prm.at("brute_force");
    if (u_card) {
      std::vector<double> levels;
      for (Eigen::Index k = 0; k < dom.n_d; ++k) levels.push_back(dom.d(k));
      const auto bf = brute_force_wz(p, channel, model, levels, u_card);
      write_rate_table(run, dom, rates, &bf);
    } else {
      write_rate_table(run, dom, rates, nullptr);
    }
  } else if (mode == "hamming-zero") {
    if (!run.writes_files()) throw UsageError("rd --mode hamming-zero needs --out");
    const FunctionSpec f = FunctionSpec::parse(prm.at("function").get<std::string>());
    const DistortionModel model = model_from(prm, DistortionModel::hamming_on_function(f));
    const Eigen::Index n = prm.at("n");
    const RDDomain dom = RDDomain::product(n, n, prm.at("nd"), d_max_flag > 0 ? d_max_flag : model.d_max);
    IterationConfig cfg;
    cfg.max_messages = prm.at("t_max");
    cfg.tolerance = prm.at("tol");
    cfg.start = parse_terminal(prm.at("start"));
    cfg.track_history = prm.at("history");
    const auto result = rd_iterate(dom, model, f, cfg);

    auto d0_slice = [&](const RDField& field) {
      Eigen::ArrayXXd v(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) v(i, j) = field.value(i, j, 0);
      return RateField(ProductPmfGrid(n), std::move(v), field.label());
    };
    write_rd_field_csv(run.file("rho_final.csv"), result.final_field);
    write_field_csv(run.file("rho_final_D0.csv"), d0_slice(result.final_field));
    write_trace_csv(run.file("trace.csv"), result.trace);
    for (std::size_t t = 0; t < result.history.size(); ++t)
      write_field_csv(run.file("rho_" + std::to_string(t) + "_D0.csv"), d0_slice(result.history[t]));
    run.out() << "final " << result.final_field.label() << " after " << result.trace.records.size() << " messages, "
              << (result.trace.converged ? "converged" : "not converged") << '\n';
  } else {
    throw UsageError("--mode must be wyner-ziv, single-terminal or hamming-zero");
  }
}

void execute(const std::string& subcommand, const json& params, std::optional<fs::path> dir, std::ostream& out) {
  const auto started = std::chrono::steady_clock::now();
  Run run(subcommand, params, std::move(dir), out);
  if (subcommand == "iterate")
    run_iterate(run);
  else if (subcommand == "achievability")
    run_achievability(run);
  else if (subcommand == "rd")
    run_rd(run);
  else
    throw UsageError("unknown subcommand in manifest: " + subcommand);
  run.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Drops the last column (wall-clock seconds) of every trace row.
std::string without_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, kept;
  while (std::getline(in, line)) kept += line.substr(0, line.rfind(',')) + '\n';
  return kept;
}

int replay(const fs::path& manifest_path, const fs::path& dir, std::ostream& out) {
  const json manifest = json::parse(read_file(manifest_path));
  const fs::path original = manifest_path.parent_path();
  std::error_code ec;
  if (fs::exists(dir) && fs::equivalent(dir, original, ec)) throw UsageError("replay --out must differ from the original run");

  std::ostringstream discard;
  execute(manifest.at("subcommand"), manifest.at("parameters"), dir, discard);

  bool identical = true;
  for (const std::string name : manifest.at("outputs")) {
    std::string a = read_file(original / name), b = read_file(dir / name);
    if (name == "trace.csv") a = without_timing(a), b = without_timing(b);
    const bool same = a == b;
    identical = identical && same;
    out << (same ? "identical " : "differs ") << name << '\n';
  }
  return identical ? kOk : kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite- and infinite-message sum-rate surfaces for two-terminal interactive function computation",
               "sumrate"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: SUMRATE_THREADS or 1)")->check(CLI::PositiveNumber);

  const auto function_check = CLI::Validator(
      [](std::string& s) {
        try {
          FunctionSpec::parse(s);
          return std::string();
        } catch (const std::exception& e) {
          return std::string(e.what());
        }
      },
      "FUNCTION");

  // iterate
  std::string it_function, it_start = "A", it_out;
  int it_n = 201, it_tmax = 50;
  double it_tol = 1e-6;
  bool it_oracle = false, it_history = false;
  auto* it = app.add_subcommand("iterate", "Alternating concave-envelope iteration on the (p, q) grid");
  it->add_option("--function", it_function, "and-both | and-at-b | custom:<8 hex digits>")->required()->check(function_check);
  it->add_option("--n", it_n, "Grid points per axis")->check(CLI::Range(2, 1 << 16));
  it->add_option("--t-max", it_tmax, "Maximum number of messages")->check(CLI::Range(1, 1 << 20));
  it->add_option("--tol", it_tol, "Stop once consecutive fields differ by at most this")->check(CLI::PositiveNumber);
  it->add_option("--start", it_start, "Terminal sending the first message")->check(CLI::IsMember({"A", "B"}));
  it->add_option("--out", it_out, "Output directory")->required();
  it->add_flag("--oracle", it_oracle, "Track the gap to the closed-form limit");
  it->add_flag("--history", it_history, "Write every intermediate field");

  // achievability
  double ac_p = 0, ac_q = 0;
  std::string ac_curve = "gamma1", ac_messages = "integral", ac_target = "at-b", ac_out;
  std::uint64_t ac_seed = 0, ac_samples = 0;
  int ac_intervals = 64;
  auto* ac = app.add_subcommand("achievability", "Sum-rate of the nested-rectangle coding scheme");
  ac->add_option("--p", ac_p, "P(X = 1)")->required();
  ac->add_option("--q", ac_q, "P(Y = 1)")->required();
  ac->add_option("--curve", ac_curve, "gamma1 | gamma2 | file:<path> (one 'alpha beta' vertex per line)");
  ac->add_option("--target", ac_target, "Terminals that need the AND")->check(CLI::IsMember({"at-b", "both"}));
  ac->add_option("--messages", ac_messages, "Even message count, or 'integral' for the infinite-message limit");
  ac->add_option("--seed", ac_seed, "Monte Carlo seed");
  ac->add_option("--mc-samples", ac_samples, "Monte Carlo samples for the decoding check (0 = off)");
  ac->add_option("--mc-intervals", ac_intervals, "Partition size for the Monte Carlo check with --messages integral")
      ->check(CLI::PositiveNumber);
  ac->add_option("--out", ac_out, "Output directory");

  // rd
  std::string rd_mode, rd_model, rd_function = "and-at-b", rd_start = "A", rd_out;
  double rd_p = 0.5, rd_dmax = 0, rd_crossover = -1, rd_tol = 1e-6;
  std::vector<double> rd_channel;
  int rd_np = 201, rd_nd = 101, rd_n = 101, rd_tmax = 50, rd_bf = 0;
  bool rd_history = false;
  auto* rd = app.add_subcommand("rd", "Rate-distortion iteration with a distortion constraint at B");
  rd->add_option("--mode", rd_mode, "wyner-ziv | single-terminal | hamming-zero")
      ->required()
      ->check(CLI::IsMember({"wyner-ziv", "single-terminal", "hamming-zero"}));
  rd->add_option("--p", rd_p, "P(X = 1) at which rates are reported");
  rd->add_option("--np", rd_np, "Parameter grid points")->check(CLI::Range(2, 1 << 16));
  auto* nd_opt = rd->add_option("--nd", rd_nd, "Distortion grid points")->check(CLI::Range(2, 1 << 16));
  rd->add_option("--d-max", rd_dmax, "Top of the distortion grid (default: largest table entry)");
  rd->add_option("--model", rd_model, "Distortion table file with rows 'x y z d'")->check(CLI::ExistingFile);
  rd->add_option("--crossover", rd_crossover, "Wyner-Ziv: doubly symmetric channel crossover")->check(CLI::Range(0.0, 1.0));
  rd->add_option("--channel", rd_channel, "Wyner-Ziv: p(y|x) as w00 w01 w10 w11")->expected(4);
  rd->add_option("--brute-force", rd_bf, "Wyner-Ziv: also run the test-channel search with |U| = 2 or 3")
      ->check(CLI::IsMember({0, 2, 3}));
  rd->add_option("--function", rd_function, "Hamming-zero: function spec")->check(function_check);
  rd->add_option("--n", rd_n, "Hamming-zero: (p, q) grid points per axis")->check(CLI::Range(2, 1 << 16));
  rd->add_option("--t-max", rd_tmax, "Hamming-zero: maximum number of messages")->check(CLI::Range(1, 1 << 20));
  rd->add_option("--tol", rd_tol, "Hamming-zero: convergence tolerance")->check(CLI::PositiveNumber);
  rd->add_option("--start", rd_start, "Hamming-zero: first terminal")->check(CLI::IsMember({"A", "B"}));
  rd->add_flag("--history", rd_history, "Hamming-zero: write the D = 0 slice of every step");
  rd->add_option("--out", rd_out, "Output directory");

  // replay
  std::string rp_manifest, rp_out;
  auto* rp = app.add_subcommand("replay", "Re-run a manifest and compare its outputs byte for byte");
  rp->add_option("--manifest", rp_manifest, "manifest.json of an earlier run")->required()->check(CLI::ExistingFile);
  rp->add_option("--out", rp_out, "Directory for the rerun")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return kOk;
    }
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (threads > 0) set_thread_count(threads);
    auto dir = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<fs::path>(s); };

    if (*it) {
      json p{{"function", it_function}, {"n", it_n},           {"t_max", it_tmax},    {"tol", it_tol},
             {"start", it_start},       {"oracle", it_oracle}, {"history", it_history}};
      execute("iterate", p, it_out, out);
    } else if (*ac) {
      json p{{"p", ac_p},
             {"q", ac_q},
             {"curve", ac_curve},
             {"target", ac_target},
             {"messages", ac_messages},
             {"seed", ac_seed},
             {"mc_samples", ac_samples},
             {"mc_intervals", ac_intervals}};
      execute("achievability", p, dir(ac_out), out);
    } else if (*rd) {
      if (rd_mode == "hamming-zero" && nd_opt->count() == 0) rd_nd = 11;
      if (rd_mode == "wyner-ziv") {
        if (rd_crossover >= 0 && rd_channel.empty())
          rd_channel = {1 - rd_crossover, rd_crossover, rd_crossover, 1 - rd_crossover};
        if (rd_channel.size() != 4) throw UsageError("rd --mode wyner-ziv needs --crossover or --channel");
      }
      if (rd_channel.empty()) rd_channel = {1, 0, 0, 1};
      json p{{"mode", rd_mode},       {"p", rd_p},         {"np", rd_np},        {"nd", rd_nd},
             {"d_max", rd_dmax},      {"model", rd_model}, {"channel", rd_channel}, {"brute_force", rd_bf},
             {"function", rd_function}, {"n", rd_n},       {"t_max", rd_tmax},   {"tol", rd_tol},
             {"start", rd_start},     {"history", rd_history}};
      if (!rd_model.empty()) p["model"] = fs::absolute(rd_model).string();
      execute("rd", p, dir(rd_out), out);
    } else if (*rp) {
      return replay(rp_manifest, rp_out, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

}  // namespace sumrate::cli
