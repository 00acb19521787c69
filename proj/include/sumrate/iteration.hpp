#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sumrate/core.hpp"
#include "sumrate/function_spec.hpp"

namespace sumrate {

enum class Terminal { A, B };

inline char terminal_name(Terminal t) { return t == Terminal::A ? 'A' : 'B'; }
inline Terminal other(Terminal t) { return t == Terminal::A ? Terminal::B : Terminal::A; }

struct IterationConfig {
  Eigen::Index grid_size = 201;
  int max_messages = 50;    // t_max: number of half-steps (messages)
  double tolerance = 1e-6;  // stop once consecutive fields differ by at most this (sup norm)
  bool track_history = false;
  // Terminal whose envelope is applied first. The field after t half-steps
  // is rho_t^X where X is the terminal of the t-th envelope, i.e. the terminal
  // that opens the t-message exchange.
  Terminal start = Terminal::A;

  void validate() const;
};

struct TraceRecord {
  int t = 0;
  Terminal terminal = Terminal::A;  // the terminal whose envelope produced this field
  double sup_change = 0;            // vs. the previous field; +inf if finite support grew
  std::optional<double> max_oracle_gap;
  double seconds = 0;
};

struct IterationTrace {
  std::vector<TraceRecord> records;
  bool converged = false;
};

struct IterationResult {
  std::vector<RateField> history;  // rho_0 .. rho_t when tracked, else empty
  RateField final_field;
  IterationTrace trace;

  int messages() const { return trace.records.empty() ? 0 : trace.records.back().t; }
};

/// Envelope along every row (fixed q): one message from A.
RateField half_step_A(const RateField& prev);
/// Envelope along every column (fixed p): one message from B.
RateField half_step_B(const RateField& prev);
RateField half_step(const RateField& prev, Terminal terminal);

/// Sup-norm distance with BOTTOM == BOTTOM counting as zero and
/// BOTTOM vs finite as +inf.
double sup_change(const RateField& a, const RateField& b);

/// max over nodes of (oracle - rho); +inf if rho is BOTTOM where the oracle is finite.
double max_oracle_gap(const RateField& rho, const RateField& oracle);

/// Alternating envelopes starting from rho_0. The field after t messages is
/// labelled rho_t^A or rho_t^B by the terminal whose envelope produced it.
IterationResult iterate(const FunctionSpec& f, const IterationConfig& cfg, const std::optional<RateField>& oracle = std::nullopt);

/// R_sum = h2(p) + h2(q) - rho per node, +inf where rho is BOTTOM.
RateField sum_rate_field(const RateField& rho);

}  // namespace sumrate
