#include "sumrate/field_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sumrate {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

std::string format_double(double x) {
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  if (std::isnan(x)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  double x = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  return x;
}

void write_field_csv(std::ostream& out, const RateField& field) {
  const auto& grid = field.grid();
  out << "p,q,value\n";
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    for (Eigen::Index j = 0; j < grid.size(); ++j)
      out << format_double(grid.node(i)) << ',' << format_double(grid.node(j)) << ','
          << format_double(field.values()(i, j)) << '\n';
}

void write_field_csv(const std::string& path, const RateField& field) {
  auto out = open_out(path);
  write_field_csv(out, field);
  finish(out, path);
}

RateField read_field_csv(std::istream& in, std::string label) {
  std::string line;
  if (!std::getline(in, line) || line != "p,q,value") throw std::invalid_argument("field csv: expected header p,q,value");
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 3) throw std::invalid_argument("field csv: expected 3 columns");
    values.push_back(parse_double(cells[2]));
  }
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(values.size()))));
  if (n * n != static_cast<Eigen::Index>(values.size())) throw std::invalid_argument("field csv: row count is not square");
  Eigen::ArrayXXd v(n, n);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) v(i, j) = values[k++];
  return RateField(ProductPmfGrid(n), std::move(v), std::move(label));
}

RateField read_field_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_field_csv(in, path);
}

void write_rd_field_csv(std::ostream& out, const RDField& field) {
  const auto& dom = field.domain();
  const bool with_q = dom.n_q > 1;
  out << (with_q ? "p,q,D,value\n" : "param,D,value\n");
  for (Eigen::Index i = 0; i < dom.n_p; ++i)
    for (Eigen::Index j = 0; j < dom.n_q; ++j)
      for (Eigen::Index k = 0; k < dom.n_d; ++k) {
        out << format_double(dom.p(i)) << ',';
        if (with_q) out << format_double(dom.q(j)) << ',';
        out << format_double(dom.d(k)) << ',' << format_double(field.value(i, j, k)) << '\n';
      }
}

void write_rd_field_csv(const std::string& path, const RDField& field) {
  auto out = open_out(path);
  write_rd_field_csv(out, field);
  finish(out, path);
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  out << "t,terminal,sup_change,max_oracle_gap,seconds\n";
  for (const auto& r : trace.records) {
    out << r.t << ',' << terminal_name(r.terminal) << ',' << format_double(r.sup_change) << ',';
    if (r.max_oracle_gap) out << format_double(*r.max_oracle_gap);
    out << ',' << format_double(r.seconds) << '\n';
  }
}

void write_trace_csv(const std::string& path, const IterationTrace& trace) {
  auto out = open_out(path);
  write_trace_csv(out, trace);
  finish(out, path);
}

void write_columns_csv(const std::string& path, const std::string& x_name, const std::vector<double>& xs,
                       const std::string& y_name, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("column lengths differ");
  auto out = open_out(path);
  out << x_name << ',' << y_name << '\n';
  for (std::size_t k = 0; k < xs.size(); ++k) out << format_double(xs[k]) << ',' << format_double(ys[k]) << '\n';
  finish(out, path);
}

}  // namespace sumrate
