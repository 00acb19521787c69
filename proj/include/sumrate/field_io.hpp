#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sumrate/core.hpp"
#include "sumrate/distortion.hpp"
#include "sumrate/iteration.hpp"

namespace sumrate {

/// Round-trip text for a double with 17 significant digits;
/// "-inf" and "inf" for the infinities.
std::string format_double(double x);
/// Inverse of format_double; throws std::invalid_argument on trailing junk.
double parse_double(std::string_view text);

/// Header "p,q,value", one row per node with p outer and q inner.
void write_field_csv(std::ostream& out, const RateField& field);
void write_field_csv(const std::string& path, const RateField& field);
/// Reads a square field written by write_field_csv.
RateField read_field_csv(std::istream& in, std::string label = "csv");
RateField read_field_csv(const std::string& path);

/// Header "param,D,value" for a single q node, "p,q,D,value" otherwise.
void write_rd_field_csv(std::ostream& out, const RDField& field);
void write_rd_field_csv(const std::string& path, const RDField& field);

/// Columns t, terminal, sup_change, max_oracle_gap, seconds; the oracle gap
/// is left empty when no oracle was supplied.
void write_trace_csv(std::ostream& out, const IterationTrace& trace);
void write_trace_csv(const std::string& path, const IterationTrace& trace);

/// Two-column CSV with the given header names.
void write_columns_csv(const std::string& path, const std::string& x_name, const std::vector<double>& xs,
                       const std::string& y_name, const std::vector<double>& ys);

}  // namespace sumrate
