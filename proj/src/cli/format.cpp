#include "cli/format.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "gmi/error.hpp"

namespace gmi::cli {

namespace {

std::string print12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

double round12(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::NumericViolation, "non-finite value in report");
  const double r = std::strtod(print12(v).c_str(), nullptr);
  return r == 0.0 ? 0.0 : r;  // drop the sign of zero
}

Json real(double v) { return round12(v); }

std::string csv_real(double v) { return print12(round12(v)); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_json(std::ostream& out, const Json& doc) { out << doc.dump(2) << '\n'; }

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), width_(header.size()) {
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < width_; ++i) {
    if (i > 0) out_ << ',';
    if (i < fields.size()) out_ << csv_field(fields[i]);
  }
  out_ << '\n';
}

}  // namespace gmi::cli
