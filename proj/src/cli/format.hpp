#pragma once
// Number rendering shared by the JSON and CSV writers: 12 significant
// digits, never a bare inf/nan.

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace gmi::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kDiverges = "diverges";
inline constexpr const char* kUndefined = "undefined";

// Rounded to 12 significant digits; throws NumericViolation on inf/nan.
double round12(double v);
Json real(double v);
std::string csv_real(double v);
std::string csv_field(const std::string& s);

void write_json(std::ostream& out, const Json& doc);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
  std::size_t width_;
};

}  // namespace gmi::cli
