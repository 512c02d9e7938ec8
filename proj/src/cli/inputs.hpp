#pragma once
// Input files and named fixtures for the command-line tool.
//
//   joint JSON        {"entries": [[i, j, p], ...], "tolerance": t}
//   marginal JSON     {"atoms": [[label, p], ...], "tolerance": t}
//   contingency CSV   header "i,j,count", one row per cell

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gmi/dist_core.hpp"
#include "gmi/sampling_oracle.hpp"

namespace gmi::cli {

struct Input {
  std::variant<JointMass, MassFunction> value;
  std::string source;    // "file:<path>" or "fixture:<name>"
  bool plug_in = false;  // built from counts
};

JointMass parse_joint_json(std::string_view text);
MassFunction parse_marginal_json(std::string_view text);
ContingencyTable parse_contingency_csv(std::string_view text);

Input load_file(const std::string& path);
Input load_fixture(const std::string& name);
std::vector<std::string> fixture_names();

}  // namespace gmi::cli
