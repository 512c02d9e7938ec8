#include "cli/inputs.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gmi::cli {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& message) { throw Error(ErrorCode::ParseError, message); }

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    parse_fail(std::string("invalid JSON: ") + e.what());
  }
}

double tolerance_of(const json& doc) {
  if (!doc.contains("tolerance")) return kDefaultTolerance;
  if (!doc["tolerance"].is_number()) parse_fail("\"tolerance\" must be a number");
  return doc["tolerance"].get<double>();
}

double number_at(const json& row, std::size_t i, const char* what) {
  if (!row[i].is_number()) parse_fail(std::string(what) + " must be a number");
  return row[i].get<double>();
}

std::int64_t index_at(const json& row, std::size_t i) {
  if (!row[i].is_number_integer()) parse_fail("cell indices must be integers");
  return row[i].get<std::int64_t>();
}

std::string_view trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <class T>
T parse_integer(std::string_view field, std::size_t line) {
  T v{};
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || end != field.data() + field.size()) {
    parse_fail("line " + std::to_string(line) + ": '" + std::string(field) + "' is not a valid integer");
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_fail("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

JointMass parse_joint_json(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
    parse_fail("joint input needs an \"entries\" array");
  }
  std::vector<Cell> cells;
  for (const auto& row : doc["entries"]) {
    if (!row.is_array() || row.size() != 3) parse_fail("each entry must be [i, j, p]");
    cells.push_back({index_at(row, 0), index_at(row, 1), number_at(row, 2, "p")});
  }
  return JointMass::from_entries(std::move(cells), tolerance_of(doc));
}

MassFunction parse_marginal_json(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object() || !doc.contains("atoms") || !doc["atoms"].is_array()) {
    parse_fail("marginal input needs an \"atoms\" array");
  }
  std::vector<Atom> atoms;
  for (const auto& row : doc["atoms"]) {
    if (!row.is_array() || row.size() != 2) parse_fail("each atom must be [label, p]");
    std::string label = row[0].is_string() ? row[0].get<std::string>() : row[0].dump();
    atoms.push_back({std::move(label), number_at(row, 1, "p")});
  }
  return MassFunction::validate(std::move(atoms), tolerance_of(doc));
}

ContingencyTable parse_contingency_csv(std::string_view text) {
  ContingencyTable table;
  std::size_t line_no = 0;
  bool header = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (!header) {
      if (fields.size() != 3 || fields[0] != "i" || fields[1] != "j" || fields[2] != "count") {
        parse_fail("contingency CSV must start with the header i,j,count");
      }
      header = true;
      continue;
    }
    if (fields.size() != 3) parse_fail("line " + std::to_string(line_no) + ": expected 3 fields");
    table.add(parse_integer<std::int64_t>(fields[0], line_no),
              parse_integer<std::int64_t>(fields[1], line_no),
              parse_integer<std::uint64_t>(fields[2], line_no));
  }
  if (!header) parse_fail("contingency CSV is empty");
  return table;
}

Input load_file(const std::string& path) {
  const std::string text = read_file(path);
  Input in{MassFunction{}, "file:" + path};
  if (ends_with(path, ".csv")) {
    in.value = plugin_joint(parse_contingency_csv(text));
    in.plug_in = true;
    return in;
  }
  const json doc = parse_json(text);
  if (doc.is_object() && doc.contains("atoms")) {
    in.value = parse_marginal_json(text);
  } else {
    in.value = parse_joint_json(text);
  }
  return in;
}

Input load_fixture(const std::string& name) {
  Input in{MassFunction{}, "fixture:" + name};
  if (name == "uniform2x2") {
    in.value = joint_from_entries({{1, 1, 0.25}, {1, 2, 0.25}, {2, 1, 0.25}, {2, 2, 0.25}});
  } else if (name == "mixed2x2") {
    in.value = joint_from_entries({{1, 1, 0.4}, {1, 2, 0.1}, {2, 1, 0.1}, {2, 2, 0.4}});
  } else if (name == "permutation2x2") {
    in.value = joint_from_entries({{1, 2, 0.5}, {2, 1, 0.5}});
  } else if (name == "single") {
    in.value = joint_from_entries({{1, 1, 1.0}});
  } else if (name == "two-thirds") {
    in.value = validate_mass({{"a", 2.0 / 3.0}, {"b", 1.0 / 3.0}});
  } else if (name == "fair-coin") {
    in.value = validate_mass({{"a", 0.5}, {"b", 0.5}});
  } else if (name == "dyadic3") {
    in.value = validate_mass({{"a", 0.5}, {"b", 0.25}, {"c", 0.25}});
  } else if (name == "skewed4") {
    in.value = validate_mass({{"a", 0.4}, {"b", 0.3}, {"c", 0.2}, {"d", 0.1}});
  } else if (name == "point") {
    in.value = validate_mass({{"a", 1.0}});
  } else {
    throw Error(ErrorCode::BadParameter, "unknown fixture '" + name + "'");
  }
  return in;
}

std::vector<std::string> fixture_names() {
  return {"uniform2x2", "mixed2x2",  "permutation2x2", "single", "two-thirds",
          "fair-coin",  "dyadic3",   "skewed4",        "point"};
}

}  // namespace gmi::cli
