#include "cli/app.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cli/format.hpp"
#include "cli/inputs.hpp"
#include "gmi/fixtures.hpp"
#include "gmi/gmi_core.hpp"
#include "gmi/kernels.hpp"
#include "gmi/sampling_oracle.hpp"
#include "gmi/tail_families.hpp"

namespace gmi::cli {

namespace {

struct Options {
  std::string input;
  std::string fixture;
  std::optional<int> n;
  std::string n_range;
  double eps = 1e-3;
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 1;
  std::string format = "json";
  bool bits = false;
  unsigned workers = 1;
  std::vector<std::int64_t> m;
  bool scalar = false;
};

struct Range {
  int lo = 2;
  int hi = 2;
};

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::UncertifiedTail:
    case ErrorCode::TailBoundStalls:
      return 3;
    case ErrorCode::NoCollisions:
      return 4;
    case ErrorCode::NumericViolation:
    case ErrorCode::Cancelled:
      return 1;
    default:
      return 2;
  }
}

void write_error(std::ostream& out, std::ostream& err, std::string_view code, const std::string& message) {
  Json doc;
  doc["error"] = {{"code", code}, {"message", message}};
  write_json(out, doc);
  err << "error: " << code << ": " << message << '\n';
}

Range parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) throw std::invalid_argument(text);
    std::size_t used_lo = 0;
    std::size_t used_hi = 0;
    const std::string lo = text.substr(0, dots);
    const std::string hi = text.substr(dots + 2);
    Range r{std::stoi(lo, &used_lo), std::stoi(hi, &used_hi)};
    if (used_lo != lo.size() || used_hi != hi.size()) throw std::invalid_argument(text);
    if (r.hi < r.lo) throw Error(ErrorCode::BadParameter, "order range " + text + " is empty");
    if (r.lo < 1) throw Error(ErrorCode::DegenerateOrder, "orders must be >= 1");
    return r;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::BadParameter, "order range must look like A..B, got '" + text + "'");
  }
}

Range orders(const Options& o, Range fallback) {
  if (o.n && !o.n_range.empty()) throw Error(ErrorCode::BadParameter, "give --n or --n-range, not both");
  if (o.n) {
    if (*o.n < 1) throw Error(ErrorCode::DegenerateOrder, "order must be >= 1");
    return {*o.n, *o.n};
  }
  return o.n_range.empty() ? fallback : parse_range(o.n_range);
}

Input load(const Options& o) {
  if (o.input.empty() == o.fixture.empty()) {
    throw Error(ErrorCode::BadParameter, "give exactly one of --input or --fixture");
  }
  return o.input.empty() ? load_fixture(o.fixture) : load_file(o.input);
}

const JointMass& require_joint(const Input& in) {
  if (const auto* j = std::get_if<JointMass>(&in.value)) return *j;
  throw Error(ErrorCode::BadParameter, "this command needs a joint distribution");
}

class Units {
 public:
  explicit Units(bool bits) : factor_(bits ? 1.0 / std::numbers::ln2 : 1.0), bits_(bits) {}
  double operator()(double nats) const { return nats * factor_; }
  const char* name() const { return bits_ ? "bits" : "nats"; }

 private:
  double factor_;
  bool bits_;
};

Json kappa_json(const std::optional<double>& k) { return k ? real(*k) : Json(kUndefined); }
std::string kappa_csv(const std::optional<double>& k) { return k ? csv_real(*k) : kUndefined; }

Json mi_json(const MiValue& mi, const std::optional<double>& kappa, const Units& u) {
  Json row;
  row["h_x"] = real(u(mi.h_x.value()));
  row["h_y"] = real(u(mi.h_y.value()));
  row["h_xy"] = real(u(mi.h_xy.value()));
  row["mi_n"] = real(u(mi.value));
  row["mi_n_entropy_form"] = real(u(mi.entropy_form));
  row["kappa_n"] = kappa_json(kappa);
  row["error_bounds"] = {{"h_x", real(u(mi.h_x.error_bound()))},
                         {"h_y", real(u(mi.h_y.error_bound()))},
                         {"h_xy", real(u(mi.h_xy.error_bound()))},
                         {"mi_n", real(u(mi.error_bound))}};
  return row;
}

const std::vector<std::string> kMiHeader = {"n", "h_x", "h_y", "h_xy", "mi_n", "kappa_n", "error_bound"};

std::vector<std::string> mi_csv(int n, const MiValue& mi, const std::optional<double>& kappa,
                                const Units& u) {
  return {std::to_string(n),       csv_real(u(mi.h_x.value())), csv_real(u(mi.h_y.value())),
          csv_real(u(mi.h_xy.value())), csv_real(u(mi.value)),  kappa_csv(kappa),
          csv_real(u(mi.error_bound))};
}

Json header(const char* command, const Input* in, const Units& u) {
  Json doc;
  doc["command"] = command;
  if (in) {
    doc["source"] = in->source;
    if (in->plug_in) doc["estimator"] = "plug-in";
  }
  doc["units"] = u.name();
  return doc;
}

// ---------------------------------------------------------------- compute

void run_compute(const Options& o, std::ostream& out) {
  const Input in = load(o);
  const Order n(orders(o, {2, 2}).lo);
  if (!o.n_range.empty()) throw Error(ErrorCode::BadParameter, "compute takes a single --n");
  const Units u(o.bits);

  if (const auto* mass = std::get_if<MassFunction>(&in.value)) {
    const OrderEntropy h = h_n(*mass, n);
    const MassFunction escort = cdotc(*mass, n);
    if (o.format == "csv") {
      CsvWriter csv(out, {"n", "h_n", "error_bound", "upper_bound"});
      csv.row({std::to_string(n.value()), csv_real(u(h.entropy.value())),
               csv_real(u(h.entropy.error_bound())), csv_real(u(h.upper_bound))});
      return;
    }
    Json doc = header("compute", &in, u);
    doc["n"] = n.value();
    doc["h_n"] = real(u(h.entropy.value()));
    doc["error_bound"] = real(u(h.entropy.error_bound()));
    doc["upper_bound"] = real(u(h.upper_bound));
    Json atoms = Json::array();
    for (std::size_t i = 0; i < escort.size(); ++i) {
      atoms.push_back({escort.labels()[i], real(escort.probabilities()[i])});
    }
    doc["cdotc"] = std::move(atoms);
    doc["tolerances"] = {{"input", real(mass->tolerance())}};
    write_json(out, doc);
    return;
  }

  const JointMass& joint = require_joint(in);
  const MiValue mi = mi_n(joint, n);
  const auto kappa = kappa_n(joint, n);
  if (o.format == "csv") {
    CsvWriter csv(out, kMiHeader);
    csv.row(mi_csv(n.value(), mi, kappa, u));
    return;
  }
  Json doc = header("compute", &in, u);
  doc["n"] = n.value();
  doc.update(mi_json(mi, kappa, u));
  doc["tolerances"] = {{"input", real(joint.tolerance())}, {"tail_mass", real(joint.tail_mass())}};
  write_json(out, doc);
}

// ---------------------------------------------------------------- profile

void run_profile(const Options& o, std::ostream& out) {
  const Input in = load(o);
  const JointMass& joint = require_joint(in);
  const Range r = orders(o, {1, 8});
  const Units u(o.bits);
  const GmiProfile profile = gmi_profile(joint, r.lo, r.hi, o.workers);
  if (o.format == "csv") {
    CsvWriter csv(out, kMiHeader);
    for (const auto& row : profile.rows) csv.row(mi_csv(row.n, row.mi, row.kappa, u));
    return;
  }
  Json doc = header("profile", &in, u);
  Json rows = Json::array();
  for (const auto& row : profile.rows) {
    Json j;
    j["n"] = row.n;
    j.update(mi_json(row.mi, row.kappa, u));
    rows.push_back(std::move(j));
  }
  doc["rows"] = std::move(rows);
  write_json(out, doc);
}

// ---------------------------------------------------------------- oracle

void run_oracle(const Options& o, std::ostream& out) {
  const Input in = load(o);
  const MassFunction mass =
      std::holds_alternative<MassFunction>(in.value) ? std::get<MassFunction>(in.value)
                                                      : std::get<JointMass>(in.value).flat();
  const Order n(orders(o, {2, 2}).lo);
  if (!o.n_range.empty()) throw Error(ErrorCode::BadParameter, "oracle takes a single --n");
  const CollisionReport r = collision_experiment(mass, n, o.trials, o.seed, o.workers);
  const MassFunction escort = cdotc(mass, n);

  if (o.format == "csv") {
    CsvWriter csv(out, {"label", "count", "empirical", "cdotc"});
    for (std::size_t i = 0; i < mass.size(); ++i) {
      csv.row({mass.labels()[i], std::to_string(r.counts[i]),
               csv_real(r.empirical.probabilities()[i]), csv_real(escort.probabilities()[i])});
    }
    return;
  }
  Json doc = header("oracle", &in, Units(false));
  doc.erase("units");
  doc["n"] = r.n;
  doc["trials"] = r.trials;
  doc["seed"] = r.seed;
  doc["generator"] = r.generator;
  doc["collisions"] = r.collisions;
  doc["collision_rate"] = real(r.collision_rate);
  doc["eta_n"] = real(r.eta_n);
  doc["rate_sigma"] = real(r.rate_sigma);
  doc["rate_z"] = r.rate_sigma > 0.0 ? real((r.collision_rate - r.eta_n) / r.rate_sigma) : Json(0.0);
  doc["tv_distance"] = real(r.tv_distance);
  Json letters = Json::array();
  for (std::size_t i = 0; i < mass.size(); ++i) {
    letters.push_back({{"label", mass.labels()[i]},
                       {"count", r.counts[i]},
                       {"empirical", real(r.empirical.probabilities()[i])},
                       {"cdotc", real(escort.probabilities()[i])}});
  }
  doc["letters"] = std::move(letters);
  write_json(out, doc);
}

// ---------------------------------------------------------------- example

struct LongRow {
  std::string quantity;
  std::optional<std::int64_t> m;
  std::optional<int> n;
  std::optional<std::int64_t> k;
  std::string value;
  std::string error_bound;
};

std::string opt(const auto& v) { return v ? std::to_string(*v) : std::string(); }

class ExampleReport {
 public:
  ExampleReport(std::string name, Json doc) : name_(std::move(name)), doc_(std::move(doc)) {}

  Json& doc() { return doc_; }
  void add(LongRow row) { rows_.push_back(std::move(row)); }

  void write(std::ostream& out, const std::string& format) const {
    if (format != "csv") {
      write_json(out, doc_);
      return;
    }
    CsvWriter csv(out, {"example", "quantity", "m", "n", "K", "value", "error_bound"});
    for (const auto& r : rows_) {
      csv.row({name_, r.quantity, opt(r.m), opt(r.n), opt(r.k), r.value, r.error_bound});
    }
  }

 private:
  std::string name_;
  Json doc_;
  std::vector<LongRow> rows_;
};

const std::vector<std::int64_t> kPartialSumK = {1'000, 10'000, 100'000, 1'000'000};
const std::vector<std::int64_t> kPrefixK = {1'000, 10'000, 100'000};

Json truncation_json(const JointMass& joint) {
  return {{"last_index", joint.certificate()->last_index},
          {"cells", joint.cells().size()},
          {"tail_mass", real(joint.tail_mass())}};
}

// Orders >= 2 of a certified joint, as JSON rows plus long rows.
Json certified_orders(const JointMass& joint, Range r, const Units& u, ExampleReport& rep,
                      std::optional<std::int64_t> m = std::nullopt) {
  Json rows = Json::array();
  for (int k = std::max(r.lo, 2); k <= r.hi; ++k) {
    const Order n(k);
    const MiValue mi = mi_n(joint, n);
    const auto kappa = kappa_from(mi);
    Json row;
    row["n"] = k;
    row.update(mi_json(mi, kappa, u));
    rows.push_back(std::move(row));
    rep.add({"mi_n", m, k, {}, csv_real(u(mi.value)), csv_real(u(mi.error_bound))});
    rep.add({"kappa_n", m, k, {}, kappa_csv(kappa), ""});
    rep.add({"h_xy", m, k, {}, csv_real(u(mi.h_xy.value())), csv_real(u(mi.h_xy.error_bound()))});
  }
  return rows;
}

ExampleReport example1(const Options& o, const Units& u) {
  const Range r = orders(o, {2, 4});
  const JointMass joint = diagonal_log_squared(o.eps, std::max(r.lo, 2));
  ExampleReport rep("example1", header("example", nullptr, u));
  Json& doc = rep.doc();
  doc["example"] = "example1";
  doc["eps"] = real(o.eps);
  doc["truncation"] = truncation_json(joint);
  Json rows = Json::array();
  if (r.lo == 1) {
    rows.push_back({{"n", 1}, {"mi_n", kDiverges}, {"h_xy", kDiverges}, {"kappa_n", kUndefined}});
    rep.add({"mi_n", {}, 1, {}, kDiverges, ""});
  }
  for (auto& row : certified_orders(joint, r, u, rep)) rows.push_back(std::move(row));
  doc["orders"] = std::move(rows);

  // On the diagonal, MI_1 = H(X): its partial sums grow without bound.
  const auto sums = entropy_partial_sums(TailFamily::log_squared(), kPartialSumK);
  Json partial = Json::array();
  for (std::size_t i = 0; i < sums.size(); ++i) {
    partial.push_back({{"K", kPartialSumK[i]}, {"value", real(u(sums[i]))}});
    rep.add({"mi_1_partial_sum", {}, 1, kPartialSumK[i], csv_real(u(sums[i])), ""});
  }
  doc["mi_1_partial_sums"] = std::move(partial);
  return rep;
}

ExampleReport example2(const Options& o, const Units& u) {
  const Range r = orders(o, {2, 4});
  const JointMass joint = odd_even_log_squared(o.eps, std::max(r.lo, 2));
  ExampleReport rep("example2", header("example", nullptr, u));
  Json& doc = rep.doc();
  doc["example"] = "example2";
  doc["eps"] = real(o.eps);
  doc["truncation"] = truncation_json(joint);
  Json rows = Json::array();
  if (r.lo == 1) {
    rows.push_back({{"n", 1}, {"h_xy", kDiverges}, {"kappa_n", kUndefined}});
    rep.add({"h_xy", {}, 1, {}, kDiverges, ""});
  }
  for (auto& row : certified_orders(joint, r, u, rep)) rows.push_back(std::move(row));
  doc["orders"] = std::move(rows);

  Json prefixes = Json::array();
  for (const std::int64_t k : kPrefixK) {
    const JointMass prefix = odd_even_prefix(k);
    const double mi1 = shannon_mi(prefix).value();
    const double hx = shannon_entropy(prefix.rows()).value();
    const double hxy = shannon_entropy(prefix.flat()).value();
    prefixes.push_back({{"K", k}, {"mi_1", real(u(mi1))}, {"h_x", real(u(hx))}, {"h_xy", real(u(hxy))}});
    rep.add({"prefix_mi_1", {}, 1, k, csv_real(u(mi1)), ""});
    rep.add({"prefix_h_x", {}, 1, k, csv_real(u(hx)), ""});
    rep.add({"prefix_h_xy", {}, 1, k, csv_real(u(hxy)), ""});
  }
  doc["prefixes"] = std::move(prefixes);
  return rep;
}

ExampleReport example3(const Options& o, const Units& u) {
  const Range r = orders(o, {2, 2});
  const std::vector<std::int64_t> ms = o.m.empty() ? std::vector<std::int64_t>{1, 10, 100} : o.m;
  ExampleReport rep("example3", header("example", nullptr, u));
  Json& doc = rep.doc();
  doc["example"] = "example3";
  doc["eps"] = real(o.eps);
  Json seq = Json::array();
  for (const std::int64_t m : ms) {
    const JointMass joint = perturbed_uniform(m, o.eps, std::max(r.lo, 2));
    const Bounded dist = perturbed_uniform_distance(m);
    Json item;
    item["m"] = m;
    item["l2_distance"] = real(dist.value);
    item["l2_error_bound"] = real(dist.error_bound);
    rep.add({"l2_distance", m, {}, {}, csv_real(dist.value), csv_real(dist.error_bound)});
    item["truncation"] = truncation_json(joint);
    Json rows = Json::array();
    if (r.lo == 1) {
      rows.push_back({{"n", 1}, {"mi_n", kDiverges}, {"kappa_n", kUndefined}});
      rep.add({"mi_n", m, 1, {}, kDiverges, ""});
    }
    for (auto& row : certified_orders(joint, r, u, rep, m)) rows.push_back(std::move(row));
    item["orders"] = std::move(rows);
    const auto kl = perturbed_uniform_kl_partial_sums(m, kPartialSumK);
    Json partial = Json::array();
    for (std::size_t i = 0; i < kl.size(); ++i) {
      partial.push_back({{"K", kPartialSumK[i]}, {"value", real(u(kl[i]))}});
      rep.add({"mi_1_partial_sum", m, 1, kPartialSumK[i], csv_real(u(kl[i])), ""});
    }
    item["mi_1_partial_sums"] = std::move(partial);
    seq.push_back(std::move(item));
  }
  doc["sequence"] = std::move(seq);
  return rep;
}

void run_example(const Options& o, std::ostream& out) {
  if (!o.input.empty()) throw Error(ErrorCode::BadParameter, "example takes a fixture name, not --input");
  if (!(o.eps > 0.0 && o.eps < 1.0)) throw Error(ErrorCode::BadParameter, "--eps must lie in (0, 1)");
  const Units u(o.bits);
  if (o.fixture == "example1") return example1(o, u).write(out, o.format);
  if (o.fixture == "example2") return example2(o, u).write(out, o.format);
  if (o.fixture == "example3") return example3(o, u).write(out, o.format);
  throw Error(ErrorCode::BadParameter,
              "unknown example '" + o.fixture + "' (expected example1, example2 or example3)");
}

void add_common(CLI::App* sub, Options& o) {
  auto* input = sub->add_option("--input", o.input, "joint/marginal JSON or contingency CSV file");
  auto* fixture = sub->add_option("--fixture", o.fixture, "built-in fixture name");
  input->excludes(fixture);
  sub->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_flag("--bits", o.bits, "report entropies in bits");
  sub->add_flag("--scalar", o.scalar, "use the scalar reference kernels");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Order-n entropies and mutual information of discrete distributions", "gmi"};
  app.require_subcommand(1);
  std::string fixtures_help = "fixtures:";
  for (const auto& f : fixture_names()) fixtures_help += " " + f;
  app.footer(fixtures_help + "\nexamples: example1 example2 example3");

  auto* compute = app.add_subcommand("compute", "H_n, MI_n and kappa_n at one order");
  add_common(compute, o);
  compute->add_option("--n", o.n, "order (default 2)");
  compute->add_option("--n-range", o.n_range, "not accepted; use profile");

  auto* profile = app.add_subcommand("profile", "MI_n and kappa_n over a range of orders");
  add_common(profile, o);
  profile->add_option("--n", o.n, "single order");
  profile->add_option("--n-range", o.n_range, "orders A..B (default 1..8)");
  profile->add_option("--workers", o.workers, "worker threads")->check(CLI::Range(1u, 256u));

  auto* oracle = app.add_subcommand("oracle", "total-collision simulation against the analytic transform");
  add_common(oracle, o);
  oracle->add_option("--n", o.n, "order (default 2)");
  oracle->add_option("--trials", o.trials, "number of trials")->check(CLI::PositiveNumber);
  oracle->add_option("--seed", o.seed, "random seed");
  oracle->add_option("--workers", o.workers, "worker threads")->check(CLI::Range(1u, 256u));

  auto* example = app.add_subcommand("example", "infinite-support examples: example1, example2, example3");
  add_common(example, o);
  example->add_option("name", o.fixture, "example name");
  example->add_option("--n", o.n, "single order");
  example->add_option("--n-range", o.n_range, "orders A..B (default 2..4; example3 2..2)");
  example->add_option("--eps", o.eps, "order-n tail allowance of the truncation");
  example->add_option("--m", o.m, "example3 sequence indices (default 1,10,100)")->delimiter(',');
  example->add_option("--workers", o.workers, "accepted for symmetry; examples run serially");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    write_error(out, err, "UsageError", e.what());
    return 2;
  }

  struct IsaGuard {
    kernels::Isa saved = kernels::active().isa;
    ~IsaGuard() { kernels::force_isa(saved); }
  } guard;
  try {
    if (o.scalar) kernels::force_isa(kernels::Isa::Scalar);
    if (compute->parsed()) run_compute(o, out);
    if (profile->parsed()) run_profile(o, out);
    if (oracle->parsed()) run_oracle(o, out);
    if (example->parsed()) run_example(o, out);
  } catch (const Error& e) {
    write_error(out, err, error_name(e.code()), e.what());
    return exit_code(e.code());
  }
  return 0;
}

}  // namespace gmi::cli
