#include "spinres/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "spinres/dyson_polymer.hpp"
#include "spinres/fcs_entanglement.hpp"
#include "spinres/gibbs_engine.hpp"
#include "spinres/ising_exact.hpp"
#include "spinres/locality_probe.hpp"
#include "spinres/mobius_potential.hpp"
#include "spinres/quadrature.hpp"
#include "spinres/spin_algebra.hpp"
#include "spinres/types.hpp"

namespace spinres {

namespace {

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

void write_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ReportNode& ReportNode::set(const std::string& key, ReportNode v) {
  auto& obj = std::get<Object>(value_);
  for (auto& [k, node] : obj) {
    if (k == key) {
      node = std::move(v);
      return *this;
    }
  }
  obj.emplace_back(key, std::move(v));
  return *this;
}

ReportNode& ReportNode::push(ReportNode v) {
  std::get<Array>(value_).push_back(std::move(v));
  return *this;
}

void ReportNode::write(std::string& out, int indent) const {
  std::visit(
      Overload{
          [&](std::nullptr_t) { out += "null"; },
          [&](bool b) { out += b ? "true" : "false"; },
          [&](std::int64_t i) { out += std::to_string(i); },
          [&](double d) {
            // JSON has no literal for non-finite values.
            if (std::isfinite(d)) {
              out += format_real(d);
            } else {
              out += "null";
            }
          },
          [&](const std::string& s) { write_escaped(out, s); },
          [&](const Array& a) {
            if (a.empty()) {
              out += "[]";
              return;
            }
            out += "[\n";
            std::string pad(indent + 2, ' ');
            for (std::size_t i = 0; i < a.size(); ++i) {
              out += pad;
              a[i].write(out, indent + 2);
              out += i + 1 < a.size() ? ",\n" : "\n";
            }
            out += std::string(indent, ' ') + "]";
          },
          [&](const Object& o) {
            if (o.empty()) {
              out += "{}";
              return;
            }
            out += "{\n";
            std::string pad(indent + 2, ' ');
            for (std::size_t i = 0; i < o.size(); ++i) {
              out += pad;
              write_escaped(out, o[i].first);
              out += ": ";
              o[i].second.write(out, indent + 2);
              out += i + 1 < o.size() ? ",\n" : "\n";
            }
            out += std::string(indent, ' ') + "}";
          },
      },
      value_);
}

std::string ReportNode::to_text() const {
  std::string out;
  write(out, 0);
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot read file '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write output path '" + path + "'");
  }
  out << text;
  if (!out) {
    throw ValidationError("cannot write output path '" + path + "'");
  }
}

namespace {

using nlohmann::json;

[[noreturn]] void key_error(const std::string& key, const std::string& what) {
  throw ValidationError("config key '" + key + "' " + what);
}

double read_double(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number()) key_error(key, "must be a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) key_error(key, "must be finite");
  return d;
}

std::int64_t read_int(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) key_error(key, "must be an integer");
  return v.get<std::int64_t>();
}

bool read_bool(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) key_error(key, "must be a boolean");
  return v.get<bool>();
}

std::string read_string(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_string()) key_error(key, "must be a string");
  return v.get<std::string>();
}

std::vector<int> read_int_list(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_array()) key_error(key, "must be a list of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) key_error(key, "must be a list of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

std::vector<double> read_double_list(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_array()) key_error(key, "must be a list of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) key_error(key, "must be a list of numbers");
    double d = e.get<double>();
    if (!std::isfinite(d)) key_error(key, "must contain finite numbers");
    out.push_back(d);
  }
  return out;
}

// Square complex matrix as [[[re,im] x dim] x dim], checked Hermitian.
std::vector<double> read_matrix(const json& j, const std::string& key) {
  const auto& m = j.at(key);
  if (!m.is_array() || m.empty()) key_error(key, "must be a nonempty matrix");
  std::size_t dim = m.size();
  std::vector<double> flat(2 * dim * dim, 0.0);
  for (std::size_t r = 0; r < dim; ++r) {
    const auto& row = m[r];
    if (!row.is_array() || row.size() != dim) {
      key_error(key, "must be a square matrix");
    }
    for (std::size_t c = 0; c < dim; ++c) {
      const auto& cell = row[c];
      if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() ||
          !cell[1].is_number()) {
        key_error(key, "entries must be [re, im] pairs");
      }
      flat[2 * (r * dim + c)] = cell[0].get<double>();
      flat[2 * (r * dim + c) + 1] = cell[1].get<double>();
    }
  }
  double scale = 0.0;
  for (double v : flat) scale = std::max(scale, std::abs(v));
  double tol = 1e-12 * std::max(1.0, scale);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      double dre = flat[2 * (r * dim + c)] - flat[2 * (c * dim + r)];
      double dim_sum = flat[2 * (r * dim + c) + 1] + flat[2 * (c * dim + r) + 1];
      if (std::abs(dre) > tol || std::abs(dim_sum) > tol) {
        key_error(key, "must be a Hermitian matrix");
      }
    }
  }
  return flat;
}

MatX matrix_from_flat(const std::vector<double>& flat) {
  int dim = static_cast<int>(std::lround(std::sqrt(flat.size() / 2.0)));
  MatX m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      m(r, c) = cplx(flat[2 * (r * dim + c)], flat[2 * (r * dim + c) + 1]);
    }
  }
  return m;
}

ReportNode matrix_node(const std::vector<double>& flat) {
  int dim = static_cast<int>(std::lround(std::sqrt(flat.size() / 2.0)));
  auto rows = ReportNode::array();
  for (int r = 0; r < dim; ++r) {
    auto row = ReportNode::array();
    for (int c = 0; c < dim; ++c) {
      auto cell = ReportNode::array();
      cell.push(flat[2 * (r * dim + c)]).push(flat[2 * (r * dim + c) + 1]);
      row.push(std::move(cell));
    }
    rows.push(std::move(row));
  }
  return rows;
}

const std::set<std::string> kCommands = {"restrict", "potential", "betamax",
                                         "ising-ldp", "locality", "dyson-check",
                                         "fcs"};

const std::set<std::string> kCommonKeys = {"command", "seed",    "threads",
                                           "format",  "out",     "timings"};

const std::map<std::string, std::set<std::string>> kCommandKeys = {
    {"restrict", {"J", "h", "N", "X", "matrix", "beta", "window"}},
    {"potential", {"J", "h", "N", "X", "matrix", "beta", "inner"}},
    {"betamax", {"J", "h", "N", "a"}},
    {"ising-ldp", {"g", "t_values", "n_values", "quadrature_count", "m_values"}},
    {"locality", {"epsilon", "L_values", "buffer", "field_sign"}},
    {"dyson-check", {"kappa", "N", "beta", "max_order", "fixtures", "kp"}},
    {"fcs", {"model", "X", "matrix", "length", "n", "labels", "scan", "probe_a",
             "probe_b"}},
};

const std::set<std::string> kKpKeys = {"alpha1", "alpha2", "delta1", "delta2",
                                       "range",  "beta",   "N"};

void read_beta_or_ground(const json& j, RunConfig& c) {
  const auto& v = j.at("beta");
  if (v.is_string()) {
    if (v.get<std::string>() != "ground") {
      key_error("beta", "must be a number or \"ground\"");
    }
    c.ground = true;
    c.beta = 0.0;
  } else if (v.is_number()) {
    c.beta = v.get<double>();
    if (!std::isfinite(c.beta) || c.beta < 0.0) {
      key_error("beta", "must be finite and nonnegative");
    }
    c.ground = false;
  } else {
    key_error("beta", "must be a number or \"ground\"");
  }
}

void read_observable(const json& j, RunConfig& c, bool allow_xy) {
  if (j.contains("X")) c.observable = read_string(j, "X");
  std::set<std::string> allowed = allow_xy
                                      ? std::set<std::string>{"sx", "sy", "sz", "custom"}
                                      : std::set<std::string>{"sz", "custom"};
  if (!allowed.count(c.observable)) {
    key_error("X", "must be one of sx, sy, sz, custom");
  }
  if (c.observable == "custom") {
    if (!j.contains("matrix")) key_error("matrix", "is required when X is custom");
    c.observable_matrix = read_matrix(j, "matrix");
  } else if (j.contains("matrix")) {
    key_error("matrix", "is only allowed when X is custom");
  }
}

void check_sites(const std::vector<int>& sites, int num_sites,
                 const std::string& key) {
  std::set<int> seen;
  for (int s : sites) {
    if (s < 0 || s >= num_sites) key_error(key, "contains a site outside the chain");
    if (!seen.insert(s).second) key_error(key, "contains a duplicate site");
  }
}

void parse_restrict(const json& j, RunConfig& c) {
  if (j.contains("J")) c.coupling = read_double(j, "J");
  if (j.contains("h")) c.field = read_double(j, "h");
  if (j.contains("N")) c.num_sites = static_cast<int>(read_int(j, "N"));
  if (c.num_sites < 1) key_error("N", "must be at least 1");
  read_observable(j, c, true);
  if (j.contains("beta")) read_beta_or_ground(j, c);
  if (c.ground) {
    if (c.num_sites > 20) {
      key_error("N", "exceeds the iterative ground-state cap of 20 sites");
    }
  } else if (chain_dim(c.num_sites, 2) > kDenseDimCap) {
    key_error("N", "exceeds the dense-state cap (dimension " +
                       std::to_string(kDenseDimCap) + ", 12 sites)");
  }
  if (j.contains("window")) {
    c.window = read_int_list(j, "window");
  } else {
    for (int s = 0; s < c.num_sites; ++s) c.window.push_back(s);
  }
  if (c.window.empty()) key_error("window", "must contain at least one site");
  if (c.window.size() > 16) key_error("window", "exceeds the dump cap of 16 sites");
  check_sites(c.window, c.num_sites, "window");
}

void parse_potential(const json& j, RunConfig& c) {
  if (j.contains("J")) c.coupling = read_double(j, "J");
  if (j.contains("h")) c.field = read_double(j, "h");
  if (j.contains("N")) c.num_sites = static_cast<int>(read_int(j, "N"));
  if (c.num_sites < 1 || c.num_sites > 8) {
    key_error("N", "must lie in 1..8 (subset-weight cap)");
  }
  read_observable(j, c, true);
  if (j.contains("beta")) read_beta_or_ground(j, c);
  if (j.contains("inner")) {
    c.inner = read_int_list(j, "inner");
    if (c.inner.empty()) key_error("inner", "must contain at least one site");
    check_sites(c.inner, c.num_sites, "inner");
  }
}

void parse_betamax(const json& j, RunConfig& c) {
  if (j.contains("J")) c.coupling = read_double(j, "J");
  if (j.contains("h")) c.field = read_double(j, "h");
  c.num_sites = 6;
  if (j.contains("N")) c.num_sites = static_cast<int>(read_int(j, "N"));
  if (c.num_sites < 1 || c.num_sites > 100000) key_error("N", "must lie in 1..100000");
  if (j.contains("a")) c.high_t_decay = read_double(j, "a");
  if (c.high_t_decay <= 0.0) key_error("a", "must be positive");
}

void parse_ising_ldp(const json& j, RunConfig& c) {
  if (j.contains("g")) c.ising_field = read_double(j, "g");
  if (std::abs(std::abs(c.ising_field) - 1.0) < 1e-12) {
    key_error("g", "must stay off the critical points |g| = 1");
  }
  c.t_values = {0.5};
  if (j.contains("t_values")) c.t_values = read_double_list(j, "t_values");
  if (c.t_values.empty()) key_error("t_values", "must contain at least one value");
  c.n_values = {8, 16, 32, 64};
  if (j.contains("n_values")) c.n_values = read_int_list(j, "n_values");
  if (c.n_values.empty()) key_error("n_values", "must contain at least one value");
  int max_n = 0;
  for (int n : c.n_values) {
    if (n < 1 || n > 512) key_error("n_values", "entries must lie in 1..512");
    max_n = std::max(max_n, n);
  }
  if (j.contains("quadrature_count")) {
    c.quadrature_count = static_cast<int>(read_int(j, "quadrature_count"));
  }
  if (c.quadrature_count < 8 * max_n) {
    key_error("quadrature_count",
              "must be at least 8 times the largest entry of n_values");
  }
  if (j.contains("m_values")) {
    c.m_values = read_double_list(j, "m_values");
    for (double m : c.m_values) {
      if (std::abs(m) > 1.0) key_error("m_values", "entries must lie in [-1, 1]");
    }
  }
}

void parse_locality(const json& j, RunConfig& c) {
  if (j.contains("epsilon")) c.epsilon = read_double(j, "epsilon");
  if (c.epsilon <= 0.0 || c.epsilon >= 1.0) {
    key_error("epsilon", "must lie strictly between 0 and 1");
  }
  c.l_values = {1, 2};
  if (j.contains("L_values")) c.l_values = read_int_list(j, "L_values");
  if (c.l_values.empty()) key_error("L_values", "must contain at least one value");
  if (j.contains("buffer")) c.buffer = static_cast<int>(read_int(j, "buffer"));
  if (c.buffer < 0) key_error("buffer", "must be nonnegative");
  for (int l : c.l_values) {
    if (l < 1) key_error("L_values", "entries must be at least 1");
    if (2 * (l * l + c.buffer) + 1 > 25) {
      key_error("L_values", "probe chain exceeds the cap of 25 sites");
    }
  }
  if (j.contains("field_sign")) c.field_sign = read_string(j, "field_sign");
  if (c.field_sign != "ground_is_up" && c.field_sign != "ground_is_down") {
    key_error("field_sign", "must be ground_is_up or ground_is_down");
  }
}

void parse_dyson(const json& j, RunConfig& c) {
  if (j.contains("kappa")) c.kappa = read_double(j, "kappa");
  if (c.kappa < 0.0) key_error("kappa", "must be nonnegative");
  c.num_sites = 3;
  if (j.contains("N")) c.num_sites = static_cast<int>(read_int(j, "N"));
  if (c.num_sites < 2 || c.num_sites > 8) key_error("N", "must lie in 2..8");
  c.ground = false;
  c.beta = 0.5;
  if (j.contains("beta")) {
    c.beta = read_double(j, "beta");
    if (c.beta <= 0.0) key_error("beta", "must be positive");
  }
  if (j.contains("max_order")) c.max_order = static_cast<int>(read_int(j, "max_order"));
  if (c.max_order < 0 || c.max_order > 4) key_error("max_order", "must lie in 0..4");
  if (j.contains("fixtures")) c.fixtures = read_string(j, "fixtures");
  if (j.contains("kp")) {
    const auto& kp = j.at("kp");
    if (!kp.is_object()) key_error("kp", "must be an object");
    for (const auto& [key, value] : kp.items()) {
      (void)value;
      if (!kKpKeys.count(key)) {
        throw ValidationError("unknown config key 'kp." + key + "'");
      }
    }
    c.kp = true;
    if (kp.contains("alpha1")) c.alpha1 = read_double(kp, "alpha1");
    if (kp.contains("alpha2")) c.alpha2 = read_double(kp, "alpha2");
    if (kp.contains("delta1")) c.delta1 = read_double(kp, "delta1");
    if (kp.contains("delta2")) c.delta2 = read_double(kp, "delta2");
    if (kp.contains("range")) c.kp_range = static_cast<int>(read_int(kp, "range"));
    if (kp.contains("beta")) c.kp_beta = read_double(kp, "beta");
    if (kp.contains("N")) c.kp_num_sites = static_cast<int>(read_int(kp, "N"));
    if (c.alpha1 <= 0.0 || c.alpha1 >= 2.0) {
      key_error("kp.alpha1", "must lie strictly between 0 and the gap 2");
    }
    if (c.alpha2 <= 0.0) key_error("kp.alpha2", "must be positive");
    if (c.delta1 <= 0.0 || c.delta1 >= 1.0) key_error("kp.delta1", "must lie in (0, 1)");
    if (c.delta2 <= 0.0 || c.delta2 >= 1.0) key_error("kp.delta2", "must lie in (0, 1)");
    if (c.kp_range < 1) key_error("kp.range", "must be at least 1");
    if (c.kp_beta <= 0.0) key_error("kp.beta", "must be positive");
    if (c.kp_num_sites < 2 || c.kp_num_sites > 64) {
      key_error("kp.N", "must lie in 2..64");
    }
  }
}

void parse_fcs(const json& j, RunConfig& c) {
  if (j.contains("model")) c.model = read_string(j, "model");
  if (c.model.empty()) key_error("model", "must be \"aklt\" or a file path");
  read_observable(j, c, false);
  if (j.contains("length")) c.length = static_cast<int>(read_int(j, "length"));
  if (c.length < 1 || c.length > 12) key_error("length", "must lie in 1..12");
  if (j.contains("n")) c.separation = static_cast<int>(read_int(j, "n"));
  if (c.separation < 1 || c.separation > 12) key_error("n", "must lie in 1..12");
  if (j.contains("labels")) {
    c.labels = read_int_list(j, "labels");
  } else {
    c.labels.assign(2 * (c.separation - 1), 0);
  }
  if (static_cast<int>(c.labels.size()) != 2 * (c.separation - 1)) {
    key_error("labels", "needs exactly 2(n-1) entries");
  }
  for (int l : c.labels) {
    if (l < 0) key_error("labels", "entries must be nonnegative outcome indices");
  }
  if (j.contains("scan")) c.scan = read_bool(j, "scan");
  if (!c.scan) {
    if (!j.contains("probe_a") || !j.contains("probe_b")) {
      key_error("probe_a", "and probe_b are required when scan is false");
    }
  }
  if (j.contains("probe_a")) c.probe_a = read_matrix(j, "probe_a");
  if (j.contains("probe_b")) c.probe_b = read_matrix(j, "probe_b");
}

}  // namespace

RunConfig parse_config_text(const std::string& json_text,
                            const std::string& command_hint,
                            const FlagOverrides& flags) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config parse failure: ") + e.what());
  }
  if (!j.is_object()) {
    throw ValidationError("config must be a JSON object");
  }

  RunConfig c;
  if (j.contains("command")) c.command = read_string(j, "command");
  if (!command_hint.empty()) {
    if (!c.command.empty() && c.command != command_hint) {
      key_error("command", "disagrees with the requested subcommand");
    }
    c.command = command_hint;
  }
  if (c.command.empty()) key_error("command", "is required");
  if (!kCommands.count(c.command)) {
    key_error("command", "must be one of restrict, potential, betamax, "
                         "ising-ldp, locality, dyson-check, fcs");
  }

  const auto& specific = kCommandKeys.at(c.command);
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!kCommonKeys.count(key) && !specific.count(key)) {
      throw ValidationError("unknown config key '" + key + "' for command '" +
                            c.command + "'");
    }
  }

  if (j.contains("seed")) c.seed = read_int(j, "seed");
  if (j.contains("threads")) c.threads = static_cast<int>(read_int(j, "threads"));
  if (j.contains("format")) c.format = read_string(j, "format");
  if (j.contains("out")) c.out = read_string(j, "out");
  if (j.contains("timings")) c.timings = read_bool(j, "timings");

  if (c.command == "restrict") parse_restrict(j, c);
  else if (c.command == "potential") parse_potential(j, c);
  else if (c.command == "betamax") parse_betamax(j, c);
  else if (c.command == "ising-ldp") parse_ising_ldp(j, c);
  else if (c.command == "locality") parse_locality(j, c);
  else if (c.command == "dyson-check") parse_dyson(j, c);
  else parse_fcs(j, c);

  if (flags.has_seed) c.seed = flags.seed;
  if (flags.has_threads) c.threads = flags.threads;
  if (flags.has_format) c.format = flags.format;
  if (flags.has_out) c.out = flags.out;
  if (flags.has_timings) c.timings = flags.timings;

  if (c.threads < 1) key_error("threads", "must be at least 1");
  if (c.format != "json" && c.format != "csv") {
    key_error("format", "must be json or csv");
  }
  return c;
}

RunConfig parse_config_file(const std::string& path, const std::string& command_hint,
                            const FlagOverrides& flags) {
  return parse_config_text(read_text_file(path), command_hint, flags);
}

namespace {

ReportNode int_list_node(const std::vector<int>& v) {
  auto a = ReportNode::array();
  for (int x : v) a.push(x);
  return a;
}

ReportNode double_list_node(const std::vector<double>& v) {
  auto a = ReportNode::array();
  for (double x : v) a.push(x);
  return a;
}

}  // namespace

ReportNode config_to_node(const RunConfig& c) {
  auto n = ReportNode::object();
  n.set("command", c.command)
      .set("seed", c.seed)
      .set("threads", c.threads)
      .set("format", c.format)
      .set("out", c.out)
      .set("timings", c.timings);
  auto set_beta = [&]() {
    if (c.ground) {
      n.set("beta", "ground");
    } else {
      n.set("beta", c.beta);
    }
  };
  auto set_observable = [&]() {
    n.set("X", c.observable);
    if (c.observable == "custom") n.set("matrix", matrix_node(c.observable_matrix));
  };
  if (c.command == "restrict") {
    n.set("J", c.coupling).set("h", c.field).set("N", c.num_sites);
    set_observable();
    set_beta();
    n.set("window", int_list_node(c.window));
  } else if (c.command == "potential") {
    n.set("J", c.coupling).set("h", c.field).set("N", c.num_sites);
    set_observable();
    set_beta();
    if (!c.inner.empty()) n.set("inner", int_list_node(c.inner));
  } else if (c.command == "betamax") {
    n.set("J", c.coupling).set("h", c.field).set("N", c.num_sites)
        .set("a", c.high_t_decay);
  } else if (c.command == "ising-ldp") {
    n.set("g", c.ising_field)
        .set("t_values", double_list_node(c.t_values))
        .set("n_values", int_list_node(c.n_values))
        .set("quadrature_count", c.quadrature_count)
        .set("m_values", double_list_node(c.m_values));
  } else if (c.command == "locality") {
    n.set("epsilon", c.epsilon)
        .set("L_values", int_list_node(c.l_values))
        .set("buffer", c.buffer)
        .set("field_sign", c.field_sign);
  } else if (c.command == "dyson-check") {
    n.set("kappa", c.kappa).set("N", c.num_sites).set("beta", c.beta)
        .set("max_order", c.max_order);
    if (!c.fixtures.empty()) n.set("fixtures", c.fixtures);
    if (c.kp) {
      auto kp = ReportNode::object();
      kp.set("alpha1", c.alpha1)
          .set("alpha2", c.alpha2)
          .set("delta1", c.delta1)
          .set("delta2", c.delta2)
          .set("range", c.kp_range)
          .set("beta", c.kp_beta)
          .set("N", c.kp_num_sites);
      n.set("kp", std::move(kp));
    }
  } else if (c.command == "fcs") {
    n.set("model", c.model);
    set_observable();
    n.set("length", c.length)
        .set("n", c.separation)
        .set("labels", int_list_node(c.labels))
        .set("scan", c.scan);
    if (!c.probe_a.empty()) n.set("probe_a", matrix_node(c.probe_a));
    if (!c.probe_b.empty()) n.set("probe_b", matrix_node(c.probe_b));
  }
  return n;
}

std::string serialize_config(const RunConfig& config) {
  return config_to_node(config).to_text() + "\n";
}

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(v[i]);
  }
  return out;
}

MatX observable_matrix_of(const RunConfig& c, int physical_dim) {
  if (c.observable == "sx") return pauli_x();
  if (c.observable == "sy") return pauli_y();
  if (c.observable == "sz") {
    if (physical_dim == 2) return pauli_z();
    // Spin-(d-1)/2 z component: descending equally spaced eigenvalues.
    MatX sz = MatX::Zero(physical_dim, physical_dim);
    for (int k = 0; k < physical_dim; ++k) {
      sz(k, k) = (physical_dim - 1) / 2.0 - k;
    }
    return sz;
  }
  MatX m = matrix_from_flat(c.observable_matrix);
  if (m.rows() != physical_dim) {
    throw ValidationError("config key 'matrix' has dimension " +
                          std::to_string(m.rows()) + ", the model needs " +
                          std::to_string(physical_dim));
  }
  return m;
}

ReportNode distribution_rows(const ClassicalDistribution& dist) {
  auto rows = ReportNode::array();
  for (std::int64_t i = 0; i < dist.config_count(); ++i) {
    std::vector<int> labels = dist.labels_of(i);
    auto row = ReportNode::object();
    row.set("labels", int_list_node(labels));
    auto vals = ReportNode::array();
    for (int l : labels) vals.push(dist.outcome_values[l]);
    row.set("values", std::move(vals));
    row.set("prob", dist.prob[i]);
    rows.push(std::move(row));
  }
  return rows;
}

CsvTable distribution_table(const ClassicalDistribution& dist) {
  CsvTable t;
  for (int s : dist.window) t.columns.push_back("x_" + std::to_string(s));
  t.columns.push_back("prob");
  for (std::int64_t i = 0; i < dist.config_count(); ++i) {
    std::vector<int> labels = dist.labels_of(i);
    std::vector<std::string> row;
    for (int l : labels) row.push_back(format_real(dist.outcome_values[l]));
    row.push_back(format_real(dist.prob[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

RunReport run_restrict(const RunConfig& c) {
  Interaction chain = transverse_ising(c.coupling, c.field, c.num_sites);
  MatX x = observable_matrix_of(c, 2);
  RunReport rep;
  ClassicalDistribution dist;
  if (c.ground) {
    GroundMethod method = chain.dim() <= kDenseDimCap ? GroundMethod::dense
                                                      : GroundMethod::iterative;
    GroundState gs = ground_state(chain, method,
                                  static_cast<std::uint64_t>(c.seed) + 1);
    dist = classical_restriction(gs.vector, x, c.window, c.num_sites);
    rep.results.set("energy", gs.energy).set("degenerate", gs.degenerate);
  } else {
    ThermalState ts = gibbs_state(chain, c.beta);
    dist = classical_restriction(ts.rho, x, c.window, c.num_sites);
    rep.results.set("log_partition", ts.log_partition);
  }
  rep.results.set("window", int_list_node(dist.window));
  auto vals = ReportNode::array();
  for (Eigen::Index i = 0; i < dist.outcome_values.size(); ++i) {
    vals.push(dist.outcome_values[i]);
  }
  rep.results.set("outcome_values", std::move(vals));
  rep.results.set("rows", distribution_rows(dist));
  rep.tables.push_back(distribution_table(dist));
  return rep;
}

RunReport run_potential(const RunConfig& c) {
  Interaction chain = transverse_ising(c.coupling, c.field, c.num_sites);
  MatX x = observable_matrix_of(c, 2);
  SubsetWeights sw = c.ground ? SubsetWeights::ground(chain, x)
                              : SubsetWeights(chain, x, c.beta);
  const LocalMeasurement& mb = sw.measurement();
  int q = mb.num_outcomes();
  int n = c.num_sites;

  RunReport rep;
  auto rows = ReportNode::array();
  CsvTable table;
  table.columns = {"sites", "config", "value"};
  std::int64_t skipped = 0;
  for (unsigned mask = 1; mask <= sw.full_mask(); ++mask) {
    std::vector<int> sites;
    for (int s = 0; s < n; ++s) {
      if (mask & (1u << s)) sites.push_back(s);
    }
    std::int64_t configs = 1;
    for (std::size_t i = 0; i < sites.size(); ++i) configs *= q;
    for (std::int64_t ci = 0; ci < configs; ++ci) {
      std::vector<int> labels_by_site(n, 0);
      std::int64_t rem = ci;
      for (auto it = sites.rbegin(); it != sites.rend(); ++it) {
        labels_by_site[*it] = static_cast<int>(rem % q);
        rem /= q;
      }
      double value = 0.0;
      try {
        value = sw.potential(mask, labels_by_site);
      } catch (const NumericalError&) {
        ++skipped;  // zero-probability conditioning event
        continue;
      }
      std::string config_cell;
      auto config_vals = ReportNode::array();
      for (std::size_t i = 0; i < sites.size(); ++i) {
        double eig = mb.outcome_values[labels_by_site[sites[i]]];
        if (i) config_cell += ';';
        config_cell += format_real(eig);
        config_vals.push(eig);
      }
      auto row = ReportNode::object();
      row.set("sites", int_list_node(sites))
          .set("config", std::move(config_vals))
          .set("value", value);
      rows.push(std::move(row));
      table.rows.push_back({join_ints(sites), config_cell, format_real(value)});
    }
  }
  double norm = 0.0;
  for (int anchor = 0; anchor < n; ++anchor) {
    norm = std::max(norm, potential_norm(sw, anchor));
  }
  rep.results.set("num_terms", static_cast<std::int64_t>(rows.elements().size()))
      .set("num_skipped", skipped)
      .set("potential_norm", norm)
      .set("rows", std::move(rows));
  rep.tables.push_back(std::move(table));
  if (!c.inner.empty()) {
    unsigned inner_mask = 0;
    for (int s : c.inner) inner_mask |= 1u << s;
    double residual = dlr_residual(sw, inner_mask);
    rep.results.set("inner", int_list_node(c.inner)).set("residual", residual);
    CsvTable rt;
    rt.columns = {"inner", "residual"};
    rt.rows.push_back({join_ints(c.inner), format_real(residual)});
    rep.tables.push_back(std::move(rt));
  }
  return rep;
}

RunReport run_betamax(const RunConfig& c) {
  Interaction chain = transverse_ising(c.coupling, c.field, c.num_sites);
  BetaMax bm = beta_max(chain, c.high_t_decay);
  RunReport rep;
  rep.results.set("a", c.high_t_decay);
  if (bm.unbounded) {
    rep.results.set("beta_max", ReportNode()).set("unbounded", true);
  } else {
    rep.results.set("beta_max", bm.value).set("unbounded", false);
  }
  CsvTable t;
  t.columns = {"beta_max", "unbounded"};
  t.rows.push_back({bm.unbounded ? "inf" : format_real(bm.value),
                    bm.unbounded ? "1" : "0"});
  rep.tables.push_back(std::move(t));
  return rep;
}

RunReport run_ising_ldp(const RunConfig& c) {
  QuadratureRule quad = periodic_trapezoid(c.quadrature_count);
  RunReport rep;
  auto rows = ReportNode::array();
  CsvTable t;
  t.columns = {"n", "t", "G_n", "logG_over_n", "F"};
  for (double tval : c.t_values) {
    double f = szego_free_energy(c.ising_field, tval, quad);
    for (int n : c.n_values) {
      double logdet = toeplitz_log_determinant(c.ising_field, tval, n, quad);
      double gn = std::exp(logdet);
      double per_site = logdet / n;
      auto row = ReportNode::object();
      row.set("n", n).set("t", tval).set("G_n", gn)
          .set("logG_over_n", per_site).set("F", f);
      rows.push(std::move(row));
      t.rows.push_back({std::to_string(n), format_real(tval), format_real(gn),
                        format_real(per_site), format_real(f)});
    }
  }
  rep.results.set("g", c.ising_field)
      .set("magnetization_mean", magnetization_mean(c.ising_field, quad))
      .set("rows", std::move(rows));
  rep.tables.push_back(std::move(t));
  if (!c.m_values.empty()) {
    auto rate_rows = ReportNode::array();
    CsvTable rt;
    rt.columns = {"m", "I"};
    for (double m : c.m_values) {
      RateValue rv = rate_function(c.ising_field, m, quad);
      auto row = ReportNode::object();
      row.set("m", m).set("I", rv.value).set("boundary", rv.boundary);
      rate_rows.push(std::move(row));
      rt.rows.push_back({format_real(m), format_real(rv.value)});
    }
    rep.results.set("rate", std::move(rate_rows));
    rep.tables.push_back(std::move(rt));
  }
  return rep;
}

RunReport run_locality(const RunConfig& c) {
  int sign = c.field_sign == "ground_is_up" ? 1 : -1;
  int max_sites = 0;
  for (int l : c.l_values) {
    max_sites = std::max(max_sites, 2 * (l * l + c.buffer) + 1);
  }
  GroundMethod method = chain_dim(max_sites, 2) <= kDenseDimCap
                            ? GroundMethod::dense
                            : GroundMethod::iterative;
  auto scan = nonlocality_scan(c.epsilon, c.l_values, c.buffer, sign, method,
                               static_cast<std::uint64_t>(c.seed) + 1);
  RunReport rep;
  auto rows = ReportNode::array();
  CsvTable t;
  t.columns = {"L", "N", "epsilon", "p_zero", "p_one", "gap"};
  for (const auto& r : scan) {
    auto row = ReportNode::object();
    row.set("L", r.length).set("N", r.num_sites).set("epsilon", c.epsilon);
    if (r.error.empty()) {
      row.set("p_zero", r.p_zero).set("p_one", r.p_one).set("gap", r.gap);
      t.rows.push_back({std::to_string(r.length), std::to_string(r.num_sites),
                        format_real(c.epsilon), format_real(r.p_zero),
                        format_real(r.p_one), format_real(r.gap)});
    } else {
      row.set("error", r.error);
      t.rows.push_back({std::to_string(r.length), std::to_string(r.num_sites),
                        format_real(c.epsilon), "nan", "nan", "nan"});
    }
    rows.push(std::move(row));
  }
  rep.results.set("field_sign", c.field_sign).set("rows", std::move(rows));
  rep.tables.push_back(std::move(t));
  return rep;
}

double operator_norm(const MatX& m) {
  Eigen::JacobiSVD<MatX> svd(m);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

RunReport run_dyson(const RunConfig& c) {
  PerturbationModel model = weak_exchange_model(c.kappa, c.num_sites);
  Interaction total = model.h0;
  for (const auto& term : model.upsilon.terms) total.terms.push_back(term);
  MatX hfull = build_hamiltonian(total);
  Eigen::SelfAdjointEigenSolver<MatX> es(hfull);
  MatX exact = es.eigenvectors() *
               (-c.beta * es.eigenvalues().array()).exp().matrix().asDiagonal() *
               es.eigenvectors().adjoint();

  RunReport rep;
  auto rows = ReportNode::array();
  CsvTable t;
  t.columns = {"order", "defect", "bound"};
  for (int order = 0; order <= c.max_order; ++order) {
    TruncatedSeries ts = truncated_dyson(model.h0, model.upsilon, c.beta, order);
    double defect = operator_norm(ts.value - exact);
    auto row = ReportNode::object();
    row.set("order", order).set("defect", defect).set("bound", ts.remainder_bound);
    rows.push(std::move(row));
    t.rows.push_back({std::to_string(order), format_real(defect),
                      format_real(ts.remainder_bound)});
  }
  rep.results.set("kappa", c.kappa).set("N", c.num_sites).set("beta", c.beta)
      .set("rows", std::move(rows));
  rep.tables.push_back(std::move(t));

  // Conditioning basis for diagram densities and the certificate.  It must
  // not be aligned with the preferred state (every outcome needs positive
  // overlap), so the z basis is out; the x basis gives overlap 1/2 per site.
  LocalMeasurement mb = local_measurement(pauli_x());
  if (!c.fixtures.empty()) {
    json fixtures;
    try {
      fixtures = json::parse(read_text_file(c.fixtures));
    } catch (const json::exception& e) {
      throw ValidationError(std::string("fixtures parse failure: ") + e.what());
    }
    if (!fixtures.is_array()) {
      throw ValidationError("fixtures file must hold a JSON array");
    }
    // Default conditioning outcome: the one aligned with the preferred state.
    std::vector<MatX> proj(mb.num_outcomes(),
                           MatX::Zero(mb.local_dim(), mb.local_dim()));
    for (int col = 0; col < mb.local_dim(); ++col) {
      proj[mb.outcome_of_col[col]] +=
          mb.rotation.col(col) * mb.rotation.col(col).adjoint();
    }
    int preferred = 0;
    double best = -1.0;
    for (int lab = 0; lab < mb.num_outcomes(); ++lab) {
      double overlap = (proj[lab] * model.site_projector).trace().real();
      if (overlap > best) {
        best = overlap;
        preferred = lab;
      }
    }
    auto fix_rows = ReportNode::array();
    CsvTable ft;
    ft.columns = {"fixture", "order", "density", "factorization_defect",
                  "components"};
    int index = 0;
    for (const auto& f : fixtures) {
      if (!f.is_object()) throw ValidationError("fixtures entries must be objects");
      DiagramSpec spec;
      spec.beta = read_double(f, "beta");
      spec.times = read_double_list(f, "times");
      for (const auto& s : f.at("S")) {
        std::vector<int> sites;
        for (const auto& e : s) sites.push_back(e.get<int>());
        spec.s_sets.push_back(std::move(sites));
      }
      for (const auto& b : f.at("B")) {
        std::vector<int> sites;
        for (const auto& e : b) sites.push_back(e.get<int>());
        spec.b_sets.push_back(std::move(sites));
      }
      std::vector<int> labels(c.num_sites, preferred);
      if (f.contains("labels")) labels = read_int_list(f, "labels");
      validate_diagram(model, spec);
      double density = diagram_density(model, mb, spec, labels);
      FactorizationReport fact =
          diagram_factorization(model, mb, spec, labels, 1);
      auto row = ReportNode::object();
      row.set("fixture", index).set("order", spec.order()).set("density", density)
          .set("product", fact.product)
          .set("factorization_defect", fact.relative_defect)
          .set("components", fact.num_components);
      fix_rows.push(std::move(row));
      ft.rows.push_back({std::to_string(index), std::to_string(spec.order()),
                         format_real(density), format_real(fact.relative_defect),
                         std::to_string(fact.num_components)});
      ++index;
    }
    rep.results.set("fixtures", std::move(fix_rows));
    rep.tables.push_back(std::move(ft));
  }

  if (c.kp) {
    PerturbationModel kp_model = weak_exchange_model(c.kappa, c.kp_num_sites);
    KPParams params;
    params.beta = c.kp_beta;
    params.gap = 2.0;
    params.alpha1 = c.alpha1;
    params.alpha2 = c.alpha2;
    params.delta1 = c.delta1;
    params.delta2 = c.delta2;
    params.gamma = observable_gamma(mb, kp_model.site_projector);
    params.range = c.kp_range;
    KPCertificate cert = kp_certificate(params, kp_model.upsilon, c.kp_num_sites);
    auto kp_rows = ReportNode::array();
    CsvTable kt;
    kt.columns = {"kind", "sites", "lhs", "bound"};
    for (const auto& r : cert.rows) {
      auto row = ReportNode::object();
      row.set("kind", r.vertical ? "vertical" : "horizontal")
          .set("sites", int_list_node(r.sites))
          .set("lhs", r.lhs)
          .set("bound", r.bound);
      kp_rows.push(std::move(row));
      kt.rows.push_back({r.vertical ? "vertical" : "horizontal",
                         join_ints(r.sites), format_real(r.lhs),
                         format_real(r.bound)});
    }
    auto kp_node = ReportNode::object();
    kp_node.set("satisfied", cert.satisfied)
        .set("margin", cert.margin)
        .set("gamma", params.gamma)
        .set("rows", std::move(kp_rows));
    rep.results.set("kp", std::move(kp_node));
    rep.tables.push_back(std::move(kt));
  }
  return rep;
}

RunReport run_fcs(const RunConfig& c) {
  FcsModel model =
      c.model == "aklt" ? aklt_model() : fcs_model_from_json(read_text_file(c.model));
  int m = model.physical_dim();
  MatX x = observable_matrix_of(c, m);
  LocalMeasurement mb = local_measurement(x);
  for (int l : c.labels) {
    if (l >= mb.num_outcomes()) {
      throw ValidationError("config key 'labels' contains an outcome index "
                            "beyond the observable's spectrum");
    }
  }

  RunReport rep;
  FcsConditions cond = fcs_conditions(model);
  auto cn = ReportNode::object();
  cn.set("unital_defect", cond.unital_defect)
      .set("isometry_defect", cond.isometry_defect)
      .set("proportional_defect", cond.proportional_defect)
      .set("pair_span_rank", cond.pair_span_rank)
      .set("full_pair_span", cond.full_pair_span);
  rep.results.set("conditions", std::move(cn));

  ClassicalDistribution singles = fcs_restriction(model, x, 1);
  auto marg = ReportNode::array();
  for (Eigen::Index i = 0; i < singles.prob.size(); ++i) marg.push(singles.prob[i]);
  rep.results.set("single_site_probs", std::move(marg));

  ClassicalDistribution dist = fcs_restriction(model, x, c.length);
  rep.results.set("restriction_length", c.length);
  rep.results.set("restriction_rows", distribution_rows(dist));

  double corr = 0.0;
  int best_a = -1, best_b = -1;
  if (c.scan) {
    std::vector<MatX> basis = hermitian_basis(m);
    for (std::size_t i = 1; i < basis.size(); ++i) {
      for (std::size_t k = 1; k < basis.size(); ++k) {
        double v = conditioned_correlation(model, x, c.separation, basis[i],
                                           basis[k], c.labels);
        if (std::abs(v) > std::abs(corr)) {
          corr = v;
          best_a = static_cast<int>(i);
          best_b = static_cast<int>(k);
        }
      }
    }
  } else {
    MatX pa = matrix_from_flat(c.probe_a);
    MatX pb = matrix_from_flat(c.probe_b);
    corr = conditioned_correlation(model, x, c.separation, pa, pb, c.labels);
  }
  auto corr_node = ReportNode::object();
  corr_node.set("n", c.separation).set("labels", int_list_node(c.labels));
  if (c.scan) {
    corr_node.set("basis_index_a", best_a).set("basis_index_b", best_b);
  }
  corr_node.set("value", corr);
  rep.results.set("correlation", std::move(corr_node));

  CsvTable t;
  t.columns = {"n", "x_V", "corr"};
  std::string xv;
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    if (i) xv += ';';
    xv += format_real(mb.outcome_values[c.labels[i]]);
  }
  t.rows.push_back({std::to_string(c.separation), xv, format_real(corr)});
  rep.tables.push_back(std::move(t));
  return rep;
}

}  // namespace

RunReport run_command(const RunConfig& config) {
  if (config.command == "restrict") return run_restrict(config);
  if (config.command == "potential") return run_potential(config);
  if (config.command == "betamax") return run_betamax(config);
  if (config.command == "ising-ldp") return run_ising_ldp(config);
  if (config.command == "locality") return run_locality(config);
  if (config.command == "dyson-check") return run_dyson(config);
  if (config.command == "fcs") return run_fcs(config);
  throw ValidationError("config key 'command' holds an unknown command");
}

std::string render_json_report(const RunConfig& config, const RunReport& report,
                               const std::vector<std::pair<std::string, double>>& timings_ms,
                               bool include_timings) {
  auto root = ReportNode::object();
  root.set("command", config.command);
  root.set("config_echo", config_to_node(config));
  root.set("results", report.results);
  if (include_timings) {
    auto t = ReportNode::object();
    for (const auto& [name, ms] : timings_ms) t.set(name, ms);
    root.set("timings_ms", std::move(t));
  }
  return root.to_text() + "\n";
}

std::string render_csv_report(const RunReport& report) {
  std::string out;
  for (std::size_t ti = 0; ti < report.tables.size(); ++ti) {
    if (ti) out += "\n";
    const CsvTable& t = report.tables[ti];
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      if (i) out += ',';
      out += t.columns[i];
    }
    out += '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += row[i];
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace spinres
