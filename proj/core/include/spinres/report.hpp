#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace spinres {

// Ordered JSON-style value tree. Emission is deterministic: insertion key
// order, 17-significant-digit floats, LF line endings.
class ReportNode {
 public:
  using Object = std::vector<std::pair<std::string, ReportNode>>;
  using Array = std::vector<ReportNode>;

  ReportNode() : value_(nullptr) {}
  ReportNode(bool b) : value_(b) {}
  ReportNode(std::int64_t i) : value_(i) {}
  ReportNode(int i) : value_(static_cast<std::int64_t>(i)) {}
  ReportNode(double d) : value_(d) {}
  ReportNode(const char* s) : value_(std::string(s)) {}
  ReportNode(std::string s) : value_(std::move(s)) {}

  static ReportNode object() {
    ReportNode n;
    n.value_ = Object{};
    return n;
  }
  static ReportNode array() {
    ReportNode n;
    n.value_ = Array{};
    return n;
  }

  // Object append; replaces an existing key in place.
  ReportNode& set(const std::string& key, ReportNode v);
  // Array append.
  ReportNode& push(ReportNode v);

  bool is_object() const { return std::holds_alternative<Object>(value_); }
  bool is_array() const { return std::holds_alternative<Array>(value_); }
  const Object& items() const { return std::get<Object>(value_); }
  const Array& elements() const { return std::get<Array>(value_); }

  std::string to_text() const;

 private:
  std::variant<std::nullptr_t, bool, std::int64_t, double, std::string, Array,
               Object>
      value_;
  void write(std::string& out, int indent) const;
};

std::string format_real(double v);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

// One validated run request. Field applicability depends on command; the
// parser materializes documented defaults so serialize/parse round-trips.
struct RunConfig {
  std::string command;

  std::int64_t seed = 0;
  int threads = 1;
  std::string format = "json";
  std::string out;
  bool timings = false;

  double coupling = 1.0;   // J
  double field = 1.0;      // h
  int num_sites = 4;       // N
  std::string observable = "sz";
  std::vector<double> observable_matrix;  // row-major re,im pairs when custom
  double beta = 0.0;
  bool ground = true;
  std::vector<int> window;
  std::vector<int> inner;

  double high_t_decay = 1.0;  // a

  double ising_field = 2.0;  // g
  std::vector<double> t_values;
  std::vector<int> n_values;
  int quadrature_count = 4096;
  std::vector<double> m_values;

  double epsilon = 0.2;
  std::vector<int> l_values;
  int buffer = 3;
  std::string field_sign = "ground_is_up";

  double kappa = 1.0;
  int max_order = 3;
  std::string fixtures;
  bool kp = false;
  double kp_beta = 20.0;
  int kp_num_sites = 12;
  double alpha1 = 0.5;
  double alpha2 = 0.5;
  double delta1 = 0.5;
  double delta2 = 0.5;
  int kp_range = 1;

  std::string model = "aklt";
  int length = 3;
  int separation = 5;
  std::vector<int> labels;
  bool scan = true;
  std::vector<double> probe_a;
  std::vector<double> probe_b;

  bool operator==(const RunConfig&) const = default;
};

struct FlagOverrides {
  bool has_seed = false;
  std::int64_t seed = 0;
  bool has_threads = false;
  int threads = 1;
  bool has_format = false;
  std::string format;
  bool has_out = false;
  std::string out;
  bool has_timings = false;
  bool timings = false;
};

RunConfig parse_config_text(const std::string& json_text,
                            const std::string& command_hint = "",
                            const FlagOverrides& flags = {});
RunConfig parse_config_file(const std::string& path,
                            const std::string& command_hint = "",
                            const FlagOverrides& flags = {});
std::string serialize_config(const RunConfig& config);
ReportNode config_to_node(const RunConfig& config);

struct RunReport {
  ReportNode results = ReportNode::object();
  std::vector<CsvTable> tables;
};

RunReport run_command(const RunConfig& config);

std::string render_json_report(
    const RunConfig& config, const RunReport& report,
    const std::vector<std::pair<std::string, double>>& timings_ms = {},
    bool include_timings = false);
std::string render_csv_report(const RunReport& report);

std::string read_text_file(const std::string& path);
// Empty path writes to stdout.
void write_text(const std::string& path, const std::string& text);

}  // namespace spinres
