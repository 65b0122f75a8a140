#pragma once

// Experiment configuration: a small TOML subset (tables, bare keys, numbers,
// booleans, basic strings, possibly nested and multi-line arrays, '#'
// comments) with line-numbered errors, plus the mapping onto operators,
// measures and run parameters.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "limitlab/errors.hpp"
#include "limitlab/kernels.hpp"
#include "limitlab/limits.hpp"
#include "limitlab/measures.hpp"
#include "limitlab/operators.hpp"

namespace limitlab {

struct TomlValue {
  enum class Type { Number, String, Bool, Array };
  Type type = Type::Number;
  double number = 0.0;
  std::string text;
  bool boolean = false;
  std::vector<TomlValue> items;
  int line = 0;
};

/// table name ("" for the root) -> key -> value
using TomlDocument = std::map<std::string, std::map<std::string, TomlValue>>;

namespace detail {

class TomlParser {
 public:
  TomlParser(std::string_view src, int line) : src_(src), line_(line) {}

  TomlValue value() {
    skip_space();
    if (pos_ >= src_.size()) fail("missing value");
    const char c = src_[pos_];
    TomlValue v;
    v.line = line_;
    if (c == '"') {
      v.type = TomlValue::Type::String;
      v.text = string();
    } else if (c == '[') {
      v.type = TomlValue::Type::Array;
      ++pos_;
      skip_space();
      if (peek() == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        v.items.push_back(value());
        skip_space();
        if (peek() == ',') {
          ++pos_;
          skip_space();
          if (peek() == ']') {
            ++pos_;
            break;
          }
          continue;
        }
        if (peek() == ']') {
          ++pos_;
          break;
        }
        fail("expected ',' or ']' in array");
      }
    } else if (src_.substr(pos_, 4) == "true") {
      v.type = TomlValue::Type::Bool;
      v.boolean = true;
      pos_ += 4;
    } else if (src_.substr(pos_, 5) == "false") {
      v.type = TomlValue::Type::Bool;
      pos_ += 5;
    } else {
      v.type = TomlValue::Type::Number;
      v.number = number();
    }
    return v;
  }

  void expect_end() {
    skip_space();
    if (pos_ != src_.size()) fail("unexpected trailing characters");
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(what, line_); }

  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string string() {
    ++pos_;
    std::string out;
    while (pos_ < src_.size() && src_[pos_] != '"') {
      char c = src_[pos_++];
      if (c == '\n') fail("unterminated string");
      if (c == '\\') {
        if (pos_ >= src_.size()) fail("bad escape");
        const char e = src_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      out.push_back(c);
    }
    if (pos_ >= src_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  double number() {
    std::size_t end = pos_;
    while (end < src_.size() && std::string_view("+-0123456789.eE_infa").find(src_[end]) != std::string_view::npos) ++end;
    std::string token;
    for (std::size_t i = pos_; i < end; ++i)
      if (src_[i] != '_') token.push_back(src_[i]);
    if (token.empty()) fail("expected a value");
    if (token == "inf" || token == "+inf") {
      pos_ = end;
      return std::numeric_limits<double>::infinity();
    }
    const char* first = token.data();
    if (*first == '+') ++first;
    double v = 0.0;
    const auto res = std::from_chars(first, token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) fail("invalid number '" + token + "'");
    pos_ = end;
    return v;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_;
};

inline std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

inline std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline int bracket_balance(const std::string& s) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (in_string) continue;
    if (s[i] == '[') ++depth;
    if (s[i] == ']') --depth;
  }
  return depth;
}

inline bool bare_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

}  // namespace detail

inline TomlDocument parse_toml(const std::string& text) {
  TomlDocument doc;
  doc[""];
  std::string table;
  std::set<std::string> headers;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = detail::trim(detail::strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.size() < 3 || s.back() != ']' || s[1] == '[') throw ConfigError("malformed table header", line);
      table = detail::trim(s.substr(1, s.size() - 2));
      if (!detail::bare_key(table)) throw ConfigError("invalid table name '" + table + "'", line);
      if (!headers.insert(table).second || !doc[table].empty())
        throw ConfigError("duplicate table [" + table + "]", line);
      doc[table];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    const std::string key = detail::trim(s.substr(0, eq));
    if (!detail::bare_key(key)) throw ConfigError("invalid key '" + key + "'", line);
    std::string rhs = detail::trim(s.substr(eq + 1));
    const int start = line;
    while (detail::bracket_balance(rhs) > 0) {
      if (!std::getline(in, raw)) throw ConfigError("unterminated array", start);
      ++line;
      rhs += "\n" + detail::trim(detail::strip_comment(raw));
    }
    detail::TomlParser p(rhs, start);
    TomlValue v = p.value();
    p.expect_end();
    if (doc[table].count(key)) throw ConfigError("duplicate key '" + key + "'", start);
    doc[table][key] = std::move(v);
  }
  return doc;
}

struct OperatorConfig {
  std::string family = "radial_maximal";
  double alpha = 0.0;
  std::string profile = "indicator";
  std::vector<double> profile_breakpoints;
  std::vector<double> profile_values;
  std::string kernel = "constant";
  double kernel_constant = 1.0;
  std::vector<double> kernel_cos;
  std::vector<double> kernel_sin;
  int kernel_index = 0;
  std::vector<std::vector<double>> cap_axes;
  std::vector<double> cap_cos;
  std::vector<double> cap_values;
  std::string g = "gaussian";
  std::vector<double> g_params;
  std::string target = "auto";
  int sphere_order = 0;
  bool operator==(const OperatorConfig&) const = default;
};

struct MeasureConfig {
  std::string kind = "uniform_ball";
  double radius = 1.0;
  double density = 1.0;
  bool probability = false;
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
  std::vector<double> edges;
  std::vector<double> densities;
  std::vector<double> box_lo;
  std::vector<double> box_hi;
  std::vector<double> box_counts;
  std::vector<double> box_values;
  std::string file;
  bool normalize = false;
  bool operator==(const MeasureConfig&) const = default;
};

struct DomainConfig {
  double rho = 0.5;
  double outer_radius = 50.0;
  bool operator==(const DomainConfig&) const = default;
};

struct SweepConfig {
  std::vector<double> t{0.25, 0.1, 0.04, 0.01};
  std::vector<double> lambda{1.0};
  double type1_lambda_min = 0.0;
  double type1_lambda_max = 0.0;
  int lambda_points = 64;
  int strata = 32;
  bool operator==(const SweepConfig&) const = default;
};

struct EvalConfig {
  std::vector<double> x;
  bool operator==(const EvalConfig&) const = default;
};

struct DiniConfig {
  double q = 1.0;
  double s = 0.0;
  double t_max = 1.0;
  int levels = 24;
  int shift_budget = 96;
  int order = 0;
  bool operator==(const DiniConfig&) const = default;
};

struct CounterexampleConfig {
  double t = 0.1;
  int grid = 100;
  bool operator==(const CounterexampleConfig&) const = default;
};

struct HierarchyConfig {
  double p = 1.0;
  std::vector<double> t{0.1, 0.01, 0.001};
  std::vector<double> lambda{0.5, 1.0};
  double outer_factor = 10.0;
  bool operator==(const HierarchyConfig&) const = default;
};

struct OutputConfig {
  std::string dir = ".";
  std::string prefix = "sweep";
  bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfig {
  int dimension = 1;
  std::uint64_t seed = 1;
  std::uint64_t budget = 100000;
  int threads = 0;
  OperatorConfig op;
  MeasureConfig measure;
  DomainConfig domain;
  SweepConfig sweep;
  EvalConfig eval;
  DiniConfig dini;
  CounterexampleConfig counterexample;
  HierarchyConfig hierarchy;
  OutputConfig output;

  std::string base_dir = ".";          // directory of the config file; not serialized
  std::map<std::string, int> lines;    // "table.key" -> source line; not serialized

  bool operator==(const ExperimentConfig& o) const {
    return dimension == o.dimension && seed == o.seed && budget == o.budget && threads == o.threads && op == o.op &&
           measure == o.measure && domain == o.domain && sweep == o.sweep && eval == o.eval && dini == o.dini &&
           counterexample == o.counterexample && hierarchy == o.hierarchy && output == o.output;
  }

  int line_of(const std::string& key) const {
    const auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  }
};

namespace detail {

class ConfigReader {
 public:
  ConfigReader(TomlDocument& doc, ExperimentConfig& cfg) : doc_(doc), cfg_(cfg) {}

  template <class T>
  void read(const std::string& table, const std::string& key, T& out) {
    auto t = doc_.find(table);
    if (t == doc_.end()) return;
    auto it = t->second.find(key);
    if (it == t->second.end()) return;
    const TomlValue v = it->second;
    t->second.erase(it);
    cfg_.lines[table.empty() ? key : table + "." + key] = v.line;
    assign(v, out, key);
  }

  void reject_unknown() const {
    for (const auto& [table, keys] : doc_) {
      for (const auto& [key, v] : keys)
        throw ConfigError("unknown key '" + (table.empty() ? key : table + "." + key) + "'", v.line);
    }
  }

 private:
  static void assign(const TomlValue& v, double& out, const std::string& key) {
    if (v.type != TomlValue::Type::Number) throw ConfigError("'" + key + "' must be a number", v.line);
    out = v.number;
  }
  static void assign(const TomlValue& v, int& out, const std::string& key) {
    double d = 0.0;
    assign(v, d, key);
    if (d != std::floor(d) || std::abs(d) > 2e9) throw ConfigError("'" + key + "' must be an integer", v.line);
    out = static_cast<int>(d);
  }
  static void assign(const TomlValue& v, std::uint64_t& out, const std::string& key) {
    double d = 0.0;
    assign(v, d, key);
    if (d != std::floor(d) || d < 0.0 || d > 9.0e15) throw ConfigError("'" + key + "' must be a nonnegative integer", v.line);
    out = static_cast<std::uint64_t>(d);
  }
  static void assign(const TomlValue& v, bool& out, const std::string& key) {
    if (v.type != TomlValue::Type::Bool) throw ConfigError("'" + key + "' must be true or false", v.line);
    out = v.boolean;
  }
  static void assign(const TomlValue& v, std::string& out, const std::string& key) {
    if (v.type != TomlValue::Type::String) throw ConfigError("'" + key + "' must be a string", v.line);
    out = v.text;
  }
  static void assign(const TomlValue& v, std::vector<double>& out, const std::string& key) {
    if (v.type != TomlValue::Type::Array) throw ConfigError("'" + key + "' must be an array of numbers", v.line);
    out.clear();
    for (const auto& item : v.items) {
      double d = 0.0;
      assign(item, d, key);
      out.push_back(d);
    }
  }
  static void assign(const TomlValue& v, std::vector<std::vector<double>>& out, const std::string& key) {
    if (v.type != TomlValue::Type::Array) throw ConfigError("'" + key + "' must be an array of arrays", v.line);
    out.clear();
    for (const auto& item : v.items) {
      std::vector<double> row;
      assign(item, row, key);
      out.push_back(std::move(row));
    }
  }

  TomlDocument& doc_;
  ExperimentConfig& cfg_;
};

}  // namespace detail

/// Parse and cross-validate an experiment configuration.
inline ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".") {
  TomlDocument doc = parse_toml(text);
  for (const auto& [table, keys] : doc) {
    static const std::vector<std::string> known{"",       "operator",       "measure",   "domain", "sweep",
                                                "eval",   "dini",           "counterexample", "hierarchy", "output"};
    if (std::find(known.begin(), known.end(), table) == known.end()) {
      const int line = keys.empty() ? 0 : keys.begin()->second.line;
      throw ConfigError("unknown table [" + table + "]", line);
    }
  }
  ExperimentConfig c;
  c.base_dir = base_dir;
  detail::ConfigReader r(doc, c);
  r.read("", "dimension", c.dimension);
  r.read("", "seed", c.seed);
  r.read("", "budget", c.budget);
  r.read("", "threads", c.threads);

  auto& o = c.op;
  r.read("operator", "family", o.family);
  r.read("operator", "alpha", o.alpha);
  r.read("operator", "profile", o.profile);
  r.read("operator", "profile_breakpoints", o.profile_breakpoints);
  r.read("operator", "profile_values", o.profile_values);
  r.read("operator", "kernel", o.kernel);
  r.read("operator", "kernel_constant", o.kernel_constant);
  r.read("operator", "kernel_cos", o.kernel_cos);
  r.read("operator", "kernel_sin", o.kernel_sin);
  r.read("operator", "kernel_index", o.kernel_index);
  r.read("operator", "cap_axes", o.cap_axes);
  r.read("operator", "cap_cos", o.cap_cos);
  r.read("operator", "cap_values", o.cap_values);
  r.read("operator", "g", o.g);
  r.read("operator", "g_params", o.g_params);
  r.read("operator", "target", o.target);
  r.read("operator", "sphere_order", o.sphere_order);

  auto& m = c.measure;
  r.read("measure", "kind", m.kind);
  r.read("measure", "radius", m.radius);
  r.read("measure", "density", m.density);
  r.read("measure", "probability", m.probability);
  r.read("measure", "points", m.points);
  r.read("measure", "weights", m.weights);
  r.read("measure", "edges", m.edges);
  r.read("measure", "densities", m.densities);
  r.read("measure", "box_lo", m.box_lo);
  r.read("measure", "box_hi", m.box_hi);
  r.read("measure", "box_counts", m.box_counts);
  r.read("measure", "box_values", m.box_values);
  r.read("measure", "file", m.file);
  r.read("measure", "normalize", m.normalize);

  r.read("domain", "rho", c.domain.rho);
  r.read("domain", "outer_radius", c.domain.outer_radius);

  r.read("sweep", "t", c.sweep.t);
  r.read("sweep", "lambda", c.sweep.lambda);
  r.read("sweep", "type1_lambda_min", c.sweep.type1_lambda_min);
  r.read("sweep", "type1_lambda_max", c.sweep.type1_lambda_max);
  r.read("sweep", "lambda_points", c.sweep.lambda_points);
  r.read("sweep", "strata", c.sweep.strata);

  r.read("eval", "x", c.eval.x);

  r.read("dini", "q", c.dini.q);
  r.read("dini", "s", c.dini.s);
  r.read("dini", "t_max", c.dini.t_max);
  r.read("dini", "levels", c.dini.levels);
  r.read("dini", "shift_budget", c.dini.shift_budget);
  r.read("dini", "order", c.dini.order);

  r.read("counterexample", "t", c.counterexample.t);
  r.read("counterexample", "grid", c.counterexample.grid);

  r.read("hierarchy", "p", c.hierarchy.p);
  r.read("hierarchy", "t", c.hierarchy.t);
  r.read("hierarchy", "lambda", c.hierarchy.lambda);
  r.read("hierarchy", "outer_factor", c.hierarchy.outer_factor);

  r.read("output", "dir", c.output.dir);
  r.read("output", "prefix", c.output.prefix);
  r.reject_unknown();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto parent = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), parent.empty() ? "." : parent.string());
}

namespace detail {

inline std::string toml_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

inline std::string toml_array(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out + "]";
}

inline std::string toml_array(const std::vector<std::vector<double>>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + toml_array(v[i]);
  return out + "]";
}

}  // namespace detail

/// Serialize every field; parse_config(to_toml(c)) == c.
inline std::string to_toml(const ExperimentConfig& c) {
  using detail::toml_array;
  using detail::toml_string;
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  std::ostringstream o;
  o << "dimension = " << c.dimension << "\nseed = " << c.seed << "\nbudget = " << c.budget << "\nthreads = " << c.threads
    << "\n\n[operator]\nfamily = " << toml_string(c.op.family) << "\nalpha = " << format_double(c.op.alpha)
    << "\nprofile = " << toml_string(c.op.profile) << "\nprofile_breakpoints = " << toml_array(c.op.profile_breakpoints)
    << "\nprofile_values = " << toml_array(c.op.profile_values) << "\nkernel = " << toml_string(c.op.kernel)
    << "\nkernel_constant = " << format_double(c.op.kernel_constant) << "\nkernel_cos = " << toml_array(c.op.kernel_cos)
    << "\nkernel_sin = " << toml_array(c.op.kernel_sin) << "\nkernel_index = " << c.op.kernel_index
    << "\ncap_axes = " << toml_array(c.op.cap_axes) << "\ncap_cos = " << toml_array(c.op.cap_cos)
    << "\ncap_values = " << toml_array(c.op.cap_values) << "\ng = " << toml_string(c.op.g)
    << "\ng_params = " << toml_array(c.op.g_params) << "\ntarget = " << toml_string(c.op.target)
    << "\nsphere_order = " << c.op.sphere_order
    << "\n\n[measure]\nkind = " << toml_string(c.measure.kind) << "\nradius = " << format_double(c.measure.radius)
    << "\ndensity = " << format_double(c.measure.density) << "\nprobability = " << b(c.measure.probability)
    << "\npoints = " << toml_array(c.measure.points) << "\nweights = " << toml_array(c.measure.weights)
    << "\nedges = " << toml_array(c.measure.edges) << "\ndensities = " << toml_array(c.measure.densities)
    << "\nbox_lo = " << toml_array(c.measure.box_lo) << "\nbox_hi = " << toml_array(c.measure.box_hi)
    << "\nbox_counts = " << toml_array(c.measure.box_counts) << "\nbox_values = " << toml_array(c.measure.box_values)
    << "\nfile = " << toml_string(c.measure.file) << "\nnormalize = " << b(c.measure.normalize)
    << "\n\n[domain]\nrho = " << format_double(c.domain.rho)
    << "\nouter_radius = " << format_double(c.domain.outer_radius)
    << "\n\n[sweep]\nt = " << toml_array(c.sweep.t) << "\nlambda = " << toml_array(c.sweep.lambda)
    << "\ntype1_lambda_min = " << format_double(c.sweep.type1_lambda_min)
    << "\ntype1_lambda_max = " << format_double(c.sweep.type1_lambda_max)
    << "\nlambda_points = " << c.sweep.lambda_points << "\nstrata = " << c.sweep.strata
    << "\n\n[eval]\nx = " << toml_array(c.eval.x)
    << "\n\n[dini]\nq = " << format_double(c.dini.q) << "\ns = " << format_double(c.dini.s)
    << "\nt_max = " << format_double(c.dini.t_max) << "\nlevels = " << c.dini.levels
    << "\nshift_budget = " << c.dini.shift_budget << "\norder = " << c.dini.order
    << "\n\n[counterexample]\nt = " << format_double(c.counterexample.t) << "\ngrid = " << c.counterexample.grid
    << "\n\n[hierarchy]\np = " << format_double(c.hierarchy.p) << "\nt = " << toml_array(c.hierarchy.t)
    << "\nlambda = " << toml_array(c.hierarchy.lambda) << "\nouter_factor = " << format_double(c.hierarchy.outer_factor)
    << "\n\n[output]\ndir = " << toml_string(c.output.dir) << "\nprefix = " << toml_string(c.output.prefix) << "\n";
  return o.str();
}

/// Atomic measure rows "y_1,...,y_n,w" (blank lines and '#' comments skipped).
inline Measure load_atomic_csv(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open measure file '" + path + "'");
  std::vector<Point> pts;
  std::vector<double> w;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = detail::trim(detail::strip_comment(raw));
    if (s.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell = detail::trim(cell);
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw ConfigError(path + ": invalid number '" + cell + "'", line);
      row.push_back(v);
    }
    if (row.size() != static_cast<std::size_t>(n) + 1)
      throw ConfigError(path + ": expected " + std::to_string(n + 1) + " columns", line);
    w.push_back(row.back());
    row.pop_back();
    pts.push_back(std::move(row));
  }
  return Measure::atomic(Dimension(n), std::move(pts), std::move(w));
}

namespace detail {

/// Rethrow construction errors as ConfigError at the line of `key`.
template <class F>
auto at_line(const ExperimentConfig& c, const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what(), c.line_of(key));
  }
}

}  // namespace detail

inline OperatorKernel build_kernel(const ExperimentConfig& c) {
  const Dimension n(c.dimension);
  const auto& o = c.op;
  const Family fam = detail::at_line(c, "operator.family", [&] { return parse_family(o.family); });
  if (fam == Family::RadialMaximal) {
    return detail::at_line(c, "operator.profile", [&]() -> OperatorKernel {
      if (o.profile == "indicator") return RadialProfile::indicator(n);
      if (o.profile == "poisson") return RadialProfile::poisson(n);
      if (o.profile == "heat") return RadialProfile::heat(n);
      if (o.profile == "table") return RadialProfile::table(n, o.profile_breakpoints, o.profile_values);
      throw std::invalid_argument("unknown profile '" + o.profile + "'");
    });
  }
  if (fam == Family::Convolution) {
    return detail::at_line(c, "operator.g", [&]() -> OperatorKernel {
      auto param = [&](std::size_t i, double dflt) { return i < o.g_params.size() ? o.g_params[i] : dflt; };
      if (o.g == "gaussian") return FreeKernel::gaussian(param(0, 1.0));
      if (o.g == "power") return FreeKernel::power(param(0, c.dimension / 2.0));
      if (o.g == "truncated_power") return FreeKernel::truncated_power(param(0, c.dimension / 2.0), param(1, 1.0));
      if (o.g == "tent") return FreeKernel::tent(param(0, 1.0));
      throw std::invalid_argument("unknown kernel g '" + o.g + "'");
    });
  }
  return detail::at_line(c, "operator.kernel", [&]() -> OperatorKernel {
    if (o.kernel == "constant") return HomogeneousKernel::constant(n, o.kernel_constant);
    if (o.kernel == "trig") return HomogeneousKernel::angular_trig(o.kernel_cos, o.kernel_sin);
    if (o.kernel == "component") return HomogeneousKernel::component(n, o.kernel_index);
    if (o.kernel == "sign") {
      if (c.dimension != 1) throw std::invalid_argument("the sign kernel requires dimension 1");
      return HomogeneousKernel::sign();
    }
    if (o.kernel == "caps") {
      if (o.cap_axes.size() != o.cap_cos.size() || o.cap_axes.size() != o.cap_values.size())
        throw std::invalid_argument("cap_axes, cap_cos and cap_values must have equal length");
      std::vector<HomogeneousKernel::Cap> caps;
      for (std::size_t i = 0; i < o.cap_axes.size(); ++i) caps.push_back({o.cap_axes[i], o.cap_cos[i], o.cap_values[i]});
      return HomogeneousKernel::signed_caps(n, std::move(caps));
    }
    throw std::invalid_argument("unknown kernel '" + o.kernel + "'");
  });
}

inline OperatorSpec build_spec(const ExperimentConfig& c) {
  if (c.dimension < 1) throw ConfigError("dimension must be >= 1", c.line_of("dimension"));
  const FracOrder alpha = detail::at_line(c, "operator.alpha", [&] { return FracOrder(c.op.alpha, Dimension(c.dimension)); });
  OperatorSpec spec{detail::at_line(c, "operator.family", [&] { return parse_family(c.op.family); }), build_kernel(c), alpha};
  detail::at_line(c, "operator.family", [&] {
    spec.validate();
    return 0;
  });
  return spec;
}

inline std::optional<TargetKind> build_target(const ExperimentConfig& c) {
  if (c.op.target == "auto") return std::nullopt;
  return detail::at_line(c, "operator.target", [&] { return parse_target(c.op.target); });
}

inline Measure build_measure(const ExperimentConfig& c) {
  const Dimension n(c.dimension);
  const auto& m = c.measure;
  Measure mu = detail::at_line(c, "measure.kind", [&]() -> Measure {
    if (m.kind == "uniform_ball") {
      if (m.probability) return Measure::uniform_probability_ball(n, m.radius);
      return Measure::uniform_ball(n, m.radius, m.density);
    }
    if (m.kind == "atomic") {
      if (m.points.size() != m.weights.size()) throw std::invalid_argument("points and weights must have equal length");
      return Measure::atomic(n, m.points, m.weights);
    }
    if (m.kind == "radial") return Measure::radial(n, m.edges, m.densities);
    if (m.kind == "box") {
      std::vector<int> counts;
      for (double v : m.box_counts) {
        if (v != std::floor(v) || v < 1) throw std::invalid_argument("box_counts must be positive integers");
        counts.push_back(static_cast<int>(v));
      }
      Measure b = Measure::box(m.box_lo, m.box_hi, counts, m.box_values);
      if (b.dimension() != c.dimension) throw std::invalid_argument("box dimension does not match 'dimension'");
      return b;
    }
    if (m.kind == "csv") {
      std::filesystem::path p(m.file);
      if (p.is_relative()) p = std::filesystem::path(c.base_dir) / p;
      return load_atomic_csv(p.string(), c.dimension);
    }
    throw std::invalid_argument("unknown measure kind '" + m.kind + "'");
  });
  if (m.normalize) mu = mu.normalized();
  return mu;
}

inline SweepOptions build_sweep_options(const ExperimentConfig& c) {
  if (!(c.domain.rho > 0.0) || !(c.domain.outer_radius > c.domain.rho))
    throw ConfigError("domain requires 0 < rho < outer_radius", c.line_of("domain.rho"));
  if (c.budget < 100) throw ConfigError("budget must be at least 100", c.line_of("budget"));
  SweepOptions s;
  s.t_values = c.sweep.t;
  s.rho = c.domain.rho;
  s.outer_radius = c.domain.outer_radius;
  s.lambdas = c.sweep.lambda;
  s.sampling.budget = c.budget;
  s.sampling.seed = c.seed;
  s.sampling.strata = c.sweep.strata;
  s.sampling.threads = c.threads;
  s.type1_range.lo = c.sweep.type1_lambda_min;
  s.type1_range.hi = c.sweep.type1_lambda_max;
  s.type1_range.points = c.sweep.lambda_points;
  s.target = build_target(c);
  s.op.sphere_order = c.op.sphere_order;
  return s;
}

}  // namespace limitlab
