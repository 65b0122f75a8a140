#pragma once

// Command-line front end. run_cli() is stream-parameterized so the test
// suite can drive every subcommand in-process.
//
// Exit status: 0 success, 1 runtime or I/O failure, 2 invalid usage or
// configuration, 3 singular evaluation point.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "limitlab/config.hpp"
#include "limitlab/geometry.hpp"
#include "limitlab/kernels.hpp"
#include "limitlab/limits.hpp"
#include "limitlab/operators.hpp"

namespace limitlab {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSingularity = 3;

struct CliOverrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> budget;
  std::optional<std::string> out;
  std::optional<int> threads;
};

inline ExperimentConfig resolve_config(const CliOverrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.budget) c.budget = *o.budget;
  if (o.out) c.output.dir = *o.out;
  if (o.threads) c.threads = *o.threads;
  return c;
}

/// Operator value, target value and their difference at x. With t set the
/// operator acts on the dilated measure V_t; the target always uses V.
inline int run_eval(const ExperimentConfig& c, std::vector<double> x, std::optional<double> t, bool target_only,
                    std::ostream& out) {
  if (x.empty()) x = c.eval.x;
  if (static_cast<int>(x.size()) != c.dimension)
    throw ConfigError("eval point must have " + std::to_string(c.dimension) + " coordinates", c.line_of("eval.x"));
  if (t && !(*t > 0.0)) throw std::invalid_argument("--t must be positive");
  const OperatorSpec spec = build_spec(c);
  const Measure V = build_measure(c);
  const auto kind = build_target(c).value_or(canonical_target(spec.family));
  nlohmann::json j{{"status", "ok"}, {"family", family_name(spec.family)}, {"target", target_name(kind)}, {"x", x}};
  if (t) j["t"] = *t;
  try {
    const LimitTarget target = make_target(kind, spec, V);
    const double tv = target(x);
    j["target_value"] = tv;
    if (!target_only) {
      OperatorOptions op;
      op.sphere_order = c.op.sphere_order;
      const OperatorEvaluator eval(spec, op);
      const double v = eval.evaluate(t ? V.dilate(*t) : V, x);
      j["value"] = v;
      j["difference"] = v - tv;
    }
  } catch (const SingularityError& e) {
    out << nlohmann::json{{"status", "singularity"}, {"message", e.what()}, {"x", x}}.dump(2) << '\n';
    return kExitSingularity;
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

inline int run_sweep(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  const OperatorSpec spec = build_spec(c);
  const Measure V = build_measure(c);
  const SweepOptions opts = build_sweep_options(c);
  const SweepReport rep = sweep(spec, V, opts);
  for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
  for (const auto& r : rep.records)
    for (const auto& w : r.warnings) err << "warning (t=" << format_double(r.t) << "): " << w << '\n';

  const std::filesystem::path dir(c.output.dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  const auto csv_path = dir / (c.output.prefix + ".csv");
  const auto json_path = dir / (c.output.prefix + ".json");
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
    f.close();
    if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
  };
  write(csv_path, rep.to_csv());
  write(json_path, rep.to_json().dump(2) + "\n");
  out << nlohmann::json{{"status", "ok"}, {"csv", csv_path.string()}, {"json", json_path.string()},
                        {"records", rep.records.size()}}
             .dump(2)
      << '\n';
  return kExitOk;
}

inline nlohmann::json constants_table(int n) {
  const Dimension d(n);
  const double w = unit_ball_volume(d);
  return {{"n", n},
          {"unit_ball_volume", w},
          {"sphere_area", sphere_surface_area(d)},
          {"poisson_sup_constant", poisson_sup_constant(d)},
          {"poisson_critical_radius", poisson_critical_radius(d)},
          {"heat_sup_constant", heat_sup_constant(d)},
          {"heat_critical_radius", heat_critical_radius(d)},
          {"counterexample_bound", w * w / std::pow(2.0, n - 1)}};
}

inline int run_constants(int n, std::ostream& out) {
  out << constants_table(n).dump(2) << '\n';
  return kExitOk;
}

inline int run_dini(const ExperimentConfig& c, std::ostream& out) {
  const OperatorKernel k = build_kernel(c);
  const auto* omega = std::get_if<HomogeneousKernel>(&k);
  if (!omega) throw ConfigError("dini needs a homogeneous kernel (operator.family)", c.line_of("operator.family"));
  const SphereRule rule = default_sphere_rule(c.dimension, c.dini.order);
  DiniOptions opts;
  opts.levels = c.dini.levels;
  opts.shift_budget = static_cast<std::size_t>(std::max(1, c.dini.shift_budget));
  opts.seed = c.seed;
  const DiniIntegralEstimate e = dini_integral(*omega, c.dini.q, c.dini.s, c.dini.t_max, rule, opts);
  out << nlohmann::json{{"kernel", omega->name()},
                        {"q", c.dini.q},
                        {"s", c.dini.s},
                        {"t_max", c.dini.t_max},
                        {"quadrature_nodes", rule.size()},
                        {"t", e.t_samples},
                        {"omega_q", e.omega_samples},
                        {"blocks", e.blocks},
                        {"partial_sum", e.partial_sum},
                        {"integral", e.value},
                        {"divergence_suspected", e.divergence_suspected}}
             .dump(2)
      << '\n';
  return kExitOk;
}

inline int run_counterexample(int n, double t, int grid, std::uint64_t seed, std::ostream& out) {
  if (grid < 1) throw std::invalid_argument("--grid must be positive");
  out << counterexample_rm13(n, t, static_cast<std::size_t>(grid), seed).to_json().dump(2) << '\n';
  return kExitOk;
}

inline int run_hierarchy(const ExperimentConfig& c, std::ostream& out) {
  HierarchyOptions h;
  h.t_values = c.hierarchy.t;
  h.lambdas = c.hierarchy.lambda;
  h.outer_factor = c.hierarchy.outer_factor;
  h.sampling.seed = c.seed;
  h.sampling.budget = c.budget;
  h.sampling.threads = c.threads;
  out << hierarchy_demo(c.hierarchy.p, h).to_json().dump(2) << '\n';
  return kExitOk;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"limitlab: limits of dilated measures under maximal and singular operators"};
  app.require_subcommand(1);
  app.fallthrough();
  CliOverrides o;
  app.add_option("--config", o.config, "experiment config (TOML)");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--budget", o.budget, "Monte Carlo samples per estimate");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--threads", o.threads, "worker threads (0 = LIMITLAB_THREADS or hardware)");

  auto* eval = app.add_subcommand("eval", "operator, target and difference at one point");
  std::vector<double> x;
  std::optional<double> t_eval;
  bool target_only = false;
  eval->add_option("--x", x, "evaluation point, comma separated")->delimiter(',');
  eval->add_option("--t", t_eval, "evaluate on the dilated measure V_t");
  eval->add_flag("--target-only", target_only, "skip the operator");

  auto* sweep_cmd = app.add_subcommand("sweep", "t-sweep of the three convergence types");

  auto* constants = app.add_subcommand("constants", "closed-form constants for dimension n");
  int n_const = 0;
  constants->add_option("-n,--dimension", n_const, "dimension (default: config)");

  app.add_subcommand("dini", "integral continuity modulus and Dini integral");

  auto* ce = app.add_subcommand("counterexample", "certificate for the uniform-ball counterexample");
  int n_ce = 0;
  std::optional<double> t_ce;
  std::optional<int> grid_ce;
  ce->add_option("-n,--dimension", n_ce, "dimension (default: config)");
  ce->add_option("--t", t_ce, "dilation parameter in (0, 1)");
  ce->add_option("--grid", grid_ce, "number of test points");

  auto* hier = app.add_subcommand("hierarchy", "type-2 versus restricted weak-norm convergence");
  std::optional<double> p_h;
  hier->add_option("--p", p_h, "Lebesgue exponent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    ExperimentConfig c = resolve_config(o);
    if (o.threads && *o.threads < 0) throw std::invalid_argument("--threads must be >= 0");
    if (*eval) return run_eval(c, x, t_eval, target_only, out);
    if (*sweep_cmd) return run_sweep(c, out, err);
    if (*constants) return run_constants(n_const > 0 ? n_const : c.dimension, out);
    if (app.got_subcommand("dini")) return run_dini(c, out);
    if (*ce) {
      return run_counterexample(n_ce > 0 ? n_ce : c.dimension, t_ce.value_or(c.counterexample.t),
                                grid_ce.value_or(c.counterexample.grid), c.seed, out);
    }
    if (*hier) {
      if (p_h) c.hierarchy.p = *p_h;
      return run_hierarchy(c, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SingularityError& e) {
    out << nlohmann::json{{"status", "singularity"}, {"message", e.what()}}.dump(2) << '\n';
    return kExitSingularity;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace limitlab
