#pragma once

// t -> 0+ experiments: limit targets, type-1/2/3 convergence sweeps over a
// list of dilations V_t, the optimality certificate for the Hardy-Littlewood
// case, and the demonstration that type-2 convergence does not imply type-1.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "limitlab/errors.hpp"
#include "limitlab/geometry.hpp"
#include "limitlab/kernels.hpp"
#include "limitlab/lorentz.hpp"
#include "limitlab/measures.hpp"
#include "limitlab/operators.hpp"

namespace limitlab {

enum class TargetKind { RadialSup, HomogAbs, HomogSigned, Convolution };

inline std::string target_name(TargetKind k) {
  switch (k) {
    case TargetKind::RadialSup: return "radial_sup";
    case TargetKind::HomogAbs: return "homog_abs";
    case TargetKind::HomogSigned: return "homog_signed";
    case TargetKind::Convolution: return "convolution";
  }
  return "?";
}

inline TargetKind parse_target(const std::string& s) {
  for (TargetKind k : {TargetKind::RadialSup, TargetKind::HomogAbs, TargetKind::HomogSigned, TargetKind::Convolution})
    if (target_name(k) == s) return k;
  throw std::invalid_argument("unknown limit target '" + s + "'");
}

/// The target each family converges to: maximal families to sup_r phi_r^alpha
/// or |Omega| / |x|^{n-alpha}, fractional integrals to the signed kernel,
/// convolutions to g, all times V(R^n).
inline TargetKind canonical_target(Family f) {
  switch (f) {
    case Family::RadialMaximal: return TargetKind::RadialSup;
    case Family::HomogMaximal:
    case Family::TruncatedMaximal: return TargetKind::HomogAbs;
    case Family::FracIntegral: return TargetKind::HomogSigned;
    case Family::Convolution: return TargetKind::Convolution;
  }
  return TargetKind::RadialSup;
}

struct LimitTarget {
  TargetKind kind;
  double mass = 1.0;  // V(R^n)
  bool canonical = true;
  bool singular_at_origin = true;
  PointFunction f;

  double operator()(std::span<const double> x) const { return f(x); }
};

/// Target of the given kind built from the spec's kernel; the kind may
/// differ from the canonical pairing (flagged through `canonical`).
inline LimitTarget make_target(TargetKind kind, const OperatorSpec& spec, const Measure& V) {
  spec.validate();
  LimitTarget t{kind, V.total_mass(), kind == canonical_target(spec.family), true, {}};
  const double mass = t.mass;
  const FracOrder alpha = spec.alpha;
  auto singular = [](std::span<const double> x) {
    if (norm(x) == 0.0) throw SingularityError("limit target is singular at the origin");
  };
  switch (kind) {
    case TargetKind::RadialSup: {
      const auto* phi = std::get_if<RadialProfile>(&spec.kernel);
      if (!phi) throw std::invalid_argument("radial_sup target needs a radial profile");
      const double S = scale_supremum(*phi, alpha).value;
      const double e = alpha.exponent();
      t.f = [S, e, mass, singular](std::span<const double> x) {
        singular(x);
        return mass * S / std::pow(norm(x), e);
      };
      return t;
    }
    case TargetKind::HomogAbs:
    case TargetKind::HomogSigned: {
      const auto* omega = std::get_if<HomogeneousKernel>(&spec.kernel);
      if (!omega) throw std::invalid_argument(target_name(kind) + " target needs a homogeneous kernel");
      const HomogeneousKernel k = *omega;
      const double e = alpha.exponent();
      const bool abs = kind == TargetKind::HomogAbs;
      t.f = [k, e, mass, abs, singular](std::span<const double> x) {
        singular(x);
        const double v = k(x) / std::pow(norm(x), e);
        return mass * (abs ? std::abs(v) : v);
      };
      return t;
    }
    case TargetKind::Convolution: {
      const auto* g = std::get_if<FreeKernel>(&spec.kernel);
      if (!g) throw std::invalid_argument("convolution target needs a free kernel");
      const FreeKernel k = *g;
      t.singular_at_origin = k.singular_at_origin;
      t.f = [k, mass](std::span<const double> x) { return mass * k(x); };
      return t;
    }
  }
  return t;
}

inline LimitTarget limit_target(const OperatorSpec& spec, const Measure& V) {
  return make_target(canonical_target(spec.family), spec, V);
}

/// Shortest string that reads back to the same double; '.' decimal point,
/// independent of the locale.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct SweepOptions {
  std::vector<double> t_values;
  double rho = 0.5;
  double outer_radius = 50.0;
  std::vector<double> lambdas{1.0};
  SamplingOptions sampling;
  LambdaRange type1_range;  // automatic by default
  std::optional<TargetKind> target;  // default: canonical
  OperatorOptions op;
};

struct SweepRecord {
  double t = 0.0;
  double r_t = 0.0;
  double eps_t = 0.0;
  double beta_t = std::numeric_limits<double>::quiet_NaN();  // NaN when unusable
  bool usable = true;
  WeakNormEstimate type1;
  std::vector<LevelSetEstimate> type2;
  std::vector<LevelSetEstimate> type3_op;
  std::vector<LevelSetEstimate> type3_target;
  std::size_t excluded_points = 0;
  std::vector<std::string> warnings;
};

struct SweepReport {
  std::string family;
  std::string target;
  bool target_canonical = true;
  int dimension = 1;
  double alpha = 0.0;
  double p = 1.0;
  double rho = 0.0;
  double outer_radius = 0.0;
  std::vector<double> lambdas;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  double mass = 1.0;
  std::vector<std::string> warnings;
  std::vector<SweepRecord> records;

  static constexpr const char* csv_header =
      "t,rho,lambda,type1_norm,type1_std_error,type2_measure,type2_std_error,type3_op,type3_op_std_error,"
      "type3_target,type3_target_std_error,eps_t,beta_t,usable";

  /// One row per (t, lambda).
  std::string to_csv() const {
    std::ostringstream out;
    out << csv_header << '\n';
    for (const auto& r : records) {
      for (std::size_t i = 0; i < lambdas.size(); ++i) {
        out << format_double(r.t) << ',' << format_double(rho) << ',' << format_double(lambdas[i]) << ','
            << format_double(r.type1.value) << ',' << format_double(r.type1.std_error) << ','
            << format_double(r.type2[i].measure_est) << ',' << format_double(r.type2[i].std_error) << ','
            << format_double(r.type3_op[i].measure_est) << ',' << format_double(r.type3_op[i].std_error) << ','
            << format_double(r.type3_target[i].measure_est) << ',' << format_double(r.type3_target[i].std_error) << ','
            << format_double(r.eps_t) << ',' << format_double(r.beta_t) << ',' << (r.usable ? 1 : 0) << '\n';
      }
    }
    return out.str();
  }

  nlohmann::json to_json() const {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records) {
      auto levels = [](const std::vector<LevelSetEstimate>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& e : v) a.push_back(e.to_json());
        return a;
      };
      recs.push_back({{"t", r.t},
                      {"r_t", r.r_t},
                      {"eps_t", r.eps_t},
                      {"beta_t", std::isnan(r.beta_t) ? nlohmann::json(nullptr) : nlohmann::json(r.beta_t)},
                      {"usable", r.usable},
                      {"type1", r.type1.to_json()},
                      {"type2", levels(r.type2)},
                      {"type3_op", levels(r.type3_op)},
                      {"type3_target", levels(r.type3_target)},
                      {"excluded_points", r.excluded_points},
                      {"warnings", r.warnings}});
    }
    return {{"family", family},   {"target", target}, {"target_canonical", target_canonical},
            {"dimension", dimension}, {"alpha", alpha}, {"p", p},
            {"rho", rho},         {"outer_radius", outer_radius}, {"lambdas", lambdas},
            {"budget", budget},   {"seed", seed},     {"mass", mass},
            {"warnings", warnings}, {"records", recs}};
  }
};

/// (rho / (rho - r_t))^{n-alpha} - 1 and 1 - (rho / (rho + r_t))^{n-alpha} (1 - eps_t):
/// the two-sided bracket of the operator against its target on |x| > rho.
inline double beta_proxy(double rho, double r_t, double exponent, double eps_t) {
  const double upper = std::pow(rho / (rho - r_t), exponent) - 1.0;
  const double lower = 1.0 - std::pow(rho / (rho + r_t), exponent) * (1.0 - eps_t);
  return std::max(upper, lower);
}

/// Per-t seeds derived from the master seed (one for the exterior domain,
/// one for the ball domain); identical for every thread count.
inline std::uint64_t sweep_seed(std::uint64_t master, std::size_t t_index, std::uint64_t role) {
  return CounterStream(master).child(t_index).child(role).key();
}

/// Run the type-1/2/3 measurements for every t (processed in the given
/// order, which must be strictly decreasing).
///   type-1: weak L^{n/(n-alpha)} norm of T V_t - target on rho < |x| <= R;
///   type-2: |{|T V_t - target| > lambda}| on B(0, R);
///   type-3: |{|T V_t| > lambda}| and |{|target| > lambda}| on B(0, R).
inline SweepReport sweep(const OperatorSpec& spec, const Measure& V, const SweepOptions& opts) {
  spec.validate();
  if (opts.t_values.empty()) throw std::invalid_argument("sweep: empty t list");
  for (std::size_t i = 0; i < opts.t_values.size(); ++i) {
    if (!(opts.t_values[i] > 0.0)) throw std::invalid_argument("sweep: t values must be positive");
    if (i > 0 && !(opts.t_values[i] < opts.t_values[i - 1]))
      throw std::invalid_argument("sweep: t values must be strictly decreasing");
  }
  if (opts.lambdas.empty()) throw std::invalid_argument("sweep: empty lambda list");
  for (double l : opts.lambdas)
    if (!(l > 0.0)) throw std::invalid_argument("sweep: lambda values must be positive");
  if (!(opts.rho > 0.0)) throw std::invalid_argument("sweep: rho must be positive");
  if (!(opts.outer_radius > opts.rho)) throw std::invalid_argument("sweep: outer radius must exceed rho");
  if (V.dimension() != spec.dimension()) throw std::invalid_argument("sweep: measure dimension mismatch");

  const int n = spec.dimension();
  const TargetKind kind = opts.target.value_or(canonical_target(spec.family));
  const LimitTarget target = make_target(kind, spec, V);
  OperatorOptions op = opts.op;
  if (V.is_atomic() && op.atom_guard == 0.0) op.atom_guard = 1e-9;
  const OperatorEvaluator eval(spec, op);

  SweepReport rep;
  rep.family = family_name(spec.family);
  rep.target = target_name(kind);
  rep.target_canonical = target.canonical;
  rep.dimension = n;
  rep.alpha = spec.alpha.value();
  rep.p = n / spec.alpha.exponent();
  rep.rho = opts.rho;
  rep.outer_radius = opts.outer_radius;
  rep.lambdas = opts.lambdas;
  rep.budget = opts.sampling.budget;
  rep.seed = opts.sampling.seed;
  rep.mass = target.mass;
  if (!target.canonical) rep.warnings.push_back("target " + rep.target + " does not match operator family " + rep.family);
  if (V.is_atomic() && kind == TargetKind::HomogSigned)
    rep.warnings.push_back("atomic measure with a signed target: convergence is not guaranteed");

  const EvalDomain exterior = EvalDomain::exterior(Dimension(n), opts.rho, opts.outer_radius);
  const EvalDomain ball = EvalDomain::exterior(Dimension(n), 0.0, opts.outer_radius);

  for (std::size_t ti = 0; ti < opts.t_values.size(); ++ti) {
    const double t = opts.t_values[ti];
    SweepRecord rec;
    rec.t = t;
    const SplitMeasure sp = split(V, t);
    rec.r_t = sp.r_t;
    rec.eps_t = sp.eps_t;
    rec.usable = 2.0 * sp.r_t < opts.rho;
    if (rec.usable) rec.beta_t = beta_proxy(opts.rho, sp.r_t, spec.alpha.exponent(), sp.eps_t);
    else rec.warnings.push_back("unusable t: requires sqrt(t) < rho/2");
    if (t >= 1.0) rec.warnings.push_back("t >= 1: outside the small-t regime");

    const Measure Vt = V.dilate(t);
    auto diff = [&](std::span<const double> x) { return eval.evaluate(Vt, x) - target(x); };

    SamplingOptions s1 = opts.sampling;
    s1.seed = sweep_seed(opts.sampling.seed, ti, 1);
    const LevelSetSamples ext(diff, exterior, s1);
    rec.type1 = weak_norm(ext, rep.p, opts.type1_range);

    SamplingOptions s2 = opts.sampling;
    s2.seed = sweep_seed(opts.sampling.seed, ti, 2);
    const auto inner = LevelSetSamples::sample_many(ball, s2, 3, [&](std::span<const double> x, std::span<double> out) {
      const double a = eval.evaluate(Vt, x);
      const double b = target(x);
      out[0] = a - b;
      out[1] = a;
      out[2] = b;
    });
    rec.excluded_points = ext.excluded() + inner[0].excluded();
    for (double l : opts.lambdas) {
      rec.type2.push_back(inner[0].estimate(l));
      rec.type3_op.push_back(inner[1].estimate(l));
      rec.type3_target.push_back(inner[2].estimate(l));
    }
    rep.records.push_back(std::move(rec));
  }
  return rep;
}

/// Certificate for dV = chi_{B(0,1)} dx: on |x| <= t/2 the maximal function
/// equals |B(0,1)| / t^n exactly, and the gap to the target there exceeds
/// lambda_0 = 2 |B(0,1)| / t^n, which keeps the type-1 norm away from zero.
struct Rm13Certificate {
  int n = 1;
  double t = 0.0;
  double omega = 0.0;
  double lambda0 = 0.0;
  double inner_ball_measure = 0.0;   // |B(0, t/2)|
  double product = 0.0;              // lambda0 |B(0, t/2)|
  double expected = 0.0;             // |B(0,1)|^2 / 2^{n-1}
  double product_ulps = 0.0;
  bool product_exact = false;        // within 4 ulp
  std::size_t grid_points = 0;
  double mvt_max_rel_error = 0.0;    // max |M V_t(x) t^n / omega - 1| on the grid
  double min_gap_ratio = 0.0;        // min |M V_t(x) - omega/|x|^n| t^n / omega
  bool gap_three_holds = false;      // min_gap_ratio >= 3 on the grid
  double fraction_above_lambda0 = 0.0;
  double certified_bound = 0.0;      // lambda0 |{|x| <= t/2 : gap > lambda0}|

  nlohmann::json to_json() const {
    return {{"n", n},
            {"t", t},
            {"omega", omega},
            {"lambda0", lambda0},
            {"inner_ball_measure", inner_ball_measure},
            {"product", product},
            {"expected", expected},
            {"product_ulps", product_ulps},
            {"product_exact", product_exact},
            {"grid_points", grid_points},
            {"mvt_max_rel_error", mvt_max_rel_error},
            {"min_gap_ratio", min_gap_ratio},
            {"gap_three_holds", gap_three_holds},
            {"fraction_above_lambda0", fraction_above_lambda0},
            {"certified_bound", certified_bound}};
  }
};

inline double ulp_distance(double a, double b) {
  if (a == b) return 0.0;
  const double ulp = std::nextafter(std::abs(b), std::numeric_limits<double>::infinity()) - std::abs(b);
  return std::abs(a - b) / ulp;
}

inline Rm13Certificate counterexample_rm13(int n, double t, std::size_t grid_points = 100, std::uint64_t seed = 7) {
  if (!(t > 0.0) || !(t < 1.0)) throw std::invalid_argument("counterexample: t must lie in (0, 1)");
  if (grid_points < 1) throw std::invalid_argument("counterexample: need at least one grid point");
  const Dimension dim(n);
  Rm13Certificate c;
  c.n = n;
  c.t = t;
  c.omega = unit_ball_volume(dim);
  c.lambda0 = 2.0 * c.omega / std::pow(t, n);
  c.inner_ball_measure = ball_volume(dim, 0.5 * t);
  c.product = c.lambda0 * c.inner_ball_measure;
  c.expected = c.omega * c.omega / std::pow(2.0, n - 1);
  c.product_ulps = ulp_distance(c.product, c.expected);
  c.product_exact = c.product_ulps <= 4.0;

  const Measure Vt = Measure::uniform_ball(dim).dilate(t);
  const RadialProfile chi = RadialProfile::indicator(dim);
  const FracOrder zero(0.0, dim);
  const double level = c.omega / std::pow(t, n);
  const CounterStream stream(seed);
  c.grid_points = grid_points;
  c.min_gap_ratio = std::numeric_limits<double>::infinity();
  std::size_t above = 0;
  Point x(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < grid_points; ++i) {
    if (n == 1) {
      // Midpoint grid on [-t/2, t/2]; an even count avoids the origin.
      x[0] = -0.5 * t + t * (static_cast<double>(i) + 0.5) / static_cast<double>(grid_points);
      if (x[0] == 0.0) x[0] = 0.25 * t / static_cast<double>(grid_points);
    } else {
      const double r = 0.5 * t * std::pow(stream.uniform_open(i), 1.0 / n);
      for (int d = 0; d < n; ++d) x[static_cast<std::size_t>(d)] = stream.child(1).normal(i * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(d));
      const double len = norm(x);
      for (double& v : x) v *= r / len;
    }
    const double m = maximal_radial(chi, zero, Vt, x);
    c.mvt_max_rel_error = std::max(c.mvt_max_rel_error, std::abs(m / level - 1.0));
    const double gap = std::abs(m - c.omega / std::pow(norm(x), n));
    c.min_gap_ratio = std::min(c.min_gap_ratio, gap / level);
    if (gap > c.lambda0) ++above;
  }
  c.gap_three_holds = c.min_gap_ratio >= 3.0;
  c.fraction_above_lambda0 = static_cast<double>(above) / static_cast<double>(grid_points);
  // gap > lambda0 on |x| <= t/2 exactly when |x| < t 3^{-1/n}.
  c.certified_bound = c.lambda0 * ball_volume(dim, std::min(0.5 * t, t * std::pow(3.0, -1.0 / n)));
  return c;
}

struct HierarchyOptions {
  std::vector<double> t_values{0.1, 0.01, 0.001};
  std::vector<double> lambdas{0.5, 1.0};
  SamplingOptions sampling{20000, 11, 32, 0};
  double outer_factor = 10.0;   // sampled region |x| <= outer_factor / t, exact tail beyond
  double lambda_ratio = 1e-3;   // weak-norm grid spans [ratio, 1] times sup |g - g_(t)|
};

struct HierarchyRecord {
  double t = 0.0;
  std::vector<LevelSetEstimate> type2;
  WeakNormEstimate weak;
};

struct HierarchyReport {
  double p = 1.0;
  double limit_value = 0.0;      // 2^{1/p}: lambda -> 0 value of the weak norm
  double min_weak_norm = 0.0;
  bool type2_vanishes = true;    // final type-2 measures are zero and nonincreasing in t
  std::vector<double> lambdas;
  std::vector<HierarchyRecord> records;

  nlohmann::json to_json() const {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records) {
      nlohmann::json t2 = nlohmann::json::array();
      for (const auto& e : r.type2) t2.push_back(e.to_json());
      recs.push_back({{"t", r.t}, {"type2", t2}, {"weak_norm", r.weak.value}, {"weak_norm_std_error", r.weak.std_error},
                      {"argmax_lambda", r.weak.argmax_lambda}});
    }
    return {{"p", p}, {"limit_value", limit_value}, {"min_weak_norm", min_weak_norm}, {"type2_vanishes", type2_vanishes},
            {"lambdas", lambdas}, {"records", recs}};
  }
};

/// n = 1, g(x) = |x|^{-1/p}, g_(t) = g chi_{B(0,1/t)}: for fixed lambda the
/// set {|g - g_(t)| > lambda} empties as t -> 0 (type-2 convergence) while
/// the weak L^{p,infinity} norm of g - g_(t), which lives on |x| > 1/t and
/// is therefore the same on any exterior domain, stays at 2^{1/p}.
inline HierarchyReport hierarchy_demo(double p, const HierarchyOptions& opts = {}) {
  if (!(p > 0.0)) throw std::invalid_argument("hierarchy demo: p must be positive");
  HierarchyReport rep;
  rep.p = p;
  rep.limit_value = std::pow(2.0, 1.0 / p);
  rep.lambdas = opts.lambdas;
  rep.min_weak_norm = std::numeric_limits<double>::infinity();
  for (std::size_t ti = 0; ti < opts.t_values.size(); ++ti) {
    const double t = opts.t_values[ti];
    const double cut = 1.0 / t;
    const double R = opts.outer_factor * cut;
    const PointFunction h = [p, cut](std::span<const double> x) {
      const double r = std::abs(x[0]);
      return r > cut ? std::pow(r, -1.0 / p) : 0.0;
    };
    TailModel tail;
    tail.exact = [p, R](double lambda) { return 2.0 * std::max(0.0, std::pow(lambda, -p) - R); };

    HierarchyRecord rec;
    rec.t = t;
    SamplingOptions s = opts.sampling;
    s.seed = sweep_seed(opts.sampling.seed, ti, 2);
    const LevelSetSamples full(h, EvalDomain::exterior(Dimension(1), 0.0, R), s);
    for (double l : opts.lambdas) rec.type2.push_back(with_tail(full.estimate(l), &tail, full.domain()));

    s.seed = sweep_seed(opts.sampling.seed, ti, 1);
    const LevelSetSamples ext(h, EvalDomain::exterior(Dimension(1), cut, R), s);
    const double top = std::pow(cut, -1.0 / p);
    rec.weak = weak_norm(ext, p, {top * opts.lambda_ratio, top, 64}, &tail);
    rep.min_weak_norm = std::min(rep.min_weak_norm, rec.weak.value);
    rep.records.push_back(std::move(rec));
  }
  for (std::size_t i = 0; i < opts.lambdas.size(); ++i) {
    for (std::size_t k = 1; k < rep.records.size(); ++k)
      if (rep.records[k].type2[i].measure_est > rep.records[k - 1].type2[i].measure_est) rep.type2_vanishes = false;
    if (!rep.records.empty() && rep.records.back().type2[i].measure_est != 0.0) rep.type2_vanishes = false;
  }
  return rep;
}

}  // namespace limitlab
