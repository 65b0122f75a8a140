#pragma once

// Distribution functions |{x in D : |f(x)| > lambda}| by stratified Monte
// Carlo, weak-L^{p,infinity} quasi-norms over restricted domains, and the
// closed-form level sets of |Omega(x)| / |x|^{n-alpha}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "limitlab/errors.hpp"
#include "limitlab/geometry.hpp"
#include "limitlab/kernels.hpp"
#include "limitlab/measures.hpp"
#include "limitlab/operators.hpp"
#include "limitlab/parallel.hpp"
#include "limitlab/rng.hpp"

namespace limitlab {

using PointFunction = std::function<double(std::span<const double>)>;

/// Region on which level sets are measured.
///  - ExteriorOfBall: rho < |x| <= R (rho = 0 gives the ball B(0,R)).
///  - Box: [lo, hi].
///  - FullSpaceProxy: the box [lo, hi] minus the closed ball B(0, rho),
///    which must lie inside the box.
class EvalDomain {
 public:
  enum class Kind { ExteriorOfBall, Box, FullSpaceProxy };

  static EvalDomain exterior(Dimension n, double rho, double R) {
    if (!(rho >= 0.0) || !(R > rho) || !std::isfinite(R))
      throw std::invalid_argument("exterior domain: need 0 <= rho < R < infinity");
    EvalDomain d(n.value(), Kind::ExteriorOfBall);
    d.rho_ = rho;
    d.R_ = R;
    return d;
  }

  static EvalDomain box(Point lo, Point hi) {
    if (lo.empty() || lo.size() != hi.size()) throw std::invalid_argument("box domain: corner dimension mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(hi[i] > lo[i])) throw std::invalid_argument("box domain: need lo < hi on every axis");
    EvalDomain d(static_cast<int>(lo.size()), Kind::Box);
    d.lo_ = std::move(lo);
    d.hi_ = std::move(hi);
    return d;
  }

  static EvalDomain full_space_proxy(Point lo, Point hi, double rho) {
    EvalDomain d = box(std::move(lo), std::move(hi));
    if (!(rho >= 0.0)) throw std::invalid_argument("full-space proxy: rho must be nonnegative");
    for (std::size_t i = 0; i < d.lo_.size(); ++i)
      if (d.lo_[i] > -rho || d.hi_[i] < rho) throw std::invalid_argument("full-space proxy: the ball must lie inside the box");
    d.kind_ = Kind::FullSpaceProxy;
    d.rho_ = rho;
    return d;
  }

  int dimension() const noexcept { return n_; }
  Kind kind() const noexcept { return kind_; }
  double rho() const noexcept { return rho_; }
  double outer_radius() const noexcept { return R_; }
  const Point& lo() const noexcept { return lo_; }
  const Point& hi() const noexcept { return hi_; }

  double measure() const {
    const Dimension dim(n_);
    switch (kind_) {
      case Kind::ExteriorOfBall: return unit_ball_volume(dim) * (std::pow(R_, n_) - std::pow(rho_, n_));
      case Kind::Box: return box_volume();
      case Kind::FullSpaceProxy: return box_volume() - ball_volume(dim, rho_);
    }
    return 0.0;
  }

  /// Radius r such that every |x| > r lies outside the domain's bounding
  /// region (used for truncation bounds); for boxes the inscribed radius.
  double truncation_radius() const {
    if (kind_ == Kind::ExteriorOfBall) return R_;
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lo_.size(); ++i) r = std::min({r, -lo_[i], hi_[i]});
    return std::max(r, 0.0);
  }

  /// Measure of stratum k out of K. ExteriorOfBall uses equal-measure
  /// radial shells; boxes use equal slabs along the first axis (for the
  /// proxy the excluded ball is handled by rejection).
  double stratum_measure(std::size_t k, std::size_t K) const {
    (void)k;
    if (kind_ == Kind::ExteriorOfBall) return measure() / static_cast<double>(K);
    return box_volume() / static_cast<double>(K);
  }

  /// Sample j of stratum k from the stream; returns false if the point is
  /// outside the domain (proxy ball).
  bool sample(std::size_t k, std::size_t K, const CounterStream& s, std::uint64_t j, Point& x) const {
    const auto nn = static_cast<std::size_t>(n_);
    const std::uint64_t base = j * (2 * nn + 4);
    x.resize(nn);
    if (kind_ == Kind::ExteriorOfBall) {
      const double a = std::pow(rho_, n_);
      const double b = std::pow(R_, n_);
      const double lo = a + (b - a) * static_cast<double>(k) / static_cast<double>(K);
      const double hi = a + (b - a) * static_cast<double>(k + 1) / static_cast<double>(K);
      const double u = s.uniform(base);
      const double r = std::pow(lo + u * (hi - lo), 1.0 / n_);
      if (n_ == 1) {
        x[0] = (s.bits(base + 1) & 1ULL) ? r : -r;
        return r > rho_;
      }
      const CounterStream directions = s.child(0x6e6f726dULL);
      for (std::size_t d = 0; d < nn; ++d) x[d] = directions.normal(j * nn + d);
      double len = norm(x);
      if (len == 0.0) {
        x[0] = 1.0;
        len = 1.0;
      }
      for (double& v : x) v *= r / len;
      return r > rho_;
    }
    const double h = (hi_[0] - lo_[0]) / static_cast<double>(K);
    x[0] = lo_[0] + h * (static_cast<double>(k) + s.uniform(base));
    for (std::size_t d = 1; d < nn; ++d) x[d] = lo_[d] + (hi_[d] - lo_[d]) * s.uniform(base + 1 + d);
    if (kind_ == Kind::FullSpaceProxy) return norm(x) > rho_;
    return true;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    switch (kind_) {
      case Kind::ExteriorOfBall: j = {{"kind", "exterior"}, {"rho", rho_}, {"outer_radius", R_}}; break;
      case Kind::Box: j = {{"kind", "box"}, {"lo", lo_}, {"hi", hi_}}; break;
      case Kind::FullSpaceProxy: j = {{"kind", "full_space_proxy"}, {"lo", lo_}, {"hi", hi_}, {"rho", rho_}}; break;
    }
    j["dimension"] = n_;
    return j;
  }

 private:
  EvalDomain(int n, Kind kind) : n_(n), kind_(kind) {}

  double box_volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lo_.size(); ++i) v *= hi_[i] - lo_[i];
    return v;
  }

  int n_;
  Kind kind_;
  double rho_ = 0.0;
  double R_ = 0.0;
  Point lo_;
  Point hi_;
};

struct SamplingOptions {
  std::size_t budget = 100000;  // total samples per domain
  std::uint64_t seed = 1;
  int strata = 32;
  int threads = 0;  // 0: LIMITLAB_THREADS, then hardware concurrency
};

enum class LevelSetMethod { Grid, MonteCarlo, ClosedForm };

inline std::string method_name(LevelSetMethod m) {
  switch (m) {
    case LevelSetMethod::Grid: return "grid";
    case LevelSetMethod::MonteCarlo: return "monte-carlo";
    case LevelSetMethod::ClosedForm: return "closed-form";
  }
  return "?";
}

struct LevelSetEstimate {
  double lambda = 0.0;
  double measure_est = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  LevelSetMethod method = LevelSetMethod::MonteCarlo;
  std::uint64_t seed = 0;
  double tail = 0.0;              // exact contribution from outside the domain (included in measure_est)
  double truncation_bound = 0.0;  // bound on the part outside the domain that is not included

  nlohmann::json to_json() const {
    return {{"lambda", lambda}, {"estimate", measure_est}, {"std_error", std_error}, {"method", method_name(method)},
            {"samples", samples},  {"seed", seed},           {"tail", tail},           {"truncation_bound", truncation_bound}};
  }
};

/// How |f| behaves outside the sampled domain: either an exact level-set
/// measure of the outside part, or a decay bound |f(x)| <= C |x|^{-p}.
struct TailModel {
  std::function<double(double)> exact;
  double decay_constant = 0.0;
  double decay_power = 0.0;

  double exact_measure(double lambda) const { return exact ? exact(lambda) : 0.0; }

  double bound(double lambda, const EvalDomain& D) const {
    if (exact || decay_constant <= 0.0 || decay_power <= 0.0) return 0.0;
    const int n = D.dimension();
    const double reach = std::pow(decay_constant / lambda, 1.0 / decay_power);
    const double r = D.truncation_radius();
    if (!(reach > r)) return 0.0;
    return unit_ball_volume(Dimension(n)) * (std::pow(reach, n) - std::pow(r, n));
  }
};

/// |f| at stratified sample points; shared by every threshold so that the
/// estimates are monotone in lambda. Points where f is singular (or which
/// fall outside the domain) are stored as NaN and never counted.
class LevelSetSamples {
 public:
  /// Writes `outputs` values for the point x into out[0..outputs).
  using MultiFunction = std::function<void(std::span<const double> x, std::span<double> out)>;

  LevelSetSamples(const PointFunction& f, const EvalDomain& D, const SamplingOptions& opts)
      : LevelSetSamples(std::move(sample_many(
            D, opts, 1, [&](std::span<const double> x, std::span<double> out) { out[0] = f(x); })[0])) {}

  /// One pass over the stratified points evaluating several functions; the
  /// i-th returned sample set holds |out[i]|. A SingularityError marks the
  /// point as excluded for every output.
  static std::vector<LevelSetSamples> sample_many(const EvalDomain& D, const SamplingOptions& opts, std::size_t outputs,
                                                  const MultiFunction& f) {
    if (opts.budget < 100) throw std::invalid_argument("sampling budget must be at least 100");
    if (outputs == 0) throw std::invalid_argument("sample_many: no outputs requested");
    LevelSetSamples proto(D, opts.seed);
    const std::size_t K = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(opts.strata, 1)), 1, opts.budget / 4);
    proto.strata_ = K;
    proto.counts_.assign(K, opts.budget / K);
    for (std::size_t k = 0; k < opts.budget % K; ++k) ++proto.counts_[k];
    proto.offsets_.assign(K + 1, 0);
    for (std::size_t k = 0; k < K; ++k) proto.offsets_[k + 1] = proto.offsets_[k] + proto.counts_[k];

    const std::size_t N = opts.budget;
    std::vector<double> flat(N * outputs, std::numeric_limits<double>::quiet_NaN());
    const CounterStream master(opts.seed);
    const auto& offsets = proto.offsets_;
    parallel_for(N, opts.threads, [&](std::size_t i) {
      const std::size_t k =
          static_cast<std::size_t>(std::upper_bound(offsets.begin(), offsets.end(), i) - offsets.begin()) - 1;
      const std::uint64_t j = i - offsets[k];
      Point x;
      if (!D.sample(k, K, master.child(k), j, x)) return;
      std::span<double> out(flat.data() + i * outputs, outputs);
      try {
        f(x, out);
        for (double& v : out) v = std::abs(v);
      } catch (const SingularityError&) {
        for (double& v : out) v = std::numeric_limits<double>::quiet_NaN();
      }
    });

    std::vector<LevelSetSamples> result(outputs, proto);
    for (std::size_t o = 0; o < outputs; ++o) {
      auto& r = result[o];
      r.values_.resize(N);
      for (std::size_t i = 0; i < N; ++i) r.values_[i] = flat[i * outputs + o];
      for (double v : r.values_)
        if (std::isnan(v)) ++r.excluded_;
    }
    return result;
  }

  /// Stratified estimate of |{x in D : |f(x)| > lambda}|.
  LevelSetEstimate estimate(double lambda) const {
    if (!(lambda > 0.0)) throw std::invalid_argument("level-set threshold must be positive");
    LevelSetEstimate e;
    e.lambda = lambda;
    e.samples = values_.size();
    e.seed = seed_;
    e.method = LevelSetMethod::MonteCarlo;
    double var = 0.0;
    for (std::size_t k = 0; k < strata_; ++k) {
      const double vol = domain_.stratum_measure(k, strata_);
      const std::size_t m = counts_[k];
      std::size_t hits = 0;
      for (std::size_t i = offsets_[k]; i < offsets_[k + 1]; ++i)
        if (values_[i] > lambda) ++hits;
      const double p = static_cast<double>(hits) / static_cast<double>(m);
      e.measure_est += vol * p;
      if (m > 1) var += vol * vol * p * (1.0 - p) / static_cast<double>(m - 1);
    }
    e.std_error = std::sqrt(var);
    return e;
  }

  double max_value() const {
    double m = 0.0;
    for (double v : values_)
      if (std::isfinite(v)) m = std::max(m, v);
    return m;
  }

  std::size_t excluded() const noexcept { return excluded_; }
  std::size_t size() const noexcept { return values_.size(); }
  const EvalDomain& domain() const noexcept { return domain_; }

 private:
  LevelSetSamples(const EvalDomain& D, std::uint64_t seed) : domain_(D), seed_(seed) {}

  EvalDomain domain_;
  std::uint64_t seed_;
  std::size_t strata_ = 1;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
  std::size_t excluded_ = 0;
};

inline LevelSetEstimate with_tail(LevelSetEstimate e, const TailModel* tail, const EvalDomain& D) {
  if (!tail) return e;
  e.tail = tail->exact_measure(e.lambda);
  e.measure_est += e.tail;
  e.truncation_bound = tail->bound(e.lambda, D);
  return e;
}

/// |{x in D : |f(x)| > lambda}| (plus the exact tail when supplied).
inline LevelSetEstimate distribution(const PointFunction& f, double lambda, const EvalDomain& D,
                                     const SamplingOptions& opts, const TailModel* tail = nullptr) {
  if (!(lambda > 0.0)) throw std::invalid_argument("level-set threshold must be positive");
  const LevelSetSamples samples(f, D, opts);
  return with_tail(samples.estimate(lambda), tail, D);
}

struct WeakNormEstimate {
  double p = 1.0;
  double value = 0.0;         // max over the grid of lambda |{|f| > lambda}|^{1/p}
  double std_error = 0.0;     // delta-method error at the argmax
  double argmax_lambda = 0.0;
  std::vector<double> lambda_grid;
  std::vector<LevelSetEstimate> levels;

  nlohmann::json to_json() const {
    nlohmann::json lv = nlohmann::json::array();
    for (const auto& l : levels) lv.push_back(l.to_json());
    return {{"p", p}, {"value", value}, {"std_error", std_error}, {"argmax_lambda", argmax_lambda},
            {"lambda_grid", lambda_grid}, {"levels", lv}, {"note", "grid-limited lower bound"}};
  }
};

inline std::vector<double> geometric_grid(double lo, double hi, int points) {
  if (points < 1) throw std::invalid_argument("empty lambda grid");
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("lambda range must satisfy 0 < lambda_min <= lambda_max");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    g[static_cast<std::size_t>(i)] = points == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
  return g;
}

struct LambdaRange {
  double lo = 0.0;  // lo <= 0 selects an automatic range from the sampled values
  double hi = 0.0;
  int points = 64;
  double auto_ratio = 1e-4;
};

/// Weak quasi-norm sup_lambda lambda |{|f| > lambda}|^{1/p} over a
/// geometric lambda grid, evaluated on an existing sample set.
inline WeakNormEstimate weak_norm(const LevelSetSamples& samples, double p, LambdaRange range,
                                  const TailModel* tail = nullptr) {
  if (!(p > 0.0)) throw std::invalid_argument("weak_norm: p must be positive");
  if (range.points < 32) throw std::invalid_argument("weak_norm: the lambda grid needs at least 32 points");
  WeakNormEstimate w;
  w.p = p;
  if (range.lo <= 0.0) {
    range.hi = samples.max_value();
    if (!(range.hi > 0.0)) return w;
    range.lo = range.hi * range.auto_ratio;
  }
  w.lambda_grid = geometric_grid(range.lo, range.hi, range.points);
  for (double lambda : w.lambda_grid) {
    const LevelSetEstimate e = with_tail(samples.estimate(lambda), tail, samples.domain());
    const double v = lambda * std::pow(e.measure_est, 1.0 / p);
    if (v > w.value) {
      w.value = v;
      w.argmax_lambda = lambda;
      w.std_error = e.measure_est > 0.0 ? (lambda / p) * std::pow(e.measure_est, 1.0 / p - 1.0) * e.std_error : 0.0;
    }
    w.levels.push_back(e);
  }
  return w;
}

inline WeakNormEstimate weak_norm(const PointFunction& f, double p, const EvalDomain& D, LambdaRange range,
                                  const SamplingOptions& opts, const TailModel* tail = nullptr) {
  const LevelSetSamples samples(f, D, opts);
  return weak_norm(samples, p, range, tail);
}

/// Exact |{x : |Omega(x)| / |x|^{n-alpha} > lambda}|
///   = ||Omega||_{L^q(S^{n-1})}^q / (n lambda^q),  q = n / (n - alpha).
inline LevelSetEstimate closed_form_levelset(const HomogeneousKernel& omega, const FracOrder& alpha, double lambda,
                                             const SphereRule& rule) {
  if (!(lambda > 0.0)) throw std::invalid_argument("level-set threshold must be positive");
  const int n = omega.dimension();
  const double q = n / alpha.exponent();
  const double nq = std::pow(sphere_norm(omega, q, rule), q);
  LevelSetEstimate e;
  e.lambda = lambda;
  e.measure_est = nq / (n * std::pow(lambda, q));
  e.method = LevelSetMethod::ClosedForm;
  return e;
}

/// |{x : |x| > R, scale |Omega(x)| / |x|^{n-alpha} > lambda}| via the rule.
inline double homogeneous_tail(const HomogeneousKernel& omega, const FracOrder& alpha, double scale, double lambda,
                               double R, const SphereRule& rule) {
  const int n = omega.dimension();
  const double q = n / alpha.exponent();
  const double Rn = std::pow(R, n);
  return rule.integrate([&](std::span<const double> u) {
           const double reach_n = std::pow(scale * std::abs(omega.on_sphere(u)) / lambda, q);
           return std::max(0.0, reach_n - Rn);
         }) /
         n;
}

struct WeakYoungReport {
  double conv_norm = 0.0;
  double conv_std_error = 0.0;
  double kernel_norm = 0.0;
  double kernel_std_error = 0.0;
  double density_norm = 0.0;
  double ratio = 0.0;

  nlohmann::json to_json() const {
    return {{"conv_weak_norm", conv_norm}, {"conv_std_error", conv_std_error}, {"kernel_weak_norm", kernel_norm},
            {"kernel_std_error", kernel_std_error}, {"density_lp_norm", density_norm}, {"ratio", ratio}};
  }
};

/// ||f * g||_{L^{q,inf}} / (||g||_{L^{r,inf}} ||f||_{L^p}) on the domain,
/// with 1 + 1/q = 1/p + 1/r.
inline WeakYoungReport weak_young_check(const FreeKernel& g, const Measure& f, double p, double q, double r,
                                        const EvalDomain& D, const SamplingOptions& opts,
                                        const OperatorOptions& op_opts = {}) {
  if (!(p >= 1.0) || !(q > 0.0) || !(r > 0.0)) throw std::invalid_argument("weak Young: bad exponents");
  if (std::abs(1.0 + 1.0 / q - 1.0 / p - 1.0 / r) > 1e-12)
    throw std::invalid_argument("weak Young: exponents must satisfy 1 + 1/q = 1/p + 1/r");
  const SphereRule rule = default_sphere_rule(f.dimension(), op_opts.sphere_order);
  const PointFunction conv = [&](std::span<const double> x) { return convolve(g, f, x, op_opts, &rule); };
  const PointFunction kern = [&](std::span<const double> x) { return g(x); };
  const auto wc = weak_norm(conv, q, D, {}, opts);
  SamplingOptions kopts = opts;
  kopts.seed = splitmix64(opts.seed ^ 0x6b65726eULL);
  const auto wg = weak_norm(kern, r, D, {}, kopts);
  WeakYoungReport rep;
  rep.conv_norm = wc.value;
  rep.conv_std_error = wc.std_error;
  rep.kernel_norm = wg.value;
  rep.kernel_std_error = wg.std_error;
  rep.density_norm = f.lp_norm(p);
  if (rep.kernel_norm > 0.0 && rep.density_norm > 0.0) rep.ratio = rep.conv_norm / (rep.kernel_norm * rep.density_norm);
  return rep;
}

}  // namespace limitlab
