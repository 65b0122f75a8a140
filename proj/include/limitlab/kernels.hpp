#pragma once

// Radial profiles phi(x) = Phi(|x|) and degree-zero homogeneous kernels
// Omega on S^{n-1}: dilations, suprema over scales, sphere norms, the
// mean-zero defect and the integral continuity (Dini) modulus.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "limitlab/errors.hpp"
#include "limitlab/geometry.hpp"
#include "limitlab/rng.hpp"

namespace limitlab {

/// Fractional order alpha in [0, n).
class FracOrder {
 public:
  FracOrder(double alpha, Dimension n) : alpha_(alpha), n_(n.value()) {
    if (!(alpha >= 0.0) || !(alpha < n_))
      throw std::invalid_argument("fractional order must satisfy 0 <= alpha < n (alpha=" + std::to_string(alpha) +
                                  ", n=" + std::to_string(n_) + ")");
  }
  double value() const noexcept { return alpha_; }
  int dimension() const noexcept { return n_; }
  /// The homogeneity exponent n - alpha.
  double exponent() const noexcept { return n_ - alpha_; }

 private:
  double alpha_;
  int n_;
};

/// c_n such that the Poisson kernel c_n (1+|x|^2)^{-(n+1)/2} integrates to 1.
inline double poisson_normalization(Dimension n) {
  const double h = 0.5 * (n.value() + 1);
  return std::exp(std::lgamma(h) - h * std::log(std::numbers::pi));
}

class RadialProfile {
 public:
  enum class Kind { Indicator, Poisson, Heat, Table };

  /// chi_{B(0,1)} (closed ball).
  static RadialProfile indicator(Dimension n) { return RadialProfile(n, Kind::Indicator); }
  /// c_n (1 + s^2)^{-(n+1)/2}.
  static RadialProfile poisson(Dimension n) {
    RadialProfile p(n, Kind::Poisson);
    p.poisson_c_ = poisson_normalization(n);
    return p;
  }
  /// exp(-pi s^2).
  static RadialProfile heat(Dimension n) { return RadialProfile(n, Kind::Heat); }

  /// Right-continuous step function: Phi(s) = values[j] where j counts the
  /// breakpoints <= s. Breakpoints strictly increasing and positive; values
  /// (one more than breakpoints) nonincreasing and nonnegative.
  static RadialProfile table(Dimension n, std::vector<double> breakpoints, std::vector<double> values) {
    if (values.size() != breakpoints.size() + 1)
      throw std::invalid_argument("table profile: need exactly one more value than breakpoints");
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
      if (!(breakpoints[i] > 0.0) || (i > 0 && !(breakpoints[i] > breakpoints[i - 1])))
        throw std::invalid_argument("table profile: breakpoints must be positive and strictly increasing");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] >= 0.0) || (i > 0 && values[i] > values[i - 1]))
        throw std::invalid_argument("table profile: values must be nonnegative and nonincreasing");
    }
    RadialProfile p(n, Kind::Table);
    p.breakpoints_ = std::move(breakpoints);
    p.values_ = std::move(values);
    return p;
  }

  int dimension() const noexcept { return n_; }
  Kind kind() const noexcept { return kind_; }
  bool piecewise_constant() const noexcept { return kind_ == Kind::Indicator || kind_ == Kind::Table; }

  /// Phi(s) for s >= 0.
  double operator()(double s) const {
    switch (kind_) {
      case Kind::Indicator: return s <= 1.0 ? 1.0 : 0.0;
      case Kind::Poisson: return poisson_c_ * std::pow(1.0 + s * s, -0.5 * (n_ + 1));
      case Kind::Heat: return std::exp(-std::numbers::pi * s * s);
      case Kind::Table: {
        const auto j = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), s) - breakpoints_.begin();
        return values_[static_cast<std::size_t>(j)];
      }
    }
    return 0.0;
  }

  /// lim_{u -> s^-} Phi(u); equals Phi(s) except at table breakpoints.
  double left_limit(double s) const {
    if (kind_ != Kind::Table) return (*this)(s);
    const auto j = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), s) - breakpoints_.begin();
    return values_[static_cast<std::size_t>(j)];
  }

  /// Radii where Phi jumps (empty for smooth profiles).
  std::vector<double> jumps() const {
    if (kind_ == Kind::Indicator) return {1.0};
    if (kind_ == Kind::Table) return breakpoints_;
    return {};
  }

  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::string name() const {
    switch (kind_) {
      case Kind::Indicator: return "indicator";
      case Kind::Poisson: return "poisson";
      case Kind::Heat: return "heat";
      case Kind::Table: return "table";
    }
    return "?";
  }

 private:
  RadialProfile(Dimension n, Kind kind) : n_(n.value()), kind_(kind) {}

  int n_;
  Kind kind_;
  double poisson_c_ = 0.0;
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

/// phi_r^alpha(x) = r^{-(n-alpha)} Phi(|x|/r).
inline double eval_dilate(const RadialProfile& phi, const FracOrder& alpha, double r, std::span<const double> x) {
  if (!(r > 0.0)) throw std::invalid_argument("eval_dilate: radius must be positive");
  return std::pow(r, -alpha.exponent()) * phi(norm(x) / r);
}

struct ScaleSupremum {
  double value;            // S = sup_{r>0} r^{-(n-alpha)} Phi(1/r)
  double critical_radius;  // r attaining (or approaching) the supremum
};

/// Closed-form S = sup_{r>0} phi_r^alpha(e_1) and its maximizing radius.
///
/// Poisson: r*^2 = (alpha+1)/(n-alpha); heat: r*^2 = 2 pi/(n-alpha). Table
/// profiles are enumerated exactly over their breakpoints: on each step the
/// factor r^{-(n-alpha)} is largest at the left end of the step, so the
/// supremum is max_j values[j] * breakpoints[j]^{n-alpha}, approached from
/// above. A table that does not vanish at infinity has S = +inf.
inline ScaleSupremum scale_supremum(const RadialProfile& phi, const FracOrder& alpha) {
  const int n = phi.dimension();
  const double e = alpha.exponent();
  switch (phi.kind()) {
    case RadialProfile::Kind::Indicator: return {1.0, 1.0};
    case RadialProfile::Kind::Poisson: {
      const double r2 = (alpha.value() + 1.0) / e;
      const double value = poisson_normalization(Dimension(n)) * std::pow(r2, -0.5 * e) *
                           std::pow(1.0 + 1.0 / r2, -0.5 * (n + 1));
      return {value, std::sqrt(r2)};
    }
    case RadialProfile::Kind::Heat: {
      const double value = std::pow(e / (2.0 * std::numbers::pi * std::numbers::e), 0.5 * e);
      return {value, std::sqrt(2.0 * std::numbers::pi / e)};
    }
    case RadialProfile::Kind::Table: {
      const auto& b = phi.breakpoints();
      const auto& v = phi.values();
      if (v.back() > 0.0) return {std::numeric_limits<double>::infinity(), 0.0};
      ScaleSupremum best{0.0, 1.0};
      for (std::size_t j = 0; j < b.size(); ++j) {
        const double cand = v[j] * std::pow(b[j], e);
        if (cand > best.value) best = {cand, 1.0 / b[j]};
      }
      return best;
    }
  }
  return {0.0, 1.0};
}

/// sup_{r>0} phi_r^alpha(x) = |x|^{-(n-alpha)} S.
inline double sup_dilate(const RadialProfile& phi, const FracOrder& alpha, std::span<const double> x) {
  const double r = norm(x);
  if (r == 0.0) throw SingularityError("sup_dilate: the supremum over scales is infinite at x = 0");
  return std::pow(r, -alpha.exponent()) * scale_supremum(phi, alpha).value;
}

/// c_n n^{n/2} / (1+n)^{(n+1)/2}: sup_r P_r(e_1) for the Poisson kernel.
inline double poisson_sup_constant(Dimension n) {
  const double nn = n.value();
  return poisson_normalization(n) * std::pow(nn, 0.5 * nn) / std::pow(1.0 + nn, 0.5 * (nn + 1.0));
}
inline double poisson_critical_radius(Dimension n) { return 1.0 / std::sqrt(static_cast<double>(n.value())); }

/// (n / (2 pi e))^{n/2}: sup_r G_r(e_1) for the heat kernel exp(-pi|x|^2).
inline double heat_sup_constant(Dimension n) {
  const double nn = n.value();
  return std::pow(nn / (2.0 * std::numbers::pi * std::numbers::e), 0.5 * nn);
}
inline double heat_critical_radius(Dimension n) { return std::sqrt(2.0 * std::numbers::pi / n.value()); }

/// Homogeneous function of degree zero, Omega(x) = Omega(x/|x|).
class HomogeneousKernel {
 public:
  enum class Kind { Constant, AngularTrig, Component, SignedCaps, Table };

  /// Omega = value on {x' : <x', axis> >= cos_half_angle}.
  struct Cap {
    Point axis;
    double cos_half_angle;
    double value;
  };

  static HomogeneousKernel constant(Dimension n, double c) {
    HomogeneousKernel k(n, Kind::Constant);
    k.constant_ = c;
    return k;
  }

  /// n = 2: Omega(theta) = a_0 + sum_k a_k cos(k theta) + b_k sin(k theta),
  /// with cos_coeffs = {a_0, a_1, ...} and sin_coeffs = {b_1, b_2, ...}.
  static HomogeneousKernel angular_trig(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs = {}) {
    if (cos_coeffs.empty()) cos_coeffs.push_back(0.0);
    HomogeneousKernel k(Dimension(2), Kind::AngularTrig);
    k.cos_ = std::move(cos_coeffs);
    k.sin_ = std::move(sin_coeffs);
    return k;
  }

  /// Omega(x') = x'_index (Riesz-type).
  static HomogeneousKernel component(Dimension n, int index = 0) {
    if (index < 0 || index >= n.value()) throw std::invalid_argument("component kernel: index out of range");
    HomogeneousKernel k(n, Kind::Component);
    k.index_ = index;
    return k;
  }

  /// n = 1: Omega(x) = sign(x).
  static HomogeneousKernel sign() { return component(Dimension(1), 0); }

  static HomogeneousKernel signed_caps(Dimension n, std::vector<Cap> caps) {
    for (auto& cap : caps) {
      if (cap.axis.size() != static_cast<std::size_t>(n.value()))
        throw std::invalid_argument("cap axis dimension mismatch");
      const double r = norm(cap.axis);
      if (r == 0.0) throw std::invalid_argument("cap axis must be nonzero");
      for (double& v : cap.axis) v /= r;
    }
    HomogeneousKernel k(n, Kind::SignedCaps);
    k.caps_ = std::move(caps);
    return k;
  }

  /// Values attached to the nodes of a sphere rule; evaluation uses the
  /// nearest node.
  static HomogeneousKernel table(const SphereRule& rule, std::vector<double> values) {
    if (values.size() != rule.size()) throw std::invalid_argument("table kernel: one value per node required");
    HomogeneousKernel k(Dimension(rule.dimension), Kind::Table);
    k.table_nodes_ = rule.nodes;
    k.table_values_ = std::move(values);
    return k;
  }

  int dimension() const noexcept { return n_; }
  Kind kind() const noexcept { return kind_; }

  /// Degree-zero extension; throws SingularityError at x = 0.
  double operator()(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(n_)) throw std::invalid_argument("kernel: dimension mismatch");
    switch (kind_) {
      case Kind::Constant:
        if (norm(x) == 0.0) throw SingularityError("homogeneous kernel evaluated at the origin");
        return constant_;
      case Kind::AngularTrig: {
        if (x[0] == 0.0 && x[1] == 0.0) throw SingularityError("homogeneous kernel evaluated at the origin");
        return trig(std::atan2(x[1], x[0]));
      }
      case Kind::Component: {
        const double r = norm(x);
        if (r == 0.0) throw SingularityError("homogeneous kernel evaluated at the origin");
        return x[static_cast<std::size_t>(index_)] / r;
      }
      case Kind::SignedCaps:
      case Kind::Table: {
        const double r = norm(x);
        if (r == 0.0) throw SingularityError("homogeneous kernel evaluated at the origin");
        Point u(x.begin(), x.end());
        for (double& v : u) v /= r;
        return on_sphere(u);
      }
    }
    return 0.0;
  }

  /// Omega at a unit vector (no normalization performed).
  double on_sphere(std::span<const double> u) const {
    switch (kind_) {
      case Kind::Constant: return constant_;
      case Kind::AngularTrig: return trig(std::atan2(u[1], u[0]));
      case Kind::Component: return u[static_cast<std::size_t>(index_)];
      case Kind::SignedCaps: {
        double s = 0.0;
        for (const auto& cap : caps_)
          if (dot(u, cap.axis) >= cap.cos_half_angle) s += cap.value;
        return s;
      }
      case Kind::Table: {
        std::size_t best = 0;
        double best_dot = -2.0;
        for (std::size_t i = 0; i < table_nodes_.size(); ++i) {
          const double d = dot(u, table_nodes_[i]);
          if (d > best_dot) {
            best_dot = d;
            best = i;
          }
        }
        return table_values_[best];
      }
    }
    return 0.0;
  }

  /// An upper bound for sup |Omega|.
  double sup_abs_bound() const {
    switch (kind_) {
      case Kind::Constant: return std::abs(constant_);
      case Kind::AngularTrig: {
        double s = 0.0;
        for (double a : cos_) s += std::abs(a);
        for (double b : sin_) s += std::abs(b);
        return s;
      }
      case Kind::Component: return 1.0;
      case Kind::SignedCaps: {
        double s = 0.0;
        for (const auto& cap : caps_) s += std::abs(cap.value);
        return s;
      }
      case Kind::Table: {
        double s = 0.0;
        for (double v : table_values_) s = std::max(s, std::abs(v));
        return s;
      }
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind_) {
      case Kind::Constant: return "constant";
      case Kind::AngularTrig: return "trig";
      case Kind::Component: return "component";
      case Kind::SignedCaps: return "caps";
      case Kind::Table: return "table";
    }
    return "?";
  }

  double constant_value() const noexcept { return constant_; }
  const std::vector<double>& cos_coeffs() const noexcept { return cos_; }
  const std::vector<double>& sin_coeffs() const noexcept { return sin_; }
  int component_index() const noexcept { return index_; }
  const std::vector<Cap>& caps() const noexcept { return caps_; }
  const std::vector<Point>& table_nodes() const noexcept { return table_nodes_; }
  const std::vector<double>& table_values() const noexcept { return table_values_; }

 private:
  HomogeneousKernel(Dimension n, Kind kind) : n_(n.value()), kind_(kind) {}

  double trig(double theta) const {
    double s = cos_[0];
    for (std::size_t k = 1; k < cos_.size(); ++k) s += cos_[k] * std::cos(static_cast<double>(k) * theta);
    for (std::size_t k = 0; k < sin_.size(); ++k) s += sin_[k] * std::sin(static_cast<double>(k + 1) * theta);
    return s;
  }

  int n_;
  Kind kind_;
  double constant_ = 0.0;
  std::vector<double> cos_;
  std::vector<double> sin_;
  int index_ = 0;
  std::vector<Cap> caps_;
  std::vector<Point> table_nodes_;
  std::vector<double> table_values_;
};

inline void require_rule_matches(const HomogeneousKernel& omega, const SphereRule& rule) {
  if (omega.dimension() != rule.dimension) throw std::invalid_argument("sphere rule dimension does not match kernel");
}

/// |integral of Omega over S^{n-1}|.
inline double mean_zero_defect(const HomogeneousKernel& omega, const SphereRule& rule) {
  require_rule_matches(omega, rule);
  return std::abs(rule.integrate([&](std::span<const double> u) { return omega.on_sphere(u); }));
}

/// ||Omega||_{L^q(S^{n-1})}.
inline double sphere_norm(const HomogeneousKernel& omega, double q, const SphereRule& rule) {
  if (!(q >= 1.0)) throw std::invalid_argument("sphere_norm: q must be >= 1");
  require_rule_matches(omega, rule);
  const double s = rule.integrate([&](std::span<const double> u) { return std::pow(std::abs(omega.on_sphere(u)), q); });
  return std::pow(s, 1.0 / q);
}

/// int_{S^{n-1}} |Omega(x'+h) - Omega(x')|^q dsigma(x'), with Omega(x'+h)
/// taken through the degree-zero extension. Nodes with x'+h = 0 are a null
/// set and contribute nothing.
inline double shifted_difference_integral(const HomogeneousKernel& omega, double q, const SphereRule& rule,
                                          std::span<const double> h) {
  Point shifted(h.size());
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto& u = rule.nodes[i];
    for (std::size_t d = 0; d < h.size(); ++d) shifted[d] = u[d] + h[d];
    if (norm(shifted) == 0.0) continue;
    s += rule.weights[i] * std::pow(std::abs(omega(shifted) - omega.on_sphere(u)), q);
  }
  return s;
}

struct DiniModulusEstimate {
  double value = 0.0;       // lower bound for omega_q(t)
  std::size_t shifts = 0;   // number of shifts examined
  Point worst_shift;        // shift attaining the reported value
};

/// Lower-bound estimate of the integral continuity modulus
///   omega_q(t) = (sup_{|h| <= t} int |Omega(x'+h) - Omega(x')|^q dsigma)^{1/q}.
///
/// The shift sequence is deterministic and prefix-stable: the 2n axis shifts
/// +-t e_i first, then alternately a seeded random shift (on the sphere
/// |h| = t or inside the ball) and a perturbation of the worst shift found so
/// far. A larger budget therefore never lowers the estimate.
inline DiniModulusEstimate dini_modulus(const HomogeneousKernel& omega, double q, double t, const SphereRule& rule,
                                        std::size_t shift_budget, std::uint64_t seed = 0xd1a1ULL) {
  if (!(t > 0.0) || t > 1.0) throw std::invalid_argument("dini_modulus: t must lie in (0, 1]");
  if (!(q >= 1.0)) throw std::invalid_argument("dini_modulus: q must be >= 1");
  if (shift_budget == 0) throw std::invalid_argument("dini_modulus: shift budget must be positive");
  require_rule_matches(omega, rule);
  const int n = omega.dimension();
  const auto nn = static_cast<std::size_t>(n);
  const CounterStream stream(seed);

  DiniModulusEstimate est;
  double best = -1.0;
  Point h(nn);
  auto consider = [&](const Point& shift) {
    const double v = shifted_difference_integral(omega, q, rule, shift);
    ++est.shifts;
    if (v > best) {
      best = v;
      est.worst_shift = shift;
    }
  };
  auto clip_to_ball = [&](Point& shift) {
    const double r = norm(shift);
    if (r > t) {
      for (double& v : shift) v *= t / r;
    }
  };
  auto random_direction = [&](std::uint64_t counter) {
    Point d(nn);
    for (std::size_t k = 0; k < nn; ++k) d[k] = stream.normal(counter * (nn + 1) + k);
    double r = norm(d);
    if (r == 0.0) {
      d[0] = 1.0;
      r = 1.0;
    }
    for (double& v : d) v /= r;
    return d;
  };

  for (std::size_t k = 0; k < 2 * nn && est.shifts < shift_budget; ++k) {
    std::fill(h.begin(), h.end(), 0.0);
    h[k / 2] = (k % 2 == 0) ? t : -t;
    consider(h);
  }
  std::uint64_t counter = 0;
  while (est.shifts < shift_budget) {
    const std::size_t step = est.shifts;
    if (step % 2 == 0) {
      Point d = random_direction(counter++);
      const double u = stream.uniform(1'000'003ULL * (counter + 7));
      const double radius = (step % 4 == 0) ? t : t * std::pow(u, 1.0 / n);
      for (double& v : d) v *= radius;
      consider(d);
    } else {
      Point d = random_direction(counter++);
      Point shift = est.worst_shift;
      const double spread = 0.25 * t * stream.uniform(2'000'029ULL * (counter + 11));
      for (std::size_t k = 0; k < nn; ++k) shift[k] += spread * d[k];
      // Keep the perturbation on the sphere |h| = t when the worst shift is there.
      const double r = norm(shift);
      if (r > 0.0 && norm(est.worst_shift) >= t * (1.0 - 1e-12)) {
        for (double& v : shift) v *= t / r;
      }
      clip_to_ball(shift);
      consider(shift);
    }
  }
  est.value = std::pow(std::max(best, 0.0), 1.0 / q);
  return est;
}

struct DiniOptions {
  int levels = 24;              // dyadic levels t_k = t_max 2^{-k}, k = 0..levels
  std::size_t shift_budget = 96;
  std::uint64_t seed = 0xd1a1ULL;
};

struct DiniIntegralEstimate {
  double value = 0.0;          // partial sum plus geometric tail extrapolation
  double partial_sum = 0.0;    // sum over the sampled dyadic blocks
  bool divergence_suspected = false;
  std::vector<double> t_samples;
  std::vector<double> omega_samples;  // monotone (running-max) lower bounds
  std::vector<double> blocks;
};

/// Estimate of int_0^{t_max} omega_q(t) / t^{1+s} dt on the dyadic grid
/// t_k = t_max 2^{-k}.
///
/// omega_q is nondecreasing, so an estimate at a smaller t is also a lower
/// bound at larger t; the samples are made monotone by a running maximum.
/// Block k uses the left-endpoint value omega(t_{k+1}) times the exact
/// integral of t^{-1-s} over [t_{k+1}, t_k]. Divergence is suspected when the
/// last five blocks show no decay.
inline DiniIntegralEstimate dini_integral(const HomogeneousKernel& omega, double q, double s, double t_max,
                                          const SphereRule& rule, const DiniOptions& opts = {}) {
  if (!(s >= 0.0) || !(s < omega.dimension())) throw std::invalid_argument("dini_integral: s must lie in [0, n)");
  if (!(t_max > 0.0) || t_max > 1.0) throw std::invalid_argument("dini_integral: t_max must lie in (0, 1]");
  if (opts.levels < 5) throw std::invalid_argument("dini_integral: at least 5 levels required");
  DiniIntegralEstimate out;
  const auto levels = static_cast<std::size_t>(opts.levels);
  for (std::size_t k = 0; k <= levels; ++k) {
    const double t = t_max * std::ldexp(1.0, -static_cast<int>(k));
    out.t_samples.push_back(t);
    out.omega_samples.push_back(dini_modulus(omega, q, t, rule, opts.shift_budget, opts.seed).value);
  }
  for (std::size_t k = levels; k-- > 0;)
    out.omega_samples[k] = std::max(out.omega_samples[k], out.omega_samples[k + 1]);

  for (std::size_t k = 0; k < levels; ++k) {
    const double a = out.t_samples[k + 1];
    const double b = out.t_samples[k];
    const double weight = (s == 0.0) ? std::log(b / a) : (std::pow(a, -s) - std::pow(b, -s)) / s;
    out.blocks.push_back(out.omega_samples[k + 1] * weight);
    out.partial_sum += out.blocks.back();
  }
  out.value = out.partial_sum;

  const double last = out.blocks[levels - 1];
  const double earlier = out.blocks[levels - 5];
  if (last > 0.0 && earlier > 0.0) {
    const double ratio = std::pow(last / earlier, 0.25);
    if (ratio >= 0.99) {
      out.divergence_suspected = true;
      out.value = std::numeric_limits<double>::infinity();
    } else {
      out.value += last * ratio / (1.0 - ratio);
    }
  }
  return out;
}

}  // namespace limitlab
