#pragma once

// Pointwise evaluation of the operator families applied to a finite measure:
//   radial maximal      M_phi^alpha mu(x) = sup_r r^{-(n-alpha)} int Phi(|x-y|/r) dmu(y)
//   homogeneous maximal M_Omega^alpha mu(x) = sup_r r^{-(n-alpha)} int_{B(x,r)} |Omega(x-y)| dmu(y)
//   fractional integral T_Omega^alpha mu(x) = int Omega(x-y) |x-y|^{-(n-alpha)} dmu(y)
//   truncated maximal   T_Omega^* mu(x)    = sup_eps |int_{|x-y|>eps} Omega(x-y) |x-y|^{-n} dmu(y)|
//   convolution         T_g mu(x)          = int g(x-y) dmu(y)
//
// Density measures are integrated along the rays x + s theta of a sphere
// rule, where every density is piecewise constant in s.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "limitlab/errors.hpp"
#include "limitlab/geometry.hpp"
#include "limitlab/kernels.hpp"
#include "limitlab/measures.hpp"
#include "limitlab/optimize.hpp"

namespace limitlab {

/// A kernel g given as code. `singular_at_origin` marks g(0) as undefined.
struct FreeKernel {
  std::function<double(std::span<const double>)> eval;
  bool singular_at_origin = false;
  std::string name = "g";
  std::vector<double> params;

  double operator()(std::span<const double> x) const {
    if (singular_at_origin && norm(x) == 0.0) throw SingularityError("kernel " + name + " evaluated at its singularity");
    return eval(x);
  }

  /// exp(-pi |x/scale|^2).
  static FreeKernel gaussian(double scale = 1.0) {
    if (!(scale > 0.0)) throw std::invalid_argument("gaussian kernel: scale must be positive");
    return {[scale](std::span<const double> x) {
              const double r = norm(x) / scale;
              return std::exp(-std::numbers::pi * r * r);
            },
            false, "gaussian", {scale}};
  }

  /// |x|^{-exponent}.
  static FreeKernel power(double exponent) {
    if (!(exponent > 0.0)) throw std::invalid_argument("power kernel: exponent must be positive");
    return {[exponent](std::span<const double> x) { return std::pow(norm(x), -exponent); }, true, "power", {exponent}};
  }

  /// |x|^{-exponent} on the closed ball B(0, cutoff), zero outside.
  static FreeKernel truncated_power(double exponent, double cutoff) {
    if (!(exponent > 0.0) || !(cutoff > 0.0)) throw std::invalid_argument("truncated power kernel: bad parameters");
    return {[exponent, cutoff](std::span<const double> x) {
              const double r = norm(x);
              return r <= cutoff ? std::pow(r, -exponent) : 0.0;
            },
            true, "truncated_power", {exponent, cutoff}};
  }

  /// max(0, 1 - |x|/radius), a bounded compactly supported tent.
  static FreeKernel tent(double radius = 1.0) {
    if (!(radius > 0.0)) throw std::invalid_argument("tent kernel: radius must be positive");
    return {[radius](std::span<const double> x) { return std::max(0.0, 1.0 - norm(x) / radius); }, false, "tent", {radius}};
  }

  /// c * g.
  FreeKernel scaled(double c) const {
    FreeKernel k = *this;
    auto inner = eval;
    k.eval = [inner, c](std::span<const double> x) { return c * inner(x); };
    k.name = name + "*" + std::to_string(c);
    return k;
  }
};

struct OperatorOptions {
  int sphere_order = 0;        // 0: 256 angles for n = 2, 32 for n = 3, 8 otherwise
  double atom_guard = 0.0;     // relative exclusion radius around atoms (0: exact coincidence only)
  int radius_grid = 48;        // log-spaced radii scanned for density maximal operators
  int refine_top = 4;          // grid candidates refined by golden-section search
  int gl_order = 16;           // Gauss-Legendre nodes per panel
  double pv_rtol = 1e-6;       // principal-value convergence, relative
  int pv_max_levels = 48;      // epsilon halvings before the PV is declared divergent
  double mean_zero_tol = 1e-8; // required for alpha = 0 principal values
};

inline SphereRule default_sphere_rule(int n, int order = 0) {
  if (order <= 0) order = n == 2 ? 256 : (n == 3 ? 32 : 8);
  return sphere_quadrature(Dimension(n), order);
}

namespace detail {

struct AtomDistance {
  double d;
  std::size_t index;
};

inline void check_point(int n, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("evaluation point has wrong dimension");
}

inline void check_measure(int n, const Measure& mu) {
  if (mu.dimension() != n) throw std::invalid_argument("measure dimension does not match operator dimension");
}

/// Distances from x to every atom; throws SingularityError if x lies on an
/// atom or inside its guard ball.
inline std::vector<AtomDistance> atom_distances(const Measure& mu, std::span<const double> x, double guard) {
  std::vector<AtomDistance> out;
  out.reserve(mu.points().size());
  const double xn = norm(x);
  for (std::size_t i = 0; i < mu.points().size(); ++i) {
    const double d = distance(mu.points()[i], x);
    const double g = guard * std::max({1.0, xn, norm(mu.points()[i])});
    if (d == 0.0 || d <= g) throw SingularityError("evaluation point coincides with an atom; the value is infinite");
    out.push_back({d, i});
  }
  return out;
}

inline Point difference(std::span<const double> x, std::span<const double> y) {
  Point z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - y[i];
  return z;
}

inline Point negated(std::span<const double> u) {
  Point z(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) z[i] = -u[i];
  return z;
}

/// Constant-density pieces along every ray of the rule.
struct RayBundle {
  std::vector<std::vector<RaySegment>> segments;
};

inline RayBundle rays(const Measure& mu, std::span<const double> x, const SphereRule& rule) {
  RayBundle b;
  b.segments.reserve(rule.size());
  for (const auto& u : rule.nodes) b.segments.push_back(mu.ray_segments(x, u));
  return b;
}

/// Maximize F over r > 0 given candidate radii, a log grid on [lo, hi] and
/// golden-section refinement around the best points.
template <class F>
Maximum maximize_radius(F&& f, std::vector<double> candidates, double lo, double hi, int grid, int refine_top) {
  if (grid > 0 && hi > lo && lo > 0.0) {
    for (int i = 0; i < grid; ++i) candidates.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (grid - 1)));
  }
  std::erase_if(candidates, [](double r) { return !(r > 0.0) || !std::isfinite(r); });
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.empty()) return {1.0, 0.0};
  std::vector<double> values(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) values[i] = f(candidates[i]);
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  Maximum best{candidates[order[0]], values[order[0]]};
  const std::size_t top = std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(refine_top, 0)));
  for (std::size_t k = 0; k < top; ++k) {
    const std::size_t i = order[k];
    const double a = i > 0 ? candidates[i - 1] : candidates[i] * 0.5;
    const double b = i + 1 < candidates.size() ? candidates[i + 1] : candidates[i] * 2.0;
    for (const auto& [left, right] : {std::pair{a, candidates[i]}, std::pair{candidates[i], b}}) {
      if (!(right > left * (1.0 + 1e-12))) continue;
      const Maximum m = golden_section_max_log(f, left, right, 1e-12);
      if (m.value > best.value) best = m;
    }
  }
  return best;
}

/// int_a^b h(s) ds by Gauss-Legendre on panels with breakpoints `cuts`
/// (clipped to [a, b]).
template <class H>
double panel_integral(H&& h, double a, double b, std::vector<double> cuts, const GaussRule& g) {
  cuts.push_back(a);
  cuts.push_back(b);
  std::erase_if(cuts, [&](double c) { return c < a || c > b; });
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double lo = cuts[p];
    const double hi = cuts[p + 1];
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double s = 0.0;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) s += g.weights[k] * h(mid + half * g.nodes[k]);
    total += half * s;
  }
  return total;
}

/// Geometric cut points scale * 2^k, k in [kmin, kmax].
inline std::vector<double> geometric_cuts(double scale, int kmin, int kmax) {
  std::vector<double> c;
  for (int k = kmin; k <= kmax; ++k) c.push_back(std::ldexp(scale, k));
  return c;
}

}  // namespace detail

/// M_phi^alpha mu(x).
///
/// Atomic measures: exact. For the indicator profile the integral
/// r -> mu(B(x,r)) is a step function jumping at the atom distances, so the
/// supremum is max_k P_k / d_k^{n-alpha} over prefix sums P_k (ties merged).
/// Table profiles are handled the same way at the radii d_i / b_j where an
/// atom crosses a breakpoint; smooth profiles are maximized numerically from
/// the single-atom critical radii.
///
/// Density measures: lower-bound estimate from the radii where
/// r -> mu(B(x,r)) is not smooth, a log grid and golden-section refinement.
/// For n = 1 and piecewise-constant profiles the kink radii alone are exact.
inline double maximal_radial(const RadialProfile& phi, const FracOrder& alpha, const Measure& mu,
                             std::span<const double> x, const OperatorOptions& opts = {},
                             const SphereRule* rule = nullptr) {
  const int n = phi.dimension();
  detail::check_point(n, x);
  detail::check_measure(n, mu);
  if (alpha.dimension() != n) throw std::invalid_argument("fractional order dimension mismatch");
  const double e = alpha.exponent();
  if (phi.kind() == RadialProfile::Kind::Table && phi.values().back() > 0.0)
    throw std::invalid_argument("table profile must vanish beyond its last breakpoint");

  if (mu.is_atomic()) {
    if (mu.points().empty()) return 0.0;
    auto dist = detail::atom_distances(mu, x, opts.atom_guard);
    std::sort(dist.begin(), dist.end(), [](const auto& a, const auto& b) { return a.d < b.d; });
    const auto& w = mu.weights();

    if (phi.kind() == RadialProfile::Kind::Indicator) {
      double prefix = 0.0;
      double best = 0.0;
      for (std::size_t k = 0; k < dist.size(); ++k) {
        prefix += w[dist[k].index];
        if (k + 1 < dist.size() && dist[k + 1].d == dist[k].d) continue;
        best = std::max(best, prefix / std::pow(dist[k].d, e));
      }
      return best;
    }

    if (phi.kind() == RadialProfile::Kind::Table) {
      const auto& b = phi.breakpoints();
      const auto& v = phi.values();
      double best = 0.0;
      for (std::size_t i = 0; i < dist.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
          // Just above r_c = d_i / b_j every atom at distance d_k sits at
          // d_k / r slightly below d_k / r_c.
          const double rc = dist[i].d / b[j];
          double s = 0.0;
          for (const auto& ak : dist) {
            const double val = ak.d == dist[i].d ? v[j] : phi.left_limit(ak.d / rc);
            s += w[ak.index] * val;
          }
          best = std::max(best, s / std::pow(rc, e));
        }
      }
      return best;
    }

    const double rstar = scale_supremum(phi, alpha).critical_radius;
    auto F = [&](double r) {
      double s = 0.0;
      for (const auto& a : dist) s += w[a.index] * phi(a.d / r);
      return s / std::pow(r, e);
    };
    std::vector<double> cand;
    for (const auto& a : dist) cand.push_back(a.d * rstar);
    const double lo = dist.front().d * rstar / 16.0;
    const double hi = dist.back().d * rstar * 16.0;
    return detail::maximize_radius(F, cand, lo, hi, 64, 6).value;
  }

  const double reach = norm(x) + mu.support_radius();
  if (!(reach > 0.0)) return 0.0;
  std::vector<double> kinks = mu.ball_mass_kinks(x);
  const double smallest = kinks.empty() ? reach : kinks.front();
  const bool exact_1d = n == 1 && phi.piecewise_constant();
  const int grid = exact_1d ? 0 : opts.radius_grid;
  const int refine = exact_1d ? 0 : opts.refine_top;

  if (phi.piecewise_constant()) {
    // Phi = sum_j (v_j - v_{j+1}) chi_{[0, b_j)}: a combination of ball masses.
    std::vector<double> b{1.0};
    std::vector<double> jump{1.0};
    if (phi.kind() == RadialProfile::Kind::Table) {
      b = phi.breakpoints();
      jump.assign(b.size(), 0.0);
      for (std::size_t j = 0; j < b.size(); ++j) jump[j] = phi.values()[j] - phi.values()[j + 1];
    }
    auto F = [&](double r) {
      double s = 0.0;
      for (std::size_t j = 0; j < b.size(); ++j)
        if (jump[j] != 0.0) s += jump[j] * mu.ball_mass(x, r * b[j], rule);
      return s / std::pow(r, e);
    };
    std::vector<double> cand;
    for (double k : kinks)
      for (double bj : b) cand.push_back(k / bj);
    // Small-radius probe for the r -> 0 limit; skipped in n = 1, where the
    // first kink already attains it and the probe would suffer cancellation.
    if (!exact_1d) cand.push_back(smallest * 1e-6 / b.back());
    return detail::maximize_radius(F, cand, smallest * 1e-4 / b.back(), 2.0 * reach / b.front(), grid, refine).value;
  }

  // Smooth profile against a density: integrate along rays.
  const SphereRule local = rule ? SphereRule{} : default_sphere_rule(n, opts.sphere_order);
  const SphereRule& R = rule ? *rule : local;
  const auto bundle = detail::rays(mu, x, R);
  const GaussRule g = gauss_legendre(opts.gl_order);
  auto F = [&](double r) {
    const auto cuts = detail::geometric_cuts(r, -6, 30);
    double total = 0.0;
    for (std::size_t i = 0; i < R.size(); ++i) {
      double ray = 0.0;
      for (const auto& seg : bundle.segments[i]) {
        ray += seg.density * detail::panel_integral([&](double s) { return phi(s / r) * std::pow(s, n - 1); }, seg.s0,
                                                    seg.s1, cuts, g);
      }
      total += R.weights[i] * ray;
    }
    return total / std::pow(r, e);
  };
  const double rstar = scale_supremum(phi, alpha).critical_radius;
  std::vector<double> cand;
  for (double k : kinks) cand.push_back(k * rstar);
  return detail::maximize_radius(F, cand, smallest * 1e-4, 8.0 * reach, opts.radius_grid, opts.refine_top).value;
}

/// M_Omega^alpha mu(x).
///
/// Atomic measures: exact via prefix sums Q_k of |Omega(x - y_i)| w_i over
/// the sorted distances. Density measures: along each ray the inner integral
/// is A + B r^n between consecutive segment ends, so r^{-(n-alpha)} times it
/// is maximized at a segment end or in the limit r -> 0; all of these are
/// evaluated, which makes the result exact for the given sphere rule.
inline double maximal_homog(const HomogeneousKernel& omega, const FracOrder& alpha, const Measure& mu,
                            std::span<const double> x, const OperatorOptions& opts = {},
                            const SphereRule* rule = nullptr) {
  const int n = omega.dimension();
  detail::check_point(n, x);
  detail::check_measure(n, mu);
  const double e = alpha.exponent();
  if (mu.is_atomic()) {
    if (mu.points().empty()) return 0.0;
    auto dist = detail::atom_distances(mu, x, opts.atom_guard);
    std::sort(dist.begin(), dist.end(), [](const auto& a, const auto& b) { return a.d < b.d; });
    double prefix = 0.0;
    double best = 0.0;
    for (std::size_t k = 0; k < dist.size(); ++k) {
      const auto& y = mu.points()[dist[k].index];
      prefix += std::abs(omega(detail::difference(x, y))) * mu.weights()[dist[k].index];
      if (k + 1 < dist.size() && dist[k + 1].d == dist[k].d) continue;
      best = std::max(best, prefix / std::pow(dist[k].d, e));
    }
    return best;
  }

  const SphereRule local = rule ? SphereRule{} : default_sphere_rule(n, opts.sphere_order);
  const SphereRule& R = rule ? *rule : local;
  struct Event {
    double s;
    double dB;  // change of the r^n coefficient
    double dA;  // change of the constant term
  };
  std::vector<Event> events;
  double limit0 = 0.0;
  for (std::size_t i = 0; i < R.size(); ++i) {
    const double c = R.weights[i] * std::abs(omega.on_sphere(detail::negated(R.nodes[i])));
    if (c == 0.0) continue;
    for (const auto& seg : mu.ray_segments(x, R.nodes[i])) {
      const double k = c * seg.density / n;
      events.push_back({seg.s0, k, -k * std::pow(seg.s0, n)});
      events.push_back({seg.s1, -k, k * std::pow(seg.s1, n)});
      if (seg.s0 == 0.0) limit0 += k;
    }
  }
  double best = alpha.value() == 0.0 ? limit0 : 0.0;
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.s < b.s; });
  double A = 0.0;
  double B = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    A += events[i].dA;
    B += events[i].dB;
    if (i + 1 < events.size() && events[i + 1].s == events[i].s) continue;
    const double r = events[i].s;
    if (r > 0.0) best = std::max(best, (A + B * std::pow(r, n)) / std::pow(r, e));
  }
  return best;
}

namespace detail {

inline void require_mean_zero(const HomogeneousKernel& omega, const SphereRule& rule, double tol) {
  const double defect = mean_zero_defect(omega, rule);
  if (!(defect < tol))
    throw std::invalid_argument("principal value requires a mean-zero kernel (defect " + std::to_string(defect) + ")");
}

/// Per ray: weight w_theta Omega(-theta) and its constant-density pieces.
struct SignedRays {
  std::vector<double> coeff;
  std::vector<std::vector<RaySegment>> segments;
  double smallest_cut = std::numeric_limits<double>::infinity();
};

inline SignedRays signed_rays(const HomogeneousKernel& omega, const Measure& mu, std::span<const double> x,
                              const SphereRule& R) {
  SignedRays out;
  for (std::size_t i = 0; i < R.size(); ++i) {
    out.coeff.push_back(R.weights[i] * omega.on_sphere(negated(R.nodes[i])));
    out.segments.push_back(mu.ray_segments(x, R.nodes[i]));
    for (const auto& seg : out.segments.back()) {
      if (seg.s0 > 0.0) out.smallest_cut = std::min(out.smallest_cut, seg.s0);
      out.smallest_cut = std::min(out.smallest_cut, seg.s1);
    }
  }
  return out;
}

/// int_{|x-y|>eps} Omega(x-y) |x-y|^{-n} dmu(y) along the rays.
inline double truncated_singular(const SignedRays& rays, double eps) {
  double total = 0.0;
  for (std::size_t i = 0; i < rays.coeff.size(); ++i) {
    if (rays.coeff[i] == 0.0) continue;
    double ray = 0.0;
    for (const auto& seg : rays.segments[i]) {
      if (seg.s1 <= eps) continue;
      ray += seg.density * std::log(seg.s1 / std::max(seg.s0, eps));
    }
    total += rays.coeff[i] * ray;
  }
  return total;
}

/// Principal value lim_{eps->0} of truncated_singular with eps_k = eps_0 2^{-k}
/// and two-term Richardson extrapolation R_k = 2 I_{k+1} - I_k.
inline double principal_value(const SignedRays& rays, const OperatorOptions& opts) {
  double scale = 0.0;
  for (std::size_t i = 0; i < rays.coeff.size(); ++i)
    for (const auto& seg : rays.segments[i]) scale = std::max(scale, std::abs(rays.coeff[i]) * seg.density);
  if (scale == 0.0) return 0.0;
  const double eps0 = std::isfinite(rays.smallest_cut) ? 0.5 * rays.smallest_cut : 1.0;
  const double atol = 1e-13 * scale;
  double I_prev = truncated_singular(rays, eps0);
  double I_cur = truncated_singular(rays, 0.5 * eps0);
  double R_prev = 2.0 * I_cur - I_prev;
  for (int k = 2; k <= opts.pv_max_levels; ++k) {
    I_prev = I_cur;
    I_cur = truncated_singular(rays, std::ldexp(eps0, -k));
    const double R_cur = 2.0 * I_cur - I_prev;
    if (std::abs(R_cur - R_prev) <= opts.pv_rtol * std::abs(R_cur) + atol) return R_cur;
    R_prev = R_cur;
  }
  throw SingularityError("principal value does not converge at this point");
}

}  // namespace detail

/// T_Omega^alpha mu(x). For alpha = 0 and a density measure the integral is
/// a principal value and Omega must have mean zero on the sphere.
inline double frac_integral(const HomogeneousKernel& omega, const FracOrder& alpha, const Measure& mu,
                            std::span<const double> x, const OperatorOptions& opts = {},
                            const SphereRule* rule = nullptr) {
  const int n = omega.dimension();
  detail::check_point(n, x);
  detail::check_measure(n, mu);
  const double e = alpha.exponent();
  if (mu.is_atomic()) {
    const auto dist = detail::atom_distances(mu, x, opts.atom_guard);
    double s = 0.0;
    for (const auto& a : dist) {
      const auto& y = mu.points()[a.index];
      s += omega(detail::difference(x, y)) * mu.weights()[a.index] / std::pow(a.d, e);
    }
    return s;
  }
  const SphereRule local = rule ? SphereRule{} : default_sphere_rule(n, opts.sphere_order);
  const SphereRule& R = rule ? *rule : local;
  const auto rays = detail::signed_rays(omega, mu, x, R);
  if (alpha.value() > 0.0) {
    const double a = alpha.value();
    double total = 0.0;
    for (std::size_t i = 0; i < rays.coeff.size(); ++i) {
      double ray = 0.0;
      for (const auto& seg : rays.segments[i]) ray += seg.density * (std::pow(seg.s1, a) - std::pow(seg.s0, a)) / a;
      total += rays.coeff[i] * ray;
    }
    return total;
  }
  detail::require_mean_zero(omega, R, opts.mean_zero_tol);
  return detail::principal_value(rays, opts);
}

/// T_Omega^* mu(x) (alpha = 0).
///
/// Atomic measures: exact. As eps decreases the truncated sum gains the
/// atoms in order of decreasing distance, so the supremum is the largest
/// |suffix sum|. Density measures: along each ray the truncated integral is
/// A + B log eps between segment ends, hence monotone there, and the
/// supremum is attained at a segment end or in the principal-value limit.
inline double truncated_maximal(const HomogeneousKernel& omega, const Measure& mu, std::span<const double> x,
                                const OperatorOptions& opts = {}, const SphereRule* rule = nullptr) {
  const int n = omega.dimension();
  detail::check_point(n, x);
  detail::check_measure(n, mu);
  if (mu.is_atomic()) {
    auto dist = detail::atom_distances(mu, x, opts.atom_guard);
    std::sort(dist.begin(), dist.end(), [](const auto& a, const auto& b) { return a.d > b.d; });
    double s = 0.0;
    double best = 0.0;
    for (std::size_t k = 0; k < dist.size(); ++k) {
      const auto& y = mu.points()[dist[k].index];
      s += omega(detail::difference(x, y)) * mu.weights()[dist[k].index] / std::pow(dist[k].d, n);
      if (k + 1 < dist.size() && dist[k + 1].d == dist[k].d) continue;
      best = std::max(best, std::abs(s));
    }
    return best;
  }
  const SphereRule local = rule ? SphereRule{} : default_sphere_rule(n, opts.sphere_order);
  const SphereRule& R = rule ? *rule : local;
  detail::require_mean_zero(omega, R, opts.mean_zero_tol);
  const auto rays = detail::signed_rays(omega, mu, x, R);
  std::vector<double> cuts;
  for (const auto& segs : rays.segments)
    for (const auto& seg : segs) {
      if (seg.s0 > 0.0) cuts.push_back(seg.s0);
      cuts.push_back(seg.s1);
    }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double best = std::abs(detail::principal_value(rays, opts));
  for (double c : cuts) best = std::max(best, std::abs(detail::truncated_singular(rays, c)));
  return best;
}

/// T_g mu(x) = int g(x - y) dmu(y).
inline double convolve(const FreeKernel& g, const Measure& mu, std::span<const double> x,
                       const OperatorOptions& opts = {}, const SphereRule* rule = nullptr) {
  const int n = mu.dimension();
  detail::check_point(n, x);
  if (mu.is_atomic()) {
    double s = 0.0;
    const double xn = norm(x);
    for (std::size_t i = 0; i < mu.points().size(); ++i) {
      const auto& y = mu.points()[i];
      const Point z = detail::difference(x, y);
      if (g.singular_at_origin) {
        const double d = norm(z);
        if (d == 0.0 || d <= opts.atom_guard * std::max({1.0, xn, norm(y)}))
          throw SingularityError("kernel singularity meets an atom");
      }
      s += g(z) * mu.weights()[i];
    }
    return s;
  }
  const SphereRule local = rule ? SphereRule{} : default_sphere_rule(n, opts.sphere_order);
  const SphereRule& R = rule ? *rule : local;
  const GaussRule gl = gauss_legendre(opts.gl_order);
  double total = 0.0;
  Point z(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < R.size(); ++i) {
    const auto& u = R.nodes[i];
    double ray = 0.0;
    for (const auto& seg : mu.ray_segments(x, u)) {
      auto h = [&](double s) {
        for (int d = 0; d < n; ++d) z[static_cast<std::size_t>(d)] = -s * u[static_cast<std::size_t>(d)];
        return g(z) * std::pow(s, n - 1);
      };
      std::vector<double> cuts;
      const double len = seg.s1 - seg.s0;
      for (int k = 1; k < 8; ++k) cuts.push_back(seg.s0 + len * k / 8.0);
      if (g.singular_at_origin && seg.s0 == 0.0) {
        // Geometric panels towards the singularity; the innermost piece
        // [0, s1 2^{-60}] is dropped.
        cuts = detail::geometric_cuts(seg.s1, -60, 0);
        ray += seg.density * detail::panel_integral(h, std::ldexp(seg.s1, -60), seg.s1, cuts, gl);
      } else {
        ray += seg.density * detail::panel_integral(h, seg.s0, seg.s1, cuts, gl);
      }
    }
    total += R.weights[i] * ray;
  }
  return total;
}

enum class Family { RadialMaximal, HomogMaximal, FracIntegral, TruncatedMaximal, Convolution };

inline std::string family_name(Family f) {
  switch (f) {
    case Family::RadialMaximal: return "radial_maximal";
    case Family::HomogMaximal: return "homog_maximal";
    case Family::FracIntegral: return "frac_integral";
    case Family::TruncatedMaximal: return "truncated_maximal";
    case Family::Convolution: return "convolution";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  for (Family f : {Family::RadialMaximal, Family::HomogMaximal, Family::FracIntegral, Family::TruncatedMaximal,
                   Family::Convolution})
    if (family_name(f) == s) return f;
  throw std::invalid_argument("unknown operator family '" + s + "'");
}

using OperatorKernel = std::variant<RadialProfile, HomogeneousKernel, FreeKernel>;

struct OperatorSpec {
  Family family;
  OperatorKernel kernel;
  FracOrder alpha;

  int dimension() const { return alpha.dimension(); }

  /// Family/kernel compatibility; TruncatedMaximal requires alpha = 0.
  void validate() const {
    const bool ok = [&] {
      switch (family) {
        case Family::RadialMaximal: return std::holds_alternative<RadialProfile>(kernel);
        case Family::HomogMaximal:
        case Family::FracIntegral:
        case Family::TruncatedMaximal: return std::holds_alternative<HomogeneousKernel>(kernel);
        case Family::Convolution: return std::holds_alternative<FreeKernel>(kernel);
      }
      return false;
    }();
    if (!ok) throw std::invalid_argument("operator family " + family_name(family) + " is incompatible with the kernel");
    if (family == Family::TruncatedMaximal && alpha.value() != 0.0)
      throw std::invalid_argument("truncated maximal operator requires alpha = 0");
    if (const auto* p = std::get_if<RadialProfile>(&kernel); p && p->dimension() != dimension())
      throw std::invalid_argument("profile dimension does not match alpha dimension");
    if (const auto* k = std::get_if<HomogeneousKernel>(&kernel); k && k->dimension() != dimension())
      throw std::invalid_argument("kernel dimension does not match alpha dimension");
  }
};

/// Evaluates one operator against measures, holding a cached sphere rule.
/// Immutable after construction, so evaluate() may be called concurrently.
class OperatorEvaluator {
 public:
  explicit OperatorEvaluator(OperatorSpec spec, OperatorOptions opts = {})
      : spec_(std::move(spec)), opts_(opts), rule_(default_sphere_rule(spec_.dimension(), opts.sphere_order)) {
    spec_.validate();
  }

  const OperatorSpec& spec() const noexcept { return spec_; }
  const OperatorOptions& options() const noexcept { return opts_; }
  const SphereRule& rule() const noexcept { return rule_; }

  double evaluate(const Measure& mu, std::span<const double> x) const {
    switch (spec_.family) {
      case Family::RadialMaximal:
        return maximal_radial(std::get<RadialProfile>(spec_.kernel), spec_.alpha, mu, x, opts_, &rule_);
      case Family::HomogMaximal:
        return maximal_homog(std::get<HomogeneousKernel>(spec_.kernel), spec_.alpha, mu, x, opts_, &rule_);
      case Family::FracIntegral:
        return frac_integral(std::get<HomogeneousKernel>(spec_.kernel), spec_.alpha, mu, x, opts_, &rule_);
      case Family::TruncatedMaximal:
        return truncated_maximal(std::get<HomogeneousKernel>(spec_.kernel), mu, x, opts_, &rule_);
      case Family::Convolution: return convolve(std::get<FreeKernel>(spec_.kernel), mu, x, opts_, &rule_);
    }
    return 0.0;
  }

 private:
  OperatorSpec spec_;
  OperatorOptions opts_;
  SphereRule rule_;
};

}  // namespace limitlab
