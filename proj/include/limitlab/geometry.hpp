#pragma once

// Euclidean primitives: ball volumes, ball-ball intersection volumes and
// quadrature rules on the unit sphere S^{n-1}.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "limitlab/rng.hpp"

namespace limitlab {

using Point = std::vector<double>;

/// Ambient dimension n >= 1.
class Dimension {
 public:
  constexpr explicit Dimension(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("dimension must be >= 1, got " + std::to_string(n));
  }
  constexpr int value() const noexcept { return n_; }
  constexpr operator int() const noexcept { return n_; }

 private:
  int n_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> x) {
  if (x.size() == 1) return std::abs(x[0]);
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) {
    const double u = v / scale;
    s += u * u;
  }
  return scale * std::sqrt(s);
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("distance: dimension mismatch");
  if (a.size() == 1) return std::abs(a[0] - b[0]);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// |B(0,1)| = pi^{n/2} / Gamma(n/2 + 1).
inline double unit_ball_volume(Dimension n) {
  switch (n.value()) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: break;
  }
  const double h = 0.5 * n.value();
  return std::exp(h * std::log(std::numbers::pi) - std::lgamma(h + 1.0));
}

/// sigma(S^{n-1}) = n |B(0,1)|.
inline double sphere_surface_area(Dimension n) { return n.value() * unit_ball_volume(n); }

inline double ball_volume(Dimension n, double radius) {
  return unit_ball_volume(n) * std::pow(radius, n.value());
}

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for closed-form results
};

struct QmcOptions {
  std::size_t samples = 1u << 16;  // total over all replicates
  int replicates = 8;
  std::uint64_t seed = 0x5eedULL;
};

namespace detail {

inline double radical_inverse(std::uint64_t index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double result = 0.0;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return result;
}

inline unsigned nth_prime(int k) {
  static constexpr std::array<unsigned, 32> primes = {2,  3,  5,  7,  11, 13, 17, 19, 23,  29,  31,
                                                      37, 41, 43, 47, 53, 59, 61, 67, 71,  73,  79,
                                                      83, 89, 97, 101, 103, 107, 109, 113, 127, 131};
  if (k < 0 || k >= static_cast<int>(primes.size()))
    throw std::invalid_argument("QMC volume supports dimensions up to 32");
  return primes[static_cast<std::size_t>(k)];
}

// Randomly shifted Halton estimate of |B(c1,r1) ∩ B(c2,r2)|, sampling the
// bounding box of the smaller ball.
inline VolumeEstimate qmc_intersection(int n, std::span<const double> c1, double r1,
                                       std::span<const double> c2, double r2, const QmcOptions& opts) {
  const bool first_small = r1 <= r2;
  std::span<const double> cs = first_small ? c1 : c2;
  std::span<const double> cb = first_small ? c2 : c1;
  const double rs = first_small ? r1 : r2;
  const double rb = first_small ? r2 : r1;
  const int reps = std::max(2, opts.replicates);
  const std::size_t per = std::max<std::size_t>(16, opts.samples / static_cast<std::size_t>(reps));
  const double box = std::pow(2.0 * rs, n);
  const CounterStream stream(opts.seed);
  std::vector<double> estimates;
  Point x(static_cast<std::size_t>(n));
  for (int rep = 0; rep < reps; ++rep) {
    const CounterStream shift = stream.child(static_cast<std::uint64_t>(rep));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < per; ++i) {
      for (int d = 0; d < n; ++d) {
        double u = radical_inverse(i + 1, nth_prime(d)) + shift.uniform(static_cast<std::uint64_t>(d));
        u -= std::floor(u);
        x[static_cast<std::size_t>(d)] = cs[static_cast<std::size_t>(d)] + (2.0 * u - 1.0) * rs;
      }
      if (distance(x, cs) <= rs && distance(x, cb) <= rb) ++hits;
    }
    estimates.push_back(box * static_cast<double>(hits) / static_cast<double>(per));
  }
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= reps;
  double var = 0.0;
  for (double e : estimates) var += (e - mean) * (e - mean);
  var /= (reps - 1);
  return {mean, std::sqrt(var / reps)};
}

}  // namespace detail

/// Lebesgue measure of the closed-ball intersection B(c1,r1) ∩ B(c2,r2).
///
/// Closed forms for n = 1, 2, 3 (interval overlap, circular lens, spherical
/// caps; written in factored form so that near-tangent configurations keep
/// full relative accuracy). For n >= 4 a randomly shifted Halton estimate is
/// returned together with its replicate standard error.
inline VolumeEstimate ball_intersection_volume(Dimension dim, std::span<const double> c1, double r1,
                                               std::span<const double> c2, double r2,
                                               const QmcOptions& qmc = {}) {
  const int n = dim.value();
  if (!(r1 > 0.0) || !(r2 > 0.0)) throw std::invalid_argument("ball_intersection_volume: radii must be positive");
  if (c1.size() != static_cast<std::size_t>(n) || c2.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("ball_intersection_volume: center dimension mismatch");

  if (n == 1) {
    const double lo = std::max(c1[0] - r1, c2[0] - r2);
    const double hi = std::min(c1[0] + r1, c2[0] + r2);
    return {std::max(0.0, hi - lo), 0.0};
  }

  const double d = distance(c1, c2);
  if (d >= r1 + r2) return {0.0, 0.0};
  const double rmin = std::min(r1, r2);
  const double rmax = std::max(r1, r2);
  constexpr double eps = 1e-15;
  if (d <= (rmax - rmin) + 4.0 * eps * rmax) return {ball_volume(dim, rmin), 0.0};

  if (n >= 4) return detail::qmc_intersection(n, c1, r1, c2, r2, qmc);

  // Signed distance from each center to the radical hyperplane and the
  // corresponding cap heights, in cancellation-free factored form.
  const double a1 = (d * d + (r1 - r2) * (r1 + r2)) / (2.0 * d);
  const double a2 = d - a1;
  const double h1 = (r2 - d + r1) * (r2 + d - r1) / (2.0 * d);  // r1 - a1
  const double h2 = (r1 - d + r2) * (r1 + d - r2) / (2.0 * d);  // r2 - a2

  if (n == 2) {
    const double p1 = (d + r1 - r2) * (d + r1 + r2) / (2.0 * d);  // r1 + a1
    const double chord = std::sqrt(std::max(0.0, h1 * p1));
    const double seg1 = r1 * r1 * std::atan2(chord, a1) - a1 * chord;
    const double seg2 = r2 * r2 * std::atan2(chord, a2) - a2 * chord;
    return {seg1 + seg2, 0.0};
  }

  const double cap1 = std::numbers::pi * h1 * h1 * (3.0 * r1 - h1) / 3.0;
  const double cap2 = std::numbers::pi * h2 * h2 * (3.0 * r2 - h2) / 3.0;
  return {cap1 + cap2, 0.0};
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= order; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = 0.0;
    for (int k = 1; k <= order; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = order * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -z;
    rule.nodes[static_cast<std::size_t>(order - 1 - i)] = z;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(order - 1 - i)] = w;
  }
  if (order % 2 == 1) rule.nodes[static_cast<std::size_t>(order / 2)] = 0.0;
  return rule;
}

/// Quadrature rule on the unit sphere S^{n-1}: unit nodes with positive
/// weights summing to sigma(S^{n-1}).
struct SphereRule {
  int dimension = 1;
  std::vector<Point> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(std::span<const double>(nodes[i]));
    return s;
  }
};

/// Quadrature on S^{n-1}.
///
///  - n = 1: the two points {+1, -1} with unit weights (counting measure).
///  - n = 2: `order` equally spaced angles, exact for trigonometric
///    polynomials of degree < order.
///  - n = 3: Gauss-Legendre in cos(theta) (`order` nodes) times `2*order`
///    equally spaced azimuths.
///  - n >= 4: max(order, 64) * n random directions with equal weights.
inline SphereRule sphere_quadrature(Dimension dim, int order, std::uint64_t seed = 0x51ULL) {
  if (order < 1) throw std::invalid_argument("sphere_quadrature: order must be >= 1");
  const int n = dim.value();
  SphereRule rule;
  rule.dimension = n;
  if (n == 1) {
    rule.nodes = {{1.0}, {-1.0}};
    rule.weights = {1.0, 1.0};
    return rule;
  }
  if (n == 2) {
    const double w = 2.0 * std::numbers::pi / order;
    for (int k = 0; k < order; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / order;
      rule.nodes.push_back({std::cos(theta), std::sin(theta)});
      rule.weights.push_back(w);
    }
    return rule;
  }
  if (n == 3) {
    const GaussRule g = gauss_legendre(order);
    const int azimuths = 2 * order;
    const double dphi = 2.0 * std::numbers::pi / azimuths;
    for (int i = 0; i < order; ++i) {
      const double z = g.nodes[static_cast<std::size_t>(i)];
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      for (int k = 0; k < azimuths; ++k) {
        const double phi = dphi * k;
        rule.nodes.push_back({s * std::cos(phi), s * std::sin(phi), z});
        rule.weights.push_back(g.weights[static_cast<std::size_t>(i)] * dphi);
      }
    }
    return rule;
  }
  const std::size_t count = static_cast<std::size_t>(std::max(order, 64)) * static_cast<std::size_t>(n);
  const double w = sphere_surface_area(dim) / static_cast<double>(count);
  const CounterStream stream(seed);
  for (std::size_t i = 0; i < count; ++i) {
    Point p(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d)
      p[static_cast<std::size_t>(d)] = stream.normal(i * static_cast<std::uint64_t>(n + 1) + static_cast<std::uint64_t>(d));
    double r = norm(p);
    if (r == 0.0) p[0] = r = 1.0;
    for (double& v : p) v /= r;
    rule.nodes.push_back(std::move(p));
    rule.weights.push_back(w);
  }
  return rule;
}

}  // namespace limitlab
