#pragma once

// Independent reference computations for the test suite. None of these call
// the library's operator, quadrature or optimizer code; they are deliberately
// naive (dense grids, plain Monte Carlo with std::mt19937_64) so that an
// agreement is evidence rather than a tautology.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

inline double dist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double gamma_fn(double x) { return std::tgamma(x); }

inline double ball_volume(int n) { return std::pow(std::numbers::pi, n / 2.0) / gamma_fn(n / 2.0 + 1.0); }

/// Golden-section maximum of a unimodal f on [a, b]; returns {argmax, max}.
inline std::pair<double, double> golden_max(const std::function<double(double)>& f, double a, double b,
                                            int iterations = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations && b - a > 1e-15 * (1.0 + std::abs(a)); ++i) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

/// P_r(e_1) = r^{-n} c_n (1 + 1/r^2)^{-(n+1)/2}, c_n = Gamma((n+1)/2) / pi^{(n+1)/2}.
inline double poisson_dilate_e1(int n, double r) {
  const double c = gamma_fn((n + 1) / 2.0) / std::pow(std::numbers::pi, (n + 1) / 2.0);
  return std::pow(r, -n) * c * std::pow(1.0 + 1.0 / (r * r), -(n + 1) / 2.0);
}

/// G_r(e_1) = r^{-n} exp(-pi / r^2).
inline double heat_dilate_e1(int n, double r) { return std::pow(r, -n) * std::exp(-std::numbers::pi / (r * r)); }

/// Maximize r -> f(r) over r in [1e-3, 1e3] by a log grid and golden-section
/// refinement around the best grid cell.
inline std::pair<double, double> maximize_radius(const std::function<double(double)>& f) {
  const int N = 4000;
  int best = 0;
  double bv = -1.0;
  for (int i = 0; i <= N; ++i) {
    const double r = std::exp(std::log(1e-3) + (std::log(1e3) - std::log(1e-3)) * i / N);
    const double v = f(r);
    if (v > bv) {
      bv = v;
      best = i;
    }
  }
  const double step = (std::log(1e3) - std::log(1e-3)) / N;
  const double lo = std::log(1e-3) + step * (best - 1), hi = std::log(1e-3) + step * (best + 1);
  const auto [s, v] = golden_max([&](double s) { return f(std::exp(s)); }, lo, hi);
  return {std::exp(s), v};
}

/// Brute-force sup over r of r^{-e} sum_{|x - y_i| <= r} w_i h_i on a log
/// grid of `grid` radii spanning the atom distances, plus the atom distances
/// themselves (the supremum of a right-continuous step function divided by
/// a decreasing power sits exactly on a jump, which no grid hits).
inline double maximal_atoms(const std::vector<Vec>& pts, const Vec& w, const Vec& h, const Vec& x, double e,
                            int grid = 100000) {
  Vec d(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) d[i] = dist(pts[i], x);
  const double dmin = *std::min_element(d.begin(), d.end());
  const double dmax = *std::max_element(d.begin(), d.end());
  Vec radii;
  for (int k = 0; k <= grid; ++k) radii.push_back(dmin * 0.5 * std::pow(4.0 * dmax / dmin, double(k) / grid));
  radii.insert(radii.end(), d.begin(), d.end());
  double best = 0.0;
  for (double r : radii) {
    double m = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d[i] <= r) m += w[i] * h[i];
    best = std::max(best, m / std::pow(r, e));
  }
  return best;
}

/// sup_eps | sum_{|x - y_i| > eps} k_i w_i | over every truncation interval:
/// eps = 0 and eps equal to each distance (open condition excludes it).
inline double truncated_atoms(const Vec& d, const Vec& kw) {
  Vec eps{0.0};
  eps.insert(eps.end(), d.begin(), d.end());
  double best = 0.0;
  for (double e : eps) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d[i] > e) s += kw[i];
    best = std::max(best, std::abs(s));
  }
  return best;
}

struct McResult {
  double value;
  double std_error;
};

/// Plain Monte Carlo volume of B(c1, r1) ∩ B(c2, r2) in the plane.
inline McResult lens_mc(const Vec& c1, double r1, const Vec& c2, double r2, std::size_t samples, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> ux(c1[0] - r1, c1[0] + r1), uy(c1[1] - r1, c1[1] + r1);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vec p{ux(gen), uy(gen)};
    if (dist(p, c1) <= r1 && dist(p, c2) <= r2) ++hits;
  }
  const double box = 4.0 * r1 * r1;
  const double q = double(hits) / double(samples);
  return {box * q, box * std::sqrt(q * (1.0 - q) / double(samples))};
}

/// Plain Monte Carlo |{x in B(0, R) : f(x) > lambda}| in the plane.
inline McResult levelset_mc(const std::function<double(double, double)>& f, double lambda, double R,
                            std::size_t samples, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-R, R);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = u(gen), y = u(gen);
    if (x * x + y * y <= R * R && f(x, y) > lambda) ++hits;
  }
  const double box = 4.0 * R * R;
  const double q = double(hits) / double(samples);
  return {box * q, box * std::sqrt(q * (1.0 - q) / double(samples))};
}

/// (int_0^{2 pi} |f(theta + delta) - f(theta)|^q dtheta)^{1/q} maximized over
/// planar shifts h with |h| <= t applied to unit vectors, on a dense grid.
inline double dini_circle(const std::function<double(double)>& f, double q, double t, int shift_angles = 100,
                          int shift_radii = 100, int nodes = 2048) {
  double best = 0.0;
  for (int a = 0; a < shift_angles; ++a) {
    for (int b = 1; b <= shift_radii; ++b) {
      const double hr = t * b / shift_radii, ha = 2.0 * std::numbers::pi * a / shift_angles;
      const double hx = hr * std::cos(ha), hy = hr * std::sin(ha);
      double s = 0.0;
      for (int k = 0; k < nodes; ++k) {
        const double th = 2.0 * std::numbers::pi * (k + 0.5) / nodes;
        const double moved = std::atan2(std::sin(th) + hy, std::cos(th) + hx);
        s += std::pow(std::abs(f(moved) - f(th)), q);
      }
      best = std::max(best, std::pow(s * 2.0 * std::numbers::pi / nodes, 1.0 / q));
    }
  }
  return best;
}

}  // namespace oracle
