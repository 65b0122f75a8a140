#pragma once

// Finite positive measures on R^n: atomic, radial piecewise-constant
// densities and piecewise-constant densities on a box grid. Dilation
// V_t(E) = V(E/t) and the split V_t = V_t^1 + V_t^2 at r_t = sqrt(t).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "limitlab/geometry.hpp"

namespace limitlab {

/// Piece of a ray x + s u on which the density is constant.
struct RaySegment {
  double s0;
  double s1;
  double density;
};

class Measure {
 public:
  enum class Kind { Atomic, RadialDensity, BoxDensity };

  static Measure atomic(Dimension n, std::vector<Point> points, std::vector<double> weights) {
    if (points.size() != weights.size()) throw std::invalid_argument("atomic measure: points/weights size mismatch");
    for (const auto& p : points)
      if (p.size() != static_cast<std::size_t>(n.value())) throw std::invalid_argument("atomic measure: point dimension mismatch");
    for (double w : weights)
      if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("atomic measure: weights must be positive and finite");
    Measure m(n, Kind::Atomic);
    m.points_ = std::move(points);
    m.weights_ = std::move(weights);
    return m;
  }

  /// Density f(|y|) = densities[j] for edges[j] <= |y| < edges[j+1].
  static Measure radial(Dimension n, std::vector<double> edges, std::vector<double> densities) {
    if (edges.size() != densities.size() + 1 || densities.empty())
      throw std::invalid_argument("radial density: need one more edge than densities");
    if (!(edges[0] >= 0.0)) throw std::invalid_argument("radial density: edges must be nonnegative");
    for (std::size_t i = 1; i < edges.size(); ++i)
      if (!(edges[i] > edges[i - 1]) || !std::isfinite(edges[i]))
        throw std::invalid_argument("radial density: edges must be finite and strictly increasing");
    for (double d : densities)
      if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("radial density: densities must be nonnegative");
    Measure m(n, Kind::RadialDensity);
    m.edges_ = std::move(edges);
    m.densities_ = std::move(densities);
    return m;
  }

  /// density * chi_{B(0, radius)}. dV = chi_{B(0,1)} dx is uniform_ball(n, 1, 1).
  static Measure uniform_ball(Dimension n, double radius = 1.0, double density = 1.0) {
    if (!(radius > 0.0)) throw std::invalid_argument("uniform ball: radius must be positive");
    return radial(n, {0.0, radius}, {density});
  }

  /// Uniform probability measure on B(0, radius).
  static Measure uniform_probability_ball(Dimension n, double radius = 1.0) {
    return uniform_ball(n, radius, 1.0 / ball_volume(n, radius));
  }

  /// Radial density obtained by sampling f at shell midpoints of `shells`
  /// equal-width shells on [0, R]. Mass outside B(0,R) is dropped.
  static Measure radial_sampled(Dimension n, const std::function<double(double)>& f, double R, int shells) {
    if (!(R > 0.0) || shells < 1) throw std::invalid_argument("radial_sampled: need R > 0 and shells >= 1");
    std::vector<double> edges(static_cast<std::size_t>(shells) + 1);
    std::vector<double> dens(static_cast<std::size_t>(shells));
    for (int j = 0; j <= shells; ++j) edges[static_cast<std::size_t>(j)] = R * j / shells;
    for (int j = 0; j < shells; ++j) dens[static_cast<std::size_t>(j)] = std::max(0.0, f(R * (j + 0.5) / shells));
    return radial(n, std::move(edges), std::move(dens));
  }

  /// Piecewise-constant density on the grid of `counts[d]` cells per axis
  /// over the box [lo, hi]; values in row-major order (last axis fastest).
  static Measure box(std::vector<double> lo, std::vector<double> hi, std::vector<int> counts, std::vector<double> values) {
    const std::size_t n = lo.size();
    if (n == 0 || hi.size() != n || counts.size() != n) throw std::invalid_argument("box density: corner/count dimension mismatch");
    std::size_t cells = 1;
    for (std::size_t d = 0; d < n; ++d) {
      if (!(hi[d] > lo[d])) throw std::invalid_argument("box density: need lo < hi on every axis");
      if (counts[d] < 1) throw std::invalid_argument("box density: cell counts must be positive");
      cells *= static_cast<std::size_t>(counts[d]);
    }
    if (values.size() != cells) throw std::invalid_argument("box density: expected " + std::to_string(cells) + " cell values");
    for (double v : values)
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("box density: values must be nonnegative");
    Measure m(Dimension(static_cast<int>(n)), Kind::BoxDensity);
    m.lo_ = std::move(lo);
    m.hi_ = std::move(hi);
    m.counts_ = std::move(counts);
    m.densities_ = std::move(values);
    return m;
  }

  int dimension() const noexcept { return n_; }
  Kind kind() const noexcept { return kind_; }
  bool is_atomic() const noexcept { return kind_ == Kind::Atomic; }

  const std::vector<Point>& points() const noexcept { return points_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& edges() const noexcept { return edges_; }
  const std::vector<double>& densities() const noexcept { return densities_; }
  const std::vector<double>& box_lo() const noexcept { return lo_; }
  const std::vector<double>& box_hi() const noexcept { return hi_; }
  const std::vector<int>& box_counts() const noexcept { return counts_; }

  /// Box densities only: the density is additionally restricted to the
  /// closed ball B(0, radius) (inside = true) or to its complement.
  struct Clip {
    double radius;
    bool inside;
  };
  const std::optional<Clip>& clip() const noexcept { return clip_; }

  double total_mass() const {
    switch (kind_) {
      case Kind::Atomic: {
        double s = 0.0;
        for (double w : weights_) s += w;
        return s;
      }
      case Kind::RadialDensity: {
        const double omega = unit_ball_volume(Dimension(n_));
        double s = 0.0;
        for (std::size_t j = 0; j < densities_.size(); ++j)
          s += densities_[j] * omega * (std::pow(edges_[j + 1], n_) - std::pow(edges_[j], n_));
        return s;
      }
      case Kind::BoxDensity: {
        double cell = 1.0;
        for (std::size_t d = 0; d < lo_.size(); ++d) cell *= (hi_[d] - lo_[d]) / counts_[d];
        double s = 0.0;
        for (double v : densities_) s += v * cell;
        if (!clip_) return s;
        const Point origin(static_cast<std::size_t>(n_), 0.0);
        Measure unclipped = *this;
        unclipped.clip_.reset();
        const double in = unclipped.ball_mass(origin, clip_->radius);
        return clip_->inside ? in : std::max(0.0, s - in);
      }
    }
    return 0.0;
  }

  /// Radius of a ball about the origin containing the support.
  double support_radius() const {
    switch (kind_) {
      case Kind::Atomic: {
        double r = 0.0;
        for (const auto& p : points_) r = std::max(r, norm(p));
        return r;
      }
      case Kind::RadialDensity: {
        std::size_t last = densities_.size();
        while (last > 0 && densities_[last - 1] == 0.0) --last;
        return last == 0 ? 0.0 : edges_[last];
      }
      case Kind::BoxDensity: {
        double s = 0.0;
        for (std::size_t d = 0; d < lo_.size(); ++d) {
          const double m = std::max(std::abs(lo_[d]), std::abs(hi_[d]));
          s += m * m;
        }
        double r = std::sqrt(s);
        if (clip_ && clip_->inside) r = std::min(r, clip_->radius);
        return r;
      }
    }
    return 0.0;
  }

  /// Density at y (densities only).
  double density_at(std::span<const double> y) const {
    switch (kind_) {
      case Kind::Atomic: throw std::logic_error("density_at: atomic measure has no density");
      case Kind::RadialDensity: return radial_density_at(norm(y));
      case Kind::BoxDensity: {
        if (clip_) {
          const double r = norm(y);
          if (clip_->inside ? r > clip_->radius : r <= clip_->radius) return 0.0;
        }
        return box_density_at(y);
      }
    }
    return 0.0;
  }

  /// Pushforward under y -> t y: atoms move, densities become t^{-n} f(y/t).
  Measure dilate(double t) const {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("dilate: t must be positive and finite");
    Measure m = *this;
    const double jac = std::pow(t, -n_);
    switch (kind_) {
      case Kind::Atomic:
        for (auto& p : m.points_)
          for (double& v : p) v *= t;
        break;
      case Kind::RadialDensity:
        for (double& e : m.edges_) e *= t;
        for (double& d : m.densities_) d *= jac;
        break;
      case Kind::BoxDensity:
        for (double& v : m.lo_) v *= t;
        for (double& v : m.hi_) v *= t;
        for (double& d : m.densities_) d *= jac;
        if (m.clip_) m.clip_->radius *= t;
        break;
    }
    return m;
  }

  /// The same measure scaled to total mass 1.
  Measure normalized() const {
    const double mass = total_mass();
    if (!(mass > 0.0)) throw std::invalid_argument("normalized: measure has zero mass");
    Measure m = *this;
    for (double& w : m.weights_) w /= mass;
    for (double& d : m.densities_) d /= mass;
    return m;
  }

  /// V(closed ball B(center, radius)).
  ///
  /// Atoms are counted exactly. Radial densities are exact through
  /// differences of ball-ball intersection volumes (quasi-Monte Carlo for
  /// n >= 4). Box densities are integrated along the rays of `rule` (or a
  /// default rule) with exact radial integrals on each constant piece.
  double ball_mass(std::span<const double> center, double radius, const SphereRule* rule = nullptr) const {
    if (!(radius >= 0.0)) throw std::invalid_argument("ball_mass: radius must be nonnegative");
    switch (kind_) {
      case Kind::Atomic: {
        double s = 0.0;
        for (std::size_t i = 0; i < points_.size(); ++i)
          if (distance(points_[i], center) <= radius) s += weights_[i];
        return s;
      }
      case Kind::RadialDensity: {
        if (radius == 0.0) return 0.0;
        const Point origin(static_cast<std::size_t>(n_), 0.0);
        const Dimension dim(n_);
        double s = 0.0;
        double prev = edges_[0] > 0.0 ? ball_intersection_volume(dim, origin, edges_[0], center, radius).value : 0.0;
        for (std::size_t j = 0; j < densities_.size(); ++j) {
          const double cur = ball_intersection_volume(dim, origin, edges_[j + 1], center, radius).value;
          if (densities_[j] != 0.0) s += densities_[j] * std::max(0.0, cur - prev);
          prev = cur;
        }
        return s;
      }
      case Kind::BoxDensity: {
        if (radius == 0.0) return 0.0;
        if (!clip_ && n_ == 2) return box_ball_mass_2d(center, radius);
        if (!clip_) {
          double far = 0.0;
          for (std::size_t d = 0; d < lo_.size(); ++d) {
            const double m = std::max(std::abs(lo_[d] - center[d]), std::abs(hi_[d] - center[d]));
            far += m * m;
          }
          if (std::sqrt(far) <= radius) return total_mass();
        }
        const SphereRule local = rule ? SphereRule{} : default_rule();
        const SphereRule& r = rule ? *rule : local;
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
          double ray = 0.0;
          for (const auto& seg : ray_segments(center, r.nodes[i], radius))
            ray += seg.density * (std::pow(seg.s1, n_) - std::pow(seg.s0, n_)) / n_;
          s += r.weights[i] * ray;
        }
        return s;
      }
    }
    return 0.0;
  }

  /// Radii at which r -> V(B(center, r)) may fail to be smooth (densities).
  std::vector<double> ball_mass_kinks(std::span<const double> center) const {
    std::vector<double> k;
    if (kind_ == Kind::RadialDensity) {
      const double c = norm(center);
      for (double e : edges_) {
        if (e == 0.0) continue;
        k.push_back(std::abs(e - c));
        k.push_back(e + c);
      }
    } else if (kind_ == Kind::BoxDensity) {
      for (std::size_t d = 0; d < lo_.size(); ++d) {
        const double h = (hi_[d] - lo_[d]) / counts_[d];
        for (int j = 0; j <= counts_[d]; ++j) k.push_back(std::abs(lo_[d] + j * h - center[d]));
      }
      if (clip_) {
        const double c = norm(center);
        k.push_back(std::abs(clip_->radius - c));
        k.push_back(clip_->radius + c);
      }
    }
    std::erase_if(k, [](double r) { return !(r > 0.0); });
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
  }

  /// Constant-density pieces of the ray origin + s u for s in [0, s_max]
  /// (densities only; u must be a unit vector). Pieces of zero density are
  /// omitted.
  std::vector<RaySegment> ray_segments(std::span<const double> origin, std::span<const double> u,
                                       double s_max = std::numeric_limits<double>::infinity()) const {
    if (kind_ == Kind::Atomic) throw std::logic_error("ray_segments: atomic measure has no density");
    std::vector<double> cuts{0.0};
    auto sphere_crossings = [&](double radius) {
      // |o + s u|^2 = radius^2  <=>  s^2 + 2 b s + c = 0.
      const double b = dot(origin, u);
      const double c = dot(origin, origin) - radius * radius;
      const double disc = b * b - c;
      if (disc < 0.0) return;
      const double sq = std::sqrt(disc);
      const double q = -(b + std::copysign(sq, b));
      double s1 = q;
      double s2 = q != 0.0 ? c / q : 0.0;
      if (q == 0.0) s1 = s2 = 0.0;
      for (double s : {s1, s2})
        if (s > 0.0 && s < s_max) cuts.push_back(s);
    };
    double far = 0.0;
    if (kind_ == Kind::RadialDensity) {
      for (double e : edges_)
        if (e > 0.0) sphere_crossings(e);
      far = norm(origin) + edges_.back();
    } else {
      for (std::size_t d = 0; d < lo_.size(); ++d) {
        if (u[d] == 0.0) continue;
        const double h = (hi_[d] - lo_[d]) / counts_[d];
        for (int j = 0; j <= counts_[d]; ++j) {
          const double s = (lo_[d] + j * h - origin[d]) / u[d];
          if (s > 0.0 && s < s_max) cuts.push_back(s);
        }
      }
      if (clip_) sphere_crossings(clip_->radius);
      far = norm(origin) + support_radius_box();
    }
    cuts.push_back(std::min(s_max, far));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<RaySegment> out;
    Point mid(origin.size());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = cuts[i];
      const double b = cuts[i + 1];
      if (!(b > a)) continue;
      const double s = 0.5 * (a + b);
      for (std::size_t d = 0; d < mid.size(); ++d) mid[d] = origin[d] + s * u[d];
      const double f = density_at(mid);
      if (f == 0.0) continue;
      if (!out.empty() && out.back().s1 == a && out.back().density == f)
        out.back().s1 = b;
      else
        out.push_back({a, b, f});
    }
    return out;
  }

  /// ||f||_{L^p} of the density (p = 1 also accepted for atoms: total mass).
  double lp_norm(double p) const {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    if (kind_ == Kind::Atomic) {
      if (p != 1.0) throw std::invalid_argument("lp_norm: atomic measures have no L^p density for p > 1");
      return total_mass();
    }
    if (kind_ == Kind::RadialDensity) {
      const double omega = unit_ball_volume(Dimension(n_));
      double s = 0.0;
      for (std::size_t j = 0; j < densities_.size(); ++j)
        s += std::pow(densities_[j], p) * omega * (std::pow(edges_[j + 1], n_) - std::pow(edges_[j], n_));
      return std::pow(s, 1.0 / p);
    }
    if (clip_) throw std::invalid_argument("lp_norm: clipped box densities are not supported");
    double cell = 1.0;
    for (std::size_t d = 0; d < lo_.size(); ++d) cell *= (hi_[d] - lo_[d]) / counts_[d];
    double s = 0.0;
    for (double v : densities_) s += std::pow(v, p) * cell;
    return std::pow(s, 1.0 / p);
  }

  /// Copy restricted to the closed ball B(0, radius) (inside) or its
  /// complement. Used by split().
  Measure restricted(double radius, bool inside) const {
    Measure m = *this;
    switch (kind_) {
      case Kind::Atomic: {
        m.points_.clear();
        m.weights_.clear();
        for (std::size_t i = 0; i < points_.size(); ++i) {
          if ((norm(points_[i]) <= radius) == inside) {
            m.points_.push_back(points_[i]);
            m.weights_.push_back(weights_[i]);
          }
        }
        return m;
      }
      case Kind::RadialDensity: {
        std::vector<double> e;
        std::vector<double> d;
        for (std::size_t j = 0; j < densities_.size(); ++j) {
          const double a = inside ? edges_[j] : std::max(edges_[j], radius);
          const double b = inside ? std::min(edges_[j + 1], radius) : edges_[j + 1];
          if (!(b > a)) continue;
          if (e.empty()) {
            e.push_back(a);
          } else if (e.back() != a) {
            d.push_back(0.0);
            e.push_back(a);
          }
          e.push_back(b);
          d.push_back(densities_[j]);
        }
        if (d.empty()) {
          e = {0.0, std::max(radius, 1e-300)};
          d = {0.0};
        }
        m.edges_ = std::move(e);
        m.densities_ = std::move(d);
        return m;
      }
      case Kind::BoxDensity:
        if (clip_) throw std::invalid_argument("restricted: box density is already clipped");
        m.clip_ = Clip{radius, inside};
        return m;
    }
    return m;
  }

 private:
  Measure(Dimension n, Kind kind) : n_(n.value()), kind_(kind) {}

  SphereRule default_rule() const { return sphere_quadrature(Dimension(n_), n_ == 2 ? 512 : 48); }

  double support_radius_box() const {
    double s = 0.0;
    for (std::size_t d = 0; d < lo_.size(); ++d) {
      const double m = std::max(std::abs(lo_[d]), std::abs(hi_[d]));
      s += m * m;
    }
    return std::sqrt(s);
  }

  double radial_density_at(double r) const {
    if (r < edges_.front() || r >= edges_.back()) return 0.0;
    const auto j = std::upper_bound(edges_.begin(), edges_.end(), r) - edges_.begin() - 1;
    return densities_[static_cast<std::size_t>(j)];
  }

  // Area of the disk |z| <= r intersected with [0, x] x [0, y], x, y >= 0.
  static double disk_quadrant_area(double x, double y, double r) {
    const auto S = [r](double u) { return 0.5 * (u * std::sqrt(std::max(0.0, r * r - u * u)) + r * r * std::asin(u / r)); };
    const double xc = std::min(x, r);
    const double a = std::min(xc, std::sqrt(std::max(0.0, r * r - y * y)));
    return y * a + S(xc) - S(a);
  }

  // Exact disk-rectangle areas cell by cell (the signed quadrant function
  // is a distribution function of the disk).
  double box_ball_mass_2d(std::span<const double> c, double r) const {
    const auto F = [r](double x, double y) {
      const double v = disk_quadrant_area(std::abs(x), std::abs(y), r);
      return (x < 0.0) != (y < 0.0) ? -v : v;
    };
    const double hx = (hi_[0] - lo_[0]) / counts_[0], hy = (hi_[1] - lo_[1]) / counts_[1];
    double s = 0.0;
    for (int i = 0; i < counts_[0]; ++i) {
      const double x0 = lo_[0] + i * hx - c[0], x1 = (i + 1 == counts_[0] ? hi_[0] : lo_[0] + (i + 1) * hx) - c[0];
      if (std::max(x0, -x1) > r) continue;
      for (int j = 0; j < counts_[1]; ++j) {
        const double v = densities_[static_cast<std::size_t>(i) * static_cast<std::size_t>(counts_[1]) + static_cast<std::size_t>(j)];
        if (v == 0.0) continue;
        const double y0 = lo_[1] + j * hy - c[1], y1 = (j + 1 == counts_[1] ? hi_[1] : lo_[1] + (j + 1) * hy) - c[1];
        if (std::max(y0, -y1) > r) continue;
        s += v * (F(x1, y1) - F(x0, y1) - F(x1, y0) + F(x0, y0));
      }
    }
    return s;
  }

  double box_density_at(std::span<const double> y) const {
    std::size_t index = 0;
    for (std::size_t d = 0; d < lo_.size(); ++d) {
      if (y[d] < lo_[d] || y[d] >= hi_[d]) return 0.0;
      const double h = (hi_[d] - lo_[d]) / counts_[d];
      const int c = std::min(counts_[d] - 1, static_cast<int>((y[d] - lo_[d]) / h));
      index = index * static_cast<std::size_t>(counts_[d]) + static_cast<std::size_t>(c);
    }
    return densities_[index];
  }

  int n_;
  Kind kind_;
  std::vector<Point> points_;
  std::vector<double> weights_;
  std::vector<double> edges_;
  std::vector<double> densities_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<int> counts_;
  std::optional<Clip> clip_;
};

struct SplitMeasure {
  Measure inner;  // V_t restricted to the closed ball B(0, r_t)
  Measure outer;  // the remainder
  double r_t;
  double eps_t;   // outer mass as a fraction of V(R^n)
};

/// V_t = V_t^1 + V_t^2 with r_t = sqrt(t).
inline SplitMeasure split(const Measure& V, double t) {
  const Measure Vt = V.dilate(t);
  const double r_t = std::sqrt(t);
  Measure inner = Vt.restricted(r_t, true);
  Measure outer = Vt.restricted(r_t, false);
  const double mass = V.total_mass();
  const double outer_mass = outer.total_mass();
  const double eps = mass > 0.0 ? outer_mass / mass : 0.0;
  return {std::move(inner), std::move(outer), r_t, eps};
}

}  // namespace limitlab
