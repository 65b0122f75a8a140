#pragma once

#include <cmath>
#include <stdexcept>

namespace limitlab {

struct Maximum {
  double argmax;
  double value;
};

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
/// Stops when the bracket is narrower than tol * (1 + |x|).
template <class F>
Maximum golden_section_max(F&& f, double lo, double hi, double tol = 1e-10, int max_iter = 500) {
  if (!(hi > lo)) throw std::invalid_argument("golden_section_max: empty bracket");
  constexpr double inv_phi = 0.6180339887498948482;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol * (1.0 + std::abs(c) + std::abs(d)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? Maximum{c, fc} : Maximum{d, fd};
}

/// Maximize r -> f(r) over r in [r_lo, r_hi] by golden-section in log r.
template <class F>
Maximum golden_section_max_log(F&& f, double r_lo, double r_hi, double tol = 1e-10) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo)) throw std::invalid_argument("golden_section_max_log: bad bracket");
  auto in_log = [&](double u) { return f(std::exp(u)); };
  const Maximum m = golden_section_max(in_log, std::log(r_lo), std::log(r_hi), tol);
  return {std::exp(m.argmax), m.value};
}

}  // namespace limitlab
