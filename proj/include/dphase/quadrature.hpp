#ifndef DPHASE_QUADRATURE_HPP
#define DPHASE_QUADRATURE_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dphase/common.hpp"

namespace dphase {

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
  long evaluations = 0;
};

struct QuadratureError : std::runtime_error {
  double value;
  double error_estimate;
  QuadratureError(const std::string& what, double v, double e)
      : std::runtime_error(what), value(v), error_estimate(e) {}
};

namespace detail {

template <typename F>
void adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                          double whole, double tol, int depth, QuadResult& out) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  out.evaluations += 2;
  const double h6 = (b - a) / 12.0;
  const double left = h6 * (fa + 4.0 * flm + fm);
  const double right = h6 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) {
    out.value += left + right + delta / 15.0;
    out.error_estimate += std::fabs(delta) / 15.0;
    out.converged = false;
    return;
  }
  if (std::fabs(delta) <= 15.0 * tol) {
    out.value += left + right + delta / 15.0;
    out.error_estimate += std::fabs(delta) / 15.0;
    return;
  }
  adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
  adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

}  // namespace detail

/// Adaptive Simpson on [a,b]. The tolerance is relative to a running scale
/// estimate with an absolute floor, so tiny integrals do not over-refine.
template <typename F>
QuadResult adaptive_simpson(const F& f, double a, double b, double rel_tol,
                            double abs_floor = 1e-14, int max_depth = 48) {
  QuadResult out;
  if (b <= a) return out;
  const double fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
  out.evaluations = 3;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double scale = std::max(std::fabs(whole), abs_floor);
  detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole,
                               std::max(rel_tol * scale, abs_floor), max_depth, out);
  return out;
}

/// Fixed 4-point Gauss-Legendre panel; used for cumulative tabulation where
/// panels are narrow enough that this is at machine accuracy.
template <typename F>
double gauss4(const F& f, double a, double b) {
  static const double xs[2] = {0.3399810435848562648, 0.8611363115940525752};
  static const double ws[2] = {0.6521451548625461426, 0.3478548451374538574};
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 2; ++i)
    s += ws[i] * (f(c - h * xs[i]) + f(c + h * xs[i]));
  return s * h;
}

struct RootResult {
  double x = 0.0;
  bool converged = false;
  int iterations = 0;
  double lo = 0.0, hi = 0.0;  // last bracket
};

/// Bisection for f(x) = target with f nondecreasing on [lo, hi].
/// The bracket is expanded geometrically first if it does not straddle.
template <typename F>
RootResult bisect_increasing(const F& f, double target, double lo, double hi,
                             double rel_tol = 1e-12, int max_iter = 200) {
  RootResult r;
  double flo = f(lo), fhi = f(hi);
  int expand = 0;
  while (flo > target && expand < max_iter) {
    hi = lo;
    lo *= 0.5;
    flo = f(lo);
    ++expand;
  }
  while (fhi < target && expand < max_iter) {
    lo = hi;
    hi *= 2.0;
    fhi = f(hi);
    ++expand;
  }
  r.lo = lo;
  r.hi = hi;
  if (flo > target || fhi < target) return r;  // not bracketed
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) lo = mid; else hi = mid;
    if (hi - lo <= rel_tol * std::max(1.0, std::fabs(hi))) {
      r.iterations = i + 1;
      break;
    }
    r.iterations = i + 1;
  }
  r.x = 0.5 * (lo + hi);
  r.lo = lo;
  r.hi = hi;
  r.converged = true;
  return r;
}

/// Golden-section search for the maximum of a unimodal function on [a,b].
template <typename F>
double golden_max(const F& f, double a, double b, double tol = 1e-12, int max_iter = 300) {
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < max_iter && (b - a) > tol * std::max(1.0, std::fabs(b)); ++i) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + invphi * (b - a); f2 = f(x2);
    } else {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - invphi * (b - a); f1 = f(x1);
    }
  }
  return f(0.5 * (a + b));
}

/// Cubic Hermite table on a strictly increasing grid with per-interval end
/// slopes. Slopes come from the exact integrand, so on monotone data the
/// interpolant stays monotone once the Fritsch-Carlson clamp is applied.
class HermiteTable {
 public:
  void reserve(std::size_t n) {
    t_.reserve(n); v_.reserve(n); sl_.reserve(n); sr_.reserve(n);
  }

  /// Append a node. `slope_left` is used when the node is the right end of an
  /// interval, `slope_right` when it is the left end (they differ only at a
  /// kink such as t = 1).
  void push(double t, double v, double slope_left, double slope_right) {
    t_.push_back(t); v_.push_back(v); sl_.push_back(slope_left); sr_.push_back(slope_right);
  }
  void push(double t, double v, double slope) { push(t, v, slope, slope); }

  /// Clamp slopes so the interpolant is monotone on monotone data.
  void finalize_monotone() {
    for (std::size_t i = 0; i + 1 < t_.size(); ++i) {
      const double h = t_[i + 1] - t_[i];
      const double d = (v_[i + 1] - v_[i]) / h;
      if (d <= 0.0) continue;
      const double cap = 3.0 * d;
      if (sr_[i] > cap) sr_[i] = cap;
      if (sl_[i + 1] > cap) sl_[i + 1] = cap;
    }
  }

  bool empty() const { return t_.empty(); }
  double front() const { return t_.front(); }
  double back() const { return t_.back(); }
  std::size_t size() const { return t_.size(); }
  double node(std::size_t i) const { return t_[i]; }
  double value(std::size_t i) const { return v_[i]; }

  double eval(double t) const {
    if (t <= t_.front()) return v_.front();
    if (t >= t_.back()) return v_.back();
    std::size_t i = interval_of(t);
    const double h = t_[i + 1] - t_[i];
    const double s = (t - t_[i]) / h;
    const double v0 = v_[i], v1 = v_[i + 1];
    const double m0 = sr_[i] * h, m1 = sl_[i + 1] * h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * v0 + (s3 - 2 * s2 + s) * m0 +
           (-2 * s3 + 3 * s2) * v1 + (s3 - s2) * m1;
  }

  /// Inverse of a strictly increasing table by bracketed bisection.
  double invert(double y, double rel_tol = 1e-13) const {
    if (y <= v_.front()) return t_.front();
    if (y >= v_.back()) return t_.back();
    std::size_t lo_i = 0, hi_i = v_.size() - 1;
    while (hi_i - lo_i > 1) {
      std::size_t mid = (lo_i + hi_i) / 2;
      if (v_[mid] < y) lo_i = mid; else hi_i = mid;
    }
    double lo = t_[lo_i], hi = t_[hi_i];
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (eval(mid) < y) lo = mid; else hi = mid;
      if (hi - lo <= rel_tol * std::max(std::fabs(hi), 1e-300)) break;
    }
    return 0.5 * (lo + hi);
  }

 private:
  std::size_t interval_of(double t) const {
    std::size_t lo = 0, hi = t_.size() - 1;
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      if (t_[mid] <= t) lo = mid; else hi = mid;
    }
    return lo;
  }

  Vec t_, v_, sl_, sr_;
};

}  // namespace dphase

#endif
