// Test-only oracles, independent of the library's numerical paths: a fixed
// composite Simpson integrator with step doubling, a plain scalar bisection,
// and a one-file recomputation of the certificate constants from the raw
// formulas.  Nothing here calls into the adaptive quadrature, tabulation or
// bisection code under test.
#ifndef DPHASE_TESTS_ORACLE_HPP
#define DPHASE_TESTS_ORACLE_HPP

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

/// Composite Simpson with panel doubling until two refinements agree.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-12) {
  if (b <= a) return 0.0;
  auto simpson = [&](long n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (long i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
  };
  double prev = simpson(64);
  for (long n = 128; n <= (1L << 22); n *= 2) {
    const double cur = simpson(n);
    if (std::fabs(cur - prev) <= rel_tol * std::max(1.0, std::fabs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

/// Bisection for f nondecreasing with f(lo) <= target <= f(hi).
inline double bisect(const std::function<double(double)>& f, double target, double lo,
                     double hi, double rel_tol = 1e-13) {
  if (f(lo) > target || f(hi) < target) throw std::runtime_error("oracle::bisect: no bracket");
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) lo = mid; else hi = mid;
    if (hi - lo <= rel_tol * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

/// Literal recomputation of the certificate constants for x-independent F and
/// a potential whose sup over the ball is supplied by the caller.
struct CertificateRef {
  double omega_R, delta, alpha, beta;
};

inline CertificateRef certificate_reference(int d, double R, double p_minus, double q_plus,
                                            double mu_sup, double V_sup_ball, double gamma,
                                            double b_minus, double b_plus, double r,
                                            double eta,
                                            const std::function<double(double)>& F_of_eta) {
  CertificateRef out{};
  out.omega_R = std::pow(M_PI, 0.5 * d) / std::tgamma(1.0 + 0.5 * d) * std::pow(R, d);
  const double minR = std::min(std::pow(R, p_minus), std::pow(R, q_plus));
  out.delta = p_minus * minR /
              (std::max(1.0, mu_sup) * out.omega_R *
               (V_sup_ball * minR + std::pow(2.0, q_plus + 1.0 - d) * (std::pow(2.0, d) - 1.0)));
  const double gbar = std::max(std::pow(gamma, b_plus), std::pow(gamma, b_minus));
  out.alpha = gbar *
              std::max(std::pow(q_plus * r, b_plus / p_minus),
                       std::pow(q_plus * r, b_minus / q_plus)) /
              r;
  const double half_ball =
      std::pow(M_PI, 0.5 * d) / std::tgamma(1.0 + 0.5 * d) * std::pow(0.5 * R, d);
  out.beta = out.delta * F_of_eta(eta) * half_ball /
             std::max(std::pow(eta, p_minus), std::pow(eta, q_plus));
  return out;
}

}  // namespace oracle

#endif
