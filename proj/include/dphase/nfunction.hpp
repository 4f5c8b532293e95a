#ifndef DPHASE_NFUNCTION_HPP
#define DPHASE_NFUNCTION_HPP

#include <cmath>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>

#include "dphase/field.hpp"
#include "dphase/model.hpp"
#include "dphase/quadrature.hpp"

namespace dphase {

/// Evaluator for the density h, the N-function H, modulars, Luxemburg norms
/// and the convex conjugate of a DoublePhaseModel.
///
/// H(x,t) = int_0^t ( s^{p(x,s)-1} + mu(x) s^{q(x,s)-1} ) ds.
///
/// The reference path is adaptive Simpson with a mandatory split at s = 1,
/// where the exponents stop being constant in t.  When h does not depend on x
/// an optional monotone tabulation serves repeated evaluations; cached and
/// direct paths agree to 1e-10 (tested).
class NFunction {
 public:
  explicit NFunction(DoublePhaseModel model, double quad_tol = 1e-12,
                     bool enable_cache = true)
      : model_(std::move(model)), quad_tol_(quad_tol),
        cache_enabled_(enable_cache && !model_.h_depends_on_x()) {}

  const DoublePhaseModel& model() const { return model_; }
  double quad_tol() const { return quad_tol_; }
  bool cache_enabled() const { return cache_enabled_; }

  /// Pointwise density h(x,t) = t^{p(x,t)-1} + mu(x) t^{q(x,t)-1} for t > 0.
  double h(std::span<const double> x, double t) const {
    if (t == 0.0) return 0.0;
    if (t < 0.0) throw std::invalid_argument("h: negative argument");
    return std::pow(t, model_.p(x, t) - 1.0) + model_.mu(x) * std::pow(t, model_.q(x, t) - 1.0);
  }

  /// H by quadrature only (no cache). Split at s = 1 per the exponent kink.
  QuadResult H_checked(std::span<const double> x, double t) const {
    if (t < 0.0) throw std::invalid_argument("eval_H: t must be nonnegative");
    QuadResult total;
    if (t == 0.0) return total;
    auto integrand = [&](double s) { return h(x, s); };
    const double t1 = std::min(t, 1.0);
    QuadResult a = adaptive_simpson(integrand, 0.0, t1, quad_tol_);
    total.value = a.value;
    total.error_estimate = a.error_estimate;
    total.converged = a.converged;
    total.evaluations = a.evaluations;
    if (t > 1.0) {
      QuadResult b = adaptive_simpson(integrand, 1.0, t, quad_tol_);
      total.value += b.value;
      total.error_estimate += b.error_estimate;
      total.converged = total.converged && b.converged;
      total.evaluations += b.evaluations;
    }
    return total;
  }

  /// H(x,t); cached when the model allows it, else direct quadrature.
  double H(std::span<const double> x, double t) const {
    if (t < 0.0) throw std::invalid_argument("eval_H: t must be nonnegative");
    if (t == 0.0) return 0.0;
    if (cache_enabled_) {
      // (H)(ii): exponents are constant on [0,1], so the antiderivative is
      // closed-form below the kink.
      if (t <= 1.0) return closed_small(x, t);
      ensure_table(x);
      if (t <= table_->back()) return table_->eval(t);
    }
    QuadResult r = H_checked(x, t);
    if (!r.converged)
      throw QuadratureError("eval_H: quadrature did not converge", r.value, r.error_estimate);
    return r.value;
  }

  /// Modular rho(u) = sum_i w_i [V(x_i)] H(x_i, |u_i|).
  double modular(const SampledField& u, bool weight_by_V = false) const {
    if (u.dim != model_.d)
      throw std::invalid_argument("modular: field dimension does not match model");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double a = std::fabs(u.values[i]);
      if (a == 0.0) continue;
      const auto x = u.node(i);
      double term = u.weights[i] * H(x, a);
      if (weight_by_V) term *= model_.V(x);
      s += term;
    }
    return s;
  }

  /// Modular of u / lambda.
  double modular_scaled(const SampledField& u, double lambda, bool weight_by_V) const {
    if (u.dim != model_.d)
      throw std::invalid_argument("modular: field dimension does not match model");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double a = std::fabs(u.values[i]) / lambda;
      if (a == 0.0) continue;
      const auto x = u.node(i);
      double term = u.weights[i] * H(x, a);
      if (weight_by_V) term *= model_.V(x);
      s += term;
    }
    return s;
  }

  struct NormResult {
    double value = 0.0;
    double unit_modular = 0.0;  // rho(u / value), 1 within tolerance on success
    bool converged = true;
    double bracket_lo = 0.0, bracket_hi = 0.0;
  };

  /// Luxemburg norm: the lambda > 0 with rho(u/lambda) = 1, by bracketed
  /// bisection on the strictly decreasing map lambda -> rho(u/lambda).
  NormResult luxemburg_checked(const SampledField& u, bool weight_by_V = false,
                               double rel_tol = 1e-8) const {
    NormResult res;
    const double umax = u.max_abs_value();
    if (umax == 0.0) { res.unit_modular = 0.0; return res; }
    double lo = umax / 10.0, hi = umax * 10.0;
    auto rho = [&](double lam) { return modular_scaled(u, lam, weight_by_V); };
    int guard = 0;
    while (rho(lo) < 1.0 && guard < 200) { hi = lo; lo *= 0.5; ++guard; }
    while (rho(hi) > 1.0 && guard < 200) { lo = hi; hi *= 2.0; ++guard; }
    res.bracket_lo = lo;
    res.bracket_hi = hi;
    if (guard >= 200) { res.converged = false; return res; }
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (rho(mid) > 1.0) lo = mid; else hi = mid;
      if (hi - lo <= rel_tol * hi) break;
    }
    res.value = 0.5 * (lo + hi);
    res.unit_modular = rho(res.value);
    res.converged = std::fabs(res.unit_modular - 1.0) <= 1e-6;
    res.bracket_lo = lo;
    res.bracket_hi = hi;
    return res;
  }

  double luxemburg(const SampledField& u, bool weight_by_V = false) const {
    NormResult r = luxemburg_checked(u, weight_by_V);
    if (!r.converged)
      throw std::runtime_error("luxemburg_norm: bracketing failed (last bracket [" +
                               std::to_string(r.bracket_lo) + ", " +
                               std::to_string(r.bracket_hi) + "])");
    return r.value;
  }

  /// Maximizer tau* of s*tau - H(x,tau), found from the slope equation
  /// h(x,tau) = s (h is strictly increasing since p, q >= 2).
  double conjugate_tau(std::span<const double> x, double s) const {
    if (s < 0.0) throw std::invalid_argument("conjugate: s must be nonnegative");
    if (s == 0.0) return 0.0;
    auto hs = [&](double tau) { return h(x, tau); };
    RootResult r = bisect_increasing(hs, s, 0.5, 2.0, 1e-13, 400);
    if (!r.converged) throw std::runtime_error("conjugate: slope equation not bracketed");
    return r.x;
  }

  /// Convex conjugate Htilde(x,s) = sup_{tau >= 0} (s tau - H(x,tau)).
  double conjugate(std::span<const double> x, double s) const {
    if (s == 0.0) return 0.0;
    const double tau = conjugate_tau(x, s);
    return std::max(0.0, s * tau - H(x, tau));
  }

  /// Young gap H(x,tau) + Htilde(x,sigma) - tau*sigma; nonnegative by the
  /// Young inequality, zero at sigma = h(x,tau).
  double young_gap(std::span<const double> x, double tau, double sigma) const {
    if (tau < 0.0 || sigma < 0.0) throw std::invalid_argument("young_gap: negative argument");
    return H(x, tau) + conjugate(x, sigma) - tau * sigma;
  }

  /// Modular built from the conjugate: sum_i w_i Htilde(x_i, |v_i|).
  double conjugate_modular_scaled(const SampledField& v, double lambda) const {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double a = std::fabs(v.values[i]) / lambda;
      if (a == 0.0) continue;
      s += v.weights[i] * conjugate(v.node(i), a);
    }
    return s;
  }

  /// Luxemburg-style norm against the conjugate modular.
  double conjugate_norm(const SampledField& v) const {
    const double vmax = v.max_abs_value();
    if (vmax == 0.0) return 0.0;
    double lo = vmax / 10.0, hi = vmax * 10.0;
    auto rho = [&](double lam) { return conjugate_modular_scaled(v, lam); };
    int guard = 0;
    while (rho(lo) < 1.0 && guard < 200) { hi = lo; lo *= 0.5; ++guard; }
    while (rho(hi) > 1.0 && guard < 200) { lo = hi; hi *= 2.0; ++guard; }
    if (guard >= 200) throw std::runtime_error("conjugate_norm: bracketing failed");
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (rho(mid) > 1.0) lo = mid; else hi = mid;
      if (hi - lo <= 1e-8 * hi) break;
    }
    return 0.5 * (lo + hi);
  }

 private:
  double closed_small(std::span<const double> x, double t) const {
    const double p = model_.p(x, t), q = model_.q(x, t);
    return std::pow(t, p) / p + model_.mu(x) * std::pow(t, q) / q;
  }

  void ensure_table(std::span<const double> x) const {
    std::call_once(table_once_, [&] {
      auto tab = std::make_unique<HermiteTable>();
      const double lo = 1.0, hi = 1e16;
      const int per_decade = 512;
      const int n = static_cast<int>(std::ceil(per_decade * std::log10(hi / lo)));
      tab->reserve(n + 1);
      double t_prev = lo;
      double acc = closed_small(x, 1.0);
      tab->push(t_prev, acc, h(x, t_prev));
      for (int i = 1; i <= n; ++i) {
        const double t_i = lo * std::pow(10.0, static_cast<double>(i) / per_decade);
        acc += gauss4([&](double s) { return h(x, s); }, t_prev, t_i);
        tab->push(t_i, acc, h(x, t_i));
        t_prev = t_i;
      }
      tab->finalize_monotone();
      table_ = std::move(tab);
    });
  }

  DoublePhaseModel model_;
  double quad_tol_;
  bool cache_enabled_;
  mutable std::once_flag table_once_;
  mutable std::unique_ptr<HermiteTable> table_;
};

}  // namespace dphase

#endif
