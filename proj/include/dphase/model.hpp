#ifndef DPHASE_MODEL_HPP
#define DPHASE_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dphase/common.hpp"

namespace dphase {

// ---------------------------------------------------------------------------
// Exponent fields p(x,t), q(x,t).
//
// Every family is constant in t on [0,1], nondecreasing for t >= 1, and
// Lipschitz in x, so the declared bounds and Lipschitz constants are exact by
// construction.  The t-profile is the saturating log
//     g(t) = ln(max(t,1)) / (1 + ln(max(t,1)))  in [0,1),
// and the x-profile is w(x) = 1/(1+|x|^2) in (0,1] with |grad w| <= 3*sqrt(3)/8.
// ---------------------------------------------------------------------------

struct ExponentField {
  enum class Kind { Constant, TLog, XMod, XModTLog };

  Kind kind = Kind::Constant;
  double base = 2.0;
  double amp_t = 0.0;  // weight of the saturating-log t profile
  double amp_x = 0.0;  // weight of the x modulation

  double lower_bound = 2.0;
  double upper_bound = 2.0;
  double lipschitz_x = 0.0;

  static double tprofile(double t) {
    if (t <= 1.0) return 0.0;
    const double L = std::log(t);
    return L / (1.0 + L);
  }
  static double xprofile(std::span<const double> x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return 1.0 / (1.0 + r2);
  }

  double operator()(std::span<const double> x, double t) const {
    switch (kind) {
      case Kind::Constant: return base;
      case Kind::TLog: return base + amp_t * tprofile(t);
      case Kind::XMod: return base + amp_x * xprofile(x);
      case Kind::XModTLog: return base + amp_x * xprofile(x) + amp_t * tprofile(t);
    }
    return base;
  }

  bool depends_on_x() const { return amp_x != 0.0; }
  bool depends_on_t() const { return amp_t != 0.0; }

  /// Limit of the frozen-t profile x -> field(x, 1) as |x| -> infinity.
  double limit_at_infinity() const { return base; }

  static ExponentField constant(double c) {
    ExponentField e;
    e.kind = Kind::Constant;
    e.base = e.lower_bound = e.upper_bound = c;
    return e;
  }
  static ExponentField make(double base, double amp_t, double amp_x) {
    ExponentField e;
    e.base = base;
    e.amp_t = amp_t;
    e.amp_x = amp_x;
    if (amp_t == 0.0 && amp_x == 0.0) e.kind = Kind::Constant;
    else if (amp_x == 0.0) e.kind = Kind::TLog;
    else if (amp_t == 0.0) e.kind = Kind::XMod;
    else e.kind = Kind::XModTLog;
    e.lower_bound = base;
    e.upper_bound = base + amp_t + amp_x;
    e.lipschitz_x = amp_x * (3.0 * std::sqrt(3.0) / 8.0);
    return e;
  }
};

struct Weight {  // mu
  enum class Kind { Constant, Decay };  // Decay: c / (1 + |x|^2)
  Kind kind = Kind::Constant;
  double c = 1.0;

  double operator()(std::span<const double> x) const {
    if (kind == Kind::Constant) return c;
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return c / (1.0 + r2);
  }
  double sup() const { return c; }
  double limit_at_infinity() const { return kind == Kind::Constant ? c : 0.0; }
  bool depends_on_x() const { return kind == Kind::Decay && c != 0.0; }
};

struct Potential {  // V
  enum class Kind { Constant, Quadratic };  // Quadratic: v0 + c |x|^2
  Kind kind = Kind::Quadratic;
  double v0 = 1.0;
  double c = 1.0;

  double operator()(std::span<const double> x) const {
    if (kind == Kind::Constant) return v0;
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return v0 + c * r2;
  }
  double floor() const { return v0; }
  bool coercive() const { return kind == Kind::Quadratic && c > 0.0; }
  /// Finite limit for bounded potentials; ignored when coercive.
  double bounded_limit() const { return v0; }
};

struct Asymptotics {
  double p_inf = 2.0;
  double q_inf = 2.5;
  double mu_inf = 1.0;
};

struct DoublePhaseModel {
  std::string catalog_id;
  int d = 3;
  ExponentField p, q;
  Weight mu;
  Potential V;
  double mu_sup = 1.0;
  Asymptotics asym;

  double p_minus() const { return p.lower_bound; }
  double p_plus() const { return p.upper_bound; }
  double q_minus() const { return q.lower_bound; }
  double q_plus() const { return q.upper_bound; }
  double p_minus_star() const { return d * p_minus() / (d - p_minus()); }
  bool q_plus_star_defined() const { return q_plus() < d; }
  double q_plus_star() const { return d * q_plus() / (d - q_plus()); }

  /// True when h(x,.) depends on the spatial point (disables shared caching).
  bool h_depends_on_x() const {
    return p.depends_on_x() || q.depends_on_x() || mu.depends_on_x();
  }
};

struct ModelParams {
  int d = 3;
  double p_base = 2.0, p_amp_t = 0.0, p_amp_x = 0.0;
  double q_base = 2.5, q_amp_t = 0.0, q_amp_x = 0.0;
  Weight::Kind mu_kind = Weight::Kind::Constant;
  double mu_c = 1.0;
  Potential::Kind V_kind = Potential::Kind::Quadratic;
  double V0 = 1.0, V_c = 1.0;
};

/// Instantiate a catalog model. The algebraic constraints of hypothesis (H)
/// and the potential floor of (V0)(i) are enforced eagerly; violations throw.
/// With enforce = false the structural object is built anyway so that the
/// hypothesis validator can report the violations as verdicts with witnesses.
inline DoublePhaseModel make_model(const std::string& catalog_id, const ModelParams& prm,
                                   bool enforce = true) {
  auto bad_usage = [&](const std::string& msg) {
    throw std::invalid_argument("make_model(" + catalog_id + "): " + msg);
  };
  auto fail = [&](const std::string& msg) {  // hypothesis violations
    if (enforce) bad_usage(msg);
  };

  DoublePhaseModel m;
  m.catalog_id = catalog_id;
  m.d = prm.d;
  if (prm.d < 3) bad_usage("dimension d must be >= 3");

  if (catalog_id == "constant") {
    m.p = ExponentField::make(prm.p_base, 0.0, 0.0);
    m.q = ExponentField::make(prm.q_base, 0.0, 0.0);
  } else if (catalog_id == "tlog") {
    m.p = ExponentField::make(prm.p_base, prm.p_amp_t, 0.0);
    m.q = ExponentField::make(prm.q_base, prm.q_amp_t, 0.0);
  } else if (catalog_id == "xmod") {
    m.p = ExponentField::make(prm.p_base, 0.0, prm.p_amp_x);
    m.q = ExponentField::make(prm.q_base, 0.0, prm.q_amp_x);
  } else if (catalog_id == "xmod_tlog") {
    m.p = ExponentField::make(prm.p_base, prm.p_amp_t, prm.p_amp_x);
    m.q = ExponentField::make(prm.q_base, prm.q_amp_t, prm.q_amp_x);
  } else {
    bad_usage("unknown catalog id");
  }
  if (prm.p_amp_t < 0 || prm.p_amp_x < 0 || prm.q_amp_t < 0 || prm.q_amp_x < 0)
    bad_usage("exponent modulation amplitudes must be nonnegative");

  m.mu.kind = prm.mu_kind;
  m.mu.c = prm.mu_c;
  if (prm.mu_c < 0) bad_usage("mu must be nonnegative");
  m.mu_sup = m.mu.sup();

  m.V.kind = prm.V_kind;
  m.V.v0 = prm.V0;
  m.V.c = prm.V_c;
  if (!(prm.V0 > 0)) fail("(V0)(i) requires a positive floor V0");

  m.asym.p_inf = m.p.limit_at_infinity();
  m.asym.q_inf = m.q.limit_at_infinity();
  m.asym.mu_inf = m.mu.limit_at_infinity();

  const double pm = m.p_minus(), pp = m.p_plus(), qm = m.q_minus(), qp = m.q_plus();
  std::ostringstream w;
  if (!(2.0 <= pm)) fail("(H)(i) requires 2 <= p-");
  if (!(pp < m.d)) fail("(H)(i) requires p+ < d");
  if (!(2.0 <= qm)) fail("(H)(i) requires 2 <= q-");
  if (!(pp < qm)) fail("(H)(i) requires p(x,t) < q(x,t) strictly");
  if (!(qp < m.p_minus_star())) {
    w << "(H)(i) requires q+ < p-_* : q+ = " << qp << " >= " << m.p_minus_star();
    fail(w.str());
  }
  if (!(qp / pm < 1.0 + 1.0 / m.d)) {
    w << "(H)(iv) violated: q+/p- = " << qp / pm << " >= 1 + 1/d = " << 1.0 + 1.0 / m.d;
    fail(w.str());
  }
  return m;
}

// ---------------------------------------------------------------------------
// Nonlinearity catalog.
//
// "log_power":  f(x,t) = |t|^{k-2} t ln(1+|t|) + (1/k) |t|^{k-1} t / (1+|t|)
//                   F(x,t) = (1/k) |t|^k ln(1+|t|),  with k = q+.
// "power":          f(x,t) = s |t|^{k-2} t with k > q+.
// "plateau":        a C^1 bump of weight s over the amplitude window
//                   [a-w, a+w] plus a small power tail eps |t|^{k-2} t.  The
//                   primitive gains fast across the window and then flattens,
//                   which is what produces the negative local minimum next to
//                   the mountain-pass barrier.
// "zero":           f = 0 (fails superlinearity; used for infeasibility runs).
//
// The majorant is the power N-function B(t) = b_scale * t^{b_exp} / b_exp, so
// b- = b+ = b_exp exactly.
// ---------------------------------------------------------------------------

struct Nonlinearity {
  enum class Kind { LogPower, Power, Plateau, Zero };
  Kind kind = Kind::LogPower;
  std::string catalog_id;

  double kappa = 2.5;   // growth exponent of f (tail exponent for "plateau")
  double scale = 1.0;   // only for "power"
  double q_plus_ref = 2.5;  // model q+ the tilde-F normalization uses
  double b_exp = 3.0;
  double b_scale = 1.0;
  double sigma = 1.5;
  double c_tilde = 1.0;
  double r0 = 1.0;

  // plateau parameters
  double bump_amp = 1.0;
  double bump_width = 0.5;
  double bump_scale = 60.0;
  double tail_scale = 0.05;

  double b_minus() const { return b_exp; }
  double b_plus() const { return b_exp; }

  static double hat(double y) { return std::fabs(y) < 1.0 ? sqr(1.0 - y * y) : 0.0; }
  static double hat_primitive(double y) {  // int_{-1}^{min(y,1)} (1-z^2)^2 dz
    if (y <= -1.0) return 0.0;
    const double z = std::min(y, 1.0);
    return (z - 2.0 * z * z * z / 3.0 + z * z * z * z * z / 5.0) + 8.0 / 15.0;
  }

  double f(std::span<const double>, double t) const {
    switch (kind) {
      case Kind::LogPower: {
        if (t == 0.0) return 0.0;
        const double a = std::fabs(t);
        return std::pow(a, kappa - 2.0) * t * std::log1p(a) +
               (1.0 / kappa) * std::pow(a, kappa - 1.0) * t / (1.0 + a);
      }
      case Kind::Power:
        if (t == 0.0) return 0.0;
        return scale * std::pow(std::fabs(t), kappa - 2.0) * t;
      case Kind::Plateau: {
        if (t == 0.0) return 0.0;
        const double a = std::fabs(t);
        const double bump = bump_scale * hat((a - bump_amp) / bump_width);
        const double tail = tail_scale * std::pow(a, kappa - 1.0);
        return (bump + tail) * sgn(t);
      }
      case Kind::Zero: return 0.0;
    }
    return 0.0;
  }

  double F(std::span<const double>, double t) const {
    const double a = std::fabs(t);
    switch (kind) {
      case Kind::LogPower:
        return (1.0 / kappa) * std::pow(a, kappa) * std::log1p(a);
      case Kind::Power:
        return (scale / kappa) * std::pow(a, kappa);
      case Kind::Plateau:
        return bump_scale * bump_width * hat_primitive((a - bump_amp) / bump_width) +
               (tail_scale / kappa) * std::pow(a, kappa);
      case Kind::Zero: return 0.0;
    }
    return 0.0;
  }

  /// tilde F(x,t) = (1/q+) t f(x,t) - F(x,t).
  double F_tilde(std::span<const double> x, double t) const {
    return t * f(x, t) / q_plus_ref - F(x, t);
  }

  double b(double t) const { return b_scale * std::pow(t, b_exp - 1.0); }
  double B(double t) const { return b_scale * std::pow(t, b_exp) / b_exp; }

  /// Admissible sigma window for the log-power family.
  std::pair<double, double> sigma_window(int d, double p_minus) const {
    return {d / p_minus, q_plus_ref / (q_plus_ref - p_minus + 1.0)};
  }
};

struct NonlinearityParams {
  double kappa = -1.0;   // tail/growth exponent; family default when <= 0
  double scale = 1.0;    // "power" prefactor
  double b_exp = -1.0;   // majorant exponent; family default when <= 0
  double sigma = -1.0;   // (F)(iv) exponent; window midpoint when <= 0
  double bump_amp = 1.0;
  double bump_width = 0.5;
  double bump_scale = 60.0;
  double tail_scale = 0.05;
};

/// Build a catalog nonlinearity against a model context (d, p-, q+).
inline Nonlinearity make_nonlinearity(const std::string& catalog_id,
                                      const DoublePhaseModel& model,
                                      const NonlinearityParams& prm) {
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("make_nonlinearity(" + catalog_id + "): " + msg);
  };
  Nonlinearity nl;
  nl.catalog_id = catalog_id;
  nl.q_plus_ref = model.q_plus();
  const double pstar = model.p_minus_star();

  if (catalog_id == "log_power") {
    nl.kind = Nonlinearity::Kind::LogPower;
    nl.kappa = nl.q_plus_ref;
  } else if (catalog_id == "power") {
    nl.kind = Nonlinearity::Kind::Power;
    nl.kappa = prm.kappa > 0 ? prm.kappa : nl.q_plus_ref + 0.25;
    nl.scale = prm.scale;
    if (!(nl.kappa > nl.q_plus_ref)) fail("power family needs kappa > q+ for (F)(ii)");
    if (!(nl.kappa < pstar)) fail("power family needs kappa < p-_*");
  } else if (catalog_id == "plateau") {
    nl.kind = Nonlinearity::Kind::Plateau;
    nl.kappa = prm.kappa > 0 ? prm.kappa : std::min(3.0, 0.5 * (nl.q_plus_ref + pstar));
    nl.bump_amp = prm.bump_amp;
    nl.bump_width = prm.bump_width;
    nl.bump_scale = prm.bump_scale;
    nl.tail_scale = prm.tail_scale;
    if (!(nl.kappa > nl.q_plus_ref)) fail("plateau tail needs kappa > q+ for (F)(ii)");
    if (!(nl.kappa < pstar)) fail("plateau tail needs kappa < p-_*");
    if (!(nl.bump_width > 0 && nl.bump_width < nl.bump_amp))
      fail("plateau window must stay away from 0 for (F)(iii)");
    if (!(nl.bump_scale >= 0 && nl.tail_scale > 0)) fail("plateau needs positive scales");
  } else if (catalog_id == "zero") {
    nl.kind = Nonlinearity::Kind::Zero;
    nl.kappa = nl.q_plus_ref;
  } else {
    fail("unknown catalog id");
  }

  nl.b_exp = prm.b_exp > 0 ? prm.b_exp
                           : (nl.kind == Nonlinearity::Kind::Plateau
                                  ? nl.kappa
                                  : std::min(nl.kappa + 0.5, 0.5 * (nl.kappa + pstar)));
  if (!(nl.b_exp >= nl.q_plus_ref)) fail("(F)(i) requires q+ <= b-");
  if (!(nl.b_exp < pstar)) fail("(F)(i) requires b+ < p-_*");
  if (nl.b_exp > nl.kappa + 1.0) fail("majorant exponent above kappa+1 has no finite scale");

  // Majorant scale: maximize |f(t)| / t^{b_exp - 1} over a wide log grid. The
  // ratio vanishes at both ends for admissible b_exp, so the grid max with a
  // margin is a valid constant.
  double ratio_max = 0.0;
  for (int i = 0; i <= 2400; ++i) {
    const double t = std::pow(10.0, -9.0 + i * (21.0 / 2400.0));
    const double r = std::fabs(nl.f({}, t)) / std::pow(t, nl.b_exp - 1.0);
    ratio_max = std::max(ratio_max, r);
  }
  nl.b_scale = nl.kind == Nonlinearity::Kind::Zero ? 1.0 : 1.05 * ratio_max;

  const auto window = nl.sigma_window(model.d, model.p_minus());
  nl.sigma = prm.sigma > 0 ? prm.sigma : 0.5 * (window.first + window.second);
  if (nl.kind == Nonlinearity::Kind::Plateau) {
    // tilde F turns positive once the tail beats the stored bump energy.
    const double plateau_F = nl.bump_scale * nl.bump_width * (16.0 / 15.0);
    const double gain = nl.tail_scale * (1.0 / nl.q_plus_ref - 1.0 / nl.kappa);
    nl.r0 = 1.1 * std::pow(plateau_F / gain, 1.0 / nl.kappa);
    if (prm.sigma <= 0) nl.sigma = model.d / model.p_minus() + 0.1;
  } else {
    nl.r0 = 1.0;
  }

  // c_tilde for (F)(iv): grid max of |f|^sigma / (|t|^{(p- - 1) sigma} tildeF).
  if (nl.kind != Nonlinearity::Kind::Zero) {
    double cmax = 0.0;
    for (int i = 0; i <= 1200; ++i) {
      const double t = nl.r0 * std::pow(10.0, i * (8.0 / 1200.0));
      const double ft = nl.F_tilde({}, t);
      if (ft <= 0.0) continue;
      const double num = std::pow(std::fabs(nl.f({}, t)), nl.sigma);
      const double den = std::pow(t, (model.p_minus() - 1.0) * nl.sigma) * ft;
      cmax = std::max(cmax, num / den);
    }
    nl.c_tilde = 1.05 * cmax;
  }
  return nl;
}

/// Convenience overload with positional scalars.
inline Nonlinearity make_nonlinearity(const std::string& catalog_id,
                                      const DoublePhaseModel& model, double kappa = -1.0,
                                      double scale = 1.0, double b_exp = -1.0,
                                      double sigma = -1.0) {
  NonlinearityParams prm;
  prm.kappa = kappa;
  prm.scale = scale;
  prm.b_exp = b_exp;
  prm.sigma = sigma;
  return make_nonlinearity(catalog_id, model, prm);
}

}  // namespace dphase

#endif
