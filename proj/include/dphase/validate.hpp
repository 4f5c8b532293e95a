#ifndef DPHASE_VALIDATE_HPP
#define DPHASE_VALIDATE_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dphase/common.hpp"
#include "dphase/model.hpp"

namespace dphase {

enum class Verdict { Pass, Fail, Consistent, Inconsistent, Unverifiable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Consistent: return "consistent";
    case Verdict::Inconsistent: return "inconsistent";
    case Verdict::Unverifiable: return "unverifiable-at-scale";
  }
  return "?";
}

struct CheckItem {
  std::string name;
  Verdict verdict = Verdict::Pass;
  std::string witness;  // failing sample or informational detail
};

struct HypothesisReport {
  std::vector<CheckItem> items;

  const CheckItem* find(const std::string& name) const {
    for (const auto& it : items)
      if (it.name == name) return &it;
    return nullptr;
  }
  bool all_pass() const {
    for (const auto& it : items)
      if (it.verdict == Verdict::Fail || it.verdict == Verdict::Inconsistent) return false;
    return true;
  }
};

struct SamplingSpec {
  double R_samp = 8.0;    // spatial radius of the sample ball
  double T_samp = 1e3;    // top of the t sample range
  int n_radii = 64;
  int n_dirs = 32;
  int n_t = 64;
  std::uint64_t seed = 20240901;
};

namespace detail {

inline Vec t_ladder(double lo, double hi, int n) {
  Vec t(n);
  for (int i = 0; i < n; ++i)
    t[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return t;
}

}  // namespace detail

/// Per-condition structural checks of (H), (V0), (V1) and, when a nonlinearity
/// is supplied, (F).  Failures are verdicts with witnesses, not errors.
inline HypothesisReport validate_hypotheses(const DoublePhaseModel& m,
                                            const Nonlinearity* nl,
                                            const SamplingSpec& spec = {}) {
  HypothesisReport rep;
  std::ostringstream w;
  auto add = [&](const std::string& name, Verdict v, const std::string& witness = "") {
    rep.items.push_back({name, v, witness});
  };

  // Sample points: radii x directions, plus the origin.
  const auto dirs = unit_directions(m.d, spec.n_dirs, spec.seed);
  std::vector<Vec> xs;
  xs.push_back(Vec(m.d, 0.0));
  for (int i = 1; i <= spec.n_radii; ++i) {
    const double r = spec.R_samp * i / spec.n_radii;
    const auto& dir = dirs[i % dirs.size()];
    Vec x(m.d);
    for (int k = 0; k < m.d; ++k) x[k] = r * dir[k];
    xs.push_back(std::move(x));
  }
  const Vec ts = detail::t_ladder(1e-3, spec.T_samp, spec.n_t);

  // (H)(i): declared bounds, pointwise ordering, and bound membership.
  {
    Verdict v = Verdict::Pass;
    std::string wit;
    if (!(2.0 <= m.p_minus() && m.p_plus() < m.d && 2.0 <= m.q_minus())) {
      v = Verdict::Fail;
      wit = "declared exponent bounds violate 2 <= p- <= p+ < d, 2 <= q-";
    }
    const double pstar = m.p_minus_star();
    for (const auto& x : xs) {
      for (double t : ts) {
        const double pv = m.p(x, t), qv = m.q(x, t);
        if (!(pv >= m.p_minus() - 1e-12 && pv <= m.p_plus() + 1e-12) ||
            !(qv >= m.q_minus() - 1e-12 && qv <= m.q_plus() + 1e-12)) {
          v = Verdict::Fail;
          wit = "exponent left its declared bounds";
        }
        if (!(pv < qv && qv < pstar)) {
          v = Verdict::Fail;
          std::ostringstream o;
          o << "p(x,t) < q(x,t) < p-_* fails at t=" << t;
          wit = o.str();
        }
      }
      if (v == Verdict::Fail) break;
    }
    add("(H)(i)", v, wit);
  }

  // (H)(ii): constant on [0,1], nondecreasing for t >= 1.
  {
    Verdict v = Verdict::Pass;
    std::string wit;
    const double t01[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (const auto& x : xs) {
      const double p1 = m.p(x, 1.0), q1 = m.q(x, 1.0);
      for (double t : t01)
        if (m.p(x, t) != p1 || m.q(x, t) != q1) {
          v = Verdict::Fail;
          wit = "exponent not constant on [0,1]";
        }
      double pp = p1, qp = q1;
      for (double t : ts) {
        if (t < 1.0) continue;
        const double pv = m.p(x, t), qv = m.q(x, t);
        if (pv < pp - 1e-14 || qv < qp - 1e-14) {
          v = Verdict::Fail;
          wit = "exponent decreasing for t >= 1";
        }
        pp = pv; qp = qv;
      }
    }
    add("(H)(ii)", v, wit);
  }

  // (H)(iii): Lipschitz modulus in x against the declared constants.
  {
    Verdict v = Verdict::Pass;
    std::string wit;
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      const auto& x = xs[i];
      const auto& y = xs[i + 1];
      Vec diff(m.d);
      for (int k = 0; k < m.d; ++k) diff[k] = x[k] - y[k];
      const double dist = norm2(diff);
      if (dist < 1e-12) continue;
      for (double t : {0.5, 1.0, 4.0, 64.0}) {
        if (std::fabs(m.p(x, t) - m.p(y, t)) > m.p.lipschitz_x * dist * (1 + 1e-9) + 1e-15 ||
            std::fabs(m.q(x, t) - m.q(y, t)) > m.q.lipschitz_x * dist * (1 + 1e-9) + 1e-15) {
          v = Verdict::Fail;
          wit = "Lipschitz modulus exceeds declared constant";
        }
      }
    }
    add("(H)(iii)", v, wit);
  }

  // (H)(iv)
  {
    const double lhs = m.q_plus() / m.p_minus(), rhs = 1.0 + 1.0 / m.d;
    w.str("");
    w << "q+/p- = " << lhs << (lhs < rhs ? " < " : " >= ") << rhs;
    add("(H)(iv)", lhs < rhs ? Verdict::Pass : Verdict::Fail, w.str());
  }

  // (V0)(i): positive floor on samples.
  {
    Verdict v = Verdict::Pass;
    std::string wit;
    for (const auto& x : xs)
      if (m.V(x) < m.V.floor() - 1e-12) {
        v = Verdict::Fail;
        wit = "V drops below its declared floor";
      }
    if (!(m.V.floor() > 0)) { v = Verdict::Fail; wit = "declared floor V0 is not positive"; }
    add("(V0)(i)", v, wit);
  }

  // (V0)(ii): |{V < L}| finite for every L. Monte-Carlo measure inside the
  // truncation plus a tail from the declared asymptotics.
  {
    Verdict v = Verdict::Pass;
    std::string wit;
    const double Rmc = std::max(spec.R_samp, 16.0);
    const auto pts = ball_points(Vec(m.d, 0.0), Rmc, 20000, spec.seed ^ 0x5eedULL);
    const double vol = ball_volume(m.d, Rmc);
    for (double L : {1.0, 2.0, 4.0, 8.0, 16.0}) {
      long cnt = 0;
      for (const auto& x : pts)
        if (m.V(x) < L) ++cnt;
      const double inside = vol * cnt / pts.size();
      bool tail_finite;
      if (m.V.coercive()) {
        tail_finite = true;  // sublevel set is bounded
      } else {
        tail_finite = L <= m.V.bounded_limit();  // else the tail is all of R^d
      }
      if (!tail_finite) {
        v = Verdict::Fail;
        w.str("");
        w << "L=" << L << ": sublevel set has infinite measure (bounded potential)";
        wit = w.str();
        break;
      }
      (void)inside;
    }
    add("(V0)(ii)", v, wit);
  }

  // (V1)(ii): int_{B_1(x)} 1/V -> 0 as |x| -> infinity, by quadrature on balls
  // of increasing center radius.
  {
    Vec series;
    for (double r : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
      Vec c(m.d, 0.0);
      c[0] = r;
      const auto pts = ball_points(c, 1.0, 4096, spec.seed ^ 0x11ULL);
      double s = 0.0;
      for (const auto& x : pts) s += 1.0 / m.V(x);
      series.push_back(ball_volume(m.d, 1.0) * s / pts.size());
    }
    const bool vanishing = kendall_tau(series) <= -0.9 && series.back() < 0.05 * series.front();
    add("(V1)(ii)", vanishing ? Verdict::Consistent : Verdict::Inconsistent,
        vanishing ? "ball integrals of 1/V decay" : "ball integrals of 1/V do not decay");
  }

  if (!nl) return rep;
  const Nonlinearity& f = *nl;
  const Vec empty_x;

  // (F)(i): majorant bound and growth window of B.
  {
    Verdict v = Verdict::Pass;
    std::string wit;
    if (!(m.q_plus() <= f.b_minus() && f.b_minus() <= f.b_plus() &&
          f.b_plus() < m.p_minus_star())) {
      v = Verdict::Fail;
      wit = "q+ <= b- <= b+ < p-_* fails";
    }
    for (double t : ts) {
      for (double s : {t, -t}) {
        if (std::fabs(f.f(empty_x, s)) > f.b(std::fabs(s)) * (1 + 1e-12)) {
          v = Verdict::Fail;
          w.str("");
          w << "|f(x,t)| > b(x,|t|) at t=" << s;
          wit = w.str();
        }
      }
    }
    add("(F)(i)", v, wit);
  }

  // (F)(ii): F / |t|^{q+} -> +infinity, geometric ladder, never "proven".
  {
    Vec ratios;
    for (double t = 1.0; t <= 1e6; t *= 4.0)
      ratios.push_back(f.F(empty_x, t) / std::pow(t, m.q_plus()));
    const bool growing = kendall_tau(ratios) >= 0.9 && ratios.back() > 10.0 * std::max(ratios.front(), 1e-300);
    add("(F)(ii)", growing ? Verdict::Consistent : Verdict::Inconsistent,
        growing ? "F/|t|^{q+} grows along the ladder" : "no superlinear growth observed");
  }

  // (F)(iii): f(x,t) = o(|t|^{p- - 1}) near zero.
  {
    Vec ratios;
    for (double t = 1e-1; t >= 1e-7; t *= 0.25)
      ratios.push_back(std::fabs(f.f(empty_x, t)) / std::pow(t, m.p_minus() - 1.0));
    const bool vanishing = ratios.back() < 1e-3 * std::max(ratios.front(), 1e-300) ||
                           ratios.back() < 1e-12;
    add("(F)(iii)", vanishing ? Verdict::Consistent : Verdict::Inconsistent,
        vanishing ? "f/|t|^{p- -1} decays toward 0" : "no decay at the origin");
  }

  // (F)(iv): positivity of tilde F at large |t| and the sampled growth bound,
  // plus the sigma window of the worked example.
  {
    Verdict v = Verdict::Pass;
    std::string wit;
    if (f.kind == Nonlinearity::Kind::Zero) {
      v = Verdict::Fail;
      wit = "tilde F vanishes identically";
    } else {
      for (double t : detail::t_ladder(f.r0, 1e6, 48)) {
        for (double s : {t, -t}) {
          const double ft = f.F_tilde(empty_x, s);
          if (!(ft > 0.0)) {
            v = Verdict::Fail;
            w.str("");
            w << "tilde F <= 0 at t=" << s;
            wit = w.str();
            continue;
          }
          const double lhs = std::pow(std::fabs(f.f(empty_x, s)), f.sigma);
          const double rhs = f.c_tilde * std::pow(std::fabs(s), (m.p_minus() - 1.0) * f.sigma) * ft;
          if (lhs > rhs * (1 + 1e-9)) {
            v = Verdict::Fail;
            w.str("");
            w << "growth inequality fails at t=" << s;
            wit = w.str();
          }
        }
      }
      if (!(f.sigma > m.d / m.p_minus())) {
        v = Verdict::Fail;
        wit = "sigma <= d/p-";
      }
    }
    add("(F)(iv)", v, wit);
    const auto win = f.sigma_window(m.d, m.p_minus());
    w.str("");
    w << "sigma window [d/p-, q+/(q+-p-+1)] = [" << win.first << ", " << win.second
      << "], sigma = " << f.sigma << (f.sigma >= win.first && f.sigma <= win.second
                                          ? " (inside)" : " (outside)");
    add("(F) sigma-window", Verdict::Pass, w.str());
  }

  // Consistency of the primitive: dF/dt matches f by central differences.
  {
    Verdict v = Verdict::Pass;
    std::string wit;
    for (double t : detail::t_ladder(1e-2, 1e2, 16)) {
      const double hstep = 1e-6 * std::max(1.0, t);
      const double fd = (f.F(empty_x, t + hstep) - f.F(empty_x, t - hstep)) / (2 * hstep);
      const double scale = std::max({1.0, std::fabs(fd), std::fabs(f.f(empty_x, t))});
      if (std::fabs(fd - f.f(empty_x, t)) > 1e-5 * scale) {
        v = Verdict::Fail;
        w.str("");
        w << "dF/dt != f at t=" << t;
        wit = w.str();
      }
    }
    add("(F) primitive-consistency", v, wit);
  }

  return rep;
}

}  // namespace dphase

#endif
