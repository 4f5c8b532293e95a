#ifndef DPHASE_CERTIFICATE_HPP
#define DPHASE_CERTIFICATE_HPP

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dphase/embedding.hpp"
#include "dphase/nfunction.hpp"

namespace dphase {

/// Explicit constants of the two-solution theorem for a (model, nonlinearity,
/// ball, eta, r, gamma) configuration, plus the admissibility flags.
struct Certificate {
  // Inputs echoed back.
  Vec x0;
  double R = 1.0, eta = 1.0, r = 1.0;
  double gamma = 1.0;
  std::string gamma_provenance = "user-supplied";  // or "estimated-lower-bound"

  // Computed constants.
  double omega_R = 0.0;
  double V_inf = 0.0;
  double delta = 0.0;
  double gamma_bar = 0.0;   // max{gamma^{b+}, gamma^{b-}}
  double alpha_r = 0.0;
  double beta_eta = 0.0;
  double F_half_ball = 0.0; // int_{B(x0,R/2)} F(x,eta) dx

  bool cond_318 = false;  // max{eta^{p-}, eta^{q+}} < delta * r
  bool cond_H1 = false;   // F(x,t) >= 0 on [0,eta]
  bool cond_H2 = false;   // alpha(r) < beta(eta)

  // Interval [1/beta, 1/alpha]; present iff cond_H2 and alpha > 0.
  std::optional<std::pair<double, double>> Lambda;

  /// All theorem hypotheses hold.
  bool admissible() const { return cond_318 && cond_H1 && cond_H2 && Lambda.has_value(); }
};

namespace detail {

/// sup of V over B(x0,R): quasi-random sampling refined by coordinate descent
/// from the best candidates (V is continuous, the ball is compact).
inline double sup_V_on_ball(const DoublePhaseModel& m, std::span<const double> x0, double R,
                            std::uint64_t seed) {
  auto pts = ball_points(x0, R, 10000, seed);
  std::vector<std::pair<double, Vec>> best;
  for (auto& x : pts) {
    const double v = m.V(x);
    best.push_back({v, std::move(x)});
  }
  std::partial_sort(best.begin(), best.begin() + 10, best.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });
  double vmax = best.front().first;
  for (int c = 0; c < 10; ++c) {
    Vec x = best[c].second;
    double step = 0.25 * R;
    double fx = best[c].first;
    while (step > 1e-10 * R) {
      bool improved = false;
      for (int k = 0; k < m.d; ++k) {
        for (double sgn_ : {1.0, -1.0}) {
          Vec y = x;
          y[k] += sgn_ * step;
          double rr = 0.0;
          for (int j = 0; j < m.d; ++j) rr += sqr(y[j] - x0[j]);
          if (rr > R * R) continue;  // stay inside the ball
          const double fy = m.V(y);
          if (fy > fx) {
            fx = fy;
            x = y;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    vmax = std::max(vmax, fx);
  }
  return vmax;
}

/// int_{B(x0, rad)} F(x, eta) dx by radial-shell quadrature with direction
/// averaging.
inline double integral_F_ball(const Nonlinearity& nl, std::span<const double> x0, int d,
                              double rad, double eta, std::uint64_t seed) {
  const int shells = 512, dirs = 16;
  const auto ds = unit_directions(d, dirs, seed);
  const double dr = rad / shells;
  double total = 0.0;
  Vec x(d);
  for (int i = 0; i < shells; ++i) {
    const double r_mid = (i + 0.5) * dr;
    const double shell = ball_volume(d, (i + 1) * dr) - ball_volume(d, i * dr);
    double avg = 0.0;
    for (int j = 0; j < dirs; ++j) {
      for (int k = 0; k < d; ++k) x[k] = x0[k] + r_mid * ds[j][k];
      avg += nl.F(x, eta);
    }
    total += shell * avg / dirs;
  }
  return total;
}

}  // namespace detail

/// The literal constants of the existence theorem:
///   delta    = p- min{R^{p-}, R^{q+}} /
///              ( max{1, ||mu||_inf} omega_R ( V_inf min{R^{p-}, R^{q+}}
///                + 2^{q+ + 1 - d} (2^d - 1) ) )
///   alpha(r) = gamma_bar max{ (q+ r)^{b+/p-}, (q+ r)^{b-/q+} } / r
///   beta(eta)= delta int_{B(x0,R/2)} F(x,eta) / max{eta^{p-}, eta^{q+}}.
inline Certificate compute_certificate(const DoublePhaseModel& m, const Nonlinearity& nl,
                                       std::span<const double> x0, double R, double eta,
                                       double r, double gamma,
                                       const std::string& gamma_provenance = "user-supplied",
                                       std::uint64_t seed = 424242,
                                       double V_inf_hint = -1.0) {
  if (!(R > 0 && eta > 0 && r > 0 && gamma > 0))
    throw std::invalid_argument("compute_certificate: R, eta, r, gamma must be positive");
  if (static_cast<int>(x0.size()) != m.d)
    throw std::invalid_argument("compute_certificate: x0 dimension mismatch");
  if (!(m.p_plus() < m.q_minus()))
    throw std::invalid_argument(
        "compute_certificate: diagnostic-mode model (p < q not strict); "
        "certificates are not issued");

  Certificate c;
  c.x0.assign(x0.begin(), x0.end());
  c.R = R; c.eta = eta; c.r = r; c.gamma = gamma;
  c.gamma_provenance = gamma_provenance;

  const double pm = m.p_minus(), qp = m.q_plus();
  c.omega_R = ball_volume(m.d, R);
  c.V_inf = V_inf_hint > 0 ? V_inf_hint : detail::sup_V_on_ball(m, x0, R, seed);

  const double minR = std::min(std::pow(R, pm), std::pow(R, qp));
  c.delta = pm * minR /
            (std::max(1.0, m.mu_sup) * c.omega_R *
             (c.V_inf * minR + std::pow(2.0, qp + 1.0 - m.d) * (std::pow(2.0, m.d) - 1.0)));

  c.gamma_bar = std::max(std::pow(gamma, nl.b_plus()), std::pow(gamma, nl.b_minus()));
  c.alpha_r = c.gamma_bar *
              std::max(std::pow(qp * r, nl.b_plus() / pm), std::pow(qp * r, nl.b_minus() / qp)) /
              r;

  c.F_half_ball = detail::integral_F_ball(nl, x0, m.d, 0.5 * R, eta, seed ^ 0xF00dULL);
  const double max_eta = std::max(std::pow(eta, pm), std::pow(eta, qp));
  c.beta_eta = c.delta * c.F_half_ball / max_eta;

  c.cond_318 = max_eta < c.delta * r;

  c.cond_H1 = true;
  {
    const auto dirs = unit_directions(m.d, 8, seed ^ 0x41ULL);
    Vec x(m.d);
    for (int i = 0; i < 256 && c.cond_H1; ++i) {
      const double t = eta * (i + 1) / 256.0;
      for (int j = 0; j < 8 && c.cond_H1; ++j) {
        const double rad = R * (j + 1) / 8.0;
        for (int k = 0; k < m.d; ++k) x[k] = x0[k] + rad * dirs[j][k];
        if (nl.F(x, t) < -1e-12) c.cond_H1 = false;
      }
    }
  }

  c.cond_H2 = c.alpha_r < c.beta_eta;
  if (c.cond_H2 && c.alpha_r > 0.0)
    c.Lambda = std::make_pair(1.0 / c.beta_eta, 1.0 / c.alpha_r);
  return c;
}

struct FeasibilityResult {
  bool feasible = false;
  Certificate best;        // best certificate, or the least-violated point
  double min_violation = 0.0;  // alpha - beta at the least-violated admissible point
  int evaluated = 0;
  std::string note;
};

/// Logarithmic grid search over (eta, r) maximizing beta - alpha subject to
/// (318) and (H1). Reports the least-violated point when infeasible.  Cells
/// parallelize over rows with a deterministic reduction order.
inline FeasibilityResult feasibility_search(const DoublePhaseModel& m, const Nonlinearity& nl,
                                            std::span<const double> x0, double R, double gamma,
                                            double eta_lo, double eta_hi, double r_lo,
                                            double r_hi, int n_eta = 64, int n_r = 64,
                                            std::uint64_t seed = 424242, int threads = 1) {
  if (!(eta_lo > 0 && eta_hi > eta_lo && r_lo > 0 && r_hi > r_lo))
    throw std::invalid_argument("feasibility_search: bad search box");
  FeasibilityResult out;
  const double V_inf = detail::sup_V_on_ball(m, x0, R, seed);

  struct Cell {
    double eta = 0, r = 0, gap = -1e300;
    bool admissible = false;
  };
  std::vector<Cell> cells(static_cast<std::size_t>(n_eta) * n_r);
  auto run_rows = [&](int row_begin, int row_end) {
    for (int i = row_begin; i < row_end; ++i) {
      const double eta =
          eta_lo * std::pow(eta_hi / eta_lo, static_cast<double>(i) / (n_eta - 1));
      for (int j = 0; j < n_r; ++j) {
        const double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(j) / (n_r - 1));
        const Certificate c =
            compute_certificate(m, nl, x0, R, eta, r, gamma, "user-supplied", seed, V_inf);
        Cell& cell = cells[static_cast<std::size_t>(i) * n_r + j];
        cell.eta = eta;
        cell.r = r;
        cell.gap = c.beta_eta - c.alpha_r;
        cell.admissible = c.cond_318 && c.cond_H1;
      }
    }
  };
  if (threads <= 1) {
    run_rows(0, n_eta);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n_eta + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int lo = t * chunk, hi = std::min(n_eta, lo + chunk);
      if (lo < hi) pool.emplace_back(run_rows, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  out.evaluated = n_eta * n_r;
  const Cell* best = nullptr;
  for (const auto& cell : cells) {
    if (!cell.admissible) continue;
    if (!best || cell.gap > best->gap) best = &cell;
  }
  if (!best) {
    out.feasible = false;
    out.note = "no grid point satisfies (318) and (H1)";
    return out;
  }
  out.best =
      compute_certificate(m, nl, x0, R, best->eta, best->r, gamma, "user-supplied", seed, V_inf);
  out.feasible = best->gap > 0.0;
  out.min_violation = out.feasible ? 0.0 : -best->gap;
  if (!out.feasible) out.note = "condition (H2) fails everywhere on the grid";
  return out;
}

/// Max of ||u||_{L^B} / ||u||_{W^{1,H}_V} over a family: a LOWER bound on the
/// embedding constant gamma_B, so certificates built from it are candidates,
/// not guarantees.
inline double gamma_lower_bound(const NFunction& nf, const Nonlinearity& nl,
                                const TestFamily& family, int count = 20) {
  if (count < 1) throw std::invalid_argument("gamma_lower_bound: empty family");
  double best = 0.0;
  for (int n = 1; n <= count; ++n) {
    const SampledField u = family.generate(n);
    if (u.max_abs_value() == 0.0) continue;
    const double denom = weighted_sobolev_norm(nf, u);
    if (denom == 0.0) continue;
    auto rho = [&](double lam) {
      double s = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = std::fabs(u.values[i]) / lam;
        if (a > 0.0) s += u.weights[i] * nl.B(a);
      }
      return s;
    };
    double lo = u.max_abs_value() / 10.0, hi = u.max_abs_value() * 10.0;
    int guard = 0;
    while (rho(lo) < 1.0 && guard < 200) { hi = lo; lo *= 0.5; ++guard; }
    while (rho(hi) > 1.0 && guard < 200) { lo = hi; hi *= 2.0; ++guard; }
    if (guard >= 200) continue;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (rho(mid) > 1.0) lo = mid; else hi = mid;
      if (hi - lo <= 1e-10 * hi) break;
    }
    best = std::max(best, 0.5 * (lo + hi) / denom);
  }
  return best;
}

/// The cone profile of the existence proof: eta on B(x0,R/2), the linear ramp
/// (2 eta / R)(R - |x - x0|) on the annulus, zero outside; |grad| = 2 eta / R
/// on the annulus.
inline double tilde_u_value(double dist, double eta, double R) {
  if (dist >= R) return 0.0;
  if (dist <= 0.5 * R) return eta;
  return 2.0 * eta / R * (R - dist);
}

inline double tilde_u_grad(double dist, double eta, double R) {
  return (dist > 0.5 * R && dist < R) ? 2.0 * eta / R : 0.0;
}

inline SampledField tilde_u_profile(int d, double eta, double R, std::span<const double> x0,
                                    int shells = 256, int dirs = 16, std::uint64_t seed = 5) {
  if (!(eta > 0 && R > 0)) throw std::invalid_argument("tilde_u_profile: eta, R must be positive");
  return radial_field(d, x0, R, shells, dirs,
                      [&](double r) { return tilde_u_value(r, eta, R); },
                      [&](double r) { return tilde_u_grad(r, eta, R); }, seed);
}

}  // namespace dphase

#endif
