#ifndef DPHASE_SOLVER_HPP
#define DPHASE_SOLVER_HPP

#include <cmath>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dphase/certificate.hpp"
#include "dphase/nfunction.hpp"

namespace dphase {

/// Uniform radial grid on [0, R_max] with exact dual-cell volume weights,
/// so the weight sum equals the ball measure to rounding at any N.
struct RadialGrid {
  int d = 3;
  double R_max = 4.0;
  int N = 256;           // nodes r_0 = 0 .. r_N = R_max
  double dr = 0.0;
  Vec r;                 // N+1 radii
  Vec w;                 // N+1 dual-cell volumes
  Vec coords;            // (N+1) x d node coordinates, nodes on the e1 axis

  static RadialGrid make(int d, double R_max, int N) {
    if (N < 8 || R_max <= 0 || d < 3) throw std::invalid_argument("RadialGrid: bad spec");
    RadialGrid g;
    g.d = d; g.R_max = R_max; g.N = N;
    g.dr = R_max / N;
    g.r.resize(N + 1);
    g.w.resize(N + 1);
    g.coords.assign(static_cast<std::size_t>(N + 1) * d, 0.0);
    for (int i = 0; i <= N; ++i) {
      g.r[i] = i * g.dr;
      const double lo = std::max(0.0, g.r[i] - 0.5 * g.dr);
      const double hi = std::min(R_max, g.r[i] + 0.5 * g.dr);
      g.w[i] = ball_volume(d, hi) - ball_volume(d, lo);
      g.coords[static_cast<std::size_t>(i) * d] = g.r[i];
    }
    return g;
  }

  std::span<const double> node(int i) const {
    return {coords.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)};
  }

  /// Field view of nodal values (for norms and modulars).
  SampledField field(const Vec& values, const Vec* grad_mag = nullptr) const {
    SampledField f;
    f.dim = d;
    f.coords = coords;
    f.weights = w;
    f.values = values;
    if (grad_mag) f.grad = *grad_mag;
    f.truncation_radius = R_max;
    return f;
  }
};

struct TraceRow {
  long iter = 0;
  double J = 0.0;
  double grad_norm = 0.0;
  double cerami = 0.0;   // (1 + ||u||_W) * grad_norm at the checkpoint
};

enum class SolveStatus { Converged, NotFound, MaxIterations, PathCollapse, SaddleDrift };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::NotFound: return "not-found";
    case SolveStatus::MaxIterations: return "max-iterations";
    case SolveStatus::PathCollapse: return "path-collapse";
    case SolveStatus::SaddleDrift: return "saddle-drift";
  }
  return "?";
}

struct SolverState {
  Vec u;
  double J = 0.0;
  Vec grad;
  double grad_norm = 0.0;
  double residual = 0.0;
  double tail_modular = 0.0;  // modular mass in the outermost 5% of shells
  std::vector<TraceRow> trace;
  SolveStatus status = SolveStatus::Converged;
  std::string message;
  long iterations = 0;
};

/// Discrete radial machinery for J_lambda = rho - lambda K.
class RadialFunctional {
 public:
  RadialFunctional(const NFunction& nf, const Nonlinearity& nl, double lambda,
                   const RadialGrid& grid)
      : nf_(&nf), nl_(&nl), lambda_(lambda), g_(&grid) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
    Vcache_.resize(grid.N + 1);
    for (int i = 0; i <= grid.N; ++i) Vcache_[i] = nf.model().V(grid.node(i));
  }

  const RadialGrid& grid() const { return *g_; }
  double lambda() const { return lambda_; }
  const NFunction& nfunction() const { return *nf_; }
  const Nonlinearity& nonlinearity() const { return *nl_; }

  /// Centered differences; u'(0) = 0 by radial symmetry, one-sided at R_max.
  /// The boundary value u(R_max) is identically zero in the stencils, so the
  /// functional never depends on the last component.
  void derivative(const Vec& u, Vec& du) const {
    const int N = g_->N;
    du.resize(N + 1);
    du[0] = 0.0;
    for (int i = 1; i < N - 1; ++i) du[i] = (u[i + 1] - u[i - 1]) / (2.0 * g_->dr);
    if (N >= 2) du[N - 1] = (0.0 - u[N - 2]) / (2.0 * g_->dr);
    du[N] = (0.0 - u[N - 1]) / g_->dr;
  }

  double energy(const Vec& u) const {
    const int N = g_->N;
    if (static_cast<int>(u.size()) != N + 1)
      throw std::invalid_argument("energy: state size does not match grid");
    for (double v : u)
      if (!std::isfinite(v)) throw std::invalid_argument("energy: non-finite state");
    Vec du;
    derivative(u, du);
    double J = 0.0;
    for (int i = 0; i <= N; ++i) {
      const double ui = (i == N) ? 0.0 : u[i];  // zero truncation boundary
      const auto x = g_->node(i);
      double term = nf_->H(x, std::fabs(du[i])) + Vcache_[i] * nf_->H(x, std::fabs(ui));
      if (lambda_ != 0.0) term -= lambda_ * nl_->F(x, ui);
      J += g_->w[i] * term;
    }
    return J;
  }

  /// Exact gradient of the discrete energy: flux differences of
  /// h(x,|u'|) sgn(u') plus V h(x,|u|) sgn(u) - lambda f(x,u), weighted.
  void gradient(const Vec& u, Vec& grad) const {
    const int N = g_->N;
    Vec du;
    derivative(u, du);
    grad.assign(N + 1, 0.0);
    for (int i = 0; i <= N; ++i) {
      const double ui = (i == N) ? 0.0 : u[i];
      const auto x = g_->node(i);
      double direct = Vcache_[i] * nf_->h(x, std::fabs(ui)) * sgn(ui);
      if (lambda_ != 0.0) direct -= lambda_ * nl_->f(x, ui);
      grad[i] += g_->w[i] * direct;
      const double flux = nf_->h(x, std::fabs(du[i])) * sgn(du[i]);
      if (i >= 1 && i < N) {
        const double c = g_->w[i] * flux / (2.0 * g_->dr);
        grad[i + 1] += c;
        grad[i - 1] -= c;
      } else if (i == N) {
        const double c = g_->w[i] * flux / g_->dr;
        grad[N] += c;
        grad[N - 1] -= c;
      }
    }
    grad[N] = 0.0;  // boundary row: u(R_max) = 0 is enforced, not solved for
  }

  double grad_norm(const Vec& grad) const {
    double s = 0.0;
    for (double v : grad) s += v * v;
    return std::sqrt(s);
  }

  double sobolev_norm(const Vec& u) const {
    Vec du;
    derivative(u, du);
    Vec absdu(du.size());
    for (std::size_t i = 0; i < du.size(); ++i) absdu[i] = std::fabs(du[i]);
    SampledField f = g_->field(u, &absdu);
    return weighted_sobolev_norm(*nf_, f);
  }

  /// Truncation diagnostic: modular mass carried by the outermost shells.
  double tail_modular(const Vec& u, double fraction = 0.05) const {
    const int N = g_->N;
    Vec du;
    derivative(u, du);
    double s = 0.0;
    const int start = std::max(1, static_cast<int>((1.0 - fraction) * N));
    for (int i = start; i <= N; ++i) {
      const double ui = (i == N) ? 0.0 : u[i];
      const auto x = g_->node(i);
      s += g_->w[i] * (nf_->H(x, std::fabs(du[i])) + Vcache_[i] * nf_->H(x, std::fabs(ui)));
    }
    return s;
  }

  /// <J'(u), v> in the discrete pairing.
  double pairing(const Vec& grad, const Vec& v) const {
    double s = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) s += grad[i] * v[i];
    return s;
  }

 private:
  const NFunction* nf_;
  const Nonlinearity* nl_;
  double lambda_;
  const RadialGrid* g_;
  Vec Vcache_;
};

/// Max over a fixed basis of 16 compactly supported radial test functions of
/// |<rho'(u), v> - lambda Int f(x,u) v| / (1 + ||v||_W).
inline double weak_residual(const RadialFunctional& fn, const Vec& u) {
  const RadialGrid& g = fn.grid();
  Vec grad;
  fn.gradient(u, grad);
  auto psi = [](double s) { return sqr(1.0 - s * s); };
  auto dpsi = [](double s) { return -4.0 * s * (1.0 - s * s); };
  double worst = 0.0;
  for (int j = 0; j < 16; ++j) {
    const double width = (j < 8) ? g.R_max / 10.0 : g.R_max / 4.0;
    const int slot = j % 8;
    const double c = width + (g.R_max - 2.0 * width) * (slot + 0.5) / 8.0;
    Vec v(g.N + 1, 0.0), dv(g.N + 1, 0.0);
    for (int i = 0; i <= g.N; ++i) {
      const double s = (g.r[i] - c) / width;
      if (std::fabs(s) < 1.0) {
        v[i] = psi(s);
        dv[i] = std::fabs(dpsi(s)) / width;
      }
    }
    SampledField vf = g.field(v, &dv);
    const double vnorm = weighted_sobolev_norm(fn.nfunction(), vf);
    worst = std::max(worst, std::fabs(fn.pairing(grad, v)) / (1.0 + vnorm));
  }
  return worst;
}

struct DescentOptions {
  double tol = 1e-7;        // stop at ||grad|| <= tol * (1 + |J|)
  long max_iter = 200000;
  int trace_every = 250;
};

namespace detail {

/// Dense LU solve with partial pivoting (the Hessian here is small and
/// banded; dense is simplest and fast enough).
inline bool lu_solve(std::vector<Vec>& A, Vec& b) {
  const int n = static_cast<int>(b.size());
  std::vector<int> piv(n);
  for (int i = 0; i < n; ++i) piv[i] = i;
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(A[i][k]) > std::fabs(A[p][k])) p = i;
    if (std::fabs(A[p][k]) < 1e-300) return false;
    std::swap(A[p], A[k]);
    std::swap(b[p], b[k]);
    for (int i = k + 1; i < n; ++i) {
      const double m = A[i][k] / A[k][k];
      if (m == 0.0) continue;
      A[i][k] = 0.0;
      for (int j = k + 1; j < n; ++j) A[i][j] -= m * A[k][j];
      b[i] -= m * b[k];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= A[i][j] * b[j];
    b[i] = s / A[i][i];
  }
  return true;
}

/// Damped Newton iteration on grad J = 0 with |grad| as merit; converges to
/// the critical point (minimum or saddle) whose basin contains the start.
/// The boundary node is excluded (u(R_max) = 0 is enforced, not solved for).
/// The Hessian couples only |i-j| <= 2, so five colored perturbations give
/// all columns from ten gradient calls.
inline bool newton_refine(const RadialFunctional& fn, Vec& u, double tol, int max_iter) {
  const int n = static_cast<int>(u.size()) - 1;  // free nodes
  Vec g, gp, gm, cand(u.size());
  for (int it = 0; it < max_iter; ++it) {
    fn.gradient(u, g);
    const double gn = fn.grad_norm(g);
    const double J = fn.energy(u);
    if (gn <= tol * (1.0 + std::fabs(J))) return true;
    std::vector<Vec> H(n, Vec(n, 0.0));
    const double eps = 1e-6 * (1.0 + norm2(u));
    Vec up(u.size()), dn(u.size());
    for (int color = 0; color < 5; ++color) {
      up = u;
      dn = u;
      for (int j = color; j < n; j += 5) {
        up[j] = u[j] + eps;
        dn[j] = u[j] - eps;
      }
      fn.gradient(up, gp);
      fn.gradient(dn, gm);
      for (int j = color; j < n; j += 5)
        for (int i = std::max(0, j - 2); i <= std::min(n - 1, j + 2); ++i)
          H[i][j] = (gp[i] - gm[i]) / (2.0 * eps);
    }
    Vec step(g.begin(), g.begin() + n);
    if (!lu_solve(H, step)) return false;
    double alpha = 1.0;
    bool ok = false;
    for (int bt = 0; bt < 50; ++bt) {
      cand = u;
      for (int i = 0; i < n; ++i) cand[i] = u[i] - alpha * step[i];
      Vec gc;
      fn.gradient(cand, gc);
      if (fn.grad_norm(gc) <= (1.0 - 0.25 * alpha) * gn) {
        ok = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!ok) return false;
    for (int i = 0; i < n; ++i) u[i] -= alpha * step[i];
  }
  return false;
}

}  // namespace detail

namespace detail {

/// Nonmonotone Armijo descent seeded with Barzilai-Borwein steps.
/// `checkpoint(iter, u, J, gnorm)` is called at trace points.
template <typename JFun, typename GFun, typename CheckFun>
SolveStatus bb_descent(Vec& u, double tol, long max_iter, int trace_every, long& iters,
                       const JFun& Jfun, const GFun& Gfun, const CheckFun& checkpoint) {
  Vec g, g_prev, u_prev, cand(u.size());
  double J = Jfun(u);
  Gfun(u, g);
  auto l2 = [](const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  double gn = l2(g);
  std::deque<double> recent{J};
  double step = 1.0 / std::max(1.0, gn);
  for (long it = 0; it < max_iter; ++it) {
    iters = it;
    if (trace_every > 0 && it % trace_every == 0) checkpoint(it, u, J, gn);
    if (gn <= tol * (1.0 + std::fabs(J))) {
      checkpoint(it, u, J, gn);
      return SolveStatus::Converged;
    }
    if (!u_prev.empty()) {
      double sty = 0.0, sts = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double si = u[i] - u_prev[i];
        const double yi = g[i] - g_prev[i];
        sty += si * yi;
        sts += si * si;
      }
      if (sty > 1e-300) step = std::min(1e8, std::max(1e-14, sts / sty));
    }
    const double Jref = *std::max_element(recent.begin(), recent.end());
    double alpha = step;
    double Jc = 0.0;
    bool ok = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < u.size(); ++i) cand[i] = u[i] - alpha * g[i];
      Jc = Jfun(cand);
      if (std::isfinite(Jc) && Jc <= Jref - 1e-4 * alpha * gn * gn) {
        ok = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!ok) return SolveStatus::MaxIterations;  // stalled line search
    u_prev = u;
    g_prev = g;
    u = cand;
    J = Jc;
    Gfun(u, g);
    gn = l2(g);
    recent.push_back(J);
    if (recent.size() > 10) recent.pop_front();
  }
  return SolveStatus::MaxIterations;
}

}  // namespace detail

/// Line search on t -> J(t * cone) for a negative-energy seed, then descent to
/// a critical point with J < 0.  Absence of a seed in the scanned t-range is a
/// reported outcome, not an error.
inline SolverState find_negative_solution(const NFunction& nf, const Nonlinearity& nl,
                                          double lambda, const RadialGrid& grid,
                                          double cone_eta, double cone_R,
                                          const DescentOptions& opt = {}) {
  if (!(lambda > 0)) throw std::invalid_argument("find_negative_solution: lambda must be > 0");
  RadialFunctional fn(nf, nl, lambda, grid);
  Vec cone(grid.N + 1, 0.0);
  for (int i = 0; i <= grid.N; ++i) cone[i] = tilde_u_value(grid.r[i], cone_eta, cone_R);
  cone[grid.N] = 0.0;

  SolverState st;
  const int n_scan = 180;
  Vec scanJ(n_scan + 1), scanT(n_scan + 1);
  for (int k = 0; k <= n_scan; ++k) {
    scanT[k] = 1e-3 * std::pow(1e6, static_cast<double>(k) / n_scan);
    Vec cand(cone.size());
    for (std::size_t i = 0; i < cone.size(); ++i) cand[i] = scanT[k] * cone[i];
    scanJ[k] = fn.energy(cand);
  }
  // Seed at the first interior local minimum with J < 0 (the well nearest the
  // origin); fall back to the scan minimum.
  double best_t = 0.0, best_J = 0.0;
  for (int k = 1; k < n_scan; ++k) {
    if (scanJ[k] < 0.0 && scanJ[k] <= scanJ[k - 1] && scanJ[k] <= scanJ[k + 1]) {
      best_t = scanT[k];
      best_J = scanJ[k];
      break;
    }
  }
  if (best_J >= 0.0) {
    for (int k = 0; k <= n_scan; ++k)
      if (scanJ[k] < best_J) {
        best_J = scanJ[k];
        best_t = scanT[k];
      }
  }
  if (best_J >= 0.0) {
    st.status = SolveStatus::NotFound;
    st.message = "no negative-energy seed for t in [1e-3, 1e3] along the cone ray";
    st.u.assign(grid.N + 1, 0.0);
    return st;
  }

  st.u.resize(cone.size());
  for (std::size_t i = 0; i < cone.size(); ++i) st.u[i] = best_t * cone[i];
  auto checkpoint = [&](long it, const Vec& u, double J, double gn) {
    st.trace.push_back({it, J, gn, (1.0 + fn.sobolev_norm(u)) * gn});
  };
  // Coarse descent into the well, then Newton to the stated tolerance.
  st.status = detail::bb_descent(
      st.u, std::max(opt.tol, 1e-4), opt.max_iter, opt.trace_every, st.iterations,
      [&](const Vec& v) { return fn.energy(v); },
      [&](const Vec& v, Vec& g) { fn.gradient(v, g); }, checkpoint);
  if (detail::newton_refine(fn, st.u, opt.tol, 60)) st.status = SolveStatus::Converged;
  st.J = fn.energy(st.u);
  fn.gradient(st.u, st.grad);
  st.grad_norm = fn.grad_norm(st.grad);
  st.residual = weak_residual(fn, st.u);
  st.tail_modular = fn.tail_modular(st.u);
  st.trace.push_back({st.iterations, st.J, st.grad_norm,
                      (1.0 + fn.sobolev_norm(st.u)) * st.grad_norm});
  if (st.status == SolveStatus::Converged &&
      !(st.grad_norm <= opt.tol * (1.0 + std::fabs(st.J))))
    st.status = SolveStatus::MaxIterations;
  st.message = "descent from t* = " + std::to_string(best_t);
  return st;
}

struct MountainPassOptions {
  int beads = 32;
  int max_sweeps = 800;
  int reparam_every = 10;
  double path_tol = 1e-10;
  double polish_tol = 1e-7;   // target ||grad|| <= polish_tol * (1 + |J|)
  long polish_max_iter = 50000;
};

/// Discrete mountain-pass search on the bead path from 0 to a negative-energy
/// state: descend the maximal-energy bead orthogonally to the path until the
/// path maximum stabilizes, then polish the saddle candidate by minimizing
/// Phi = 0.5 |grad J|^2 (its gradient is a Hessian-vector product evaluated
/// by central differences along the normalized gradient).
inline SolverState find_mountain_pass_solution(const NFunction& nf, const Nonlinearity& nl,
                                               double lambda, const RadialGrid& grid,
                                               const SolverState& low_state,
                                               const MountainPassOptions& opt = {}) {
  if (!(low_state.J < 0.0))
    throw std::invalid_argument("find_mountain_pass_solution: low state must have J < 0");
  RadialFunctional fn(nf, nl, lambda, grid);
  const int P = opt.beads;
  const int n = grid.N + 1;
  std::vector<Vec> z(P, Vec(n, 0.0));
  for (int k = 0; k < P; ++k)
    for (int i = 0; i < n; ++i) z[k][i] = low_state.u[i] * k / (P - 1);

  SolverState st;
  Vec Jb(P, 0.0);
  for (int k = 0; k < P; ++k) Jb[k] = fn.energy(z[k]);

  auto reparametrize = [&]() {
    Vec arc(P, 0.0);
    for (int k = 1; k < P; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += sqr(z[k][i] - z[k - 1][i]);
      arc[k] = arc[k - 1] + std::sqrt(s);
    }
    if (arc[P - 1] <= 0.0) return;
    std::vector<Vec> nz(P, Vec(n, 0.0));
    nz[0] = z[0];
    nz[P - 1] = z[P - 1];
    for (int k = 1; k < P - 1; ++k) {
      const double target = arc[P - 1] * k / (P - 1);
      int seg = 1;
      while (seg < P - 1 && arc[seg] < target) ++seg;
      const double t = (target - arc[seg - 1]) / std::max(1e-300, arc[seg] - arc[seg - 1]);
      for (int i = 0; i < n; ++i) nz[k][i] = (1 - t) * z[seg - 1][i] + t * z[seg][i];
    }
    z = std::move(nz);
    for (int k = 0; k < P; ++k) Jb[k] = fn.energy(z[k]);
  };

  double prev_max = 1e300;
  int stable = 0;
  int argmax = 1;
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    argmax = 1;
    for (int k = 1; k < P - 1; ++k)
      if (Jb[k] > Jb[argmax]) argmax = k;
    const double path_max = std::max({Jb[argmax], Jb[0], Jb[P - 1]});
    if (path_max < 0.0) {
      st.status = SolveStatus::PathCollapse;
      st.message = "path maximum fell below 0: geometry violated, lambda likely inadmissible";
      st.u = z[argmax];
      st.J = Jb[argmax];
      return st;
    }
    if (std::fabs(path_max - prev_max) <= opt.path_tol * (1.0 + std::fabs(path_max))) {
      if (++stable >= 25) break;
    } else {
      stable = 0;
    }
    prev_max = path_max;

    Vec tau(n, 0.0);
    double tn = 0.0;
    for (int i = 0; i < n; ++i) {
      tau[i] = z[argmax + 1][i] - z[argmax - 1][i];
      tn += tau[i] * tau[i];
    }
    tn = std::sqrt(tn);
    if (tn > 0)
      for (double& v : tau) v /= tn;
    Vec g;
    fn.gradient(z[argmax], g);
    double gt = 0.0;
    for (int i = 0; i < n; ++i) gt += g[i] * tau[i];
    Vec gperp(n);
    double gpn = 0.0;
    for (int i = 0; i < n; ++i) {
      gperp[i] = g[i] - gt * tau[i];
      gpn += gperp[i] * gperp[i];
    }
    gpn = std::sqrt(gpn);
    if (gpn > 1e-14) {
      double alpha = 1.0 / (1.0 + gpn);
      Vec cand(n);
      for (int bt = 0; bt < 40; ++bt) {
        for (int i = 0; i < n; ++i) cand[i] = z[argmax][i] - alpha * gperp[i];
        const double Jc = fn.energy(cand);
        if (std::isfinite(Jc) && Jc <= Jb[argmax] - 1e-4 * alpha * gpn * gpn) {
          z[argmax] = cand;
          Jb[argmax] = Jc;
          break;
        }
        alpha *= 0.5;
      }
    }
    if ((sweep + 1) % opt.reparam_every == 0) reparametrize();
    if (sweep % 20 == 0) {
      Vec gg;
      fn.gradient(z[argmax], gg);
      const double gnn = fn.grad_norm(gg);
      st.trace.push_back({sweep, Jb[argmax], gnn,
                          (1.0 + fn.sobolev_norm(z[argmax])) * gnn});
    }
  }

  // Polish: climb from a bead toward the saddle (ascend along the
  // lowest-curvature direction, descend orthogonally), attempting Newton on a
  // copy every few steps.  A Newton result is accepted only if it is a
  // positive-energy critical point away from the origin.
  auto accept = [&](const Vec& u) {
    Vec g;
    fn.gradient(u, g);
    const double gn = fn.grad_norm(g);
    const double J = fn.energy(u);
    double umax = 0.0;
    for (double v : u) umax = std::max(umax, std::fabs(v));
    return gn <= opt.polish_tol * (1.0 + std::fabs(J)) && J > 0.0 && umax > 1e-8;
  };

  auto climb_newton = [&](Vec u, Vec v) -> std::pair<bool, Vec> {
    double vn0 = norm2(v);
    if (vn0 > 0)
      for (double& x : v) x /= vn0;
    else
      v.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));
    Vec g, gp, gm, Hv(n), cand(n);
    for (long it = 0; it < 1200; ++it) {
      if (it % 25 == 0) {
        Vec trial = u;
        if (detail::newton_refine(fn, trial, opt.polish_tol, 60) && accept(trial))
          return {true, trial};
      }
      fn.gradient(u, g);
      const double gn = fn.grad_norm(g);
      if (gn < 1e-300) break;
      const double eps = 1e-6 * (1.0 + norm2(u));
      for (int k = 0; k < 4; ++k) {  // Rayleigh refinement of v
        Vec up(u), dn(u);
        for (int i = 0; i < n; ++i) {
          up[i] += eps * v[i];
          dn[i] -= eps * v[i];
        }
        fn.gradient(up, gp);
        fn.gradient(dn, gm);
        double lam = 0.0, hnorm = 0.0;
        for (int i = 0; i < n; ++i) {
          Hv[i] = (gp[i] - gm[i]) / (2.0 * eps);
          lam += v[i] * Hv[i];
          hnorm += Hv[i] * Hv[i];
        }
        hnorm = std::sqrt(hnorm);
        if (hnorm < 1e-300) break;
        double vn = 0.0;
        const double step = 0.5 / (hnorm + 1.0);
        for (int i = 0; i < n; ++i) {
          v[i] -= step * (Hv[i] - lam * v[i]);
          vn += v[i] * v[i];
        }
        vn = std::sqrt(vn);
        for (int i = 0; i < n; ++i) v[i] /= vn;
      }
      double gv = 0.0;
      for (int i = 0; i < n; ++i) gv += g[i] * v[i];
      Vec F(n);
      double Fn = 0.0;
      for (int i = 0; i < n; ++i) {
        F[i] = -g[i] + 2.0 * gv * v[i];
        Fn += F[i] * F[i];
      }
      Fn = std::sqrt(Fn);
      if (Fn < 1e-300) break;
      double alpha = std::min(0.1 * (1.0 + norm2(u)) / Fn, 1.0);
      bool moved = false;
      for (int bt = 0; bt < 20; ++bt) {
        cand = u;
        for (int i = 0; i < n; ++i) cand[i] += alpha * F[i];
        Vec gc;
        fn.gradient(cand, gc);
        if (fn.grad_norm(gc) <= gn * 1.3) {
          u = cand;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) break;
    }
    if (detail::newton_refine(fn, u, opt.polish_tol, 80) && accept(u)) return {true, u};
    return {false, u};
  };

  bool found = false;
  for (int off : {0, -1, 1, -2, 2}) {
    const int k = argmax + off;
    if (k < 1 || k > P - 2) continue;
    Vec tang(n);
    for (int i = 0; i < n; ++i) tang[i] = z[k + 1][i] - z[k - 1][i];
    auto [ok, u] = climb_newton(z[k], tang);
    st.u = u;
    if (ok) {
      found = true;
      break;
    }
  }

  st.J = fn.energy(st.u);
  fn.gradient(st.u, st.grad);
  st.grad_norm = fn.grad_norm(st.grad);
  st.residual = weak_residual(fn, st.u);
  st.tail_modular = fn.tail_modular(st.u);
  st.iterations = found ? 1 : 0;
  st.trace.push_back({opt.max_sweeps, st.J, st.grad_norm,
                      (1.0 + fn.sobolev_norm(st.u)) * st.grad_norm});
  if (!found && st.J <= 0.0) {
    st.status = SolveStatus::SaddleDrift;
    st.message = "polish drifted off the positive-energy level";
    return st;
  }
  st.status = found ? SolveStatus::Converged : SolveStatus::MaxIterations;
  if (found) st.message = "saddle candidate accepted";
  return st;
}

}  // namespace dphase

#endif
