#ifndef DPHASE_EMBEDDING_HPP
#define DPHASE_EMBEDDING_HPP

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dphase/nfunction.hpp"
#include "dphase/sobolev.hpp"

namespace dphase {

// ---------------------------------------------------------------------------
// Parametric families carrying sequence-based probes. Each member brings its
// own grid covering its own support, so translated members keep identical
// relative node layouts (translation invariance is then exact to quadrature).
//
// Members are built from a base profile w (tent or smooth bump) as
//     u_n(x) = n^{-amplitude_exp} * w(x / n^{scale_exp} - shift_n),
// which covers translating (shift), spreading (scale_exp > 0) and
// concentrating (scale_exp < 0) regimes.
// ---------------------------------------------------------------------------

struct TestFamily {
  enum class Kind { TranslatingBump, SpreadingBump, RadialBump, Tent, GaussianLike };

  Kind kind = Kind::RadialBump;
  int d = 3;
  double amplitude_exp = 0.0;  // member n scales by n^{-amplitude_exp}
  double scale_exp = 0.0;      // support dilates by n^{scale_exp}
  double spacing = 1.0 / 8.0;  // box-grid spacing at unit scale
  int radial_shells = 128;
  int radial_dirs = 16;
  std::uint64_t seed = 99;

  static double tent(double r) { return std::max(0.0, 1.0 - r); }
  static double tent_slope(double r) { return r < 1.0 ? 1.0 : 0.0; }
  static double smooth(double r) {  // C^1 bump with unit support
    if (r >= 1.0) return 0.0;
    return sqr(1.0 - r * r);
  }
  static double smooth_slope(double r) {
    if (r >= 1.0) return 0.0;
    return 4.0 * r * (1.0 - r * r);
  }
  static double gauss(double r) { return r >= 4.0 ? 0.0 : std::exp(-r * r); }
  static double gauss_slope(double r) { return r >= 4.0 ? 0.0 : 2.0 * r * std::exp(-r * r); }

  SampledField generate(int n) const {
    if (n < 1) throw std::invalid_argument("family index must be >= 1");
    const double amp = std::pow(n, -amplitude_exp);
    const double scl = std::pow(n, scale_exp);
    double support = 1.0;
    std::function<double(double)> prof = tent, slope = tent_slope;
    switch (kind) {
      case Kind::Tent:
      case Kind::TranslatingBump:
      case Kind::SpreadingBump:
        prof = tent; slope = tent_slope; support = 1.0; break;
      case Kind::RadialBump:
        prof = smooth; slope = smooth_slope; support = 1.0; break;
      case Kind::GaussianLike:
        prof = gauss; slope = gauss_slope; support = 4.0; break;
    }

    if (kind == Kind::TranslatingBump) {
      Vec center(d, 0.0);
      center[0] = static_cast<double>(n);
      Vec half(d, support);
      auto u = [&](std::span<const double> x) {
        double r2 = 0.0;
        for (int k = 0; k < d; ++k) r2 += sqr(x[k] - center[k]);
        return prof(std::sqrt(r2));
      };
      auto gm = [&](std::span<const double> x) {
        double r2 = 0.0;
        for (int k = 0; k < d; ++k) r2 += sqr(x[k] - center[k]);
        return slope(std::sqrt(r2));
      };
      return box_field(center, half, spacing, u, gm);
    }

    // Dilating and radial kinds live on shell grids whose resolution scales
    // with the support, so fixed-radius ball probes stay resolved.
    const double width = (kind == Kind::Tent) ? 1.0 + 0.25 * n : scl;
    const double R = support * width;
    auto u = [&](double r) { return amp * prof(r / width); };
    auto gm = [&](double r) { return amp / width * slope(r / width); };
    Vec x0(d, 0.0);
    SampledField f = radial_field(d, x0, R, radial_shells, radial_dirs, u, gm, seed + n);
    f.radial_nonincreasing = true;  // tent, smooth and gaussian profiles all are
    return f;
  }
};

/// ||u||_{W^{1,H}_V} = ||grad u||_{L^H} + ||u||_{L^H_V}.
inline double weighted_sobolev_norm(const NFunction& nf, const SampledField& u) {
  if (!u.has_gradient())
    throw std::invalid_argument("weighted_sobolev_norm: field carries no gradient values");
  const SampledField gf = u.gradient_field();
  return nf.luxemburg(gf, false) + nf.luxemburg(u, true);
}

/// Luxemburg norm of the joint modular rho(u) = rho_H(grad u) + rho_{H_V}(u);
/// equivalent to the sum norm, and the one the exact norm-modular sandwich
/// holds for.
inline double joint_sobolev_norm(const NFunction& nf, const SampledField& u) {
  if (!u.has_gradient())
    throw std::invalid_argument("joint_sobolev_norm: field carries no gradient values");
  const SampledField gf = u.gradient_field();
  const double umax = std::max(u.max_abs_value(), gf.max_abs_value());
  if (umax == 0.0) return 0.0;
  auto rho = [&](double lam) {
    return nf.modular_scaled(gf, lam, false) + nf.modular_scaled(u, lam, true);
  };
  double lo = umax / 10.0, hi = umax * 10.0;
  int guard = 0;
  while (rho(lo) < 1.0 && guard < 200) { hi = lo; lo *= 0.5; ++guard; }
  while (rho(hi) > 1.0 && guard < 200) { lo = hi; hi *= 2.0; ++guard; }
  if (guard >= 200) throw std::runtime_error("joint_sobolev_norm: bracketing failed");
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (rho(mid) > 1.0) lo = mid; else hi = mid;
    if (hi - lo <= 1e-9 * hi) break;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Embedding ratio scans.
// ---------------------------------------------------------------------------

struct NormTarget {
  enum class Kind { H, Hstar, Companion, Lebesgue };
  Kind kind = Kind::H;
  double lebesgue_r = 2.0;
  const SobolevConjugate* sob = nullptr;
  const CompanionFunction* comp = nullptr;
};

inline double target_norm(const NFunction& nf, const NormTarget& tgt, const SampledField& u) {
  switch (tgt.kind) {
    case NormTarget::Kind::H:
      return nf.luxemburg(u, false);
    case NormTarget::Kind::Lebesgue: {
      double s = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i)
        s += u.weights[i] * std::pow(std::fabs(u.values[i]), tgt.lebesgue_r);
      return std::pow(s, 1.0 / tgt.lebesgue_r);
    }
    case NormTarget::Kind::Hstar:
    case NormTarget::Kind::Companion: {
      const double umax = u.max_abs_value();
      if (umax == 0.0) return 0.0;
      auto phi = [&](std::span<const double> x, double t) {
        return tgt.kind == NormTarget::Kind::Hstar ? tgt.sob->Hstar(x, t)
                                                   : tgt.comp->eval(x, t);
      };
      auto rho = [&](double lam) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
          const double a = std::fabs(u.values[i]) / lam;
          if (a > 0.0) s += u.weights[i] * phi(u.node(i), a);
        }
        return s;
      };
      double lo = umax / 10.0, hi = umax * 10.0;
      int guard = 0;
      while (rho(lo) < 1.0 && guard < 200) { hi = lo; lo *= 0.5; ++guard; }
      while (rho(hi) > 1.0 && guard < 200) { lo = hi; hi *= 2.0; ++guard; }
      if (guard >= 200) throw std::runtime_error("target_norm: bracketing failed");
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (rho(mid) > 1.0) lo = mid; else hi = mid;
        if (hi - lo <= 1e-8 * hi) break;
      }
      return 0.5 * (lo + hi);
    }
  }
  return 0.0;
}

struct ScanResult {
  double max_ratio = 0.0;
  int argmax = 0;
  Vec ratios;           // per member; 0 marks a skipped degenerate member
  int skipped = 0;
};

/// Max of ||u||_target / ||u||_{W^{1,H}_V} over the family.
inline ScanResult embedding_ratio_scan(const NFunction& nf, const NormTarget& tgt,
                                       const TestFamily& family, int count) {
  if (count < 1) throw std::invalid_argument("embedding_ratio_scan: count must be >= 1");
  ScanResult res;
  for (int n = 1; n <= count; ++n) {
    const SampledField u = family.generate(n);
    const double denom = u.max_abs_value() == 0.0 ? 0.0 : weighted_sobolev_norm(nf, u);
    if (denom == 0.0) {
      ++res.skipped;
      res.ratios.push_back(0.0);
      continue;
    }
    const double ratio = target_norm(nf, tgt, u) / denom;
    res.ratios.push_back(ratio);
    if (ratio > res.max_ratio) {
      res.max_ratio = ratio;
      res.argmax = n;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Lions-type vanishing probe.
// ---------------------------------------------------------------------------

struct LionsReport {
  std::string verdict;  // lions-consistent | non-vanishing | lions-inconsistent
  Vec s_series;         // sup_y int_{B_r(y)} H(x, u_n)
  Vec v_series;         // ||u_n||_{L^comp}
  Vec norm_series;      // ||u_n||_{W_V}
  bool weak_null_emulated = false;
};

namespace detail {

/// sup over a cubic y-lattice (spacing r/2) of int_{B_r(y)} H(x,u) dx.
/// The lattice is restricted to the support box inflated by r; outside it the
/// integral vanishes identically, so the restriction is exact.  For radially
/// nonincreasing profiles the sup is attained at the centered ball.
inline double lions_sup(const NFunction& nf, const SampledField& u, double r) {
  const int d = u.dim;
  if (u.radial_nonincreasing) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double a = std::fabs(u.values[i]);
      if (a == 0.0) continue;
      const auto x = u.node(i);
      double dist2 = 0.0;
      for (int k = 0; k < d; ++k) dist2 += sqr(x[k]);
      if (dist2 < r * r) s += u.weights[i] * nf.H(x, a);
    }
    return s;
  }
  Vec lo(d, 1e300), hi(d, -1e300);
  bool any = false;
  Vec hnode(u.size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = std::fabs(u.values[i]);
    if (a == 0.0) continue;
    any = true;
    hnode[i] = nf.H(u.node(i), a);
    for (int k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], u.coords[i * d + k]);
      hi[k] = std::max(hi[k], u.coords[i * d + k]);
    }
  }
  if (!any) return 0.0;
  const double step = 0.5 * r;
  std::vector<int> counts(d);
  for (int k = 0; k < d; ++k) {
    lo[k] -= r;
    hi[k] += r;
    counts[k] = std::max(1, static_cast<int>(std::ceil((hi[k] - lo[k]) / step)) + 1);
  }
  // Bucket nodes by cell of size r for near-neighbour lookups.
  std::map<std::vector<long>, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (hnode[i] == 0.0) continue;
    std::vector<long> cell(d);
    for (int k = 0; k < d; ++k)
      cell[k] = static_cast<long>(std::floor(u.coords[i * d + k] / r));
    buckets[cell].push_back(i);
  }
  double best = 0.0;
  std::vector<int> idx(d, 0);
  Vec y(d);
  while (true) {
    for (int k = 0; k < d; ++k) y[k] = lo[k] + idx[k] * step;
    double s = 0.0;
    std::vector<long> base(d);
    for (int k = 0; k < d; ++k) base[k] = static_cast<long>(std::floor(y[k] / r));
    std::vector<long> cell(d);
    std::function<void(int)> visit = [&](int k) {
      if (k == d) {
        auto it = buckets.find(cell);
        if (it == buckets.end()) return;
        for (std::size_t i : it->second) {
          double dist2 = 0.0;
          for (int kk = 0; kk < d; ++kk) dist2 += sqr(u.coords[i * d + kk] - y[kk]);
          if (dist2 < r * r) s += u.weights[i] * hnode[i];
        }
        return;
      }
      for (long off = -1; off <= 1; ++off) {
        cell[k] = base[k] + off;
        visit(k + 1);
      }
    };
    visit(0);
    best = std::max(best, s);
    int k = 0;
    while (k < d && ++idx[k] == counts[k]) idx[k++] = 0;
    if (k == d) break;
  }
  return best;
}

}  // namespace detail

/// Probe of the Lions-type lemma: the verdict is "lions-consistent" when the
/// vanishing of the ball sup forces the companion norm to vanish along the
/// sampled sequence (Kendall-tau trend over the tail), "non-vanishing" when
/// the sup stays put.
inline LionsReport lions_vanishing_probe(const NFunction& nf, const TestFamily& family,
                                         const CompanionFunction& comp, double r,
                                         int count = 16) {
  LionsReport rep;
  std::vector<SampledField> members;
  members.reserve(count);
  for (int n = 1; n <= count; ++n) members.push_back(family.generate(n));

  // Boundedness in W^{1,H} (the unweighted space of the lemma), checked at
  // the sampled scale.
  for (const auto& u : members)
    rep.norm_series.push_back(nf.luxemburg(u.gradient_field(), false) +
                              nf.luxemburg(u, false));
  double nmin = 1e300, nmax = 0.0;
  for (double v : rep.norm_series) {
    nmin = std::min(nmin, v);
    nmax = std::max(nmax, v);
  }
  if (!(nmax > 0.0) || nmax / std::max(nmin, 1e-300) > 100.0)
    throw std::invalid_argument("lions_vanishing_probe: family is not norm-bounded at scale");

  // Weak-nullity emulation: pairings with five fixed compactly supported
  // bumps near the origin must decay along the family.
  {
    const int d = family.d;
    std::vector<Vec> centers;
    for (int j = 0; j < 5; ++j) {
      Vec c(d, 0.0);
      c[0] = -1.0 + 0.5 * j;
      centers.push_back(c);
    }
    Vec worst;
    for (const auto& u : members) {
      double mx = 0.0;
      for (const auto& c : centers) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
          double r2 = 0.0;
          for (int k = 0; k < d; ++k) r2 += sqr(u.coords[i * d + k] - c[k]);
          if (r2 < 1.0) s += u.weights[i] * u.values[i] * sqr(1.0 - r2);
        }
        mx = std::max(mx, std::fabs(s));
      }
      worst.push_back(mx);
    }
    rep.weak_null_emulated =
        worst.back() <= 0.1 * std::max(worst.front(), 1e-300) || worst.back() < 1e-12;
  }

  for (const auto& u : members) {
    rep.s_series.push_back(detail::lions_sup(nf, u, r));
    NormTarget tgt;
    tgt.kind = NormTarget::Kind::Companion;
    tgt.comp = &comp;
    rep.v_series.push_back(target_norm(nf, tgt, u));
  }

  const int tail = std::min<int>(8, rep.s_series.size());
  std::span<const double> s_tail(rep.s_series.data() + rep.s_series.size() - tail, tail);
  std::span<const double> v_tail(rep.v_series.data() + rep.v_series.size() - tail, tail);

  double smin = 1e300, smax = 0.0;
  for (double s : rep.s_series) { smin = std::min(smin, s); smax = std::max(smax, s); }
  const bool s_constant = (smax - smin) <= 1e-9 * std::max(smax, 1e-300);
  const bool s_vanishing = !s_constant && kendall_tau(s_tail) <= -0.5 &&
                           rep.s_series.back() < 0.2 * std::max(rep.s_series.front(), 1e-300);
  const bool v_vanishing = kendall_tau(v_tail) <= -0.5 &&
                           rep.v_series.back() < 0.75 * std::max(rep.v_series.front(), 1e-300);

  if (!s_vanishing) rep.verdict = "non-vanishing";
  else if (v_vanishing) rep.verdict = "lions-consistent";
  else rep.verdict = "lions-inconsistent";
  return rep;
}

// ---------------------------------------------------------------------------
// Compactness probe for the weighted space (refuses inadmissible potentials).
// ---------------------------------------------------------------------------

struct CompactnessReport {
  std::string verdict;  // compact-consistent | inconclusive | refused-potential-inadmissible
  Vec h_norm_series;
};

inline CompactnessReport compact_embedding_probe(const NFunction& nf, const TestFamily& family,
                                                 int count = 12) {
  CompactnessReport rep;
  if (!nf.model().V.coercive()) {
    // (V0)(ii) fails for bounded potentials; the probe must not be labeled.
    rep.verdict = "refused-potential-inadmissible";
    return rep;
  }
  for (int n = 1; n <= count; ++n) {
    const SampledField u = family.generate(n);
    rep.h_norm_series.push_back(nf.luxemburg(u, false));
  }
  const int tail = std::min<int>(8, rep.h_norm_series.size());
  std::span<const double> t(rep.h_norm_series.data() + rep.h_norm_series.size() - tail, tail);
  const bool vanish = kendall_tau(t) <= -0.5 &&
                      rep.h_norm_series.back() < 0.5 * rep.h_norm_series.front();
  rep.verdict = vanish ? "compact-consistent" : "inconclusive";
  return rep;
}

// ---------------------------------------------------------------------------
// Brezis-Lieb gap.
// ---------------------------------------------------------------------------

/// g_n = rho(u + v_n) - rho(v_n) - rho(u) for shifts v_n on the same grid as
/// u, accumulated nodewise so that disjoint supports cancel exactly.
inline Vec brezis_lieb_gap(const NFunction& nf, const SampledField& u,
                           const std::vector<SampledField>& shifts) {
  Vec gaps;
  gaps.reserve(shifts.size());
  for (const auto& v : shifts) {
    if (v.size() != u.size() || v.dim != u.dim)
      throw std::invalid_argument("brezis_lieb_gap: shift grid does not match u");
    double g = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double a = u.values[i], b = v.values[i];
      if (a == 0.0 && b == 0.0) continue;
      const auto x = u.node(i);
      const double Hsum = nf.H(x, std::fabs(a + b));
      const double Ha = a == 0.0 ? 0.0 : nf.H(x, std::fabs(a));
      const double Hb = b == 0.0 ? 0.0 : nf.H(x, std::fabs(b));
      g += u.weights[i] * (Hsum - Hb - Ha);
    }
    gaps.push_back(g);
  }
  return gaps;
}

}  // namespace dphase

#endif
