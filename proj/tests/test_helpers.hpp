#ifndef DPHASE_TESTS_HELPERS_HPP
#define DPHASE_TESTS_HELPERS_HPP

#include <random>

#include "dphase/dphase.hpp"

namespace testutil {

using namespace dphase;

inline DoublePhaseModel worked_model() {  // constant p=2, q=2.5, mu=1, V=1+|x|^2
  ModelParams prm;
  prm.d = 3;
  prm.p_base = 2.0;
  prm.q_base = 2.5;
  prm.mu_kind = Weight::Kind::Constant;
  prm.mu_c = 1.0;
  prm.V_kind = Potential::Kind::Quadratic;
  prm.V0 = 1.0;
  prm.V_c = 1.0;
  return make_model("constant", prm);
}

inline DoublePhaseModel plaplace_model() {  // constant p=2, mu=0 (classical oracle limit)
  ModelParams prm;
  prm.d = 3;
  prm.p_base = 2.0;
  prm.q_base = 2.5;
  prm.mu_c = 0.0;
  return make_model("constant", prm);
}

/// The five admissible catalog models exercised by the property suites.
inline std::vector<DoublePhaseModel> catalog_models() {
  std::vector<DoublePhaseModel> out;
  out.push_back(worked_model());
  {
    ModelParams prm;
    prm.d = 3; prm.p_base = 2.2; prm.q_base = 2.6; prm.mu_c = 0.5;
    out.push_back(make_model("constant", prm));
  }
  {
    ModelParams prm;
    prm.d = 3; prm.p_base = 2.0; prm.p_amp_t = 0.3;
    prm.q_base = 2.35; prm.q_amp_t = 0.25;
    out.push_back(make_model("tlog", prm));
  }
  {
    ModelParams prm;
    prm.d = 3; prm.p_base = 2.0; prm.p_amp_x = 0.2;
    prm.q_base = 2.3; prm.q_amp_x = 0.2;
    prm.mu_kind = Weight::Kind::Decay; prm.mu_c = 1.0;
    out.push_back(make_model("xmod", prm));
  }
  {
    ModelParams prm;
    prm.d = 3; prm.p_base = 2.0; prm.p_amp_t = 0.1; prm.p_amp_x = 0.1;
    prm.q_base = 2.25; prm.q_amp_t = 0.1; prm.q_amp_x = 0.15;
    out.push_back(make_model("xmod_tlog", prm));
  }
  return out;
}

/// One-node field of unit measure (value v at the origin).
inline SampledField unit_measure_field(int d, double v) {
  SampledField f;
  f.dim = d;
  f.coords.assign(d, 0.0);
  f.weights = {1.0};
  f.values = {v};
  f.truncation_radius = 0.0;
  return f;
}

/// Random radial field with a smooth random profile; reproducible by seed.
inline SampledField random_radial_field(int d, std::uint64_t seed, int shells = 48,
                                        int dirs = 8) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(0.2, 3.0), wid(0.5, 2.5), rad(1.0, 3.0);
  const double a = amp(rng), s = wid(rng), R = rad(rng);
  auto prof = [a, s](double r) { return a * std::exp(-s * r * r); };
  auto slope = [a, s](double r) { return 2.0 * s * r * a * std::exp(-s * r * r); };
  Vec x0(d, 0.0);
  return radial_field(d, x0, R, shells, dirs, prof, slope, seed ^ 0xabcdULL);
}

}  // namespace testutil

#endif
