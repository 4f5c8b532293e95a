#ifndef DPHASE_REPORT_HPP
#define DPHASE_REPORT_HPP

#include <chrono>
#include <fstream>
#include <string>

#include <json.hpp>

#include "dphase/certificate.hpp"
#include "dphase/embedding.hpp"
#include "dphase/solver.hpp"
#include "dphase/validate.hpp"

namespace dphase {

using json = nlohmann::json;

/// Numeric record: every emitted value carries its tolerance and provenance.
inline json value_record(const std::string& op, const std::string& inputs_digest,
                         double value, double tol,
                         const std::string& provenance = "computed") {
  return json{{"op", op},
              {"inputs_digest", inputs_digest},
              {"value", value},
              {"tol", tol},
              {"provenance", provenance}};
}

inline json to_json(const HypothesisReport& rep) {
  json items = json::array();
  for (const auto& it : rep.items)
    items.push_back(json{{"name", it.name},
                         {"verdict", to_string(it.verdict)},
                         {"witness", it.witness}});
  return json{{"items", items}, {"all_pass", rep.all_pass()}};
}

inline json to_json(const Certificate& c) {
  json j{{"x0", c.x0},
         {"R", c.R},
         {"eta", c.eta},
         {"r", c.r},
         {"gamma", c.gamma},
         {"gamma_provenance", c.gamma_provenance},
         {"omega_R", c.omega_R},
         {"V_inf", c.V_inf},
         {"delta", c.delta},
         {"gamma_bar", c.gamma_bar},
         {"alpha_r", c.alpha_r},
         {"beta_eta", c.beta_eta},
         {"F_half_ball", c.F_half_ball},
         {"cond_318", c.cond_318},
         {"cond_H1", c.cond_H1},
         {"cond_H2", c.cond_H2},
         {"admissible", c.admissible()}};
  if (c.Lambda)
    j["Lambda"] = json{{"lo", c.Lambda->first}, {"hi", c.Lambda->second}};
  else
    j["Lambda"] = nullptr;
  return j;
}

inline json to_json(const SolverState& st) {
  return json{{"status", to_string(st.status)},
              {"message", st.message},
              {"J", st.J},
              {"grad_norm", st.grad_norm},
              {"residual", st.residual},
              {"tail_modular", st.tail_modular},
              {"iterations", st.iterations}};
}

inline json to_json(const LionsReport& rep) {
  return json{{"verdict", rep.verdict},
              {"weak_null_emulated", rep.weak_null_emulated},
              {"s_series", rep.s_series},
              {"v_series", rep.v_series},
              {"norm_series", rep.norm_series}};
}

inline void write_json(const json& j, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << j.dump(2) << "\n";
}

inline void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.precision(17);
  os << "iter,J,grad_norm,cerami\n";
  for (const auto& row : trace)
    os << row.iter << "," << row.J << "," << row.grad_norm << "," << row.cerami << "\n";
}

inline void write_state_csv(const RadialGrid& g, const Vec& u, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.precision(17);
  os << "r,u\n";
  for (int i = 0; i <= g.N; ++i) os << g.r[i] << "," << u[i] << "\n";
}

}  // namespace dphase

#endif
