// Batch front door: validate, compute norms/conjugates, certify, probe
// embeddings and solve, emitting JSON reports and CSV data.
//
// Exit codes: 0 success, 2 verdict failure (hypothesis fails, infeasible
// certificate, not-found solve, refused probe), 1 error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dphase/dphase.hpp"

namespace fs = std::filesystem;
using namespace dphase;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

DoublePhaseModel model_from(const json& j, bool enforce = true) {
  const auto& mj = j.at("model");
  ModelParams prm;
  prm.d = mj.value("d", 3);
  if (mj.contains("p")) {
    prm.p_base = mj["p"].value("base", 2.0);
    prm.p_amp_t = mj["p"].value("amp_t", 0.0);
    prm.p_amp_x = mj["p"].value("amp_x", 0.0);
  }
  if (mj.contains("q")) {
    prm.q_base = mj["q"].value("base", 2.5);
    prm.q_amp_t = mj["q"].value("amp_t", 0.0);
    prm.q_amp_x = mj["q"].value("amp_x", 0.0);
  }
  if (mj.contains("mu")) {
    const std::string kind = mj["mu"].value("kind", "constant");
    prm.mu_kind = kind == "decay" ? Weight::Kind::Decay : Weight::Kind::Constant;
    prm.mu_c = mj["mu"].value("c", 1.0);
  }
  if (mj.contains("V")) {
    const std::string kind = mj["V"].value("kind", "quadratic");
    prm.V_kind = kind == "constant" ? Potential::Kind::Constant : Potential::Kind::Quadratic;
    prm.V0 = mj["V"].value("v0", 1.0);
    prm.V_c = mj["V"].value("c", 1.0);
  }
  return make_model(mj.value("catalog", "constant"), prm, enforce);
}

Nonlinearity nonlinearity_from(const json& j, const DoublePhaseModel& m) {
  const auto& nj = j.at("nonlinearity");
  NonlinearityParams prm;
  prm.kappa = nj.value("kappa", -1.0);
  prm.scale = nj.value("scale", 1.0);
  prm.b_exp = nj.value("b_exp", -1.0);
  prm.sigma = nj.value("sigma", -1.0);
  prm.bump_amp = nj.value("bump_amp", 1.0);
  prm.bump_width = nj.value("bump_width", 0.5);
  prm.bump_scale = nj.value("bump_scale", 60.0);
  prm.tail_scale = nj.value("tail_scale", 0.05);
  return make_nonlinearity(nj.value("catalog", "log_power"), m, prm);
}

SamplingSpec sampling_from(const json& j, std::uint64_t seed) {
  SamplingSpec spec;
  if (j.contains("sampling")) {
    const auto& s = j["sampling"];
    spec.R_samp = s.value("R_samp", spec.R_samp);
    spec.T_samp = s.value("T_samp", spec.T_samp);
    spec.n_radii = s.value("n_radii", spec.n_radii);
    spec.n_dirs = s.value("n_dirs", spec.n_dirs);
    spec.n_t = s.value("n_t", spec.n_t);
  }
  spec.seed = seed;
  return spec;
}

Vec point_from(const json& j, int d) {
  if (!j.is_array()) throw std::runtime_error("expected a coordinate array");
  Vec x = j.get<Vec>();
  if (static_cast<int>(x.size()) != d) throw std::runtime_error("point dimension mismatch");
  return x;
}

SampledField field_from(const json& fj, int d, std::uint64_t seed) {
  const std::string kind = fj.value("kind", "ball_constant");
  if (kind == "csv") return read_field_csv(fj.at("path").get<std::string>());
  if (kind == "unit_measure") {
    SampledField f;
    f.dim = d;
    f.coords.assign(d, 0.0);
    f.weights = {1.0};
    f.values = {fj.value("value", 1.0)};
    return f;
  }
  const double R = fj.value("radius", 1.0);
  const int shells = fj.value("shells", 256);
  const int dirs = fj.value("dirs", 16);
  const Vec x0(d, 0.0);
  if (kind == "ball_constant") {
    const double v = fj.value("value", 1.0);
    return radial_field(d, x0, R, shells, dirs, [v](double) { return v; },
                        [](double) { return 0.0; }, seed);
  }
  if (kind == "tent") {
    return radial_field(d, x0, R, shells, dirs,
                        [R](double r) { return std::max(0.0, 1.0 - r / R); },
                        [R](double r) { return r < R ? 1.0 / R : 0.0; }, seed);
  }
  if (kind == "cone") {
    const double eta = fj.value("eta", 1.0);
    return tilde_u_profile(d, eta, R, x0, shells, dirs, seed);
  }
  throw std::runtime_error("unknown field kind: " + kind);
}

TestFamily family_from(const json& fj, int d) {
  TestFamily fam;
  fam.d = d;
  const std::string kind = fj.value("kind", "radial");
  if (kind == "translating") fam.kind = TestFamily::Kind::TranslatingBump;
  else if (kind == "spreading") fam.kind = TestFamily::Kind::SpreadingBump;
  else if (kind == "radial") fam.kind = TestFamily::Kind::RadialBump;
  else if (kind == "tent") fam.kind = TestFamily::Kind::Tent;
  else if (kind == "gaussian") fam.kind = TestFamily::Kind::GaussianLike;
  else throw std::runtime_error("unknown family kind: " + kind);
  fam.amplitude_exp = fj.value("amplitude_exp", fam.amplitude_exp);
  fam.scale_exp = fj.value("scale_exp", fam.scale_exp);
  fam.spacing = fj.value("spacing", fam.spacing);
  fam.radial_shells = fj.value("shells", fam.radial_shells);
  fam.radial_dirs = fj.value("dirs", fam.radial_dirs);
  return fam;
}

CompanionFunction companion_from(const json& cj, const NFunction& nf,
                                 const SobolevConjugate& sob) {
  const std::string kind = cj.value("kind", "power");
  if (kind == "power") return companion_power(cj.value("exponent", 3.0), cj.value("scale", 1.0));
  if (kind == "H") return companion_from_H(nf);
  if (kind == "Hstar") return companion_from_Hstar(sob);
  throw std::runtime_error("unknown companion kind: " + kind);
}

struct Manifest {
  std::string command;
  std::string config_digest;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string started, finished;
  std::vector<std::string> outputs;
};

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::ostringstream os;
  os << std::put_time(std::gmtime(&t), "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_manifest(const Manifest& man, const fs::path& out_dir) {
  json j{{"command", man.command}, {"config_digest", man.config_digest},
         {"seed", man.seed},       {"threads", man.threads},
         {"version", kVersion},    {"started", man.started},
         {"finished", man.finished}, {"outputs", man.outputs}};
  write_json(j, (out_dir / "manifest.json").string());
}

int run_command(const std::string& command, const json& cfg, const fs::path& out,
                std::uint64_t seed, int threads, Manifest& man) {
  // validate reports hypothesis violations as verdicts, so it builds the
  // model leniently; every other command gets the eager admissibility gate.
  const auto m = model_from(cfg, command != "validate");

  if (command == "validate") {
    std::optional<Nonlinearity> nl;
    if (cfg.contains("nonlinearity")) nl = nonlinearity_from(cfg, m);
    const auto rep = validate_hypotheses(m, nl ? &*nl : nullptr, sampling_from(cfg, seed));
    write_json(to_json(rep), (out / "report.json").string());
    man.outputs.push_back("report.json");
    return rep.all_pass() ? 0 : 2;
  }

  NFunction nf(m);

  if (command == "norm") {
    const auto& nj = cfg.at("norm");
    const auto field = field_from(nj.at("field"), m.d, seed);
    const bool weighted = nj.value("weight_by_V", false);
    const auto res = nf.luxemburg_checked(field, weighted);
    json rec = value_record("luxemburg_norm", digest_of_doubles(field.values), res.value, 1e-8);
    rec["weight_by_V"] = weighted;
    rec["unit_modular"] = res.unit_modular;
    rec["converged"] = res.converged;
    rec["modular"] = nf.modular(field, weighted);
    write_json(rec, (out / "norm.json").string());
    man.outputs.push_back("norm.json");
    return res.converged ? 0 : 2;
  }

  if (command == "conjugate") {
    const auto& cj = cfg.at("conjugate");
    const Vec x = cj.contains("x") ? point_from(cj["x"], m.d) : Vec(m.d, 0.0);
    json rows = json::array();
    if (cj.contains("s_values"))
      for (double s : cj["s_values"].get<Vec>())
        rows.push_back(json{{"s", s},
                            {"conjugate", nf.conjugate(x, s)},
                            {"tau_star", nf.conjugate_tau(x, s)}});
    json young = json::array();
    if (cj.contains("young"))
      for (const auto& pair : cj["young"]) {
        const double tau = pair.at(0).get<double>(), sig = pair.at(1).get<double>();
        young.push_back(json{{"tau", tau}, {"sigma", sig}, {"gap", nf.young_gap(x, tau, sig)}});
      }
    write_json(json{{"x", x}, {"values", rows}, {"young_gaps", young}, {"tol", nf.quad_tol()}},
               (out / "conjugate.json").string());
    man.outputs.push_back("conjugate.json");
    return 0;
  }

  SobolevConjugate sob(nf);

  if (command == "sobolev") {
    const auto sj = cfg.value("sobolev", json::object());
    const Vec x = sj.contains("x") ? point_from(sj["x"], m.d) : Vec(m.d, 0.0);
    sob.export_table_csv(x, (out / "sobolev_table.csv").string(),
                         sj.value("export_stride", 8));
    man.outputs.push_back("sobolev_table.csv");
    json rows = json::array();
    if (sj.contains("t_values"))
      for (double t : sj["t_values"].get<Vec>())
        rows.push_back(json{{"t", t},
                            {"N", sob.N(x, t)},
                            {"Ninv", sob.Ninv(x, t)},
                            {"Hstar", sob.Hstar(x, t)}});
    write_json(json{{"x", x}, {"values", rows}}, (out / "sobolev.json").string());
    man.outputs.push_back("sobolev.json");
    return 0;
  }

  if (command == "companion") {
    const auto comp = companion_from(cfg.at("companion"), nf, sob);
    const auto rep = companion_check(sob, comp);
    json j = to_json(rep);
    j["companion"] = comp.name;
    write_json(j, (out / "companion.json").string());
    man.outputs.push_back("companion.json");
    return rep.all_pass() ? 0 : 2;
  }

  if (command == "certify" || command == "search") {
    const auto nl = nonlinearity_from(cfg, m);
    if (command == "certify") {
      const auto& cj = cfg.at("certify");
      const Vec x0 = cj.contains("x0") ? point_from(cj["x0"], m.d) : Vec(m.d, 0.0);
      const auto cert = compute_certificate(
          m, nl, x0, cj.value("R", 1.0), cj.value("eta", 1.0), cj.value("r", 25.0),
          cj.value("gamma", 1.0), cj.value("gamma_provenance", "user-supplied"), seed);
      write_json(to_json(cert), (out / "certificate.json").string());
      man.outputs.push_back("certificate.json");
      std::cout << "certificate (R=" << cert.R << ", eta=" << cert.eta << ", r=" << cert.r
                << ", gamma=" << cert.gamma << " [" << cert.gamma_provenance << "])\n"
                << "  omega_R   = " << cert.omega_R << "\n"
                << "  V_inf     = " << cert.V_inf << "\n"
                << "  delta     = " << cert.delta << "\n"
                << "  alpha(r)  = " << cert.alpha_r << "\n"
                << "  beta(eta) = " << cert.beta_eta << "\n"
                << "  (318) " << (cert.cond_318 ? "holds" : "fails") << ", (H1) "
                << (cert.cond_H1 ? "holds" : "fails") << ", (H2) "
                << (cert.cond_H2 ? "holds" : "fails") << "\n";
      if (cert.Lambda)
        std::cout << "  Lambda    = [" << cert.Lambda->first << ", " << cert.Lambda->second
                  << "]\n";
      else
        std::cout << "  Lambda    = (empty)\n";
      return cert.admissible() ? 0 : 2;
    }
    const auto& sj = cfg.at("search");
    const Vec x0 = sj.contains("x0") ? point_from(sj["x0"], m.d) : Vec(m.d, 0.0);
    const auto eta_range = sj.value("eta_range", Vec{1e-2, 1e2});
    const auto r_range = sj.value("r_range", Vec{1e-1, 1e4});
    const auto res = feasibility_search(m, nl, x0, sj.value("R", 1.0), sj.value("gamma", 1.0),
                                        eta_range.at(0), eta_range.at(1), r_range.at(0),
                                        r_range.at(1), sj.value("n_eta", 64),
                                        sj.value("n_r", 64), seed, threads);
    json j{{"feasible", res.feasible},
           {"evaluated", res.evaluated},
           {"min_violation", res.min_violation},
           {"note", res.note},
           {"best", to_json(res.best)}};
    write_json(j, (out / "search.json").string());
    man.outputs.push_back("search.json");
    return res.feasible ? 0 : 2;
  }

  if (command == "probe") {
    const auto& pj = cfg.at("probe");
    const std::string which = pj.value("which", "lions");
    std::ofstream series((out / "series.csv").string());
    series.precision(17);
    man.outputs.push_back("series.csv");
    man.outputs.push_back("verdict.json");

    if (which == "lions") {
      const auto fam = family_from(pj.at("family"), m.d);
      const auto comp = companion_from(pj.value("companion", json{{"kind", "power"}}), nf, sob);
      const auto rep = lions_vanishing_probe(nf, fam, comp, pj.value("radius", 1.0),
                                             pj.value("count", 16));
      series << "n,s_n,v_n,norm_n\n";
      for (std::size_t i = 0; i < rep.s_series.size(); ++i)
        series << i + 1 << "," << rep.s_series[i] << "," << rep.v_series[i] << ","
               << rep.norm_series[i] << "\n";
      write_json(to_json(rep), (out / "verdict.json").string());
      return rep.verdict == "lions-consistent" || rep.verdict == "non-vanishing" ? 0 : 2;
    }
    if (which == "ratio") {
      const auto fam = family_from(pj.at("family"), m.d);
      NormTarget tgt;
      const auto& tj = pj.at("target");
      const std::string tk = tj.value("kind", "lebesgue");
      CompanionFunction comp;
      if (tk == "lebesgue") {
        tgt.kind = NormTarget::Kind::Lebesgue;
        tgt.lebesgue_r = tj.value("r", 2.0);
      } else if (tk == "H") {
        tgt.kind = NormTarget::Kind::H;
      } else if (tk == "Hstar") {
        tgt.kind = NormTarget::Kind::Hstar;
        tgt.sob = &sob;
      } else if (tk == "companion") {
        comp = companion_from(tj.value("companion", json{{"kind", "power"}}), nf, sob);
        tgt.kind = NormTarget::Kind::Companion;
        tgt.comp = &comp;
      } else {
        throw std::runtime_error("unknown target kind: " + tk);
      }
      const auto scan = embedding_ratio_scan(nf, tgt, fam, pj.value("count", 16));
      series << "n,ratio_n\n";
      for (std::size_t i = 0; i < scan.ratios.size(); ++i)
        series << i + 1 << "," << scan.ratios[i] << "\n";
      write_json(json{{"max_ratio", scan.max_ratio},
                      {"argmax", scan.argmax},
                      {"skipped", scan.skipped}},
                 (out / "verdict.json").string());
      return 0;
    }
    if (which == "brezis-lieb") {
      const int count = pj.value("count", 8);
      const double reach = count + 2.0;
      const Vec center{0.5 * reach, 0.0, 0.0};
      const Vec half{0.5 * reach + 1.5, 1.5, 1.5};
      auto tent_at = [](double c) {
        return [c](std::span<const double> x) {
          const double r = std::sqrt(sqr(x[0] - c) + sqr(x[1]) + sqr(x[2]));
          return std::max(0.0, 1.0 - r);
        };
      };
      const double spacing = pj.value("spacing", 0.125);
      const auto u = box_field(center, half, spacing, tent_at(0.0));
      std::vector<SampledField> shifts;
      for (int n = 1; n <= count; ++n)
        shifts.push_back(box_field(center, half, spacing, tent_at(n)));
      const Vec gaps = brezis_lieb_gap(nf, u, shifts);
      series << "n,g_n\n";
      for (std::size_t i = 0; i < gaps.size(); ++i)
        series << i + 1 << "," << gaps[i] << "\n";
      double tail = 0.0;
      for (std::size_t i = 2; i < gaps.size(); ++i) tail = std::max(tail, std::fabs(gaps[i]));
      write_json(json{{"gaps", gaps}, {"separated_max_abs", tail}},
                 (out / "verdict.json").string());
      return 0;
    }
    if (which == "compactness") {
      const auto fam = family_from(pj.at("family"), m.d);
      const auto rep = compact_embedding_probe(nf, fam, pj.value("count", 12));
      series << "n,h_norm_n\n";
      for (std::size_t i = 0; i < rep.h_norm_series.size(); ++i)
        series << i + 1 << "," << rep.h_norm_series[i] << "\n";
      write_json(json{{"verdict", rep.verdict}, {"series", rep.h_norm_series}},
                 (out / "verdict.json").string());
      return rep.verdict == "compact-consistent" ? 0 : 2;
    }
    throw std::runtime_error("unknown probe: " + which);
  }

  if (command == "solve") {
    const auto nl = nonlinearity_from(cfg, m);
    const auto& sj = cfg.at("solve");
    const auto gj = sj.value("grid", json::object());
    const auto grid = RadialGrid::make(m.d, gj.value("R_max", 4.0), gj.value("N", 256));
    const auto cj = sj.value("cone", json::object());
    const double cone_eta = cj.value("eta", 1.0), cone_R = cj.value("R", 1.0);
    DescentOptions opt;
    if (sj.contains("solver")) {
      opt.tol = sj["solver"].value("tol", opt.tol);
      opt.max_iter = sj["solver"].value("max_iter", opt.max_iter);
    }
    Vec lambdas;
    if (sj.contains("lambda_sweep")) lambdas = sj["lambda_sweep"].get<Vec>();
    else lambdas.push_back(sj.value("lambda", 1.0));

    json summary = json::array();
    int status = 0;
    int idx = 0;
    for (double lam : lambdas) {
      const std::string tag = lambdas.size() > 1 ? "_" + std::to_string(idx++) : "";
      auto low = find_negative_solution(nf, nl, lam, grid, cone_eta, cone_R, opt);
      write_state_csv(grid, low.u, (out / ("state_low" + tag + ".csv")).string());
      write_trace_csv(low.trace, (out / ("trace_low" + tag + ".csv")).string());
      man.outputs.push_back("state_low" + tag + ".csv");
      man.outputs.push_back("trace_low" + tag + ".csv");
      json entry{{"lambda", lam}, {"negative", to_json(low)}};
      if (low.status == SolveStatus::Converged) {
        MountainPassOptions mp;
        if (sj.contains("solver")) mp.beads = sj["solver"].value("beads", mp.beads);
        auto saddle = find_mountain_pass_solution(nf, nl, lam, grid, low, mp);
        write_state_csv(grid, saddle.u, (out / ("state_saddle" + tag + ".csv")).string());
        write_trace_csv(saddle.trace, (out / ("trace_saddle" + tag + ".csv")).string());
        man.outputs.push_back("state_saddle" + tag + ".csv");
        man.outputs.push_back("trace_saddle" + tag + ".csv");
        entry["saddle"] = to_json(saddle);
        entry["opposite_signs"] = low.J < 0.0 && saddle.J > 0.0;
        if (saddle.status != SolveStatus::Converged) status = 2;
      } else {
        status = 2;
      }
      summary.push_back(entry);
    }
    write_json(json{{"runs", summary}}, (out / "summary.json").string());
    man.outputs.push_back("summary.json");
    return status;
  }

  throw std::runtime_error("unknown command: " + command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"double phase N-function toolkit"};
  std::string command, config_path, out_dir = ".";
  std::uint64_t seed = 20240901;
  int threads = 1;
  app.add_option("command", command,
                 "one of: validate norm conjugate sobolev companion certify search probe solve")
      ->required();
  app.add_option("--config", config_path, "JSON configuration")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "sampler seed");
  app.add_option("--threads", threads, "internal parallelism cap");
  CLI11_PARSE(app, argc, argv);

  try {
    const std::string raw = read_file(config_path);
    const json cfg = json::parse(raw);
    if (cfg.value("schema", 1) != 1) throw std::runtime_error("unsupported config schema");
    fs::create_directories(out_dir);

    Manifest man;
    man.command = command;
    man.config_digest = hex_digest(fnv1a(std::span<const char>(raw.data(), raw.size())));
    man.seed = seed;
    man.threads = threads;
    man.started = timestamp_now();

    const int code = run_command(command, cfg, out_dir, seed, threads, man);

    man.finished = timestamp_now();
    write_manifest(man, out_dir);
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
