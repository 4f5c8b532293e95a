// End-to-end checks of the batch front door: exit-code semantics, artifact
// layout, and reproducibility. The binary path comes from the build system.
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#ifndef DPHASE_CLI_PATH
#error "DPHASE_CLI_PATH must be defined"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kConfigs = fs::path(__FILE__).parent_path().parent_path() / "configs";

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DPHASE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

json read_json(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is.good());
  json j;
  is >> j;
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is.good());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dphase_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("validate: admissible configuration exits 0") {
  const auto out = fresh_dir("validate_ok");
  const int rc = run_cli("validate --config " + (kConfigs / "validate_worked.json").string() +
                         " --out " + out.string());
  CHECK(rc == 0);
  const json rep = read_json(out / "report.json");
  CHECK(rep["all_pass"] == true);
  const json man = read_json(out / "manifest.json");
  CHECK(man["command"] == "validate");
  CHECK(man["config_digest"].get<std::string>().size() == 16);
}

TEST_CASE("validate: (H)(iv) violation exits 2 with a witness") {
  const auto out = fresh_dir("validate_q3");
  const int rc = run_cli("validate --config " +
                         (kConfigs / "validate_reject_q3.json").string() + " --out " +
                         out.string());
  CHECK(rc == 2);
  const json rep = read_json(out / "report.json");
  bool found = false;
  for (const auto& item : rep["items"])
    if (item["name"] == "(H)(iv)") {
      found = true;
      CHECK(item["verdict"] == "fail");
      CHECK(item["witness"].get<std::string>().find("1.5") != std::string::npos);
    }
  CHECK(found);
}

TEST_CASE("validate: constant potential fails (V0)(ii) and exits 2") {
  const auto out = fresh_dir("validate_constV");
  const int rc = run_cli("validate --config " +
                         (kConfigs / "validate_constant_V.json").string() + " --out " +
                         out.string());
  CHECK(rc == 2);
  const json rep = read_json(out / "report.json");
  for (const auto& item : rep["items"])
    if (item["name"] == "(V0)(ii)") CHECK(item["verdict"] == "fail");
}

TEST_CASE("norm: the unit-measure fixture reports sqrt(2)") {
  const auto out = fresh_dir("norm");
  const int rc = run_cli("norm --config " + (kConfigs / "norm_unit_measure.json").string() +
                         " --out " + out.string());
  CHECK(rc == 0);
  const json rec = read_json(out / "norm.json");
  CHECK(rec["value"].get<double>() == Catch::Approx(std::sqrt(2.0)).epsilon(1e-7));
  CHECK(rec["op"] == "luxemburg_norm");
  CHECK(rec.contains("tol"));
  CHECK(rec.contains("provenance"));
}

TEST_CASE("certify: the worked configuration is computed but inadmissible (exit 2)") {
  const auto out = fresh_dir("certify");
  const int rc = run_cli("certify --config " + (kConfigs / "worked_certify.json").string() +
                         " --out " + out.string());
  CHECK(rc == 2);
  const json cert = read_json(out / "certificate.json");
  CHECK(cert["cond_H2"] == false);
  CHECK(cert["cond_318"] == true);
  CHECK(cert["delta"].get<double>() == Catch::Approx(0.04012479788588760).epsilon(1e-9));
  CHECK(cert["alpha_r"].get<double>() == Catch::Approx(19.764235376052371).epsilon(1e-9));
  CHECK(cert["Lambda"].is_null());
}

TEST_CASE("search: infeasible box exits 2 with the least violation") {
  const auto out = fresh_dir("search");
  const int rc = run_cli("search --config " + (kConfigs / "search_worked.json").string() +
                         " --out " + out.string());
  CHECK(rc == 2);
  const json res = read_json(out / "search.json");
  CHECK(res["feasible"] == false);
  CHECK(res["min_violation"].get<double>() > 0.0);
  CHECK(res["evaluated"] == 16 * 16);
}

TEST_CASE("sobolev: table and closed-form points") {
  const auto out = fresh_dir("sobolev");
  const int rc = run_cli("sobolev --config " + (kConfigs / "sobolev_plaplace.json").string() +
                         " --out " + out.string());
  CHECK(rc == 0);
  CHECK(fs::exists(out / "sobolev_table.csv"));
  const json rep = read_json(out / "sobolev.json");
  for (const auto& row : rep["values"]) {
    const double t = row["t"].get<double>();
    CHECK(row["N"].get<double>() == Catch::Approx(2.0 * std::cbrt(t)).epsilon(1e-5));
    CHECK(row["Hstar"].get<double>() == Catch::Approx(std::pow(t, 6) / 128.0).epsilon(1e-5));
  }
}

TEST_CASE("probe: translating Lions run reports non-vanishing") {
  const auto out = fresh_dir("probe");
  const int rc = run_cli("probe --config " +
                         (kConfigs / "probe_lions_translating.json").string() + " --out " +
                         out.string());
  CHECK(rc == 0);
  const json verdict = read_json(out / "verdict.json");
  CHECK(verdict["verdict"] == "non-vanishing");
  CHECK(fs::exists(out / "series.csv"));
}

TEST_CASE("solve: documented configuration produces two signed solutions") {
  const auto out = fresh_dir("solve");
  const int rc = run_cli("solve --config " + (kConfigs / "solve_plateau.json").string() +
                         " --out " + out.string());
  CHECK(rc == 0);
  const json summary = read_json(out / "summary.json");
  const auto& run = summary["runs"][0];
  CHECK(run["negative"]["J"].get<double>() < 0.0);
  CHECK(run["saddle"]["J"].get<double>() > 0.0);
  CHECK(run["opposite_signs"] == true);
  CHECK(run["negative"]["residual"].get<double>() < 1e-4);
  CHECK(run["saddle"]["residual"].get<double>() < 1e-4);
  CHECK(fs::exists(out / "state_low.csv"));
  CHECK(fs::exists(out / "trace_low.csv"));
  CHECK(fs::exists(out / "state_saddle.csv"));
}

TEST_CASE("numeric artifacts are byte-identical across identical runs") {
  const auto out1 = fresh_dir("repro1");
  const auto out2 = fresh_dir("repro2");
  const std::string cfg = (kConfigs / "norm_unit_measure.json").string();
  CHECK(run_cli("norm --config " + cfg + " --out " + out1.string() + " --seed 7") == 0);
  CHECK(run_cli("norm --config " + cfg + " --out " + out2.string() + " --seed 7") == 0);
  CHECK(slurp(out1 / "norm.json") == slurp(out2 / "norm.json"));
}

TEST_CASE("error paths exit 1") {
  CHECK(run_cli("frobnicate --config " + (kConfigs / "norm_unit_measure.json").string()) == 1);
  CHECK(run_cli("norm --config /nonexistent.json") == 1);
  const auto out = fresh_dir("badjson");
  {
    std::ofstream os(out / "bad.json");
    os << "{ not json";
  }
  CHECK(run_cli("norm --config " + (out / "bad.json").string()) == 1);
}
