#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_support.hpp"

#include "pdsaddle/serialize.hpp"

using namespace pdsaddle;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("PDSADDLE_CLI");
  REQUIRE(p != nullptr);
  return p;
}

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / "pdsaddle_cli_e2e";
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const std::string& name, const Json& j) {
  fs::path p = scratch_dir() / name;
  std::ofstream out(p);
  out << j.dump(2);
  return p;
}

int run_cli(const std::string& args, const std::string& env = "") {
  std::string cmd = env + " \"" + cli_path() + "\" " + args + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json quadratic_c1_problem() {
  return Json{{"generator",
               {{"name", "random"}, {"condition", "C1"}, {"n", 3}, {"m", 3},
                {"mu_f", 1.0}, {"mu_g", 2.0}, {"L_f", 2.0}, {"L_g", 3.0},
                {"sing_min", 0.5}, {"sing_max", 1.5}, {"seed", 11}}}};
}

}  // namespace

TEST_CASE("rates command") {
  SECTION("optimal C1 certificate") {
    Json cfg = {{"schema", "1"}, {"problem", quadratic_c1_problem()},
                {"algorithm", "chambolle_pock"}, {"condition", "C1"},
                {"steps", "optimal"}, {"epsilon", 0.1}};
    fs::path out = scratch_dir() / "cert.json";
    int code = run_cli("rates --config " +
                       write_config("rates_ok.json", cfg).string() + " --out " +
                       out.string());
    REQUIRE(code == 0);
    Json cert = Json::parse(slurp(out));
    REQUIRE(cert["theorem"] == "thm2(i)");
    REQUIRE(cert["constants"].contains("kappa"));
    REQUIRE(cert["rho"].get<double>() < 1.0);
  }
  SECTION("step bound violation exits 2") {
    Json cfg = {{"schema", "1"}, {"problem", quadratic_c1_problem()},
                {"algorithm", "chambolle_pock"}, {"condition", "C1"},
                {"steps", {{"tau", 10.0}, {"sigma", 10.0}}}, {"epsilon", 0.5}};
    REQUIRE(run_cli("rates --config " +
                    write_config("rates_bad_steps.json", cfg).string()) == 2);
  }
  SECTION("counterexample II with condition C2 exits 2") {
    Json cfg = {{"schema", "1"},
                {"problem", {{"generator",
                              {{"name", "counterexample"}, {"which", "II"}}}}},
                {"algorithm", "chambolle_pock"}, {"condition", "C2"},
                {"steps", "optimal"}};
    REQUIRE(run_cli("rates --config " +
                    write_config("rates_ce2.json", cfg).string()) == 2);
  }
}

TEST_CASE("run command") {
  SECTION("trajectory csv with reference distances") {
    Json cfg = {{"schema", "1"}, {"problem", quadratic_c1_problem()},
                {"algorithm", "chambolle_pock"}, {"steps", "optimal"},
                {"run", {{"max_iters", 5000}, {"residual_tol", 1e-9},
                         {"w0", {{"random", 3}}}}}};
    fs::path out = scratch_dir() / "traj.csv";
    int code = run_cli("run --config " +
                       write_config("run_ok.json", cfg).string() + " --out " +
                       out.string());
    REQUIRE(code == 0);
    std::string csv = slurp(out);
    REQUIRE(csv.rfind("iter,residual_phi,dist_to_ref_phi,ratio\n", 0) == 0);
    REQUIRE(csv.find("\r") == std::string::npos);  // LF line endings
  }
  SECTION("starting at the solution emits a single data row") {
    Json problem = {{"f", {{"kind", "quadratic"}, {"dim", 1}, {"weight", 1.0}}},
                    {"g", {{"kind", "quadratic"}, {"dim", 1}, {"weight", 1.0}}},
                    {"A", {{"rows", 1}, {"cols", 1}, {"data", {1.0}}}}};
    Json cfg = {{"schema", "1"}, {"problem", problem},
                {"algorithm", "chambolle_pock"},
                {"steps", {{"tau", 0.5}, {"sigma", 0.5}}},
                {"run", {{"max_iters", 100}, {"residual_tol", 1e-10},
                         {"w0", "zero"}}}};
    fs::path out = scratch_dir() / "single.csv";
    REQUIRE(run_cli("run --config " +
                    write_config("run_single.json", cfg).string() + " --out " +
                    out.string()) == 0);
    std::string csv = slurp(out);
    REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one row
  }
  SECTION("divergent run exits 3") {
    Json problem = {{"f", {{"kind", "zero"}, {"dim", 1}}},
                    {"g", {{"kind", "zero"}, {"dim", 1}}},
                    {"A", {{"rows", 1}, {"cols", 1}, {"data", {1.0}}}}};
    Json cfg = {{"schema", "1"}, {"problem", problem}, {"algorithm", "plain_pdg"},
                {"steps", {{"alpha", 0.5}}},
                {"run", {{"max_iters", 200000}, {"residual_tol", 1e-10},
                         {"w0", {1.0, 0.0}}}}};
    REQUIRE(run_cli("run --config " +
                    write_config("run_diverge.json", cfg).string()) == 3);
  }
}

TEST_CASE("verify command") {
  Json cfg = {{"schema", "1"}, {"problem", quadratic_c1_problem()},
              {"algorithm", "chambolle_pock"}, {"condition", "C1"},
              {"steps", "optimal"}, {"epsilon", 0.01},
              {"verify", {{"pairs", 400}, {"radius", 5.0}, {"seed", 21},
                          {"checks", {"contraction", "a1a2", "inverse_lipschitz"}}}}};
  SECTION("full suite passes") {
    fs::path out = scratch_dir() / "verify.json";
    int code = run_cli("verify --config " +
                       write_config("verify_ok.json", cfg).string() + " --out " +
                       out.string());
    REQUIRE(code == 0);
    Json report = Json::parse(slurp(out));
    REQUIRE(report["pass"] == true);
    REQUIRE(report["contraction"]["pass"] == true);
  }
  SECTION("deflated rho override fails with a witness") {
    // proximal-point instance where the certificate is tight
    Json problem = {{"f", {{"kind", "quadratic"}, {"dim", 1}, {"weight", 1.0}}},
                    {"g", {{"kind", "quadratic"}, {"dim", 1}, {"weight", 1.0}}},
                    {"A", {{"rows", 1}, {"cols", 1}, {"data", {0.0}}}}};
    Json bad = {{"schema", "1"}, {"problem", problem},
                {"algorithm", "chambolle_pock"}, {"condition", "C1"},
                {"steps", {{"tau", 1.0}, {"sigma", 1.0}}},
                {"verify", {{"pairs", 100}, {"radius", 2.0}, {"seed", 5},
                            {"rho_override", 0.99 * 0.5},
                            {"checks", {"contraction"}}}}};
    fs::path out = scratch_dir() / "verify_fail.json";
    int code = run_cli("verify --config " +
                       write_config("verify_fail.json", bad).string() + " --out " +
                       out.string());
    REQUIRE(code == 1);
    Json report = Json::parse(slurp(out));
    REQUIRE(report["contraction"]["pass"] == false);
    REQUIRE(report["contraction"].contains("witness_a"));
  }
  SECTION("deterministic across parallelism levels") {
    fs::path out1 = scratch_dir() / "par1.json";
    fs::path out4 = scratch_dir() / "par4.json";
    fs::path cfg_path = write_config("verify_par.json", cfg);
    REQUIRE(run_cli("verify --config " + cfg_path.string() + " --out " +
                    out1.string(), "PDSADDLE_THREADS=1") == 0);
    REQUIRE(run_cli("verify --config " + cfg_path.string() + " --out " +
                    out4.string(), "PDSADDLE_THREADS=4") == 0);
    REQUIRE(slurp(out1) == slurp(out4));
  }
}

TEST_CASE("bench command") {
  SECTION("huber benchmark has a chambolle-pock row") {
    Json cfg = {{"schema", "1"},
                {"bench", {{"name", "huber_rof"}, {"rows", 4}, {"cols", 4},
                           {"lambda", 1.0}, {"alpha", 0.5}, {"seed", 2}}},
                {"run", {{"max_iters", 20000}}}};
    fs::path out = scratch_dir() / "bench_huber.csv";
    REQUIRE(run_cli("bench --config " +
                    write_config("bench_huber.json", cfg).string() + " --out " +
                    out.string()) == 0);
    std::string csv = slurp(out);
    REQUIRE(csv.find("chambolle_pock,C1,thm2(i)") != std::string::npos);
  }
  SECTION("policy evaluation benchmark certifies C3 for the explicit method") {
    Json cfg = {{"schema", "1"},
                {"bench", {{"name", "policy_eval"}, {"n", 3}, {"T", 40},
                           {"gamma", 0.9}, {"seed", 4}}},
                {"run", {{"max_iters", 60000}}}};
    fs::path out = scratch_dir() / "bench_pe.csv";
    REQUIRE(run_cli("bench --config " +
                    write_config("bench_pe.json", cfg).string() + " --out " +
                    out.string()) == 0);
    std::string csv = slurp(out);
    REQUIRE(csv.find("explicit_pdg,C3,thm4(iii)") != std::string::npos);
  }
  SECTION("affine-constrained benchmark rows") {
    Json cfg = {{"schema", "1"},
                {"bench", {{"name", "affine_constrained"}, {"n", 3}, {"m", 5},
                           {"seed", 6}}},
                {"run", {{"max_iters", 60000}}}};
    fs::path out = scratch_dir() / "bench_ac.csv";
    REQUIRE(run_cli("bench --config " +
                    write_config("bench_ac.json", cfg).string() + " --out " +
                    out.string()) == 0);
    std::string csv = slurp(out);
    REQUIRE(csv.find("chambolle_pock,C2,thm2(ii)") != std::string::npos);
    REQUIRE(csv.find("semi_implicit,C2,thm3(i)") != std::string::npos);
  }
}

TEST_CASE("invalid config exits 2") {
  fs::path p = scratch_dir() / "garbage.json";
  std::ofstream(p) << "{not json";
  REQUIRE(run_cli("rates --config " + p.string()) == 2);
  REQUIRE(run_cli("rates --config /nonexistent/path.json") == 2);
}
