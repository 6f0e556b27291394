#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef KFP_CLI_PATH
#error "KFP_CLI_PATH must point at the command-line binary"
#endif

namespace fs = std::filesystem;

namespace {

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() /
          ("kfp_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Sandbox() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

CliResult run_cli(const Sandbox& sb, const std::string& args) {
  const fs::path out = sb.dir / "stdout.txt";
  const fs::path err = sb.dir / "stderr.txt";
  const std::string cmd = std::string(KFP_CLI_PATH) + " --out " + sb.dir.string() + " " + args +
                          " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  CliResult res;
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  res.out = slurp(out);
  res.err = slurp(err);
  return res;
}

}  // namespace

TEST_CASE("exponents: fixed header, threshold-gated last column, spot row") {
  Sandbox sb;
  const CliResult res = run_cli(sb, "exponents -r 1.0 0.1");
  REQUIRE(res.exit_code == 0);
  const std::string csv = slurp(sb.dir / "exponents.csv");
  REQUIRE(!csv.empty());
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header == "r,alpha,beta,k_alpha,kappa,c_star");

  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);  // header
  std::getline(is, line);  // r = 1
  CHECK(line.back() == ',');  // no pairing constant above the threshold
  CHECK(line.find("-0.666666666") != std::string::npos);   // beta
  CHECK(line.find("-7.8478540") != std::string::npos);     // kappa
  std::getline(is, line);  // r = 0.1
  CHECK(line.back() != ',');  // c_star present below the threshold
  CHECK(line.find("-0.72443621") != std::string::npos);    // alpha
  CHECK(line.find("-1.85227515") != std::string::npos);    // c_star
}

TEST_CASE("exponents: the degenerate threshold coefficient is rejected") {
  Sandbox sb;
  const CliResult res = run_cli(sb, "exponents -r 0.16303353482");
  CHECK(res.exit_code == 2);
  CHECK(res.err.find("degenerate") != std::string::npos);
}

TEST_CASE("identical parameters and seed give byte-identical artifacts") {
  Sandbox a, b;
  REQUIRE(run_cli(a, "--seed 7 mc --paths 40 -r 0.1 0.2").exit_code == 0);
  REQUIRE(run_cli(b, "--seed 7 mc --paths 40 -r 0.1 0.2").exit_code == 0);
  const std::string csv_a = slurp(a.dir / "mc_scan.csv");
  CHECK(!csv_a.empty());
  CHECK(csv_a == slurp(b.dir / "mc_scan.csv"));
  CHECK(csv_a.substr(0, csv_a.find('\n')) ==
        "r,paths,collapse_fraction,mean_log_ratio,stderr_log_ratio");

  Sandbox c;
  REQUIRE(run_cli(c, "--seed 8 mc --paths 40 -r 0.1 0.2").exit_code == 0);
  CHECK(csv_a != slurp(c.dir / "mc_scan.csv"));  // the seed is live
}

TEST_CASE("profile: spot value, header-only empty range, svg only on request") {
  Sandbox sb;
  REQUIRE(run_cli(sb, "profile --samples 3 --zeta-min 0 --zeta-max 1").exit_code == 0);
  const std::string csv = slurp(sb.dir / "profile.csv");
  CHECK(csv.find("0,2.678938534707747") != std::string::npos);  // Gamma(1/3) at zero
  CHECK(!fs::exists(sb.dir / "profile.svg"));

  Sandbox empty;
  REQUIRE(run_cli(empty, "profile --samples 0").exit_code == 0);
  CHECK(slurp(empty.dir / "profile.csv") == "zeta,lambda\n");

  Sandbox svg;
  REQUIRE(run_cli(svg, "--svg profile --samples 16").exit_code == 0);
  CHECK(fs::exists(svg.dir / "profile.svg"));
  CHECK(slurp(svg.dir / "profile.svg").find("<polyline") != std::string::npos);
}

TEST_CASE("solve: a missing restitution coefficient is a named validation error") {
  Sandbox sb;
  const CliResult res = run_cli(sb, "solve --t-final 0.1");
  CHECK(res.exit_code == 2);
  CHECK(res.err.find("\"r\"") != std::string::npos);
}

TEST_CASE("solve: writes the diagnostic series, config echo, and manifest") {
  Sandbox sb;
  const CliResult res = run_cli(sb, "solve -r 0.5 --t-final 0.05");
  REQUIRE(res.exit_code == 0);
  const std::string csv = slurp(sb.dir / "solve.csv");
  CHECK(csv.substr(0, csv.find('\n')) ==
        "t,total_mass,m,a_alpha,a_m23,fit_residual,mode_residual");
  CHECK(res.out.find("m = 0") != std::string::npos);  // the competing extension

  const auto manifest = nlohmann::json::parse(slurp(sb.dir / "solve_manifest.json"));
  CHECK(manifest["command"] == "solve");
  CHECK(manifest["seed"] == 0);
  CHECK(manifest.contains("code_version"));
  CHECK(manifest.contains("started_at"));
  CHECK(manifest.contains("parameters"));
  bool saw_csv = false;
  for (const auto& f : manifest["outputs"]) saw_csv |= (f == "solve.csv");
  CHECK(saw_csv);

  const auto echo = nlohmann::json::parse(slurp(sb.dir / "solve_config.json"));
  CHECK(echo["r"] == 0.5);
  CHECK(echo["mode"] == "supercritical");
}

TEST_CASE("flux: bounds hold and the command reports success") {
  Sandbox sb;
  const CliResult res = run_cli(sb, "flux -r 0.1");
  CHECK(res.exit_code == 0);
  CHECK(!fs::exists(sb.dir / "failures.json"));
  const std::string csv = slurp(sb.dir / "flux.csv");
  CHECK(csv.substr(0, csv.find('\n')) ==
        "r,flux_m23,closed_form,rel_gap,box_spread,alpha_flux_scaled");
}

TEST_CASE("verify-all: subset runs, table printed, exit tracks the verdict") {
  Sandbox sb;
  const CliResult res = run_cli(sb, "verify-all --check 1 4");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("[PASS] check 1/8") != std::string::npos);
  CHECK(res.out.find("[PASS] check 4/8") != std::string::npos);
  CHECK(res.out.find("all checks passed") != std::string::npos);
  const std::string csv = slurp(sb.dir / "verify.csv");
  CHECK(csv.substr(0, csv.find('\n')) == "check,name,passed,seconds");
  CHECK(csv.find("1,exponent fidelity,1,") != std::string::npos);
}
