#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ddsusy/cli.hpp"

using namespace ddsusy;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

struct TempFile {
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
  std::string path;
};

bool same_config(const RunConfig& a, const RunConfig& b) {
  return a.command == b.command && a.a == b.a && a.gamma == b.gamma &&
         a.gamma_from == b.gamma_from && a.gamma_to == b.gamma_to &&
         a.gamma_step == b.gamma_step && a.g_values == b.g_values &&
         a.state == b.state && a.xi_re == b.xi_re && a.xi_im == b.xi_im &&
         a.step == b.step && a.tol == b.tol && a.out == b.out &&
         a.format == b.format && a.emit_plot == b.emit_plot && a.jobs == b.jobs;
}

}  // namespace

TEST_CASE("parse_args binds the scan flags") {
  const RunConfig cfg = parse_args({"scan", "--gamma-from", "0", "--gamma-to",
                                    "0.6", "--gamma-step", "0.005", "--state",
                                    "0", "--out", "spec.csv"});
  CHECK(cfg.command == "scan");
  CHECK(cfg.gamma_from == 0.0);
  CHECK(cfg.gamma_to == 0.6);
  CHECK(cfg.gamma_step == 0.005);
  CHECK(cfg.state == 0);
  CHECK(cfg.out == "spec.csv");
  CHECK(cfg.format == "csv");
  CHECK(cfg.a == 2.2);       // calibrated default
  CHECK(cfg.step == 1e-3);   // default h
  CHECK(cfg.tol == 1e-10);   // default tolerance
}

TEST_CASE("parse_args binds the partner flags including xi") {
  const RunConfig cfg =
      parse_args({"partner", "--gamma", "0.3", "--state", "1", "--xi-re",
                  "-2.34", "--xi-im", "2.02", "--out", "rep.json", "--format",
                  "json"});
  CHECK(cfg.command == "partner");
  CHECK(cfg.gamma == 0.3);
  CHECK(cfg.state == 1);
  REQUIRE(cfg.xi().has_value());
  CHECK(cfg.xi()->real() == -2.34);
  CHECK(cfg.xi()->imag() == 2.02);
}

TEST_CASE("config file and flags produce identical RunConfigs") {
  const TempFile cfgfile("tmp_cli_roundtrip.cfg");
  write_file(cfgfile.path,
             "# sweep configuration\n"
             "gamma-from = 0.0\n"
             "gamma-to = 0.2   # inline comment\n"
             "gamma-step = 0.1\n"
             "state = 1\n"
             "out = x.csv\n");
  const RunConfig from_file = parse_args({"scan", "--config", cfgfile.path});
  const RunConfig from_flags =
      parse_args({"scan", "--gamma-from", "0.0", "--gamma-to", "0.2",
                  "--gamma-step", "0.1", "--state", "1", "--out", "x.csv"});
  RunConfig a = from_file, b = from_flags;
  a.config_path.clear();
  a.command_line.clear();
  b.command_line.clear();
  CHECK(same_config(a, b));
}

TEST_CASE("explicit flags override the config file") {
  const TempFile cfgfile("tmp_cli_override.cfg");
  write_file(cfgfile.path, "gamma = 0.2\nstate = 0\n");
  const RunConfig cfg = parse_args(
      {"partner", "--config", cfgfile.path, "--gamma", "0.4", "--out", "o.json"});
  CHECK(cfg.gamma == 0.4);  // flag wins
  CHECK(cfg.state == 0);    // from file
}

TEST_CASE("malformed config lines are rejected with their line number") {
  const TempFile missing_eq("tmp_cli_bad1.cfg");
  write_file(missing_eq.path, "gamma-from = 0\ngamma-to 0.5\n");
  try {
    parse_args({"scan", "--config", missing_eq.path});
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(std::string(err.what()).find(":2") != std::string::npos);
  }

  const TempFile unknown("tmp_cli_bad2.cfg");
  write_file(unknown.path, "separation = 2.2\n");
  try {
    parse_args({"scan", "--config", unknown.path});
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(std::string(err.what()).find(":1") != std::string::npos);
    CHECK(std::string(err.what()).find("separation") != std::string::npos);
  }

  const TempFile bad_number("tmp_cli_bad3.cfg");
  write_file(bad_number.path, "gamma = fast\n");
  CHECK_THROWS_AS(parse_args({"solve", "--config", bad_number.path}), ConfigError);
}

TEST_CASE("unknown flags and missing parameters exit with code 2") {
  CHECK(run_cli({"scan", "--frobnicate"}) == 2);
  CHECK(run_cli({"solve"}) == 2);             // --gamma required
  CHECK(run_cli({"partner", "--gamma"}) == 2);  // value missing
  CHECK(run_cli({}) == 2);                    // subcommand required
}

TEST_CASE("calibrate prints the separation and exits cleanly") {
  CHECK(run_cli({"calibrate", "--target", "0.3920"}) == 0);
}

TEST_CASE("solver failures exit with code 3") {
  // Hermitian excited-state removal hits the wavefunction node
  CHECK(run_cli({"partner", "--gamma", "0", "--state", "1", "--out",
                 "tmp_cli_never.json"}) == 3);
}

TEST_CASE("unwritable output paths exit with code 4") {
  CHECK(run_cli({"scan", "--gamma-from", "0", "--gamma-to", "0.01",
                 "--gamma-step", "0.01", "--out",
                 "/nonexistent_dir_ddsusy/out.csv"}) == 4);
}

TEST_CASE("scan writes the exact spectrum header and is byte-deterministic") {
  const TempFile out1("tmp_cli_scan1.csv");
  const TempFile out2("tmp_cli_scan2.csv");
  const std::vector<std::string> base = {"scan",         "--gamma-from", "0",
                                         "--gamma-to",   "0.02",         "--gamma-step",
                                         "0.01",         "--state",      "0"};
  std::vector<std::string> run1 = base;
  run1.insert(run1.end(), {"--out", out1.path});
  std::vector<std::string> run2 = base;
  run2.insert(run2.end(), {"--out", out2.path});
  REQUIRE(run_cli(run1) == 0);
  REQUIRE(run_cli(run2) == 0);

  const std::string bytes1 = slurp(out1.path);
  const std::string bytes2 = slurp(out2.path);
  CHECK(bytes1 == bytes2);
  CHECK(bytes1.rfind("gamma,re_E0_1,im_E0_1,re_E1_1,im_E1_1,re_E0_2,im_E0_2\n",
                     0) == 0);
  // three grid rows after the header
  CHECK(std::count(bytes1.begin(), bytes1.end(), '\n') == 4);
}

TEST_CASE("an empty gamma range produces a header-only CSV and exit 0") {
  const TempFile out("tmp_cli_empty.csv");
  CHECK(run_cli({"scan", "--gamma-from", "0.5", "--gamma-to", "0.2",
                 "--gamma-step", "0.01", "--out", out.path}) == 0);
  CHECK(slurp(out.path) ==
        "gamma,re_E0_1,im_E0_1,re_E1_1,im_E1_1,re_E0_2,im_E0_2\n");
}

TEST_CASE("solve writes the wavefunction schema") {
  const TempFile out("tmp_cli_wave.csv");
  REQUIRE(run_cli({"solve", "--gamma", "0.1", "--state", "0", "--out",
                   out.path}) == 0);
  const std::string bytes = slurp(out.path);
  CHECK(bytes.rfind("x,re_phi,im_phi,abs_phi\n", 0) == 0);
}

TEST_CASE("partner csv output writes potential and wavefunction files") {
  const TempFile pot("tmp_cli_v2.csv");
  const TempFile wave("tmp_cli_v2.wave.csv");
  const TempFile wfile("tmp_cli_v2.w.csv");
  REQUIRE(run_cli({"partner", "--gamma", "0.3", "--state", "0", "--out",
                   pot.path}) == 0);
  CHECK(slurp(pot.path).rfind("x,re_V,im_V\n", 0) == 0);
  CHECK(slurp(wave.path).rfind("x,re_phi,im_phi,abs_phi\n", 0) == 0);
  CHECK(slurp(wfile.path).rfind("x,re_W,im_W\n", 0) == 0);
}

TEST_CASE("the partner ground-state wavefunction peaks at the origin") {
  const TempFile pot("tmp_cli_peak.csv");
  const TempFile wave("tmp_cli_peak.wave.csv");
  const TempFile wfile("tmp_cli_peak.w.csv");
  REQUIRE(run_cli({"partner", "--gamma", "0", "--state", "0", "--out",
                   pot.path}) == 0);
  std::ifstream in(wave.path);
  std::string line;
  std::getline(in, line);  // header
  double best_abs = -1.0, best_x = 1e9;
  while (std::getline(in, line)) {
    const auto c1 = line.find(','), c3 = line.rfind(',');
    const double x = std::stod(line.substr(0, c1));
    const double abs_phi = std::stod(line.substr(c3 + 1));
    if (abs_phi > best_abs) {
      best_abs = abs_phi;
      best_x = x;
    }
  }
  CHECK(std::abs(best_x) < 1e-9);
}

TEST_CASE("nonlinear writes its schema including the g = 0 linear limit") {
  const TempFile out("tmp_cli_nl.csv");
  REQUIRE(run_cli({"nonlinear", "--g", "0", "--gamma-from", "0", "--gamma-to",
                   "0", "--gamma-step", "0.01", "--out", out.path}) == 0);
  const std::string bytes = slurp(out.path);
  CHECK(bytes.rfind("g,gamma,re_E0_2,im_E0_2,re_Eid,im_Eid,deviation\n", 0) == 0);
  CHECK(std::count(bytes.begin(), bytes.end(), '\n') == 2);
}

TEST_CASE("emit-plot writes a gnuplot script referencing the csv") {
  const TempFile out("tmp_cli_plot.csv");
  const TempFile script("tmp_cli_plot.csv.gp");
  REQUIRE(run_cli({"scan", "--gamma-from", "0", "--gamma-to", "0.01",
                   "--gamma-step", "0.01", "--out", out.path, "--emit-plot"}) == 0);
  const std::string bytes = slurp(script.path);
  CHECK(bytes.find("plot") != std::string::npos);
  CHECK(bytes.find(out.path) != std::string::npos);
  CHECK(bytes.find("re_E0_2") != std::string::npos);
}

TEST_CASE("oracle and ep subcommands run end to end") {
  CHECK(run_cli({"oracle", "--gamma", "0.3"}) == 0);
  const TempFile out("tmp_cli_ep.json");
  CHECK(run_cli({"ep", "--a", "2.2", "--out", out.path}) == 0);
  const std::string bytes = slurp(out.path);
  CHECK(bytes.find("gamma_crit_oracle") != std::string::npos);
  CHECK(bytes.find("gamma_crit_shooting") != std::string::npos);
}

TEST_CASE("jobs parallelism does not change scan output") {
  const TempFile serial("tmp_cli_j1.csv");
  const TempFile parallel("tmp_cli_j2.csv");
  REQUIRE(run_cli({"scan", "--gamma-from", "0", "--gamma-to", "0.05",
                   "--gamma-step", "0.01", "--out", serial.path}) == 0);
  REQUIRE(run_cli({"scan", "--gamma-from", "0", "--gamma-to", "0.05",
                   "--gamma-step", "0.01", "--jobs", "4", "--out",
                   parallel.path}) == 0);
  CHECK(slurp(serial.path) == slurp(parallel.path));
}
