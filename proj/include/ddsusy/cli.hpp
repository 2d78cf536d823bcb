#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ddsusy/types.hpp"

namespace ddsusy {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 2 argument/config error, 3 solver failure,
/// 4 I/O failure.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitSolver = 3,
  kExitIo = 4,
};

struct RunConfig {
  std::string command;
  double a = 2.2;
  std::optional<double> gamma;
  std::optional<double> gamma_from;
  std::optional<double> gamma_to;
  std::optional<double> gamma_step;
  std::vector<double> g_values;
  double g = 0.0;
  int state = 0;
  std::optional<double> xi_re;
  std::optional<double> xi_im;
  double step = 1e-3;
  double tol = 1e-10;
  double target = 0.3920;
  std::string out;
  std::string format = "csv";  // inferred from the --out extension if unset
  bool emit_plot = false;
  int jobs = 1;
  std::string config_path;
  std::string command_line;

  std::optional<Complex> xi() const {
    if (!xi_re && !xi_im) return std::nullopt;
    return Complex(xi_re.value_or(0.0), xi_im.value_or(0.0));
  }
};

/// Parses argv (without the program name).  Values from a `--config` file
/// (line-oriented key=value, '#' comments) are applied first; explicit flags
/// override them.  Throws ConfigError on malformed input.
RunConfig parse_args(const std::vector<std::string>& args);

/// Full command dispatch; returns a process exit code and never throws.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace ddsusy
