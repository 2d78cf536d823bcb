#include "ddsusy/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "ddsusy/oracle.hpp"
#include "ddsusy/output.hpp"
#include "ddsusy/pipeline.hpp"

namespace ddsusy {

namespace {

const std::vector<std::string> kConfigKeys = {
    "a",     "gamma",  "gamma-from", "gamma-to", "gamma-step", "g",
    "state", "xi-re",  "xi-im",      "step",     "tol",        "target",
    "out",   "format", "emit-plot",  "jobs"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// line-oriented key=value file; '#' starts a comment
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, std::string> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) ==
        kConfigKeys.end())
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    if (value.empty())
      throw ConfigError(path + ":" + std::to_string(line_no) + ": empty value");
    values[key] = value;
  }
  return values;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': not a number: " + value);
  }
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "a") cfg.a = parse_double(key, value);
    else if (key == "gamma") cfg.gamma = parse_double(key, value);
    else if (key == "gamma-from") cfg.gamma_from = parse_double(key, value);
    else if (key == "gamma-to") cfg.gamma_to = parse_double(key, value);
    else if (key == "gamma-step") cfg.gamma_step = parse_double(key, value);
    else if (key == "g") cfg.g_values = {parse_double(key, value)};
    else if (key == "state") cfg.state = static_cast<int>(parse_double(key, value));
    else if (key == "xi-re") cfg.xi_re = parse_double(key, value);
    else if (key == "xi-im") cfg.xi_im = parse_double(key, value);
    else if (key == "step") cfg.step = parse_double(key, value);
    else if (key == "tol") cfg.tol = parse_double(key, value);
    else if (key == "target") cfg.target = parse_double(key, value);
    else if (key == "out") cfg.out = value;
    else if (key == "format") cfg.format = value;
    else if (key == "emit-plot") cfg.emit_plot = value == "1" || value == "true";
    else if (key == "jobs") cfg.jobs = static_cast<int>(parse_double(key, value));
  }
}

void add_common(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--a", cfg.a, "well separation");
  cmd->add_option("--step", cfg.step, "integration step h");
  cmd->add_option("--tol", cfg.tol, "solver tolerance");
  cmd->add_option("--out", cfg.out, "output path");
  cmd->add_option("--format", cfg.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--emit-plot", cfg.emit_plot, "write a gnuplot script next to the CSV");
  cmd->add_option("--config", cfg.config_path, "key=value config file");
}

PipelineOptions pipeline_options(const RunConfig& cfg) {
  PipelineOptions opt;
  opt.h = cfg.step;
  opt.tol = cfg.tol;
  opt.jobs = cfg.jobs;
  return opt;
}

MetaInfo meta_of(const RunConfig& cfg) {
  return {cfg.a, cfg.step, cfg.tol, kVersion, cfg.command_line};
}

std::string stem_of(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path;
  return path.substr(0, dot);
}

double plot_window(const RunConfig& cfg) {
  // widest window on the step lattice not exceeding a/2 + 10
  const double want = cfg.a / 2.0 + 10.0;
  return cfg.step * std::floor(want / cfg.step + 1e-9);
}

void emit_scan_plot(const RunConfig& cfg) {
  write_plot_script(cfg.out + ".gp", cfg.out,
                    {{2, "re_E0_1"}, {4, "re_E1_1"}, {6, "re_E0_2"},
                     {3, "im_E0_1"}, {5, "im_E1_1"}, {7, "im_E0_2"}},
                    "gamma");
}

int cmd_scan(const RunConfig& cfg) {
  const double from = cfg.gamma_from.value_or(0.0);
  const double to = cfg.gamma_to.value_or(0.6);
  const double dstep = cfg.gamma_step.value_or(0.005);
  std::optional<double> gamma_crit;
  if (to >= from && dstep > 5e-4) {
    const ExceptionalPoint ep = find_exceptional_point(cfg.a);
    if (ep.gamma_crit > from - 0.01 && ep.gamma_crit < to + 0.01)
      gamma_crit = ep.gamma_crit;
  }
  const std::vector<double> grid = make_gamma_grid(from, to, dstep, gamma_crit);
  const SpectrumTable table =
      sweep_spectrum(cfg.a, grid, cfg.state, pipeline_options(cfg));
  if (cfg.out.empty()) throw ConfigError("scan: --out is required");
  if (cfg.format == "json")
    write_spectrum_json(cfg.out, table, meta_of(cfg));
  else
    write_spectrum_csv(cfg.out, table);
  if (cfg.emit_plot && cfg.format == "csv") emit_scan_plot(cfg);
  std::cout << "rows=" << table.rows.size() << " out=" << cfg.out << '\n';
  return kExitOk;
}

int cmd_solve(const RunConfig& cfg) {
  if (!cfg.gamma) throw ConfigError("solve: --gamma is required");
  const PipelineOptions opt = pipeline_options(cfg);
  const double g = cfg.g_values.empty() ? 0.0 : cfg.g_values.front();
  const OriginalPair pair = solve_original_pair(cfg.a, *cfg.gamma, opt);
  EigenSolution sol = cfg.state == 0 ? pair.s0 : pair.s1;
  if (g > 0.0) {
    SolveOptions so;
    so.h = cfg.step;
    so.tol = cfg.tol;
    const PotentialField field_g =
        original_field(make_pt_trap(*cfg.gamma, cfg.a, g));
    sol = solve_nonlinear_state(field_g, to_unknowns(sol), cfg.tol, so);
  }
  std::cout << "kappa=" << format_float(sol.kappa.real()) << (sol.kappa.imag() < 0 ? "" : "+")
            << format_float(sol.kappa.imag()) << "i"
            << " E=" << format_float(sol.energy().real()) << (sol.energy().imag() < 0 ? "" : "+")
            << format_float(sol.energy().imag()) << "i"
            << " norm=" << format_float(sol.norm)
            << " residual=" << format_float(sol.residual_norm)
            << " iterations=" << sol.iterations << '\n';
  if (!cfg.out.empty()) {
    const PotentialField field =
        original_field(make_pt_trap(*cfg.gamma, cfg.a, g));
    const SampledState wave =
        sample_wavefunction(field, sol, plot_window(cfg), cfg.step);
    if (cfg.format == "json")
      write_wavefunction_json(cfg.out, wave, meta_of(cfg));
    else
      write_wavefunction_csv(cfg.out, wave);
    if (cfg.emit_plot && cfg.format == "csv")
      write_plot_script(cfg.out + ".gp", cfg.out,
                        {{2, "re_phi"}, {3, "im_phi"}, {4, "abs_phi"}}, "x");
  }
  return kExitOk;
}

int cmd_oracle(const RunConfig& cfg) {
  if (!cfg.gamma) throw ConfigError("oracle: --gamma is required");
  const OracleRoots roots = oracle_eigenvalues(*cfg.gamma, cfg.a);
  const Complex e0 = -roots.kappa0 * roots.kappa0;
  const Complex e1 = -roots.kappa1 * roots.kappa1;
  std::cout << "kappa0=" << format_float(roots.kappa0.real()) << (roots.kappa0.imag() < 0 ? "" : "+")
            << format_float(roots.kappa0.imag()) << "i"
            << " kappa1=" << format_float(roots.kappa1.real()) << (roots.kappa1.imag() < 0 ? "" : "+")
            << format_float(roots.kappa1.imag()) << "i\n";
  std::cout << "E0=" << format_float(e0.real()) << (e0.imag() < 0 ? "" : "+")
            << format_float(e0.imag()) << "i"
            << " E1=" << format_float(e1.real()) << (e1.imag() < 0 ? "" : "+")
            << format_float(e1.imag()) << "i\n";
  if (!cfg.out.empty()) write_oracle_json(cfg.out, roots, meta_of(cfg));
  return kExitOk;
}

int cmd_ep(const RunConfig& cfg) {
  const EpStudyReport report = ep_study(cfg.a, pipeline_options(cfg));
  std::cout << "gamma_crit=" << format_float(report.gamma_crit_oracle) << '\n';
  std::cout << "gamma_crit_shooting=" << format_float(report.gamma_crit_shooting)
            << " gap=" << format_float(report.estimate_gap) << '\n';
  std::cout << "survivor: |E|=" << format_float(std::abs(report.survivor_energy))
            << " pt_asymmetry=" << format_float(report.survivor_pt_asymmetry)
            << " norm=" << format_float(report.survivor_norm) << '\n';
  if (!cfg.out.empty()) write_ep_json(cfg.out, report, meta_of(cfg));
  return kExitOk;
}

int cmd_partner(const RunConfig& cfg) {
  if (!cfg.gamma) throw ConfigError("partner: --gamma is required");
  const PipelineOptions opt = pipeline_options(cfg);
  const double g = cfg.g_values.empty() ? 0.0 : cfg.g_values.front();
  const RemovalReport report =
      remove_state(*cfg.gamma, cfg.a, cfg.state, cfg.xi(), g, opt);

  const Complex e2 = report.partner_solution.energy();
  std::cout << "E0_2=" << format_float(e2.real()) << (e2.imag() < 0 ? "" : "+")
            << format_float(e2.imag()) << "i"
            << " Eid=" << format_float(report.ideal_energy.real())
            << (report.ideal_energy.imag() < 0 ? "" : "+")
            << format_float(report.ideal_energy.imag()) << "i"
            << " deviation=" << format_float(std::abs(e2 - report.ideal_energy))
            << (report.pole_warning ? " pole_warning" : "") << '\n';

  if (cfg.out.empty()) return kExitOk;
  // the partner states can be weakly bound; sample the report well past the
  // matching point (the converged state re-propagates cleanly)
  double window = plot_window(cfg);
  if (!report.w.analytic()) {
    const SampledW& s = report.w.sampled();
    window = std::min(window, std::abs(s.x0));
  }
  const SampledState wave = sample_wavefunction(
      report.partner.field, report.partner_solution, window, cfg.step);
  const CurveSamples w_curve =
      sample_superpotential_curve(report.w, -window, window, cfg.step);
  const CurveSamples v2_curve =
      sample_potential_curve(report.partner.field, -window, window, cfg.step);
  if (cfg.format == "json") {
    write_removal_json(cfg.out, report, wave, w_curve, v2_curve, meta_of(cfg));
  } else {
    write_potential_csv(cfg.out, v2_curve);
    const std::string stem = stem_of(cfg.out);
    write_wavefunction_csv(stem + ".wave.csv", wave);
    write_curve_csv(stem + ".w.csv", "x,re_W,im_W", w_curve);
    if (cfg.emit_plot)
      write_plot_script(cfg.out + ".gp", cfg.out, {{2, "re_V"}, {3, "im_V"}}, "x");
  }
  return kExitOk;
}

int cmd_nonlinear(const RunConfig& cfg) {
  const double from = cfg.gamma_from.value_or(0.0);
  const double to = cfg.gamma_to.value_or(0.3);
  const double dstep = cfg.gamma_step.value_or(0.05);
  const std::vector<double> grid =
      make_gamma_grid(from, to, dstep, std::nullopt);
  std::vector<double> gs = cfg.g_values;
  if (gs.empty()) gs = {0.01, 0.1};
  const std::vector<NonlinearRow> rows =
      nonlinear_comparison(gs, cfg.a, grid, pipeline_options(cfg));
  if (cfg.out.empty()) throw ConfigError("nonlinear: --out is required");
  if (cfg.format == "json")
    write_nonlinear_json(cfg.out, rows, meta_of(cfg));
  else
    write_nonlinear_csv(cfg.out, rows);
  std::size_t failed = 0;
  for (const NonlinearRow& row : rows)
    if (!row.converged) ++failed;
  std::cout << "rows=" << rows.size() << " failed=" << failed
            << " out=" << cfg.out << '\n';
  if (cfg.emit_plot && cfg.format == "csv")
    write_plot_script(cfg.out + ".gp", cfg.out,
                      {{3, "re_E0_2"}, {5, "re_Eid"}, {7, "deviation"}}, "gamma");
  return kExitOk;
}

int cmd_calibrate(const RunConfig& cfg) {
  const double a = calibrate_separation(cfg.target);
  std::cout << "a=" << format_float(a) << '\n';
  return kExitOk;
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& args) {
  RunConfig cfg;
  cfg.format.clear();  // resolved after parsing: flag > config > extension
  {
    std::ostringstream oss;
    oss << "ddsusy";
    for (const std::string& a : args) oss << ' ' << a;
    cfg.command_line = oss.str();
  }

  // config file values are applied between the defaults and the flags
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--config") cfg.config_path = args[i + 1];
  if (!cfg.config_path.empty())
    apply_config(cfg, read_config_file(cfg.config_path));

  CLI::App app{"PT-symmetric double-delta trap: spectra and partner potentials"};
  app.require_subcommand(1);

  CLI::App* solve = app.add_subcommand("solve", "solve an original-system state");
  solve->add_option("--gamma", cfg.gamma, "non-Hermiticity parameter");
  solve->add_option("--state", cfg.state, "0 ground, 1 excited")->check(CLI::Range(0, 1));
  solve->add_option("--g", cfg.g_values, "nonlinearity strength");
  add_common(solve, cfg);

  CLI::App* oracle = app.add_subcommand("oracle", "closed-form eigenvalues");
  oracle->add_option("--gamma", cfg.gamma, "non-Hermiticity parameter");
  add_common(oracle, cfg);

  CLI::App* ep = app.add_subcommand("ep", "exceptional-point study");
  ep->add_option("--jobs", cfg.jobs, "sweep parallelism");
  add_common(ep, cfg);

  CLI::App* partner = app.add_subcommand("partner", "state-removal report");
  partner->add_option("--gamma", cfg.gamma, "non-Hermiticity parameter");
  partner->add_option("--state", cfg.state, "state to remove")->check(CLI::Range(0, 1));
  partner->add_option("--g", cfg.g_values, "nonlinearity strength");
  partner->add_option("--xi-re", cfg.xi_re, "Re of the left integration constant");
  partner->add_option("--xi-im", cfg.xi_im, "Im of the left integration constant");
  add_common(partner, cfg);

  CLI::App* scan = app.add_subcommand("scan", "gamma sweep of both sectors");
  scan->add_option("--gamma-from", cfg.gamma_from, "sweep start");
  scan->add_option("--gamma-to", cfg.gamma_to, "sweep end");
  scan->add_option("--gamma-step", cfg.gamma_step, "sweep step");
  scan->add_option("--state", cfg.state, "state to remove")->check(CLI::Range(0, 1));
  scan->add_option("--jobs", cfg.jobs, "sweep parallelism");
  add_common(scan, cfg);

  CLI::App* nonlinear = app.add_subcommand("nonlinear", "weak-nonlinearity comparison");
  nonlinear->add_option("--g", cfg.g_values, "nonlinearity strengths");
  nonlinear->add_option("--gamma-from", cfg.gamma_from, "sweep start");
  nonlinear->add_option("--gamma-to", cfg.gamma_to, "sweep end");
  nonlinear->add_option("--gamma-step", cfg.gamma_step, "sweep step");
  add_common(nonlinear, cfg);

  CLI::App* calibrate = app.add_subcommand("calibrate", "separation from |E0|");
  calibrate->add_option("--target", cfg.target, "|E0| at gamma = 0");
  add_common(calibrate, cfg);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help() << '\n';
    throw;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All) << '\n';
    throw;
  }

  for (CLI::App* sub :
       {solve, oracle, ep, partner, scan, nonlinear, calibrate})
    if (sub->parsed()) cfg.command = sub->get_name();

  if (cfg.format.empty()) {
    const bool json_out =
        cfg.out.size() > 5 && cfg.out.rfind(".json") == cfg.out.size() - 5;
    cfg.format = json_out ? "json" : "csv";
  }
  return cfg;
}

int run_cli(const std::vector<std::string>& args) {
  RunConfig cfg;
  try {
    cfg = parse_args(args);
  } catch (const CLI::CallForHelp&) {
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    return kExitOk;
  } catch (const CLI::ParseError& err) {
    std::cerr << "argument error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kExitUsage;
  }

  try {
    if (cfg.command == "scan") return cmd_scan(cfg);
    if (cfg.command == "solve") return cmd_solve(cfg);
    if (cfg.command == "oracle") return cmd_oracle(cfg);
    if (cfg.command == "ep") return cmd_ep(cfg);
    if (cfg.command == "partner") return cmd_partner(cfg);
    if (cfg.command == "nonlinear") return cmd_nonlinear(cfg);
    if (cfg.command == "calibrate") return cmd_calibrate(cfg);
    std::cerr << "unknown command\n";
    return kExitUsage;
  } catch (const ConfigError& err) {
    std::cerr << "argument error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& err) {
    std::cerr << "argument error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const IoError& err) {
    std::cerr << "i/o error: " << err.what() << '\n';
    return kExitIo;
  } catch (const SolverError& err) {
    std::cerr << "solver error: " << err.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitSolver;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace ddsusy
