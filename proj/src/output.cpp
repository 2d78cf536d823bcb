#include "ddsusy/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace ddsusy {

namespace {

using nlohmann::ordered_json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

ordered_json meta_block(const MetaInfo& meta) {
  return ordered_json{{"a", meta.a},
                      {"h", meta.h},
                      {"tol", meta.tol},
                      {"version", meta.version},
                      {"command", meta.command_line}};
}

void dump_json(const std::string& path, const ordered_json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

}  // namespace

std::string format_float(double v) {
  if (v == 0.0) v = 0.0;  // normalise negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CurveSamples sample_potential_curve(const PotentialField& field, double x_lo,
                                    double x_hi, double step) {
  CurveSamples curve;
  const long n = std::lround((x_hi - x_lo) / step);
  for (long i = 0; i <= n; ++i) {
    const double x = x_lo + i * step;
    curve.x.push_back(x);
    curve.y.push_back(evaluate_smooth(field, x));
  }
  return curve;
}

CurveSamples sample_superpotential_curve(const Superpotential& w, double x_lo,
                                         double x_hi, double step) {
  CurveSamples curve;
  if (w.analytic()) {
    const long n = std::lround((x_hi - x_lo) / step);
    for (long i = 0; i <= n; ++i) {
      const double x = x_lo + i * step;
      curve.x.push_back(x);
      curve.y.push_back(w_eval(w, x, Side::right));
    }
    return curve;
  }
  const SampledW& s = w.sampled();
  const long stride = std::max(1L, std::lround(step / s.step));
  for (Index i = 0; i < s.size(); i += stride) {
    const double x = s.x_at(i);
    if (x < x_lo - 1e-12 || x > x_hi + 1e-12) continue;
    curve.x.push_back(x);
    curve.y.push_back(s.w(i));
  }
  return curve;
}

void write_spectrum_csv(const std::string& path, const SpectrumTable& table) {
  std::ofstream out = open_out(path);
  out << "gamma,re_E0_1,im_E0_1,re_E1_1,im_E1_1,re_E0_2,im_E0_2\n";
  for (const SpectrumRow& row : table.rows)
    out << format_float(row.gamma) << ',' << format_float(row.E0_1.real()) << ','
        << format_float(row.E0_1.imag()) << ',' << format_float(row.E1_1.real())
        << ',' << format_float(row.E1_1.imag()) << ','
        << format_float(row.E0_2.real()) << ',' << format_float(row.E0_2.imag())
        << '\n';
  finish(out, path);
}

void write_spectrum_json(const std::string& path, const SpectrumTable& table,
                         const MetaInfo& meta) {
  ordered_json rows = ordered_json::array();
  for (const SpectrumRow& row : table.rows)
    rows.push_back(ordered_json{{"gamma", row.gamma},
                                {"re_E0_1", row.E0_1.real()},
                                {"im_E0_1", row.E0_1.imag()},
                                {"re_E1_1", row.E1_1.real()},
                                {"im_E1_1", row.E1_1.imag()},
                                {"re_E0_2", row.E0_2.real()},
                                {"im_E0_2", row.E0_2.imag()},
                                {"gamma_crit_flag", row.gamma_crit_flag}});
  dump_json(path, ordered_json{{"meta", meta_block(meta)},
                               {"removed_index", table.removed_index},
                               {"rows", rows}});
}

void write_wavefunction_csv(const std::string& path, const SampledState& state) {
  std::ofstream out = open_out(path);
  out << "x,re_phi,im_phi,abs_phi\n";
  for (Index i = 0; i < state.size(); ++i)
    out << format_float(state.x_at(i)) << ',' << format_float(state.phi(i).real())
        << ',' << format_float(state.phi(i).imag()) << ','
        << format_float(std::abs(state.phi(i))) << '\n';
  finish(out, path);
}

void write_wavefunction_json(const std::string& path, const SampledState& state,
                             const MetaInfo& meta) {
  ordered_json rows = ordered_json::array();
  for (Index i = 0; i < state.size(); ++i)
    rows.push_back(ordered_json{{"x", state.x_at(i)},
                                {"re_phi", state.phi(i).real()},
                                {"im_phi", state.phi(i).imag()},
                                {"abs_phi", std::abs(state.phi(i))}});
  dump_json(path, ordered_json{{"meta", meta_block(meta)}, {"rows", rows}});
}

void write_curve_csv(const std::string& path, const std::string& header,
                     const CurveSamples& curve) {
  std::ofstream out = open_out(path);
  out << header << '\n';
  for (std::size_t i = 0; i < curve.x.size(); ++i)
    out << format_float(curve.x[i]) << ',' << format_float(curve.y[i].real())
        << ',' << format_float(curve.y[i].imag()) << '\n';
  finish(out, path);
}

void write_potential_csv(const std::string& path, const CurveSamples& curve) {
  write_curve_csv(path, "x,re_V,im_V", curve);
}

void write_nonlinear_csv(const std::string& path,
                         const std::vector<NonlinearRow>& rows) {
  std::ofstream out = open_out(path);
  out << "g,gamma,re_E0_2,im_E0_2,re_Eid,im_Eid,deviation\n";
  for (const NonlinearRow& row : rows) {
    if (!row.converged) continue;
    out << format_float(row.g) << ',' << format_float(row.gamma) << ','
        << format_float(row.E0_2.real()) << ',' << format_float(row.E0_2.imag())
        << ',' << format_float(row.E_id.real()) << ','
        << format_float(row.E_id.imag()) << ',' << format_float(row.deviation)
        << '\n';
  }
  finish(out, path);
}

void write_nonlinear_json(const std::string& path,
                          const std::vector<NonlinearRow>& rows,
                          const MetaInfo& meta) {
  ordered_json jrows = ordered_json::array();
  for (const NonlinearRow& row : rows) {
    ordered_json jr{{"g", row.g},
                    {"gamma", row.gamma},
                    {"re_E0_2", row.E0_2.real()},
                    {"im_E0_2", row.E0_2.imag()},
                    {"re_Eid", row.E_id.real()},
                    {"im_Eid", row.E_id.imag()},
                    {"deviation", row.deviation},
                    {"converged", row.converged}};
    if (!row.converged) jr["error"] = row.message;
    jrows.push_back(std::move(jr));
  }
  dump_json(path, ordered_json{{"meta", meta_block(meta)}, {"rows", jrows}});
}

void write_removal_json(const std::string& path, const RemovalReport& report,
                        const SampledState& partner_wave,
                        const CurveSamples& w_curve,
                        const CurveSamples& v2_curve, const MetaInfo& meta) {
  ordered_json j;
  j["meta"] = meta_block(meta);
  j["removed_index"] = report.removed_index;
  j["gamma"] = report.gamma;
  j["a"] = report.a;
  j["g"] = report.g;
  if (report.xi_left) {
    j["xi_left"] = ordered_json{{"re", report.xi_left->real()},
                                {"im", report.xi_left->imag()}};
    j["xi_mid"] = ordered_json{{"re", report.w.xi_mid.real()},
                               {"im", report.w.xi_mid.imag()}};
    j["xi_right"] = ordered_json{{"re", report.w.xi_right.real()},
                                 {"im", report.w.xi_right.imag()}};
  } else {
    j["xi_left"] = "standard";
  }
  j["re_E_removed"] = report.removed_energy.real();
  j["im_E_removed"] = report.removed_energy.imag();
  j["re_E_other"] = report.other_energy.real();
  j["im_E_other"] = report.other_energy.imag();
  j["re_Eid"] = report.ideal_energy.real();
  j["im_Eid"] = report.ideal_energy.imag();
  j["pole_warning"] = report.pole_warning;
  j["factorization_residual"] = report.factorization_residual;

  const EigenSolution& ps = report.partner_solution;
  ordered_json partner{{"re_kappa", ps.kappa.real()},
                       {"im_kappa", ps.kappa.imag()},
                       {"re_E0_2", ps.energy().real()},
                       {"im_E0_2", ps.energy().imag()},
                       {"norm", ps.norm},
                       {"residual_norm", ps.residual_norm},
                       {"iterations", ps.iterations}};
  ordered_json wave = ordered_json::array();
  for (Index i = 0; i < partner_wave.size(); ++i)
    wave.push_back(ordered_json{{"x", partner_wave.x_at(i)},
                                {"re_phi", partner_wave.phi(i).real()},
                                {"im_phi", partner_wave.phi(i).imag()},
                                {"abs_phi", std::abs(partner_wave.phi(i))}});
  partner["wavefunction"] = std::move(wave);
  j["partner"] = std::move(partner);

  ordered_json wrows = ordered_json::array();
  for (std::size_t i = 0; i < w_curve.x.size(); ++i)
    wrows.push_back(ordered_json{{"x", w_curve.x[i]},
                                 {"re_W", w_curve.y[i].real()},
                                 {"im_W", w_curve.y[i].imag()}});
  j["superpotential"] = std::move(wrows);

  ordered_json vrows = ordered_json::array();
  for (std::size_t i = 0; i < v2_curve.x.size(); ++i)
    vrows.push_back(ordered_json{{"x", v2_curve.x[i]},
                                 {"re_V", v2_curve.y[i].real()},
                                 {"im_V", v2_curve.y[i].imag()}});
  j["V2"] = std::move(vrows);
  dump_json(path, j);
}

void write_ep_json(const std::string& path, const EpStudyReport& report,
                   const MetaInfo& meta) {
  dump_json(path,
            ordered_json{{"meta", meta_block(meta)},
                         {"gamma_crit_oracle", report.gamma_crit_oracle},
                         {"re_kappa_ep", report.kappa_ep.real()},
                         {"im_kappa_ep", report.kappa_ep.imag()},
                         {"gamma_crit_shooting", report.gamma_crit_shooting},
                         {"estimate_gap", report.estimate_gap},
                         {"re_E_survivor", report.survivor_energy.real()},
                         {"im_E_survivor", report.survivor_energy.imag()},
                         {"survivor_pt_asymmetry", report.survivor_pt_asymmetry},
                         {"survivor_norm", report.survivor_norm}});
}

void write_oracle_json(const std::string& path, const OracleRoots& roots,
                       const MetaInfo& meta) {
  dump_json(path, ordered_json{{"meta", meta_block(meta)},
                               {"gamma", roots.gamma},
                               {"re_kappa0", roots.kappa0.real()},
                               {"im_kappa0", roots.kappa0.imag()},
                               {"re_kappa1", roots.kappa1.real()},
                               {"im_kappa1", roots.kappa1.imag()},
                               {"re_E0", (-roots.kappa0 * roots.kappa0).real()},
                               {"im_E0", (-roots.kappa0 * roots.kappa0).imag()},
                               {"re_E1", (-roots.kappa1 * roots.kappa1).real()},
                               {"im_E1", (-roots.kappa1 * roots.kappa1).imag()},
                               {"ep_degenerate", roots.ep_degenerate}});
}

void write_plot_script(const std::string& path, const std::string& csv_path,
                       const std::vector<std::pair<int, std::string>>& columns,
                       const std::string& x_label) {
  std::ofstream out = open_out(path);
  out << "set datafile separator ','\n"
      << "set key outside\n"
      << "set xlabel '" << x_label << "'\n"
      << "plot ";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out << ", \\\n     ";
    out << "'" << csv_path << "' every ::1 using 1:" << columns[i].first
        << " with lines title '" << columns[i].second << "'";
  }
  out << '\n';
  finish(out, path);
}

}  // namespace ddsusy
