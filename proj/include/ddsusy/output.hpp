#pragma once

#include <string>
#include <vector>

#include "ddsusy/oracle.hpp"
#include "ddsusy/pipeline.hpp"
#include "ddsusy/susy.hpp"

namespace ddsusy {

/// 17-significant-digit decimal, the fixed float format of every file.
std::string format_float(double v);

struct CurveSamples {
  std::vector<double> x;
  std::vector<Complex> y;
};

/// Smooth part of a field on a uniform grid (right-side limits at the
/// deltas); registered poles produce infinities.
CurveSamples sample_potential_curve(const PotentialField& field, double x_lo,
                                    double x_hi, double step);

/// Superpotential on a uniform grid; sampled forms are decimated on their
/// native lattice.
CurveSamples sample_superpotential_curve(const Superpotential& w, double x_lo,
                                         double x_hi, double step);

struct MetaInfo {
  double a = 0.0;
  double h = 0.0;
  double tol = 0.0;
  std::string version;
  std::string command_line;
};

void write_spectrum_csv(const std::string& path, const SpectrumTable& table);
void write_spectrum_json(const std::string& path, const SpectrumTable& table,
                         const MetaInfo& meta);

void write_wavefunction_csv(const std::string& path, const SampledState& state);
void write_wavefunction_json(const std::string& path, const SampledState& state,
                             const MetaInfo& meta);

void write_potential_csv(const std::string& path, const CurveSamples& curve);

void write_curve_csv(const std::string& path, const std::string& header,
                     const CurveSamples& curve);

void write_nonlinear_csv(const std::string& path,
                         const std::vector<NonlinearRow>& rows);
void write_nonlinear_json(const std::string& path,
                          const std::vector<NonlinearRow>& rows,
                          const MetaInfo& meta);

void write_removal_json(const std::string& path, const RemovalReport& report,
                        const SampledState& partner_wave,
                        const CurveSamples& w_curve,
                        const CurveSamples& v2_curve, const MetaInfo& meta);

void write_ep_json(const std::string& path, const EpStudyReport& report,
                   const MetaInfo& meta);

void write_oracle_json(const std::string& path, const OracleRoots& roots,
                       const MetaInfo& meta);

/// Column plot script (gnuplot) referencing the named CSV columns.
void write_plot_script(const std::string& path, const std::string& csv_path,
                       const std::vector<std::pair<int, std::string>>& columns,
                       const std::string& x_label);

}  // namespace ddsusy
