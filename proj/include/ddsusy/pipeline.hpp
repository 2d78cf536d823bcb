#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ddsusy/model.hpp"
#include "ddsusy/shooting.hpp"
#include "ddsusy/susy.hpp"
#include "ddsusy/types.hpp"

namespace ddsusy {

struct PipelineOptions {
  double h = 1e-3;
  double tol = 1e-10;
  int jobs = 1;        // partner solves per sweep row run concurrently
  double far_pad = 15.0;
};

/// Both eigenstates of the original linear system at one gamma.
/// Index 0 is the ground state below the exceptional point and the
/// positive-Im-energy branch above it.
struct OriginalPair {
  EigenSolution s0, s1;
  bool degenerate = false;  // kappas collided (exceptional point)
};

OriginalPair solve_original_pair(double a, double gamma,
                                 const PipelineOptions& opt = {});

struct SpectrumRow {
  double gamma = 0.0;
  Complex E0_1{0.0, 0.0};
  Complex E1_1{0.0, 0.0};
  Complex E0_2{0.0, 0.0};
  bool gamma_crit_flag = false;  // first row past the exceptional point
};

struct SpectrumTable {
  double a = 0.0;
  int removed_index = 0;
  std::vector<SpectrumRow> rows;
};

/// Original and partner spectra along the gamma grid; the removal uses the
/// standard superpotential from the state removed_index at each point.
SpectrumTable sweep_spectrum(double a, const std::vector<double>& gamma_grid,
                             int removed_index,
                             const PipelineOptions& opt = {});

struct RemovalReport {
  int removed_index = 0;
  double gamma = 0.0;
  double a = 0.0;
  double g = 0.0;
  std::optional<Complex> xi_left;  // empty = standard construction
  Superpotential w;
  PartnerPotential partner;
  EigenSolution partner_solution;
  Complex removed_energy{0.0, 0.0};
  Complex other_energy{0.0, 0.0};
  Complex ideal_energy{0.0, 0.0};  // E_other - E_removed
  bool pole_warning = false;       // near-pole in the inner region
  double factorization_residual = 0.0;
};

/// Full state-removal construction at one parameter point.  g > 0 builds the
/// superpotential from the Riccati equation on the solved nonlinear state.
RemovalReport remove_state(double gamma, double a, int removed_index,
                           std::optional<Complex> xi_left, double g,
                           const PipelineOptions& opt = {});

struct NonlinearRow {
  double g = 0.0;
  double gamma = 0.0;
  Complex E0_2{0.0, 0.0};
  Complex E_id{0.0, 0.0};
  double deviation = 0.0;
  bool converged = false;
  std::string message;
};

/// Ground-removal partner energies versus the ideal value for each (g, gamma);
/// solver failures are reported per row, the table is still produced.
std::vector<NonlinearRow> nonlinear_comparison(
    const std::vector<double>& g_values, double a,
    const std::vector<double>& gamma_grid, const PipelineOptions& opt = {});

struct EpStudyReport {
  double gamma_crit_oracle = 0.0;
  Complex kappa_ep{0.0, 0.0};
  double gamma_crit_shooting = 0.0;
  double estimate_gap = 0.0;
  Complex survivor_energy{0.0, 0.0};
  double survivor_pt_asymmetry = 0.0;
  double survivor_norm = 0.0;
};

/// Locates the exceptional point independently with the oracle and with
/// shooting continuation (bisection on the collapse of the real-part gap of
/// the kappas) and solves the partner survivor state at the critical gamma.
/// Throws if the two estimates disagree by more than 1e-3.
EpStudyReport ep_study(double a, const PipelineOptions& opt = {});

/// Uniform grid [from, to] with the given step, refined to fine_step inside
/// +-0.01 of gamma_crit when the range crosses it.
std::vector<double> make_gamma_grid(double from, double to, double step,
                                    std::optional<double> gamma_crit,
                                    double fine_step = 5e-4);

}  // namespace ddsusy
