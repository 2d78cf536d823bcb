#pragma once

#include <functional>
#include <vector>

#include "ddsusy/integrator.hpp"
#include "ddsusy/model.hpp"
#include "ddsusy/types.hpp"

namespace ddsusy {

/// Unknowns of the five-dimensional root search: three initial values (the
/// global phase is fixed by Im phi(0) = 0) plus the complex kappa with
/// E = -kappa^2.
struct ShootingUnknowns {
  double re_phi0 = 0.0;
  double re_dphi0 = 0.0;
  double im_dphi0 = 0.0;
  double re_kappa = 0.0;
  double im_kappa = 0.0;

  Complex kappa() const { return {re_kappa, im_kappa}; }
  Complex energy() const { return -kappa() * kappa(); }
};

struct SolveOptions {
  double h = 1e-3;       // propagation step; a/2 must be a multiple
  double tol = 1e-10;    // Newton tolerance on the residual infinity-norm
  int max_iter = 60;
  double far_pad = 15.0; // boundary distance beyond the deltas when the
                         // smooth part is not exactly constant outside
  double nonlinear_pad = 8.0;  // boundary for g > 0 shots; far enough for
                               // g |phi|^2 < 1e-6 at the matching point while
                               // keeping trial shots clear of the g-driven
                               // blow-up of contaminated growing modes
};

/// A converged bound state.  Trajectories run from the origin outward to the
/// matching points +-x_boundary; energy is recomputed from kappa.
struct EigenSolution {
  Complex kappa{0.0, 0.0};
  Trajectory left;   // x: 0 -> -x_boundary
  Trajectory right;  // x: 0 -> +x_boundary
  Complex decay{0.0, 0.0};  // asymptotic decay rate used in the residuals
  double norm = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;

  Complex energy() const { return -kappa * kappa; }
  Complex phi0() const { return right.phi(0); }
  Complex dphi0() const { return right.dphi(0); }
  double x_boundary() const { return std::abs(right.x_at(right.size() - 1)); }
};

/// Matching point for the decay conditions: just outside the deltas when the
/// smooth part is exactly constant there, far out otherwise.
double boundary_point(const PotentialField& field, const SolveOptions& opt);

/// The five real residuals: Re/Im of r+ = phi'(x_b) + lambda phi(x_b),
/// Re/Im of r- = phi'(-x_b) - lambda phi(-x_b), and norm - 1, with
/// lambda = sqrt(asymptote - E).
Vector residuals(const ShootingUnknowns& u, const PotentialField& field,
                 const SolveOptions& opt = {});

/// Newton root search on the residuals from the given guess.  The returned
/// state is unit-normalised and phase-gauged (phi(0) real-positive; if
/// phi(0) vanishes, phi'(0) positive-imaginary).
EigenSolution solve_state(const PotentialField& field,
                          const ShootingUnknowns& guess, double tol = 1e-10,
                          const SolveOptions& opt = {});

/// Same contract as solve_state; the g |phi|^2 term of the field's trap is
/// integrated self-consistently along each shot.
EigenSolution solve_nonlinear_state(const PotentialField& field,
                                    const ShootingUnknowns& guess,
                                    double tol = 1e-10,
                                    const SolveOptions& opt = {});

/// Analytic gamma = 0 seed: state_index 0 -> even (cosh) state,
/// 1 -> odd (i sinh) state.
ShootingUnknowns hermitian_seed(double a, int state_index);

ShootingUnknowns to_unknowns(const EigenSolution& solution);
ShootingUnknowns conjugate_seed(const ShootingUnknowns& u);

/// Solves along gamma_grid, seeding each point from the previous solution;
/// failed steps are bisected up to 6 times before a gap is reported.
std::vector<EigenSolution> continue_in_gamma(
    const std::function<PotentialField(double)>& field_family,
    const std::vector<double>& gamma_grid, const ShootingUnknowns& seed,
    const SolveOptions& opt = {});

/// Uniform resampling of a converged state on [-x_max, x_max].
struct SampledState {
  double x0 = 0.0;
  double step = 0.0;
  ComplexArray phi;
  ComplexArray dphi;

  Index size() const { return phi.size(); }
  double x_at(Index i) const { return x0 + static_cast<double>(i) * step; }
};

SampledState sample_wavefunction(const PotentialField& field,
                                 const EigenSolution& solution, double x_max,
                                 double step);

/// max over the sampled grid of |phi(-x) - conj(phi(x))|.
double pt_asymmetry(const EigenSolution& solution);

}  // namespace ddsusy
