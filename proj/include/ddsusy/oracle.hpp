#pragma once

#include "ddsusy/types.hpp"

namespace ddsusy {

/// Closed-form ground truth for the linear double-delta trap.
///
/// Matching e^{kappa x} | A e^{kappa x} + B e^{-kappa x} | C e^{-kappa x}
/// across the two deltas (continuity plus derivative jump) gives the
/// characteristic function below; its nonzero roots with Re kappa > 0 are
/// the bound-state eigenvalues E = -kappa^2.

/// (2k + nu)(2k + nu*) - nu nu* exp(-2 k a), nu = -1 + i gamma.
/// kappa = 0 is always a trivial (non-normalisable) root.
Complex char_fn(Complex kappa, double gamma, double a);

/// d char_fn / d kappa.
Complex char_fn_dkappa(Complex kappa, double gamma, double a);

struct OracleRoots {
  Complex kappa0;  // ground state below the EP; Im E > 0 branch above
  Complex kappa1;  // excited state below the EP; Im E < 0 branch above
  double gamma = 0.0;
  double a = 0.0;
  bool ep_degenerate = false;  // roots collided within 1e-12
};

/// Both bound-state roots at the given gamma, found by complex Newton on the
/// kappa-deflated characteristic function with continuation from gamma = 0.
OracleRoots oracle_eigenvalues(double gamma, double a);

struct ExceptionalPoint {
  double gamma_crit = 0.0;
  Complex kappa_ep{0.0, 0.0};
};

/// Solves char_fn = 0 together with d char_fn/d kappa = 0 (two real
/// equations in real kappa, gamma) by a damped 2-D Newton iteration.
ExceptionalPoint find_exceptional_point(double a);

/// Separation a for which the gamma = 0 ground state satisfies
/// kappa_0^2 = target_E0_abs.  Valid targets lie in (0.25, 1).
double calibrate_separation(double target_E0_abs);

/// gamma = 0 matching-equation roots, by bisection.
/// Even state: kappa (1 + tanh(kappa a / 2)) = 1.
double hermitian_even_kappa(double a);
/// Odd state: kappa (1 + coth(kappa a / 2)) = 1; requires a > 2.
double hermitian_odd_kappa(double a);

}  // namespace ddsusy
