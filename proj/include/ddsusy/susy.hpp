#pragma once

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "ddsusy/model.hpp"
#include "ddsusy/shooting.hpp"
#include "ddsusy/types.hpp"

namespace ddsusy {

enum class XiBranch { finite, plus_inf, minus_inf };

/// One region of a piecewise superpotential, W(x) = -kappa tanh(kappa (x - xi)).
/// The constant branches encode xi -> -inf (W = -kappa) and xi -> +inf
/// (W = +kappa).
struct TanhPiece {
  double x_lo = 0.0;
  double x_hi = 0.0;
  Complex kappa{0.0, 0.0};
  Complex xi{0.0, 0.0};
  XiBranch branch = XiBranch::finite;
};

Complex piece_value(const TanhPiece& piece, double x);
Complex piece_derivative(const TanhPiece& piece, double x);

/// Real-axis poles of the piece inside [window_lo, window_hi]: solutions of
/// cosh(kappa (x - xi)) = 0 whose imaginary part is below im_tol.
std::vector<double> piece_real_poles(const TanhPiece& piece, double window_lo,
                                     double window_hi, double im_tol = 1e-6);

/// Distance of the nearest complex pole to the real axis inside the window
/// (infinity when the piece has no nearby pole).
double piece_pole_distance(const TanhPiece& piece, double window_lo,
                           double window_hi);

/// Uniformly sampled superpotential; delta nodes carry both limits in the
/// same convention as FieldTable (main array = right side).
struct SampledW {
  double x0 = 0.0;
  double step = 0.0;
  ComplexArray w;
  std::vector<std::pair<long, Complex>> left_limits;
  ComplexArray v1;  // source smooth potential at the nodes (shift + g|phi|^2)

  Index size() const { return w.size(); }
  double x_at(Index i) const { return x0 + static_cast<double>(i) * step; }
};

struct Superpotential {
  std::variant<std::array<TanhPiece, 3>, SampledW> rep;
  std::vector<JumpEvent> jumps;  // measured jump at each delta position
  Complex source_kappa{0.0, 0.0};
  std::vector<double> poles;
  double junction_mismatch = 0.0;  // sampled tail-splice diagnostic
  Complex xi_mid{0.0, 0.0};
  Complex xi_right{0.0, 0.0};
  XiBranch right_branch = XiBranch::plus_inf;

  bool analytic() const {
    return std::holds_alternative<std::array<TanhPiece, 3>>(rep);
  }
  const std::array<TanhPiece, 3>& pieces() const {
    return std::get<std::array<TanhPiece, 3>>(rep);
  }
  const SampledW& sampled() const { return std::get<SampledW>(rep); }
};

Complex w_eval(const Superpotential& w, double x, Side side = Side::right);

/// Closed-form superpotential of the linear system for eigenvalue kappa:
/// constant -kappa on the left, tanh with a complex offset between the
/// deltas, constant +kappa on the right.  kappa must satisfy the
/// characteristic equation to within 1e-6.
Superpotential superpotential_standard(Complex kappa, double gamma, double a);

/// W = -phi'/phi sampled from a converged state.  Throws NodalStateError
/// when |phi| drops below 1e-8 anywhere on the grid.
Superpotential superpotential_from_state(const EigenSolution& solution,
                                         const PotentialField& field,
                                         double step);

/// One-parameter family: the left region takes xi_left, each delta crossing
/// forces the jump (-nu* then -nu) and thereby xi_mid and xi_right.  Pieces
/// with a real-axis pole inside the evaluation window are rejected.
/// xi_left = nullopt selects the constant branch and reproduces the
/// standard form exactly.
Superpotential superpotential_family(Complex kappa, double gamma, double a,
                                     std::optional<Complex> xi_left);

/// Partner potential V2: smooth part W^2 + W' per region plus the
/// sign-flipped delta terms -nu, -nu*.
///
/// The W' contribution matters: the square of the inner tanh ratio alone
/// would give a flat-topped barrier, while W^2 + W' produces the attractive
/// well between the deltas (V2(0) = -kappa^2 for the gamma = 0 ground-state
/// construction) that the partner ground state binds to.
struct PartnerPotential {
  PotentialField field;
  Complex asymptote{0.0, 0.0};
};

PartnerPotential partner_potential(const Superpotential& w,
                                   const TrapSpec& trap);

struct SampledValues {
  double x0 = 0.0;
  double step = 0.0;
  ComplexArray values;

  Index size() const { return values.size(); }
  double x_at(Index i) const { return x0 + static_cast<double>(i) * step; }
};

SampledState merged_state(const EigenSolution& solution);

/// B- phi = (W + d/dx) phi on the sample grid.  Applied to the state that
/// built W the result vanishes; applied to the other eigenstate it is an
/// eigenfunction of the partner system.
SampledValues apply_annihilator(const Superpotential& w,
                                const SampledState& state);
SampledValues apply_annihilator(const Superpotential& w,
                                const EigenSolution& solution);

/// V1 = shift + g |phi|^2 on the state's grid.
SampledValues make_v1_samples(const SampledState& state, Complex shift,
                              double g);

/// Numerical superpotential from the Riccati equation W' = W^2 - V1,
/// integrated left to right with the exact jumps -nu*, -nu at the deltas.
/// start_w = nullopt selects the standard branch: the left tail starts on
/// the -kappa asymptote and the right tail is integrated inward from
/// +kappa (its stable direction), spliced at +a/2 with an exponentially
/// decaying correction; the splice defect is reported as
/// junction_mismatch.  A finite start_w is integrated forward throughout;
/// blow-ups are recorded as pole markers and integration restarts just past
/// the pole on the local -1/(x - x_pole) branch.
/// v1.step must be half of out_step.
Superpotential riccati_superpotential(const SampledValues& v1,
                                      const TrapSpec& trap,
                                      std::optional<Complex> start_w,
                                      double out_step);

/// max over off-delta grid points of |W^2 - W' - V1_smooth|, combined with
/// the deviation of the recorded jumps from -nu, -nu*.
double verify_factorization(const Superpotential& w, const TrapSpec& trap);

}  // namespace ddsusy
