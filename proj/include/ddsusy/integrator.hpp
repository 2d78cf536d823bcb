#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "ddsusy/model.hpp"
#include "ddsusy/types.hpp"

namespace ddsusy {

/// Wavefunction value and spatial derivative at one point.
struct StatePair {
  Complex phi{0.0, 0.0};
  Complex dphi{0.0, 0.0};
};

struct JumpEvent {
  double position = 0.0;
  Complex strength{0.0, 0.0};
};

/// Uniformly sampled propagation result.  `step` is signed; sample i sits at
/// x0 + i * step.  States at delta nodes are stored on the outgoing side.
struct Trajectory {
  double x0 = 0.0;
  double step = 0.0;
  ComplexArray phi;
  ComplexArray dphi;
  std::vector<JumpEvent> jumps;

  Index size() const { return phi.size(); }
  double x_at(Index i) const { return x0 + static_cast<double>(i) * step; }
  StatePair front() const { return {phi(0), dphi(0)}; }
  StatePair back() const { return {phi(size() - 1), dphi(size() - 1)}; }
};

/// Half-step cache of a field's smooth part over one propagation span.
/// Sample j sits at x0 + j * dx with dx = h/2; delta nodes carry both limits.
struct FieldTable {
  double x0 = 0.0;
  double dx = 0.0;
  ComplexArray values;  // right-side limits
  std::unordered_map<long, Complex> left_values;
  struct DeltaNode {
    long index2 = 0;  // half-step index
    Complex strength{0.0, 0.0};
  };
  std::vector<DeltaNode> deltas;
  double g = 0.0;

  Complex value(long index2, Side side) const;
};

/// Samples field.smooth on the half-step lattice spanning [x_from, x_to].
/// Every delta inside the span must lie on a full-step node.
FieldTable tabulate_field(const PotentialField& field, double x_from,
                          double x_to, double h);

inline constexpr double kOverflowGuard = 1e150;

/// Classical RK4 steps of phi'' = (V(x) + g |phi|^2 - E) phi between deltas;
/// crossing a delta of strength s applies the exact derivative jump
/// dphi += s * phi (sign-adjusted for leftward propagation).
Trajectory propagate(const FieldTable& table, Complex energy, StatePair start,
                     double x_from, double x_to, double h,
                     double overflow_guard = kOverflowGuard);

Trajectory propagate(const PotentialField& field, Complex energy,
                     StatePair start, double x_from, double x_to, double h,
                     double overflow_guard = kOverflowGuard);

/// Composite Simpson integral of uniformly sampled values (odd interval
/// counts fall back to a 3/8 block at the end).
double simpson(const RealArray& values, double h);

/// Integral of |phi|^2 over two trajectories sharing the origin sample plus
/// analytic exponential tails |phi(+-x_end)|^2 / (2 Re decay_rate).
double norm_with_tails(const Trajectory& traj_left,
                       const Trajectory& traj_right, Complex decay_rate);

using ResidualFn = std::function<Vector(const Vector&)>;

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 50;
  double fd_step_rel = 1e-7;
  double fd_step_floor = 1e-9;
  int max_halvings = 12;
  double pivot_rtol = 1e-14;
  // Take minimum-norm steps on rank-deficient Jacobians instead of
  // throwing.  Needed when the residual map carries an exact symmetry,
  // e.g. the unfixed global phase of a state with phi(0) = 0.
  bool allow_rank_deficient = false;
};

struct NewtonResult {
  Vector u;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// Damped Newton iteration with a forward finite-difference Jacobian;
/// the step is halved until the residual infinity-norm decreases.
NewtonResult newton_root(const ResidualFn& residual_fn, Vector u0,
                         const NewtonOptions& options = {});

Vector newton_root(const ResidualFn& residual_fn, const Vector& u0, double tol,
                   int max_iter);

}  // namespace ddsusy
