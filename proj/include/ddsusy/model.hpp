#pragma once

#include <functional>
#include <vector>

#include "ddsusy/types.hpp"

namespace ddsusy {

/// A Dirac delta term of the potential: position and complex strength.
struct DeltaWell {
  double position = 0.0;
  Complex strength{0.0, 0.0};
};

/// Physical problem data for the double-delta trap.
///
/// The PT construction places a delta of strength nu = -1 + i*gamma at
/// +separation/2 and its conjugate at -separation/2.  `energy_shift` holds
/// kappa_n^2 of the state singled out for removal, so that state sits at
/// energy zero; `g` is the contact-interaction strength.
struct TrapSpec {
  double separation = 0.0;  // a
  double gamma = 0.0;
  double g = 0.0;
  Complex energy_shift{0.0, 0.0};
  std::vector<DeltaWell> deltas;
};

TrapSpec make_pt_trap(double gamma, double a, double g = 0.0,
                      Complex shift = Complex(0.0, 0.0));

/// strength(-x) == conj(strength(+x)) for every delta pair.
bool pt_paired(const TrapSpec& trap);

enum class FieldKind { original, partner };

/// Evaluation side at a discontinuity of the smooth part.
enum class Side { left, right };

/// A potential with symbolic delta terms plus a smooth background.
/// Delta physics never enters through `smooth`; it is applied as derivative
/// jumps during propagation.
struct PotentialField {
  TrapSpec trap;
  FieldKind kind = FieldKind::original;
  Complex asymptote{0.0, 0.0};  // smooth-part limit for |x| -> inf
  bool constant_outside = true; // smooth == asymptote beyond the deltas
  std::function<Complex(double, Side)> smooth;
  std::vector<double> poles;    // real-axis poles of the smooth part
};

/// The original (bosonic-sector) field: smooth part is the constant shift.
PotentialField original_field(const TrapSpec& trap);

/// Smooth-part value at x plus g * density.  x must not sit on a delta;
/// at a registered pole the designated infinity signal is returned.
Complex evaluate_smooth(const PotentialField& field, double x,
                        double density = 0.0);

}  // namespace ddsusy
