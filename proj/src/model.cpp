#include "ddsusy/model.hpp"

#include <algorithm>
#include <cmath>

namespace ddsusy {

TrapSpec make_pt_trap(double gamma, double a, double g, Complex shift) {
  if (!(a > 0.0)) throw std::invalid_argument("make_pt_trap: separation must be positive");
  if (g < 0.0) throw std::invalid_argument("make_pt_trap: nonlinearity must be non-negative");
  if (gamma < 0.0) throw std::invalid_argument("make_pt_trap: gamma must be non-negative");
  TrapSpec trap;
  trap.separation = a;
  trap.gamma = gamma;
  trap.g = g;
  trap.energy_shift = shift;
  const Complex nu(-1.0, gamma);
  trap.deltas = {{-a / 2.0, std::conj(nu)}, {a / 2.0, nu}};
  return trap;
}

bool pt_paired(const TrapSpec& trap) {
  for (const DeltaWell& d : trap.deltas) {
    auto mirror = std::find_if(trap.deltas.begin(), trap.deltas.end(),
                               [&](const DeltaWell& m) { return m.position == -d.position; });
    if (mirror == trap.deltas.end()) return false;
    if (mirror->strength != std::conj(d.strength)) return false;
  }
  return true;
}

PotentialField original_field(const TrapSpec& trap) {
  PotentialField field;
  field.trap = trap;
  field.kind = FieldKind::original;
  field.asymptote = trap.energy_shift;
  field.constant_outside = true;
  const Complex shift = trap.energy_shift;
  field.smooth = [shift](double, Side) { return shift; };
  return field;
}

Complex evaluate_smooth(const PotentialField& field, double x, double density) {
  for (double p : field.poles)
    if (std::abs(x - p) < 1e-9) return kPoleSignal;
  return field.smooth(x, Side::right) + field.trap.g * density;
}

}  // namespace ddsusy
