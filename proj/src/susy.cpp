#include "ddsusy/susy.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "ddsusy/oracle.hpp"

namespace ddsusy {

namespace {

constexpr double kPoleWindow = 18.0;  // pole scan range for family pieces

void require_eigenvalue(Complex kappa, double gamma, double a,
                        const char* who) {
  if (std::abs(char_fn(kappa, gamma, a)) > 1e-6)
    throw std::invalid_argument(std::string(who) +
                                ": kappa does not satisfy the characteristic equation");
}

// 4th-order first derivative of one smooth region given as consecutive
// samples; falls back to lower order for very short regions.
ComplexArray region_derivative(const ComplexArray& f, double d) {
  const Index n = f.size();
  ComplexArray out(n);
  if (n < 2) {
    out.setZero();
    return out;
  }
  if (n < 5) {
    out(0) = (f(1) - f(0)) / d;
    for (Index i = 1; i + 1 < n; ++i) out(i) = (f(i + 1) - f(i - 1)) / (2.0 * d);
    out(n - 1) = (f(n - 1) - f(n - 2)) / d;
    return out;
  }
  out(0) = (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / (12.0 * d);
  out(1) = (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) / (12.0 * d);
  for (Index i = 2; i + 2 < n; ++i)
    out(i) = (f(i - 2) - 8.0 * f(i - 1) + 8.0 * f(i + 1) - f(i + 2)) / (12.0 * d);
  out(n - 2) = (3.0 * f(n - 1) + 10.0 * f(n - 2) - 18.0 * f(n - 3) + 6.0 * f(n - 4) - f(n - 5)) / (12.0 * d);
  out(n - 1) = (25.0 * f(n - 1) - 48.0 * f(n - 2) + 36.0 * f(n - 3) - 16.0 * f(n - 4) + 3.0 * f(n - 5)) / (12.0 * d);
  return out;
}

int region_of(const std::array<TanhPiece, 3>& pieces, double x, Side side) {
  const double lo = pieces[0].x_hi;
  const double hi = pieces[1].x_hi;
  if (std::abs(x - lo) < 1e-12) return side == Side::left ? 0 : 1;
  if (std::abs(x - hi) < 1e-12) return side == Side::left ? 1 : 2;
  if (x < lo) return 0;
  if (x > hi) return 2;
  return 1;
}

}  // namespace

Complex piece_value(const TanhPiece& piece, double x) {
  switch (piece.branch) {
    case XiBranch::minus_inf:
      return -piece.kappa;
    case XiBranch::plus_inf:
      return piece.kappa;
    default:
      return -piece.kappa * safe_tanh(piece.kappa * (x - piece.xi));
  }
}

Complex piece_derivative(const TanhPiece& piece, double x) {
  if (piece.branch != XiBranch::finite) return {0.0, 0.0};
  const Complex t = safe_tanh(piece.kappa * (x - piece.xi));
  return -piece.kappa * piece.kappa * (1.0 - t * t);
}

std::vector<double> piece_real_poles(const TanhPiece& piece, double window_lo,
                                     double window_hi, double im_tol) {
  std::vector<double> found;
  if (piece.branch != XiBranch::finite) return found;
  // cosh(kappa (x - xi)) = 0  <=>  x = xi + i pi (k + 1/2) / kappa
  for (int k = -64; k <= 64; ++k) {
    const Complex x_pole =
        piece.xi + Complex(0.0, kPi) * (k + 0.5) / piece.kappa;
    if (std::abs(x_pole.imag()) > im_tol) continue;
    const double xr = x_pole.real();
    if (xr < std::max(window_lo, piece.x_lo) - 1e-9) continue;
    if (xr > std::min(window_hi, piece.x_hi) + 1e-9) continue;
    found.push_back(xr);
  }
  std::sort(found.begin(), found.end());
  return found;
}

double piece_pole_distance(const TanhPiece& piece, double window_lo,
                           double window_hi) {
  double best = std::numeric_limits<double>::infinity();
  if (piece.branch != XiBranch::finite) return best;
  for (int k = -64; k <= 64; ++k) {
    const Complex x_pole =
        piece.xi + Complex(0.0, kPi) * (k + 0.5) / piece.kappa;
    const double xr = x_pole.real();
    if (xr < std::max(window_lo, piece.x_lo) - 1e-9) continue;
    if (xr > std::min(window_hi, piece.x_hi) + 1e-9) continue;
    best = std::min(best, std::abs(x_pole.imag()));
  }
  return best;
}

Complex w_eval(const Superpotential& w, double x, Side side) {
  if (w.analytic()) {
    const auto& pieces = w.pieces();
    return piece_value(pieces[region_of(pieces, x, side)], x);
  }
  const SampledW& s = w.sampled();
  const double t = (x - s.x0) / s.step;
  const long j = std::lround(t);
  if (std::abs(t - j) > 1e-6 || j < 0 || j >= s.size())
    throw std::invalid_argument("w_eval: x off the sample lattice");
  if (side == Side::left)
    for (const auto& [idx, val] : s.left_limits)
      if (idx == j) return val;
  return s.w(j);
}

Superpotential superpotential_standard(Complex kappa, double gamma, double a) {
  require_eigenvalue(kappa, gamma, a, "superpotential_standard");
  const Complex nu(-1.0, gamma);

  // Inner region: W = -kappa (1 + q)/(1 - q), q = (1 + 2 kappa/nu)
  // exp(-kappa (2x - a)), which is the tanh form with exp(2 kappa xi) = Q.
  const Complex big_q = -(1.0 + 2.0 * kappa / nu) * std::exp(kappa * a);
  const Complex xi_mid = std::log(big_q) / (2.0 * kappa);

  Superpotential w;
  w.source_kappa = kappa;
  w.xi_mid = xi_mid;
  w.right_branch = XiBranch::plus_inf;
  std::array<TanhPiece, 3> pieces{
      TanhPiece{-1e9, -a / 2.0, kappa, {0.0, 0.0}, XiBranch::minus_inf},
      TanhPiece{-a / 2.0, a / 2.0, kappa, xi_mid, XiBranch::finite},
      TanhPiece{a / 2.0, 1e9, kappa, {0.0, 0.0}, XiBranch::plus_inf}};

  for (const TanhPiece& p : pieces)
    for (double x : piece_real_poles(p, -kPoleWindow, kPoleWindow))
      w.poles.push_back(x);

  const Complex wl = piece_value(pieces[0], -a / 2.0);
  const Complex wml = piece_value(pieces[1], -a / 2.0);
  const Complex wmr = piece_value(pieces[1], a / 2.0);
  const Complex wr = piece_value(pieces[2], a / 2.0);
  w.jumps = {{-a / 2.0, wml - wl}, {a / 2.0, wr - wmr}};
  w.rep = pieces;
  return w;
}

Superpotential superpotential_family(Complex kappa, double gamma, double a,
                                     std::optional<Complex> xi_left) {
  if (!xi_left) return superpotential_standard(kappa, gamma, a);
  require_eigenvalue(kappa, gamma, a, "superpotential_family");
  const Complex nu(-1.0, gamma);
  const Complex nus(-1.0, -gamma);

  auto solve_xi = [&](Complex w_target, double x) {
    const Complex t = -w_target / kappa;
    if (std::abs(t - 1.0) < 1e-12 || std::abs(t + 1.0) < 1e-12)
      throw SolverError("superpotential_family: |W| = |kappa| after a jump, branch degenerate");
    return x - atanh_principal(t) / kappa;
  };

  TanhPiece left{-1e9, -a / 2.0, kappa, *xi_left, XiBranch::finite};
  const Complex w_left = piece_value(left, -a / 2.0);
  const Complex w_mid_l = w_left - nus;  // jump -nu* at -a/2
  const Complex xi_mid = solve_xi(w_mid_l, -a / 2.0);
  TanhPiece mid{-a / 2.0, a / 2.0, kappa, xi_mid, XiBranch::finite};
  const Complex w_mid_r = piece_value(mid, a / 2.0);
  const Complex w_right = w_mid_r - nu;  // jump -nu at +a/2
  const Complex xi_right = solve_xi(w_right, a / 2.0);
  TanhPiece right{a / 2.0, 1e9, kappa, xi_right, XiBranch::finite};

  Superpotential w;
  w.source_kappa = kappa;
  w.xi_mid = xi_mid;
  w.xi_right = xi_right;
  w.right_branch = XiBranch::finite;
  for (const TanhPiece& p : {left, mid, right}) {
    const auto poles = piece_real_poles(p, -kPoleWindow, kPoleWindow);
    if (!poles.empty())
      throw PoleInRegionError("superpotential_family: pole inside a region", poles.front());
  }
  w.jumps = {{-a / 2.0, w_mid_l - w_left}, {a / 2.0, w_right - w_mid_r}};
  w.rep = std::array<TanhPiece, 3>{left, mid, right};
  return w;
}

Superpotential superpotential_from_state(const EigenSolution& solution,
                                         const PotentialField& field,
                                         double step) {
  const double x_max = solution.x_boundary();
  const SampledState state = sample_wavefunction(field, solution, x_max, step);

  double min_abs = std::numeric_limits<double>::infinity();
  Index min_at = 0;
  for (Index i = 0; i < state.size(); ++i) {
    const double m = std::abs(state.phi(i));
    if (m < min_abs) {
      min_abs = m;
      min_at = i;
    }
  }
  if (min_abs < 1e-8)
    throw NodalStateError("superpotential_from_state: wavefunction node on the grid",
                          state.x_at(min_at));

  SampledW s;
  s.x0 = state.x0;
  s.step = state.step;
  s.w.resize(state.size());
  for (Index i = 0; i < state.size(); ++i)
    s.w(i) = -state.dphi(i) / state.phi(i);

  // states at the delta nodes are stored on the outgoing side of each shot:
  // left side at -a/2, right side at +a/2; recover the other side from the
  // derivative jump and keep the right-side convention for the main array.
  Superpotential w;
  w.source_kappa = solution.kappa;
  for (const DeltaWell& d : field.trap.deltas) {
    const long j = std::lround((d.position - s.x0) / s.step);
    if (j < 0 || j >= s.size()) continue;
    const Complex phi = state.phi(j);
    if (d.position < 0.0) {
      const Complex w_left = s.w(j);
      const Complex w_right = -(state.dphi(j) + d.strength * phi) / phi;
      s.left_limits.emplace_back(j, w_left);
      s.w(j) = w_right;
      w.jumps.push_back({d.position, w_right - w_left});
    } else {
      const Complex w_right = s.w(j);
      const Complex w_left = -(state.dphi(j) - d.strength * phi) / phi;
      s.left_limits.emplace_back(j, w_left);
      w.jumps.push_back({d.position, w_right - w_left});
    }
  }

  const Complex shift = solution.kappa * solution.kappa;
  s.v1.resize(state.size());
  for (Index i = 0; i < state.size(); ++i)
    s.v1(i) = shift + field.trap.g * std::norm(state.phi(i));
  w.rep = std::move(s);
  return w;
}

PartnerPotential partner_potential(const Superpotential& w,
                                   const TrapSpec& trap) {
  const Complex k2 = w.source_kappa * w.source_kappa;

  TrapSpec partner_trap = trap;
  partner_trap.g = 0.0;
  partner_trap.energy_shift = k2;
  for (DeltaWell& d : partner_trap.deltas) d.strength = -d.strength;

  PartnerPotential partner;
  partner.asymptote = k2;
  partner.field.trap = partner_trap;
  partner.field.kind = FieldKind::partner;
  partner.field.asymptote = k2;
  partner.field.poles = w.poles;

  if (w.analytic()) {
    auto pieces = std::make_shared<std::array<TanhPiece, 3>>(w.pieces());
    partner.field.constant_outside =
        (*pieces)[0].branch != XiBranch::finite &&
        (*pieces)[2].branch != XiBranch::finite;
    partner.field.smooth = [pieces, k2](double x, Side side) -> Complex {
      const TanhPiece& p = (*pieces)[region_of(*pieces, x, side)];
      if (p.branch != XiBranch::finite) return k2;
      const Complex t = safe_tanh(p.kappa * (x - p.xi));
      // W^2 + W' for a tanh piece
      return k2 * (2.0 * t * t - 1.0);
    };
    return partner;
  }

  // sampled form: V2 = W^2 + W' with region-aware finite differences
  const SampledW& s = w.sampled();
  auto v2 = std::make_shared<SampledValues>();
  v2->x0 = s.x0;
  v2->step = s.step;
  v2->values.resize(s.size());
  auto v2_left = std::make_shared<std::vector<std::pair<long, Complex>>>();

  std::vector<long> cuts;
  for (const auto& [idx, val] : s.left_limits) cuts.push_back(idx);
  std::sort(cuts.begin(), cuts.end());

  long begin = 0;
  for (std::size_t r = 0; r <= cuts.size(); ++r) {
    const long end = r < cuts.size() ? cuts[r] : s.size() - 1;
    ComplexArray region_w(end - begin + 1);
    for (long j = begin; j <= end; ++j) region_w(j - begin) = s.w(j);
    if (r < cuts.size())
      for (const auto& [idx, val] : s.left_limits)
        if (idx == end) region_w(end - begin) = val;
    const ComplexArray region_dw = region_derivative(region_w, s.step);
    for (long j = begin; j <= end; ++j) {
      const Complex value =
          region_w(j - begin) * region_w(j - begin) + region_dw(j - begin);
      if (j == end && r < cuts.size())
        v2_left->emplace_back(j, value);
      else
        v2->values(j) = value;
    }
    begin = end;
  }

  partner.field.constant_outside = false;
  partner.field.smooth = [v2, v2_left, k2](double x, Side side) -> Complex {
    const double t = (x - v2->x0) / v2->step;
    const long j = std::lround(t);
    if (j < 0 || j >= v2->size()) return k2;
    if (std::abs(t - j) > 1e-6)
      throw std::invalid_argument("partner field: x off the sample lattice");
    if (side == Side::left)
      for (const auto& [idx, val] : *v2_left)
        if (idx == j) return val;
    return v2->values(j);
  };
  return partner;
}

SampledState merged_state(const EigenSolution& solution) {
  const Index nl = solution.left.size();
  const Index nr = solution.right.size();
  SampledState s;
  s.step = std::abs(solution.right.step);
  s.x0 = -s.step * static_cast<double>(nl - 1);
  s.phi.resize(nl + nr - 1);
  s.dphi.resize(nl + nr - 1);
  for (Index i = 0; i < nl; ++i) {
    s.phi(nl - 1 - i) = solution.left.phi(i);
    s.dphi(nl - 1 - i) = solution.left.dphi(i);
  }
  for (Index i = 1; i < nr; ++i) {
    s.phi(nl - 1 + i) = solution.right.phi(i);
    s.dphi(nl - 1 + i) = solution.right.dphi(i);
  }
  return s;
}

SampledValues apply_annihilator(const Superpotential& w,
                                const SampledState& state) {
  SampledValues out;
  out.x0 = state.x0;
  out.step = state.step;
  out.values.resize(state.size());
  for (Index i = 0; i < state.size(); ++i) {
    const double x = state.x_at(i);
    const Side side = x < 0.0 ? Side::left : Side::right;
    out.values(i) = w_eval(w, x, side) * state.phi(i) + state.dphi(i);
  }
  return out;
}

SampledValues apply_annihilator(const Superpotential& w,
                                const EigenSolution& solution) {
  return apply_annihilator(w, merged_state(solution));
}

SampledValues make_v1_samples(const SampledState& state, Complex shift,
                              double g) {
  SampledValues v1;
  v1.x0 = state.x0;
  v1.step = state.step;
  v1.values.resize(state.size());
  for (Index i = 0; i < state.size(); ++i)
    v1.values(i) = shift + g * std::norm(state.phi(i));
  return v1;
}

Superpotential riccati_superpotential(const SampledValues& v1,
                                      const TrapSpec& trap,
                                      std::optional<Complex> start_w,
                                      double out_step) {
  if (std::abs(v1.step - 0.5 * out_step) > 1e-12 * out_step)
    throw std::invalid_argument("riccati_superpotential: v1 must be sampled at half the output step");
  const Index n4 = v1.size() - 1;
  if (n4 % 2 != 0)
    throw std::invalid_argument("riccati_superpotential: v1 sample count must span whole output steps");
  const Index n_nodes = n4 / 2 + 1;

  const Complex kappa = std::sqrt(trap.energy_shift);

  SampledW s;
  s.x0 = v1.x0;
  s.step = out_step;
  s.w.resize(n_nodes);
  s.v1.resize(n_nodes);
  for (Index j = 0; j < n_nodes; ++j) s.v1(j) = v1.values(2 * j);

  struct DeltaIdx {
    long node = 0;
    Complex strength{0.0, 0.0};
  };
  std::vector<DeltaIdx> deltas;
  for (const DeltaWell& d : trap.deltas) {
    const double t = (d.position - s.x0) / out_step;
    const long j = std::lround(t);
    if (j <= 0 || j >= n_nodes - 1) continue;
    if (std::abs(t - j) > 1e-6)
      throw std::invalid_argument("riccati_superpotential: delta off the output lattice");
    deltas.push_back({j, d.strength});
  }
  std::sort(deltas.begin(), deltas.end(),
            [](const DeltaIdx& a, const DeltaIdx& b) { return a.node < b.node; });

  Superpotential w;
  w.source_kappa = kappa;

  auto rk4_step = [&](Complex value, long node, int dir) {
    const double hd = dir * out_step;
    const long base = 2 * node;
    const Complex k1 = value * value - v1.values(base);
    const Complex y2 = value + 0.5 * hd * k1;
    const Complex k2 = y2 * y2 - v1.values(base + dir);
    const Complex y3 = value + 0.5 * hd * k2;
    const Complex k3 = y3 * y3 - v1.values(base + dir);
    const Complex y4 = value + hd * k3;
    const Complex k4 = y4 * y4 - v1.values(base + 2 * dir);
    return value + hd / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  const bool standard = !start_w.has_value();
  const long stop_forward =
      (standard && deltas.size() == 2) ? deltas.back().node : n_nodes - 1;

  Complex value = standard ? -kappa : *start_w;
  s.w(0) = value;
  std::size_t next_delta = 0;
  for (long j = 0; j < stop_forward; ++j) {
    Complex next = rk4_step(value, j, +1);
    if (!std::isfinite(next.real()) || !std::isfinite(next.imag()) ||
        std::abs(next) > 1e8) {
      // simple pole of the Riccati flow; report it and restart on the
      // universal -1/(x - x_pole) branch just past it
      const double x_pole = s.x_at(j) + 0.5 * out_step;
      w.poles.push_back(x_pole);
      next = -1.0 / (s.x_at(j + 1) - x_pole);
    }
    value = next;
    const long node = j + 1;
    if (next_delta < deltas.size() && deltas[next_delta].node == node) {
      s.left_limits.emplace_back(node, value);
      const Complex jump = -deltas[next_delta].strength;
      value += jump;
      w.jumps.push_back({s.x_at(node), jump});
      ++next_delta;
    }
    s.w(node) = value;
  }

  if (standard && deltas.size() == 2) {
    // right tail: integrate inward from the +kappa asymptote (the stable
    // direction) and splice with a decaying correction at +a/2
    const long jd = deltas.back().node;
    ComplexArray tail(n_nodes - jd);
    tail(n_nodes - 1 - jd) = kappa;
    Complex back_value = kappa;
    for (long j = n_nodes - 1; j > jd; --j) {
      back_value = rk4_step(back_value, j, -1);
      tail(j - 1 - jd) = back_value;
    }
    const Complex forward_jumped = s.w(jd);
    const Complex defect = forward_jumped - tail(0);
    w.junction_mismatch = std::abs(defect);
    for (long j = jd + 1; j < n_nodes; ++j)
      s.w(j) = tail(j - jd) +
               defect * std::exp(-2.0 * kappa * (s.x_at(j) - s.x_at(jd)));
  }

  w.rep = std::move(s);
  return w;
}

double verify_factorization(const Superpotential& w, const TrapSpec& trap) {
  const Complex v1_const = w.source_kappa * w.source_kappa;
  double worst = 0.0;

  if (w.analytic()) {
    const auto& pieces = w.pieces();
    const double half = trap.separation / 2.0;
    const double span = half + 5.0;
    const double step = 1e-3;
    for (double x = -span; x <= span + 1e-12; x += step) {
      bool on_delta = false;
      for (const DeltaWell& d : trap.deltas)
        if (std::abs(x - d.position) < 1e-9) on_delta = true;
      if (on_delta) continue;
      const TanhPiece& p = pieces[region_of(pieces, x, Side::right)];
      const Complex r = piece_value(p, x) * piece_value(p, x) -
                        piece_derivative(p, x) - v1_const;
      worst = std::max(worst, std::abs(r));
    }
    // jumps re-measured from the pieces, not from the stored bookkeeping
    for (const DeltaWell& d : trap.deltas) {
      const Complex left =
          piece_value(pieces[region_of(pieces, d.position, Side::left)], d.position);
      const Complex right =
          piece_value(pieces[region_of(pieces, d.position, Side::right)], d.position);
      worst = std::max(worst, std::abs((right - left) + d.strength));
    }
    return worst;
  }
  {
    const SampledW& s = w.sampled();
    std::vector<long> cuts;
    for (const auto& [idx, val] : s.left_limits) cuts.push_back(idx);
    std::sort(cuts.begin(), cuts.end());
    long begin = 0;
    for (std::size_t r = 0; r <= cuts.size(); ++r) {
      const long end = r < cuts.size() ? cuts[r] : s.size() - 1;
      ComplexArray region_w(end - begin + 1);
      for (long j = begin; j <= end; ++j) region_w(j - begin) = s.w(j);
      if (r < cuts.size())
        for (const auto& [idx, val] : s.left_limits)
          if (idx == end) region_w(end - begin) = val;
      const ComplexArray region_dw = region_derivative(region_w, s.step);
      for (long j = begin; j <= end; ++j) {
        const Complex res = region_w(j - begin) * region_w(j - begin) -
                            region_dw(j - begin) - s.v1(j);
        worst = std::max(worst, std::abs(res));
      }
      begin = end;
    }
    // jumps re-measured from the samples
    for (const DeltaWell& d : trap.deltas) {
      const long j = std::lround((d.position - s.x0) / s.step);
      if (j <= 0 || j >= s.size() - 1) continue;
      for (const auto& [idx, left] : s.left_limits)
        if (idx == j)
          worst = std::max(worst, std::abs((s.w(j) - left) + d.strength));
    }
  }
  return worst;
}

}  // namespace ddsusy
