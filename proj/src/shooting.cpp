#include "ddsusy/shooting.hpp"

#include <algorithm>
#include <cmath>

#include "ddsusy/oracle.hpp"

namespace ddsusy {

namespace {

double half_separation(const PotentialField& field) {
  double hs = 0.0;
  for (const DeltaWell& d : field.trap.deltas)
    hs = std::max(hs, std::abs(d.position));
  return hs;
}

struct ShotContext {
  FieldTable table;
  double x_b = 0.0;
  double h = 0.0;
  Complex asymptote{0.0, 0.0};
};

ShotContext make_context(const PotentialField& field, const SolveOptions& opt) {
  ShotContext ctx;
  ctx.x_b = boundary_point(field, opt);
  ctx.h = opt.h;
  ctx.asymptote = field.asymptote;
  ctx.table = tabulate_field(field, -ctx.x_b, ctx.x_b, opt.h);
  return ctx;
}

struct Shot {
  Trajectory left, right;
  Complex decay{0.0, 0.0};
  double norm = 0.0;
};

// u = (re phi0, re dphi0, im dphi0, Re E, Im E)
Shot shoot(const ShotContext& ctx, const Vector& u) {
  const Complex energy(u(3), u(4));
  const StatePair start{Complex(u(0), 0.0), Complex(u(1), u(2))};
  Shot shot;
  shot.right = propagate(ctx.table, energy, start, 0.0, ctx.x_b, ctx.h);
  shot.left = propagate(ctx.table, energy, start, 0.0, -ctx.x_b, ctx.h);
  shot.decay = std::sqrt(ctx.asymptote - energy);
  if (shot.decay.real() > 0.0)
    shot.norm = norm_with_tails(shot.left, shot.right, shot.decay);
  else
    shot.norm = std::numeric_limits<double>::quiet_NaN();
  return shot;
}

Vector shot_residuals(const ShotContext& ctx, const Vector& u) {
  const Shot shot = shoot(ctx, u);
  const Complex lambda = shot.decay;
  const StatePair r = shot.right.back();
  const StatePair l = shot.left.back();
  const Complex rp = r.dphi + lambda * r.phi;
  const Complex rm = l.dphi - lambda * l.phi;
  Vector f(5);
  f << rp.real(), rp.imag(), rm.real(), rm.imag(),
      (std::isfinite(shot.norm) ? shot.norm - 1.0 : 1e6);
  return f;
}

Vector to_energy_vector(const ShootingUnknowns& u) {
  const Complex e = u.energy();
  Vector v(5);
  v << u.re_phi0, u.re_dphi0, u.im_dphi0, e.real(), e.imag();
  return v;
}

// principal square root of -E; negative-real arguments resolve to +i sqrt|E|
Complex kappa_from_energy(Complex energy) { return std::sqrt(-energy); }

void rotate(Trajectory& traj, Complex phase) {
  traj.phi *= phase;
  traj.dphi *= phase;
}

void apply_gauge(EigenSolution& sol) {
  const Complex p0 = sol.right.phi(0);
  Complex phase(1.0, 0.0);
  if (std::abs(p0) > 1e-12) {
    phase = std::abs(p0) / p0;
  } else {
    const Complex d0 = sol.right.dphi(0);
    if (std::abs(d0) > 0.0) phase = Complex(0.0, 1.0) * std::abs(d0) / d0;
  }
  rotate(sol.left, phase);
  rotate(sol.right, phase);
}

EigenSolution solve_impl(const PotentialField& field,
                         const ShootingUnknowns& guess, double tol,
                         const SolveOptions& opt) {
  if (std::abs(guess.re_phi0) + std::abs(guess.re_dphi0) +
          std::abs(guess.im_dphi0) < 1e-12)
    throw std::invalid_argument("solve_state: guess has phi == 0, the norm condition cannot hold");

  const ShotContext ctx = make_context(field, opt);
  NewtonOptions newton;
  newton.tol = tol;
  newton.max_iter = opt.max_iter;
  // states with phi(0) = 0 leave the global phase unfixed; the Jacobian is
  // then singular along the phase orbit and the step must quotient it out
  newton.allow_rank_deficient = true;
  const NewtonResult root = newton_root(
      [&ctx](const Vector& u) { return shot_residuals(ctx, u); },
      to_energy_vector(guess), newton);

  const Shot shot = shoot(ctx, root.u);
  EigenSolution sol;
  sol.kappa = kappa_from_energy(Complex(root.u(3), root.u(4)));
  sol.left = shot.left;
  sol.right = shot.right;
  sol.decay = shot.decay;
  sol.norm = shot.norm;
  sol.residual_norm = root.residual_norm;
  sol.iterations = root.iterations;
  apply_gauge(sol);
  return sol;
}

}  // namespace

double boundary_point(const PotentialField& field, const SolveOptions& opt) {
  const double hs = half_separation(field);
  if (field.constant_outside && field.trap.g == 0.0) return hs + 2.0 * opt.h;
  const double pad = field.trap.g > 0.0 ? opt.nonlinear_pad : opt.far_pad;
  const long k = 2 * std::max<long>(1, std::lround(pad / (2.0 * opt.h)));
  return hs + static_cast<double>(k) * opt.h;
}

Vector residuals(const ShootingUnknowns& u, const PotentialField& field,
                 const SolveOptions& opt) {
  return shot_residuals(make_context(field, opt), to_energy_vector(u));
}

EigenSolution solve_state(const PotentialField& field,
                          const ShootingUnknowns& guess, double tol,
                          const SolveOptions& opt) {
  return solve_impl(field, guess, tol, opt);
}

EigenSolution solve_nonlinear_state(const PotentialField& field,
                                    const ShootingUnknowns& guess, double tol,
                                    const SolveOptions& opt) {
  if (field.trap.g < 0.0)
    throw std::invalid_argument("solve_nonlinear_state: g must be non-negative");
  return solve_impl(field, guess, tol, opt);
}

ShootingUnknowns hermitian_seed(double a, int state_index) {
  ShootingUnknowns u;
  if (state_index == 0) {
    const double k = hermitian_even_kappa(a);
    // phi = A cosh(k x) inside, matched decaying tails outside
    const double n2 = 0.5 * a + std::sinh(k * a) / (2.0 * k) +
                      std::pow(std::cosh(0.5 * k * a), 2) / k;
    u.re_phi0 = 1.0 / std::sqrt(n2);
    u.re_kappa = k;
  } else if (state_index == 1) {
    const double k = hermitian_odd_kappa(a);
    // phi = i B sinh(k x): the PT-adapted gauge of the odd state
    const double n2 = std::sinh(k * a) / (2.0 * k) - 0.5 * a +
                      std::pow(std::sinh(0.5 * k * a), 2) / k;
    u.im_dphi0 = k / std::sqrt(n2);
    u.re_kappa = k;
  } else {
    throw std::invalid_argument("hermitian_seed: the trap supports states 0 and 1 only");
  }
  return u;
}

ShootingUnknowns to_unknowns(const EigenSolution& solution) {
  ShootingUnknowns u;
  u.re_phi0 = solution.phi0().real();
  u.re_dphi0 = solution.dphi0().real();
  u.im_dphi0 = solution.dphi0().imag();
  u.re_kappa = solution.kappa.real();
  u.im_kappa = solution.kappa.imag();
  return u;
}

ShootingUnknowns conjugate_seed(const ShootingUnknowns& u) {
  ShootingUnknowns c = u;
  c.im_dphi0 = -u.im_dphi0;
  c.im_kappa = -u.im_kappa;
  return c;
}

std::vector<EigenSolution> continue_in_gamma(
    const std::function<PotentialField(double)>& field_family,
    const std::vector<double>& gamma_grid, const ShootingUnknowns& seed,
    const SolveOptions& opt) {
  std::vector<EigenSolution> out;
  if (gamma_grid.empty()) return out;

  ShootingUnknowns current = seed;

  // solve at `to`; near the exceptional point a purely PT-symmetric seed
  // sits on the saddle between the two emerging complex roots, so failed
  // attempts are retried with an imaginary tilt of the eigenvalue seed
  auto attempt = [&](double to) {
    const PotentialField field = field_family(to);
    try {
      return solve_state(field, current, opt.tol, opt);
    } catch (const SolverError&) {
      for (double tilt : {1e-3, -1e-3, 1e-2, -1e-2}) {
        ShootingUnknowns tilted = current;
        tilted.im_kappa += tilt;
        try {
          return solve_state(field, tilted, opt.tol, opt);
        } catch (const SolverError&) {
        }
      }
      throw;
    }
  };

  EigenSolution first = attempt(gamma_grid.front());
  current = to_unknowns(first);
  out.push_back(std::move(first));

  for (std::size_t i = 1; i < gamma_grid.size(); ++i) {
    const double target = gamma_grid[i];

    // march toward the target, bisecting the step on solver failure
    std::function<EigenSolution(double, double, int)> advance =
        [&](double from, double to, int depth) -> EigenSolution {
      try {
        return attempt(to);
      } catch (const SolverError&) {
        if (depth >= 6)
          throw ContinuationGapError("continue_in_gamma: unrecoverable gap", to);
        const double mid = 0.5 * (from + to);
        EigenSolution half = advance(from, mid, depth + 1);
        current = to_unknowns(half);
        return advance(mid, to, depth + 1);
      }
    };

    EigenSolution sol = advance(gamma_grid[i - 1], target, 0);
    current = to_unknowns(sol);
    out.push_back(std::move(sol));
  }
  return out;
}

SampledState sample_wavefunction(const PotentialField& field,
                                 const EigenSolution& solution, double x_max,
                                 double step) {
  const long n = std::lround(x_max / step);
  if (std::abs(n * step - x_max) > 1e-9)
    throw std::invalid_argument("sample_wavefunction: x_max must be a multiple of the step");
  const Complex energy = solution.energy();
  const StatePair start{solution.phi0(), solution.dphi0()};
  const FieldTable table = tabulate_field(field, -x_max, x_max, step);
  const Trajectory right = propagate(table, energy, start, 0.0, x_max, step);
  const Trajectory left = propagate(table, energy, start, 0.0, -x_max, step);

  SampledState s;
  s.x0 = -x_max;
  s.step = step;
  s.phi.resize(2 * n + 1);
  s.dphi.resize(2 * n + 1);
  for (long i = 0; i <= n; ++i) {
    s.phi(n - i) = left.phi(i);
    s.dphi(n - i) = left.dphi(i);
  }
  for (long i = 0; i <= n; ++i) {
    s.phi(n + i) = right.phi(i);
    s.dphi(n + i) = right.dphi(i);
  }
  return s;
}

double pt_asymmetry(const EigenSolution& solution) {
  const Index n = std::min(solution.left.size(), solution.right.size());
  double worst = 0.0;
  for (Index i = 0; i < n; ++i)
    worst = std::max(worst,
                     std::abs(solution.left.phi(i) - std::conj(solution.right.phi(i))));
  return worst;
}

}  // namespace ddsusy
