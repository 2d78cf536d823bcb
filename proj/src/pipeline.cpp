#include "ddsusy/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "ddsusy/oracle.hpp"

namespace ddsusy {

namespace {

SolveOptions to_solve_options(const PipelineOptions& opt) {
  SolveOptions so;
  so.h = opt.h;
  so.tol = opt.tol;
  so.far_pad = opt.far_pad;
  return so;
}

bool is_broken(const EigenSolution& s0, const EigenSolution& s1) {
  return std::abs(s0.energy().imag()) > 1e-8 ||
         std::abs(s1.energy().imag()) > 1e-8;
}

void order_pair(EigenSolution& s0, EigenSolution& s1) {
  if (is_broken(s0, s1)) {
    // index 0 carries the positive imaginary part of the energy
    if (s0.energy().imag() < s1.energy().imag()) std::swap(s0, s1);
  } else {
    if (s0.kappa.real() < s1.kappa.real()) std::swap(s0, s1);
  }
}

// Marches the two original states in gamma, seeding kappa from the oracle
// and the initial values from the previously solved point.
class PairTracker {
 public:
  PairTracker(double a, const PipelineOptions& opt)
      : a_(a), opt_(opt), so_(to_solve_options(opt)) {}

  OriginalPair solve_at(double gamma) {
    if (!have_) {
      seed0_ = hermitian_seed(a_, 0);
      seed1_ = hermitian_seed(a_, 1);
      last_gamma_ = 0.0;
      step_to(0.0);
      have_ = true;
    }
    while (std::abs(gamma - last_gamma_) > 0.05) {
      const double dir = gamma > last_gamma_ ? 1.0 : -1.0;
      step_to(last_gamma_ + dir * 0.05);
    }
    return step_to(gamma);
  }

 private:
  OriginalPair step_to(double gamma) {
    const OracleRoots roots = oracle_eigenvalues(gamma, a_);
    const PotentialField field = original_field(make_pt_trap(gamma, a_));

    ShootingUnknowns u0 = seed0_;
    u0.re_kappa = roots.kappa0.real();
    u0.im_kappa = roots.kappa0.imag();
    ShootingUnknowns u1 = seed1_;
    u1.re_kappa = roots.kappa1.real();
    u1.im_kappa = roots.kappa1.imag();

    OriginalPair pair;
    pair.s0 = solve_state(field, u0, opt_.tol, so_);
    pair.s1 = solve_state(field, u1, opt_.tol, so_);

    if (std::abs(pair.s0.kappa - pair.s1.kappa) < 1e-8) {
      const double gap = std::abs(roots.kappa0 - roots.kappa1);
      if (gap > 1e-8) {
        // both converged onto one root; retry from tilted kappa seeds
        for (double tilt : {0.5 * gap, 2.0 * gap, 1e-3, 1e-2}) {
          ShootingUnknowns retry = u1;
          retry.im_kappa += tilt;
          try {
            pair.s1 = solve_state(field, retry, opt_.tol, so_);
          } catch (const SolverError&) {
            continue;
          }
          if (std::abs(pair.s0.kappa - pair.s1.kappa) > 1e-8) break;
        }
      }
      if (std::abs(pair.s0.kappa - pair.s1.kappa) < 1e-8) {
        if (is_broken(pair.s0, pair.s1)) {
          pair.s1 = solve_state(field, conjugate_seed(to_unknowns(pair.s0)),
                                opt_.tol, so_);
        }
        pair.degenerate = std::abs(pair.s0.kappa - pair.s1.kappa) < 1e-8;
      }
    }

    order_pair(pair.s0, pair.s1);
    seed0_ = to_unknowns(pair.s0);
    seed1_ = to_unknowns(pair.s1);
    last_gamma_ = gamma;
    return pair;
  }

  double a_;
  PipelineOptions opt_;
  SolveOptions so_;
  ShootingUnknowns seed0_, seed1_;
  double last_gamma_ = 0.0;
  bool have_ = false;
};

Complex w_derivative_at_origin(const Superpotential& w) {
  if (w.analytic()) return piece_derivative(w.pieces()[1], 0.0);
  const SampledW& s = w.sampled();
  const long j = std::lround((0.0 - s.x0) / s.step);
  // Riccati relation W' = W^2 - V1 holds exactly on the sampled form
  return s.w(j) * s.w(j) - s.v1(j);
}

// Seed for the partner solve from the annihilator image of the surviving
// original state: psi = (W + d/dx) phi is an eigenfunction of the partner
// system at E_id, so it supplies initial values and kappa at once.
std::optional<ShootingUnknowns> annihilator_seed(const Superpotential& w,
                                                 const EigenSolution& other,
                                                 Complex e_id, Complex asymptote,
                                                 double g_source) {
  const Complex phi0 = other.phi0();
  const Complex dphi0 = other.dphi0();
  const Complex w0 = w_eval(w, 0.0, Side::right);
  const Complex e_other = other.energy();

  Complex psi0 = w0 * phi0 + dphi0;
  // phi'' at the origin from the unshifted original equation
  const Complex phi_pp = (g_source * std::norm(phi0) - e_other) * phi0;
  Complex dpsi0 = w_derivative_at_origin(w) * phi0 + w0 * dphi0 + phi_pp;

  const SampledValues image = apply_annihilator(w, other);
  RealArray density(image.size());
  for (Index i = 0; i < image.size(); ++i) density(i) = std::norm(image.values(i));
  const Complex lambda = std::sqrt(asymptote - e_id);
  if (!(lambda.real() > 0.0)) return std::nullopt;
  double n2 = simpson(density, image.step);
  n2 += (density(0) + density(image.size() - 1)) / (2.0 * lambda.real());
  if (!(n2 > 1e-12)) return std::nullopt;

  const double scale = 1.0 / std::sqrt(n2);
  psi0 *= scale;
  dpsi0 *= scale;
  Complex phase(1.0, 0.0);
  if (std::abs(psi0) > 1e-12) phase = std::abs(psi0) / psi0;
  psi0 *= phase;
  dpsi0 *= phase;

  const Complex kappa_seed = std::sqrt(-e_id);
  ShootingUnknowns u;
  u.re_phi0 = psi0.real();
  u.re_dphi0 = dpsi0.real();
  u.im_dphi0 = dpsi0.imag();
  u.re_kappa = kappa_seed.real();
  u.im_kappa = kappa_seed.imag();
  return u;
}

EigenSolution solve_partner_state(const PartnerPotential& partner,
                                  const Superpotential& w,
                                  const EigenSolution& other, Complex e_id,
                                  const PipelineOptions& opt,
                                  const ShootingUnknowns* fallback,
                                  double g_source = 0.0) {
  const SolveOptions so = to_solve_options(opt);
  std::optional<ShootingUnknowns> seed =
      annihilator_seed(w, other, e_id, partner.asymptote, g_source);
  if (seed) {
    try {
      return solve_state(partner.field, *seed, opt.tol, so);
    } catch (const SolverError&) {
      // fall through to the fallback seeds
    }
  }
  if (fallback) {
    try {
      return solve_state(partner.field, *fallback, opt.tol, so);
    } catch (const SolverError&) {
    }
  }
  // generic even-state guess at the ideal energy
  ShootingUnknowns u;
  const Complex kappa_seed = std::sqrt(-e_id);
  u.re_phi0 = 0.3;
  u.re_kappa = kappa_seed.real();
  u.im_kappa = kappa_seed.imag();
  return solve_state(partner.field, u, opt.tol, so);
}

void require_no_inner_pole(const Superpotential& w, double a) {
  for (double p : w.poles)
    if (std::abs(p) < a / 2.0 + 1e-9)
      throw NodalStateError(
          "remove_state: superpotential pole inside the trap (wavefunction node)", p);
}

bool near_pole_warning(const Superpotential& w, double a) {
  if (!w.analytic()) return false;
  return piece_pole_distance(w.pieces()[1], -a / 2.0, a / 2.0) < 0.1;
}

EigenSolution solve_nonlinear_with_continuation(const PotentialField& field,
                                                const ShootingUnknowns& seed,
                                                double g,
                                                const PipelineOptions& opt) {
  const SolveOptions so = to_solve_options(opt);
  try {
    return solve_nonlinear_state(field, seed, opt.tol, so);
  } catch (const SolverError&) {
  }
  // continue in g from the linear solution
  ShootingUnknowns current = seed;
  EigenSolution sol;
  const int steps = 4;
  for (int i = 1; i <= steps; ++i) {
    PotentialField sub = field;
    sub.trap.g = g * static_cast<double>(i) / steps;
    sol = solve_nonlinear_state(sub, current, opt.tol, so);
    current = to_unknowns(sol);
  }
  return sol;
}

RemovalReport remove_state_nonlinear(double gamma, double a, int removed_index,
                                     std::optional<Complex> xi_left, double g,
                                     const PipelineOptions& opt) {
  const PotentialField field_g = original_field(make_pt_trap(gamma, a, g));
  const OriginalPair linear = solve_original_pair(a, gamma, opt);

  EigenSolution nl0 = solve_nonlinear_with_continuation(
      field_g, to_unknowns(linear.s0), g, opt);
  EigenSolution nl1 = solve_nonlinear_with_continuation(
      field_g, to_unknowns(linear.s1), g, opt);
  order_pair(nl0, nl1);

  const EigenSolution& removed = removed_index == 0 ? nl0 : nl1;
  const EigenSolution& other = removed_index == 0 ? nl1 : nl0;
  const Complex kappa_rm = removed.kappa;
  const Complex shift = kappa_rm * kappa_rm;

  TrapSpec trap_shifted = make_pt_trap(gamma, a, g, shift);

  // the nonlinear states are solved with a nearer matching point; the
  // converged state is then re-propagated out to the partner's boundary
  const long k_far =
      2 * std::max<long>(1, std::lround(opt.far_pad / (2.0 * opt.h)));
  const double x_far = a / 2.0 + static_cast<double>(k_far) * opt.h;
  const SampledState fine =
      sample_wavefunction(field_g, removed, x_far, opt.h / 4.0);
  const SampledValues v1 = make_v1_samples(fine, shift, g);

  std::optional<Complex> start_w;
  if (xi_left)
    start_w = -kappa_rm * safe_tanh(kappa_rm * (Complex(-x_far, 0.0) - *xi_left));
  Superpotential w =
      riccati_superpotential(v1, trap_shifted, start_w, opt.h / 2.0);
  require_no_inner_pole(w, a);

  RemovalReport report;
  report.removed_index = removed_index;
  report.gamma = gamma;
  report.a = a;
  report.g = g;
  report.xi_left = xi_left;
  report.partner = partner_potential(w, trap_shifted);
  report.removed_energy = removed.energy();
  report.other_energy = other.energy();
  report.ideal_energy = other.energy() - removed.energy();
  report.partner_solution = solve_partner_state(
      report.partner, w, other, report.ideal_energy, opt, nullptr, g);
  report.pole_warning = !w.poles.empty();
  report.factorization_residual = verify_factorization(w, trap_shifted);
  report.w = std::move(w);
  return report;
}

}  // namespace

OriginalPair solve_original_pair(double a, double gamma,
                                 const PipelineOptions& opt) {
  PairTracker tracker(a, opt);
  return tracker.solve_at(gamma);
}

SpectrumTable sweep_spectrum(double a, const std::vector<double>& gamma_grid,
                             int removed_index, const PipelineOptions& opt) {
  if (removed_index != 0 && removed_index != 1)
    throw std::invalid_argument("sweep_spectrum: removed_index must be 0 or 1");

  SpectrumTable table;
  table.a = a;
  table.removed_index = removed_index;
  if (gamma_grid.empty()) return table;

  PairTracker tracker(a, opt);
  std::vector<OriginalPair> pairs;
  pairs.reserve(gamma_grid.size());
  for (double gamma : gamma_grid) {
    try {
      pairs.push_back(tracker.solve_at(gamma));
    } catch (const SolverError& err) {
      throw ContinuationGapError(
          std::string("sweep_spectrum: continuation gap: ") + err.what(), gamma);
    }
  }

  std::vector<SpectrumRow> rows(gamma_grid.size());
  std::vector<std::string> failures(gamma_grid.size());

  auto solve_row = [&](std::size_t i) {
    const double gamma = gamma_grid[i];
    const OriginalPair& pair = pairs[i];
    const EigenSolution& removed = removed_index == 0 ? pair.s0 : pair.s1;
    const EigenSolution& other = removed_index == 0 ? pair.s1 : pair.s0;

    SpectrumRow row;
    row.gamma = gamma;
    row.E0_1 = pair.s0.energy();
    row.E1_1 = pair.s1.energy();
    try {
      const Superpotential w =
          superpotential_standard(removed.kappa, gamma, a);
      require_no_inner_pole(w, a);
      const TrapSpec trap = make_pt_trap(gamma, a, 0.0, removed.kappa * removed.kappa);
      const PartnerPotential partner = partner_potential(w, trap);
      const Complex e_id = other.energy() - removed.energy();
      const EigenSolution ps =
          solve_partner_state(partner, w, other, e_id, opt, nullptr);
      row.E0_2 = ps.energy();
    } catch (const SolverError& err) {
      failures[i] = err.what();
    }
    rows[i] = row;
  };

  const int jobs = std::max(1, opt.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < gamma_grid.size(); ++i) solve_row(i);
  } else {
    std::vector<std::thread> workers;
    for (int t = 0; t < jobs; ++t)
      workers.emplace_back([&, t]() {
        for (std::size_t i = t; i < gamma_grid.size(); i += jobs) solve_row(i);
      });
    for (auto& worker : workers) worker.join();
  }

  for (std::size_t i = 0; i < gamma_grid.size(); ++i)
    if (!failures[i].empty())
      throw ContinuationGapError("sweep_spectrum: partner solve failed: " + failures[i],
                                 gamma_grid[i]);

  bool was_broken = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool broken = std::abs(rows[i].E0_1.imag()) > 1e-8;
    rows[i].gamma_crit_flag = broken && !was_broken;
    was_broken = was_broken || broken;
  }
  table.rows = std::move(rows);
  return table;
}

RemovalReport remove_state(double gamma, double a, int removed_index,
                           std::optional<Complex> xi_left, double g,
                           const PipelineOptions& opt) {
  if (removed_index != 0 && removed_index != 1)
    throw std::invalid_argument("remove_state: removed_index must be 0 or 1");
  if (g > 0.0) return remove_state_nonlinear(gamma, a, removed_index, xi_left, g, opt);

  const OriginalPair pair = solve_original_pair(a, gamma, opt);
  const EigenSolution& removed = removed_index == 0 ? pair.s0 : pair.s1;
  const EigenSolution& other = removed_index == 0 ? pair.s1 : pair.s0;

  Superpotential w = superpotential_family(removed.kappa, gamma, a, xi_left);
  require_no_inner_pole(w, a);

  RemovalReport report;
  report.removed_index = removed_index;
  report.gamma = gamma;
  report.a = a;
  report.g = 0.0;
  report.xi_left = xi_left;
  const TrapSpec trap = make_pt_trap(gamma, a, 0.0, removed.kappa * removed.kappa);
  report.partner = partner_potential(w, trap);
  report.removed_energy = removed.energy();
  report.other_energy = other.energy();
  report.ideal_energy = other.energy() - removed.energy();
  report.partner_solution = solve_partner_state(
      report.partner, w, other, report.ideal_energy, opt, nullptr);
  report.pole_warning = near_pole_warning(w, a);
  report.factorization_residual = verify_factorization(w, trap);
  report.w = std::move(w);
  return report;
}

std::vector<NonlinearRow> nonlinear_comparison(
    const std::vector<double>& g_values, double a,
    const std::vector<double>& gamma_grid, const PipelineOptions& opt) {
  std::vector<NonlinearRow> rows;
  for (double g : g_values) {
    for (double gamma : gamma_grid) {
      NonlinearRow row;
      row.g = g;
      row.gamma = gamma;
      try {
        const RemovalReport report = remove_state(gamma, a, 0, std::nullopt, g, opt);
        row.E0_2 = report.partner_solution.energy();
        row.E_id = report.ideal_energy;
        row.deviation = std::abs(row.E0_2 - row.E_id);
        row.converged = true;
      } catch (const std::exception& err) {
        row.converged = false;
        row.message = err.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

EpStudyReport ep_study(double a, const PipelineOptions& opt) {
  EpStudyReport report;
  const ExceptionalPoint ep = find_exceptional_point(a);
  report.gamma_crit_oracle = ep.gamma_crit;
  report.kappa_ep = ep.kappa_ep;

  // shooting estimate: bisection on the collapse of the real-part gap
  PairTracker tracker(a, opt);
  const double gap_tol = 1e-4;
  auto collapsed = [&](double gamma) {
    const OriginalPair pair = tracker.solve_at(gamma);
    return std::abs(pair.s0.kappa.real() - pair.s1.kappa.real()) < gap_tol;
  };
  double lo = ep.gamma_crit - 0.02;
  double hi = ep.gamma_crit + 0.02;
  if (collapsed(lo) || !collapsed(hi))
    throw SolverError("ep_study: bisection bracket invalid");
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (collapsed(mid) ? hi : lo) = mid;
  }
  report.gamma_crit_shooting = 0.5 * (lo + hi);
  report.estimate_gap = std::abs(report.gamma_crit_shooting - report.gamma_crit_oracle);
  if (report.estimate_gap > 1e-3)
    throw SolverError("ep_study: oracle and shooting estimates disagree beyond 1e-3");

  // survivor state at the critical gamma, continued in from just below
  const double gc = ep.gamma_crit;
  const RemovalReport below = remove_state(gc - 2e-3, a, 0, std::nullopt, 0.0, opt);
  const OriginalPair at_ep = tracker.solve_at(gc);
  const Superpotential w = superpotential_standard(at_ep.s0.kappa, gc, a);
  const TrapSpec trap = make_pt_trap(gc, a, 0.0, at_ep.s0.kappa * at_ep.s0.kappa);
  const PartnerPotential partner = partner_potential(w, trap);
  const Complex e_id = at_ep.s1.energy() - at_ep.s0.energy();
  const ShootingUnknowns fallback = to_unknowns(below.partner_solution);
  const EigenSolution survivor =
      solve_partner_state(partner, w, at_ep.s1, e_id, opt, &fallback);
  report.survivor_energy = survivor.energy();
  report.survivor_pt_asymmetry = pt_asymmetry(survivor);
  report.survivor_norm = survivor.norm;
  return report;
}

std::vector<double> make_gamma_grid(double from, double to, double step,
                                    std::optional<double> gamma_crit,
                                    double fine_step) {
  std::vector<double> grid;
  if (to < from || !(step > 0.0)) return grid;
  const long n = std::lround(std::floor((to - from) / step + 1e-9));
  for (long i = 0; i <= n; ++i) grid.push_back(from + i * step);
  if (grid.back() < to - 1e-12) grid.push_back(to);

  if (gamma_crit && step > fine_step) {
    const double lo = std::max(from, *gamma_crit - 0.01);
    const double hi = std::min(to, *gamma_crit + 0.01);
    for (double g = lo; g <= hi + 1e-12; g += fine_step) grid.push_back(g);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double x, double y) { return std::abs(x - y) < 1e-10; }),
               grid.end());
  }
  return grid;
}

}  // namespace ddsusy
