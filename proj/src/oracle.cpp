#include "ddsusy/oracle.hpp"

#include <cmath>

namespace ddsusy {

Complex char_fn(Complex kappa, double gamma, double a) {
  const Complex nu(-1.0, gamma);
  const Complex nus(-1.0, -gamma);
  return (2.0 * kappa + nu) * (2.0 * kappa + nus) -
         nu * nus * std::exp(-2.0 * kappa * a);
}

Complex char_fn_dkappa(Complex kappa, double gamma, double a) {
  const double nn = 1.0 + gamma * gamma;
  return 8.0 * kappa - 4.0 + 2.0 * a * nn * std::exp(-2.0 * kappa * a);
}

namespace {

// Newton on char_fn / kappa; the division removes the trivial root at zero
// which otherwise captures iterates above the exceptional point.
Complex refine_root(Complex k, double gamma, double a, double tol = 1e-14,
                    int max_iter = 80) {
  for (int it = 0; it < max_iter; ++it) {
    const Complex f = char_fn(k, gamma, a);
    const Complex fp = char_fn_dkappa(k, gamma, a);
    const Complex deflated = f / k;
    const Complex deflated_p = (fp * k - f) / (k * k);
    const Complex step = deflated / deflated_p;
    k -= step;
    if (std::abs(step) < tol) break;
  }
  return k;
}

double bisect(double lo, double hi, const std::function<double(double)>& f) {
  double flo = f(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (flo * fm <= 0.0)
      hi = mid;
    else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double hermitian_even_kappa(double a) {
  // Equivalent real form of the gamma = 0 even branch: 2k - 1 = exp(-k a).
  auto f = [a](double k) { return 2.0 * k - 1.0 - std::exp(-k * a); };
  return bisect(0.5 + 1e-14, 4.0, f);
}

double hermitian_odd_kappa(double a) {
  if (a <= 2.0)
    throw std::invalid_argument("hermitian_odd_kappa: no odd bound state for a <= 2");
  // Odd branch: 2k - 1 = -exp(-k a); k = 0 solves it trivially, the physical
  // root lies above the small-k dip.
  auto f = [a](double k) { return 2.0 * k - 1.0 + std::exp(-k * a); };
  double lo = 1e-5;
  while (f(lo) > 0.0 && lo < 0.4) lo *= 2.0;  // step past the trivial zero
  return bisect(lo, 0.5 - 1e-14, f);
}

OracleRoots oracle_eigenvalues(double gamma, double a) {
  if (!(a > 2.0))
    throw std::invalid_argument(
        "oracle_eigenvalues: the trap holds two bound states only for a > 2");
  if (gamma < 0.0) throw std::invalid_argument("oracle_eigenvalues: gamma must be non-negative");

  Complex r0(hermitian_even_kappa(a), 0.0);
  Complex r1(hermitian_odd_kappa(a), 0.0);

  double gc = 0.0;
  while (gc < gamma - 1e-15) {
    gc = std::min(gamma, gc + 0.005);
    Complex s0 = r0, s1 = r1;
    // Real seeds stay real under Newton (char_fn maps reals to reals), so a
    // tilt is needed for the branch-off into the complex plane near the EP.
    const double dist = std::abs(r0 - r1);
    if (std::abs(r0.imag()) < 1e-10 && dist < 0.12) {
      s0 += Complex(0.0, -(0.3 * dist + 1e-4));
      s1 += Complex(0.0, +(0.3 * dist + 1e-4));
    }
    r0 = refine_root(s0, gc, a);
    r1 = refine_root(s1, gc, a);
    if (std::abs(r0 - r1) < 1e-10) {
      // collapsed onto one root; conjugation symmetry recovers the sibling
      if (std::abs(r0.imag()) > 1e-10)
        r1 = std::conj(r0);
    }
  }

  OracleRoots roots;
  roots.gamma = gamma;
  roots.a = a;
  roots.ep_degenerate = std::abs(r0 - r1) < 1e-12;
  const bool broken =
      std::abs(r0.imag()) > 1e-10 || std::abs(r1.imag()) > 1e-10;
  if (!broken) {
    if (r0.real() < r1.real()) std::swap(r0, r1);
  } else {
    // Im E = -2 Re(k) Im(k): index 0 carries the positive imaginary energy.
    if (r0.imag() > r1.imag()) std::swap(r0, r1);
  }
  roots.kappa0 = r0;
  roots.kappa1 = r1;
  return roots;
}

ExceptionalPoint find_exceptional_point(double a) {
  if (!(a > 0.0)) throw std::invalid_argument("find_exceptional_point: a must be positive");

  // Reduced real form with s = 2 kappa - 1: eliminating gamma through
  // d char/d kappa = 0 gives gamma^2 = -s (s + 2/a) and leaves
  //   G(s) = -2 s / a - (1 - s^2 - 2 s / a) exp(-a (s + 1)) = 0
  // on s in (-1, 0).  s = -1 (kappa = 0) is the trivial continuum branch;
  // the bound-state coalescence is the first sign change below s = 0.
  auto reduced = [a](double s) {
    return -2.0 * s / a -
           (1.0 - s * s - 2.0 * s / a) * std::exp(-a * (s + 1.0));
  };
  double gamma = 0.0, kappa = 0.0;
  {
    double s_hi = -1e-3;
    double s_root = 0.0;
    bool found = false;
    for (double s = s_hi - 2e-3; s > -0.999; s -= 2e-3) {
      if (reduced(s) > 0.0) {
        s_root = bisect(s, s_hi, reduced);
        found = true;
        break;
      }
      s_hi = s;
    }
    if (!found)
      throw SolverError("find_exceptional_point: no coalescence for this separation");
    kappa = 0.5 * (s_root + 1.0);
    const double g2 = -s_root * (s_root + 2.0 / a);
    if (!(g2 > 0.0))
      throw SolverError("find_exceptional_point: seed left the physical branch");
    gamma = std::sqrt(g2);
  }

  // f(kappa, gamma) = char_fn restricted to real kappa (it is then real);
  // solve f = 0, df/dkappa = 0 with an analytic Jacobian.
  for (int it = 0; it < 200; ++it) {
    const double nn = 1.0 + gamma * gamma;
    const double e = std::exp(-2.0 * a * kappa);
    const double s = 2.0 * kappa - 1.0;
    const double f = s * s + gamma * gamma - nn * e;
    const double fk = 4.0 * s + 2.0 * a * nn * e;
    const double fg = 2.0 * gamma * (1.0 - e);
    const double fkk = 8.0 - 4.0 * a * a * nn * e;
    const double fkg = 4.0 * a * gamma * e;
    const double det = fk * fkg - fg * fkk;
    if (std::abs(det) < 1e-300)
      throw SingularJacobianError("find_exceptional_point: degenerate Jacobian");
    const double dk = (-f * fkg + fk * fg) / det;
    const double dg = (-fk * fk + f * fkk) / det;
    kappa += dk;
    gamma += dg;
    if (std::abs(dk) + std::abs(dg) < 1e-15) break;
    if (it == 199)
      throw MaxIterationsError("find_exceptional_point: Newton did not converge");
  }
  if (!(gamma > 0.0) || !(kappa > 0.0) || !std::isfinite(gamma) || !std::isfinite(kappa))
    throw SolverError("find_exceptional_point: converged to an unphysical point");
  return {gamma, Complex(kappa, 0.0)};
}

double calibrate_separation(double target_E0_abs) {
  // kappa_0 ranges over (1/2, 1) as a sweeps (inf, 0), so reachable targets
  // are kappa_0^2 in (1/4, 1).
  if (!(target_E0_abs > 0.2501) || !(target_E0_abs < 0.9999))
    throw std::invalid_argument("calibrate_separation: target outside achievable range (0.25, 1)");
  double lo = 1e-3, hi = 80.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double k = hermitian_even_kappa(mid);
    // kappa_0 decreases with a
    if (k * k > target_E0_abs)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace ddsusy
