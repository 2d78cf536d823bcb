#include "ddsusy/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace ddsusy {

namespace {

long nearest_index(double x, double x0, double dx) {
  return std::lround((x - x0) / dx);
}

bool on_lattice(double x, double x0, double dx) {
  const double t = (x - x0) / dx;
  return std::abs(t - std::round(t)) < 1e-6;
}

}  // namespace

Complex FieldTable::value(long index2, Side side) const {
  if (side == Side::left) {
    auto it = left_values.find(index2);
    if (it != left_values.end()) return it->second;
  }
  return values(static_cast<Index>(index2));
}

FieldTable tabulate_field(const PotentialField& field, double x_from,
                          double x_to, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("tabulate_field: step must be positive");
  const double lo = std::min(x_from, x_to);
  const double hi = std::max(x_from, x_to);
  const long n_steps = std::lround((hi - lo) / h);
  if (std::abs(n_steps * h - (hi - lo)) > 1e-6 * h)
    throw std::invalid_argument("tabulate_field: span is not a multiple of the step");

  FieldTable table;
  table.x0 = lo;
  table.dx = 0.5 * h;
  table.g = field.trap.g;
  const long n2 = 2 * n_steps;
  table.values.resize(n2 + 1);
  for (long j = 0; j <= n2; ++j)
    table.values(j) = field.smooth(lo + j * table.dx, Side::right);

  for (const DeltaWell& d : field.trap.deltas) {
    if (d.position < lo - 1e-9 || d.position > hi + 1e-9) continue;
    if (!on_lattice(d.position, lo, h))
      throw std::invalid_argument("tabulate_field: delta not on a full-step node");
    const long j = nearest_index(d.position, lo, table.dx);
    table.deltas.push_back({j, d.strength});
    table.left_values[j] = field.smooth(d.position, Side::left);
  }
  std::sort(table.deltas.begin(), table.deltas.end(),
            [](const auto& a, const auto& b) { return a.index2 < b.index2; });
  return table;
}

Trajectory propagate(const FieldTable& table, Complex energy, StatePair start,
                     double x_from, double x_to, double h,
                     double overflow_guard) {
  if (!(h > 0.0)) throw std::invalid_argument("propagate: step must be positive");
  const int dir = x_to >= x_from ? +1 : -1;
  const long n = std::lround(std::abs(x_to - x_from) / h);
  if (std::abs(n * h - std::abs(x_to - x_from)) > 1e-6 * h)
    throw std::invalid_argument("propagate: span is not a multiple of the step");
  if (!on_lattice(x_from, table.x0, table.dx))
    throw std::invalid_argument("propagate: start not on the field lattice");

  std::unordered_map<long, Complex> delta_at;
  for (const auto& d : table.deltas) delta_at.emplace(d.index2, d.strength);

  Trajectory traj;
  traj.x0 = x_from;
  traj.step = dir * h;
  traj.phi.resize(n + 1);
  traj.dphi.resize(n + 1);

  Complex phi = start.phi;
  Complex dphi = start.dphi;
  traj.phi(0) = phi;
  traj.dphi(0) = dphi;

  const double g = table.g;
  long j2 = nearest_index(x_from, table.x0, table.dx);  // half-step cursor
  const long dj = 2 * dir;

  auto rhs = [&](long index2, Side side, Complex p, Complex dp,
                 Complex& out_p, Complex& out_dp) {
    const Complex v = table.value(index2, side);
    out_p = dp;
    out_dp = (v + g * std::norm(p) - energy) * p;
  };

  for (long i = 1; i <= n; ++i) {
    // stage sides: departure node uses the outgoing side, arrival the
    // incoming side, so a delta node is never straddled
    const Side depart = dir > 0 ? Side::right : Side::left;
    const Side arrive = dir > 0 ? Side::left : Side::right;
    const long jm = j2 + dj / 2;
    const long je = j2 + dj;
    const double hd = dir * h;

    Complex k1p, k1d, k2p, k2d, k3p, k3d, k4p, k4d;
    rhs(j2, depart, phi, dphi, k1p, k1d);
    rhs(jm, Side::right, phi + 0.5 * hd * k1p, dphi + 0.5 * hd * k1d, k2p, k2d);
    rhs(jm, Side::right, phi + 0.5 * hd * k2p, dphi + 0.5 * hd * k2d, k3p, k3d);
    rhs(je, arrive, phi + hd * k3p, dphi + hd * k3d, k4p, k4d);

    phi += hd / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    dphi += hd / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
    j2 = je;

    if (std::abs(phi.real()) > overflow_guard || std::abs(phi.imag()) > overflow_guard ||
        !std::isfinite(phi.real()) || !std::isfinite(phi.imag()))
      throw DivergenceError("propagate: |phi| exceeded the overflow guard");

    auto it = delta_at.find(j2);
    if (it != delta_at.end()) {
      // convert the arriving state to the outgoing side of the delta
      dphi += static_cast<double>(dir) * it->second * phi;
      traj.jumps.push_back({table.x0 + j2 * table.dx, it->second});
    }

    traj.phi(i) = phi;
    traj.dphi(i) = dphi;
  }
  return traj;
}

Trajectory propagate(const PotentialField& field, Complex energy,
                     StatePair start, double x_from, double x_to, double h,
                     double overflow_guard) {
  return propagate(tabulate_field(field, x_from, x_to, h), energy, start,
                   x_from, x_to, h, overflow_guard);
}

double simpson(const RealArray& values, double h) {
  const Index n = values.size() - 1;  // interval count
  if (n < 1) return 0.0;
  if (n == 1) return 0.5 * h * (values(0) + values(1));
  double total = 0.0;
  Index m = n;
  if (n % 2 != 0) {
    if (n < 3) return 0.5 * h * (values(0) + values(1));
    m = n - 3;  // leave a 3/8 block at the end
  }
  for (Index i = 0; i + 2 <= m; i += 2)
    total += h / 3.0 * (values(i) + 4.0 * values(i + 1) + values(i + 2));
  if (m != n)
    total += 3.0 * h / 8.0 *
             (values(n - 3) + 3.0 * values(n - 2) + 3.0 * values(n - 1) + values(n));
  return total;
}

double norm_with_tails(const Trajectory& traj_left,
                       const Trajectory& traj_right, Complex decay_rate) {
  if (!(decay_rate.real() > 0.0))
    throw std::invalid_argument("norm_with_tails: decay rate must have positive real part");
  if (std::abs(traj_left.phi(0) - traj_right.phi(0)) >
      1e-9 * (1.0 + std::abs(traj_right.phi(0))))
    throw std::invalid_argument("norm_with_tails: trajectories do not share the origin sample");

  const Index nl = traj_left.size();
  const Index nr = traj_right.size();
  RealArray density(nl + nr - 1);
  for (Index i = 0; i < nl; ++i)
    density(i) = std::norm(traj_left.phi(nl - 1 - i));
  for (Index i = 1; i < nr; ++i)
    density(nl - 1 + i) = std::norm(traj_right.phi(i));

  const double h = std::abs(traj_right.step);
  double total = simpson(density, h);
  const double re2 = 2.0 * decay_rate.real();
  total += std::norm(traj_right.back().phi) / re2;
  total += std::norm(traj_left.back().phi) / re2;
  return total;
}

NewtonResult newton_root(const ResidualFn& residual_fn, Vector u0,
                         const NewtonOptions& options) {
  const Index n = u0.size();
  Vector u = std::move(u0);
  Vector f = residual_fn(u);
  if (f.size() != n)
    throw std::invalid_argument("newton_root: residual dimension mismatch");
  double fnorm = f.lpNorm<Eigen::Infinity>();

  NewtonResult result;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    if (fnorm < options.tol) {
      result.u = u;
      result.residual_norm = fnorm;
      result.iterations = iter;
      return result;
    }

    Matrix jacobian(n, n);
    for (Index j = 0; j < n; ++j) {
      const double du =
          std::max(options.fd_step_rel * std::abs(u(j)), options.fd_step_floor);
      Vector up = u;
      up(j) += du;
      jacobian.col(j) = (residual_fn(up) - f) / du;
    }

    Vector step(n);
    if (options.allow_rank_deficient) {
      step = jacobian.completeOrthogonalDecomposition().solve(-f);
    } else {
      Eigen::FullPivLU<Matrix> lu(jacobian);
      const RealArray pivots = lu.matrixLU().diagonal().array().abs();
      if (pivots.minCoeff() < options.pivot_rtol * pivots.maxCoeff())
        throw SingularJacobianError("newton_root: Jacobian numerically singular");
      step = lu.solve(-f);
    }

    double alpha = 1.0;
    bool improved = false;
    for (int halving = 0; halving <= options.max_halvings; ++halving) {
      Vector u_try = u + alpha * step;
      Vector f_try;
      try {
        f_try = residual_fn(u_try);
      } catch (const DivergenceError&) {
        alpha *= 0.5;
        continue;
      }
      const double fn_try = f_try.lpNorm<Eigen::Infinity>();
      if (fn_try < fnorm) {
        u = std::move(u_try);
        f = std::move(f_try);
        fnorm = fn_try;
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved)
      throw MaxIterationsError("newton_root: line search stalled");
  }
  if (fnorm < options.tol) {
    result.u = u;
    result.residual_norm = fnorm;
    result.iterations = options.max_iter;
    return result;
  }
  throw MaxIterationsError("newton_root: iteration limit exceeded");
}

Vector newton_root(const ResidualFn& residual_fn, const Vector& u0, double tol,
                   int max_iter) {
  NewtonOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  return newton_root(residual_fn, u0, options).u;
}

}  // namespace ddsusy
