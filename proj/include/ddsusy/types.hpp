#pragma once

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace ddsusy {

using Complex = std::complex<double>;
using RealArray = Eigen::ArrayXd;
using ComplexArray = Eigen::ArrayXcd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;

/// Returned by potential evaluation at a registered pole location.
inline const Complex kPoleSignal{std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity()};

inline bool is_pole_signal(Complex v) {
  return std::isinf(v.real()) || std::isinf(v.imag());
}

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// |phi| exceeded the overflow guard during propagation.
struct DivergenceError : SolverError {
  using SolverError::SolverError;
};

struct SingularJacobianError : SolverError {
  using SolverError::SolverError;
};

struct MaxIterationsError : SolverError {
  using SolverError::SolverError;
};

/// Parameter continuation could not bridge a gamma step.
struct ContinuationGapError : SolverError {
  ContinuationGapError(const std::string& what, double gamma_value)
      : SolverError(what), gamma(gamma_value) {}
  double gamma;
};

/// A wavefunction node blocks the superpotential construction.
struct NodalStateError : SolverError {
  NodalStateError(const std::string& what, double where)
      : SolverError(what), position(where) {}
  double position;
};

/// A tanh piece has a pole on the real axis inside its region.
struct PoleInRegionError : SolverError {
  PoleInRegionError(const std::string& what, double where)
      : SolverError(what), position(where) {}
  double position;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// tanh that stays finite for large |Re z| where cosh/sinh would overflow.
inline Complex safe_tanh(Complex z) {
  if (std::abs(z.real()) > 20.0) return z.real() > 0 ? Complex(1, 0) : Complex(-1, 0);
  return std::tanh(z);
}

inline Complex atanh_principal(Complex t) {
  return 0.5 * std::log((1.0 + t) / (1.0 - t));
}

}  // namespace ddsusy
