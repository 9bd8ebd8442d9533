#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace appm {

// Points of the (finite-dimensional) Hilbert space and dense operators on it.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Bad input rejected before any computation (nonpositive step, shape mismatch, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear system whose LU factorization hit a pivot below the singularity threshold.
class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An inner iterative solver reached its iteration cap before its tolerance.
class InnerSolverError : public std::runtime_error {
 public:
  InnerSolverError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

inline void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw ValidationError(std::string(name) + " must be positive and finite");
}

template <class Derived>
void require_finite(const Eigen::DenseBase<Derived>& x, const char* name) {
  if (!x.allFinite()) throw ValidationError(std::string(name) + " has non-finite entries");
}

inline void require_square(const Matrix& m, const char* name) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw ValidationError(std::string(name) + " must be a non-empty square matrix");
}

inline Vector stack(const Vector& top, const Vector& bottom) {
  Vector out(top.size() + bottom.size());
  out << top, bottom;
  return out;
}

}  // namespace appm
