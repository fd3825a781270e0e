#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace homog {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using SparseC = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<Complex, int>;

/// A point in the slow variable x or the fast variable xi. At most 9 components.
using Point = std::vector<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// ---------------------------------------------------------------------------
// Errors. Every failure mode named in the public contracts has its own type so
// callers (and the CLI exit-code mapping) can dispatch on it.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& message)
      : Error("parse error at " + std::to_string(position) + ": " + message),
        position_(position) {}
  [[nodiscard]] std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class PeriodicityError : public Error {
 public:
  using Error::Error;
};

/// Structural problems in a problem definition (sizes, missing fields, ...).
class ProblemError : public Error {
 public:
  using Error::Error;
};

class SolvabilityViolated : public Error {
 public:
  using Error::Error;
};

class SolverDiverged : public Error {
 public:
  using Error::Error;
};

class CrossCheckFailed : public Error {
 public:
  using Error::Error;
};

class CommensurabilityError : public Error {
 public:
  using Error::Error;
};

class NodeMismatch : public Error {
 public:
  using Error::Error;
};

class CacheMiss : public Error {
 public:
  using Error::Error;
};

class ShiftInsideSpectrum : public Error {
 public:
  using Error::Error;
};

class DegenerateFit : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Small numeric helpers shared by several modules.

/// Largest entry magnitude.
inline double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// (m + m^H) / 2. The result is Hermitian bit-for-bit.
inline CMatrix hermitian_part(const CMatrix& m) {
  return (m + m.adjoint()) * 0.5;
}

/// Same as hermitian_part for sparse matrices.
SparseC hermitian_part(const SparseC& m);

/// max |M - M^H| over all entries; zero for exactly Hermitian matrices.
double hermitian_defect(const SparseC& m);

/// Relative gap ||p - q||_max / max(||p||_max, ||q||_max, floor).
double relative_gap(const CMatrix& p, const CMatrix& q, double floor = 1e-13);

/// Pairwise mean of an array of matrices. For 2^k identical inputs the mean is
/// exact, which keeps xi-independent coefficients bit-identical after averaging.
CMatrix pairwise_mean(std::span<const CMatrix> values);

/// Number of worker threads: HOMOG_THREADS if set, else hardware concurrency.
int worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads. The body
/// must write only to its own index; the first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace homog
