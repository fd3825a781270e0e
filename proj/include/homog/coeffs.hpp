#pragma once

#include "homog/common.hpp"
#include "homog/field.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace homog {

/// Constant symbol matrices B_1..B_d (each m x n) of B(zeta) = sum B_i zeta_i.
struct BStructure {
  int d = 1;
  int n = 1;
  int m = 1;
  std::vector<CMatrix> b;

  /// B(zeta) for a real vector zeta of length d.
  [[nodiscard]] CMatrix symbol(std::span<const double> zeta) const;
  /// [B_1 ... B_d], m x (n d).
  [[nodiscard]] CMatrix stacked() const;
  /// Throws ProblemError on inconsistent sizes.
  void check() const;

  /// Gradient structure of a scalar problem: n = 1, m = d, B_i = e_i.
  static BStructure gradient(int d);
  /// Stacked structure (zeta_1 E_n; ...; zeta_d E_n), m = n d.
  static BStructure stacked_identity(int d, int n);
};

/// Coefficient fields of
///   H = B(d)* A B(d) + sum_i (a_i d_i b_i - b_i* d_i a_i*) + V
/// with weight G. A is m x m, a_i, b_i, V, G are n x n; b_i depends on x only.
struct CoefficientSet {
  std::string name;
  BStructure bstruct;
  MatrixField A;
  std::vector<MatrixField> a;  // d entries
  std::vector<MatrixField> b;  // d entries
  MatrixField V;
  MatrixField G;
  double length = kTwoPi;  // slow period used for probing and the torus

  [[nodiscard]] int d() const { return bstruct.d; }
  [[nodiscard]] int n() const { return bstruct.n; }
  [[nodiscard]] int m() const { return bstruct.m; }

  /// True when some field depends on x (b included).
  [[nodiscard]] bool depends_on_x() const;
  /// True when A, a_i, V or G depends on xi.
  [[nodiscard]] bool depends_on_xi() const;
  /// True when a_i and b_i are all zero.
  [[nodiscard]] bool lower_order_free() const;

  /// Shape checks: sizes, b independent of xi, variable indices <= d.
  /// Missing a, b, V become zero and a missing G the identity.
  void normalize();
};

struct ProbePlan {
  int n_points = 128;
  int n_zeta = 50;
  std::uint64_t seed = 1;
};

struct ValidationReport {
  double c1 = 0.0;
  double c2 = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  bool hermitian_ok = true;
  bool rank_ok = true;
  int sample_count = 0;
  int zeta_count = 0;
  double max_hermitian_defect = 0.0;
  double min_rank_ratio = 1.0;
  std::string offending;  // first failing entry, empty when valid

  [[nodiscard]] bool valid() const { return c1 > 0.0 && g1 > 0.0 && hermitian_ok && rank_ok; }
};

class ValidationFailed : public Error {
 public:
  ValidationFailed(const std::string& message, ValidationReport report)
      : Error(message), report_(std::move(report)) {}
  [[nodiscard]] const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// Probe points (x, xi): stratified jittered samples over [0,L)^d x [0,1)^d.
std::vector<std::pair<Point, Point>> probe_points(int d, double length, const ProbePlan& plan);

/// Computes the report without throwing.
ValidationReport inspect(const CoefficientSet& cs, const ProbePlan& plan = {});

/// Throws ValidationFailed when the report is not valid.
ValidationReport validate(const CoefficientSet& cs, const ProbePlan& plan = {});

/// Extreme eigenvalues of the Hermitian part.
std::pair<double, double> hermitian_eigen_range(const CMatrix& m);

}  // namespace homog
