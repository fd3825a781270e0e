#pragma once

#include "homog/discrete.hpp"

#include <optional>

namespace homog {

/// sum_ij (-d_i + sa_i*) g^{ij} (d_j + sa_j) + sv with n x n blocks g^{ij}.
struct DivergenceFormSpec {
  int d = 1;
  int n = 1;
  std::vector<MatrixField> g;   // d*d blocks, g[i*d + j] = g^{ij}
  std::vector<MatrixField> sa;  // d fields
  MatrixField sv;
  double length = kTwoPi;
  std::string name;

  [[nodiscard]] const MatrixField& block(int i, int j) const { return g[i * d + j]; }
  /// Fills zero sa, sv and checks sizes. Throws ProblemError.
  void normalize();
};

/// Checks (g^{ij})* = g^{ji}, positivity of the block matrix and Hermitian sv
/// at probe points. Throws ValidationFailed.
ValidationReport validate(const DivergenceFormSpec& spec, const ProbePlan& plan = {});

/// The block matrix [g^{ij}] as an (n d) x (n d) field.
MatrixField block_metric(const DivergenceFormSpec& spec);

/// Canonical coefficients: m = n d, B_i the i-th block of E, A = [g^{ij}],
/// a_i = sum_j sa_j* g^{ji}, b_i = E_n, V = sv + sum_ij sa_i* g^{ij} sa_j.
CoefficientSet to_canonical(const DivergenceFormSpec& spec, bool check = true);

/// Quadratic form of the divergence-form operator on the torus, evaluated
/// term by term from g, sa and sv: h^d sum (D u + sa u)* g (D u + sa u) + u* sv u
/// with first-order terms at the cell centres and the potential at nodes.
Complex divergence_form_value(const DivergenceFormSpec& spec, const TorusGrid& grid,
                              const EpsilonChoice& eps, const DiscreteField& u);

/// h^d <H u, u> for a discrete operator.
Complex operator_form_value(const DiscreteOperator& H, const DiscreteField& u);

/// Two-dimensional Pauli operator: sa_i = i A_i E_2, sv = sigma3 B with
/// B = d A_2/d x_1 - d A_1/d x_2 by centered differences of step fd_step.
/// metric is the scalar factor of g^{ij} = metric_ij E_2 (identity when absent).
/// Throws DimensionError unless d = 2.
DivergenceFormSpec pauli(int d, const ScalarField& A1, const ScalarField& A2,
                         const std::vector<ScalarField>& metric = {}, double fd_step = 1e-5,
                         double length = kTwoPi);

/// Positive Hermitian transform f(x, xi). Throws ValidationFailed otherwise.
void validate_transform(const MatrixField& f, int d, double length, const ProbePlan& plan = {});

struct TransformCheck {
  double discrepancy = 0.0;  // |f (H~ - lambda G)^{-1} f* r - (H - lambda G~)^{-1} r| / |rhs side|
  double residual_left = 0.0;
  double residual_right = 0.0;
};

/// Compares both sides of f (f* H f - lambda G)^{-1} f* = (H - lambda f*^{-1} G f^{-1})^{-1}
/// on one right-hand side.
TransformCheck f_transform_check(const CoefficientSet& cs, const MatrixField& f, Complex lambda,
                                 const DiscreteField& rhs, const TorusGrid& grid,
                                 const EpsilonChoice& eps, const ShiftedSolverOptions& opts = {});

/// Named bundled problems.
struct Preset {
  std::string name;
  std::string description;
  CoefficientSet cs;
  std::optional<DivergenceFormSpec> form;
  std::optional<MatrixField> transform;
  std::vector<std::string> rhs;  // one slow expression per component
  std::vector<int> periods;      // default sweep, eps = L / N
  int n_cell = 128;              // cell grid for the effective command
  int n_slow = 1;                // slow nodes per axis for the effective command
};

std::vector<std::string> preset_names();
/// Throws ProblemError for unknown names.
Preset make_preset(const std::string& name);

}  // namespace homog
