#pragma once

#include "homog/common.hpp"
#include "homog/expr.hpp"

#include <memory>
#include <optional>
#include <string_view>
#include <utility>

namespace homog {

/// Grid samples of a scalar field on a uniform periodic slow grid times the
/// uniform cell grid. Node indices run with axis 0 fastest.
struct TabulatedSamples {
  int d = 1;
  double length = kTwoPi;  // slow period per axis
  int n_slow = 1;          // slow nodes per axis
  int n_cell = 8;          // cell nodes per axis
  std::vector<std::vector<Complex>> values;  // [slow node][cell node]
};

/// Weights w_j(t), j < n, of the periodic trigonometric interpolant on the
/// grid {j/n}: f(t) ~ sum_j w_j(t) f(j/n). Exact delta weights at grid nodes.
std::vector<double> periodic_interpolation_weights(int n, double t);

/// Tensor-product interpolation weights on the d-dimensional cell grid with n
/// nodes per axis, node index with axis 0 fastest.
std::vector<double> cell_interpolation_weights(int d, int n, std::span<const double> xi);

/// Complex scalar coefficient entry f(x, xi), 1-periodic in xi. Immutable.
class ScalarField {
 public:
  using Function = std::function<Complex(std::span<const double>, std::span<const double>)>;

  /// The zero field.
  ScalarField();

  static ScalarField constant(Complex value);
  static ScalarField from_expr(Expr re, Expr im = Expr());
  /// Parses the real and imaginary part expressions.
  static ScalarField parse(std::string_view re, std::string_view im = "0");
  /// Wraps a callable. It receives xi already reduced to [0,1)^d and must be
  /// 1-periodic in xi.
  static ScalarField from_function(Function f, bool depends_on_x, bool depends_on_xi);
  /// Trigonometric interpolation in xi, multilinear periodic interpolation in x.
  static ScalarField tabulated(TabulatedSamples samples);

  /// Value at (x, xi); xi is reduced modulo 1 per component first.
  [[nodiscard]] Complex operator()(std::span<const double> x, std::span<const double> xi) const;
  /// Value at (x, xi) for xi already in [0,1)^d.
  [[nodiscard]] Complex evaluate_reduced(std::span<const double> x,
                                         std::span<const double> xi) const {
    return (*fn_)(x, xi);
  }

  [[nodiscard]] bool depends_on_x() const { return depends_x_; }
  [[nodiscard]] bool depends_on_xi() const { return depends_xi_; }
  [[nodiscard]] bool is_zero() const { return zero_; }
  /// Largest variable index used (x or xi), for dimension checks. 0 if unknown.
  [[nodiscard]] int max_variable_index() const { return max_index_; }

  /// The (re, im) expression pair when the field was built from expressions.
  [[nodiscard]] const std::optional<std::pair<Expr, Expr>>& expressions() const { return exprs_; }

 private:
  std::shared_ptr<const Function> fn_;
  std::optional<std::pair<Expr, Expr>> exprs_;
  bool depends_x_ = false;
  bool depends_xi_ = false;
  bool zero_ = true;
  int max_index_ = 0;
};

/// Matrix-valued coefficient field, pointwise rows x cols. Immutable.
class MatrixField {
 public:
  using Function = std::function<CMatrix(std::span<const double>, std::span<const double>)>;

  MatrixField() = default;
  /// Row-major entries.
  MatrixField(int rows, int cols, std::vector<ScalarField> entries);

  static MatrixField zero(int rows, int cols);
  static MatrixField identity(int n);
  static MatrixField constant(const CMatrix& value);
  /// Scalar field times the identity.
  static MatrixField scalar(int n, const ScalarField& s);
  /// The callable receives reduced xi and must be 1-periodic in xi.
  static MatrixField from_function(int rows, int cols, Function f, bool depends_on_x,
                                   bool depends_on_xi);

  /// Value at (x, xi); xi is reduced modulo 1 first.
  [[nodiscard]] CMatrix operator()(std::span<const double> x, std::span<const double> xi) const;

  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  [[nodiscard]] bool depends_on_x() const { return depends_x_; }
  [[nodiscard]] bool depends_on_xi() const { return depends_xi_; }
  [[nodiscard]] bool is_zero() const { return zero_; }
  [[nodiscard]] bool empty() const { return rows_ == 0 || cols_ == 0; }
  [[nodiscard]] int max_variable_index() const { return max_index_; }
  /// Row-major entries for entry-built fields, nullptr for composite fields.
  [[nodiscard]] const std::vector<ScalarField>* entries() const {
    return entries_ ? entries_.get() : nullptr;
  }

  /// Pointwise conjugate transpose.
  [[nodiscard]] MatrixField adjoint() const;

 private:
  friend MatrixField operator*(const MatrixField&, const MatrixField&);
  friend MatrixField operator+(const MatrixField&, const MatrixField&);

  int rows_ = 0;
  int cols_ = 0;
  std::shared_ptr<const Function> fn_;
  std::shared_ptr<const std::vector<ScalarField>> entries_;
  bool depends_x_ = false;
  bool depends_xi_ = false;
  bool zero_ = true;
  int max_index_ = 0;
};

/// Pointwise product and sum.
MatrixField operator*(const MatrixField& a, const MatrixField& b);
MatrixField operator+(const MatrixField& a, const MatrixField& b);

/// xi reduced modulo 1 componentwise.
Point reduce_cell(std::span<const double> xi);

}  // namespace homog
