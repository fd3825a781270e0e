#include "homog/field.hpp"

#include <algorithm>
#include <cmath>

namespace homog {

Point reduce_cell(std::span<const double> xi) {
  Point r(xi.begin(), xi.end());
  for (double& v : r) {
    v -= std::floor(v);
    if (v >= 1.0) v = 0.0;
  }
  return r;
}

std::vector<double> periodic_interpolation_weights(int n, double t) {
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  t -= std::floor(t);
  const double scaled = t * n;
  const double nearest = std::round(scaled);
  if (std::abs(scaled - nearest) < 1e-9) {
    w[static_cast<std::size_t>(static_cast<int>(nearest) % n)] = 1.0;
    return w;
  }
  // Periodic sinc for an even number of nodes: sin(pi n s) cot(pi s) / n.
  for (int j = 0; j < n; ++j) {
    const double s = t - static_cast<double>(j) / n;
    w[static_cast<std::size_t>(j)] =
        std::sin(kPi * n * s) / (n * std::tan(kPi * s));
  }
  return w;
}

std::vector<double> cell_interpolation_weights(int d, int n, std::span<const double> xi) {
  std::vector<std::vector<double>> axis(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) axis[a] = periodic_interpolation_weights(n, xi[a]);
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(n);
  std::vector<double> w(total, 1.0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    double prod = 1.0;
    for (int a = 0; a < d; ++a) {
      prod *= axis[a][rem % n];
      rem /= n;
    }
    w[idx] = prod;
  }
  return w;
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField()
    : fn_(std::make_shared<const Function>(
          [](std::span<const double>, std::span<const double>) { return Complex(0.0, 0.0); })) {}

ScalarField ScalarField::constant(Complex value) {
  ScalarField f;
  f.fn_ = std::make_shared<const Function>(
      [value](std::span<const double>, std::span<const double>) { return value; });
  f.zero_ = value == Complex(0.0, 0.0);
  return f;
}

ScalarField ScalarField::from_expr(Expr re, Expr im) {
  ScalarField f;
  f.fn_ = std::make_shared<const Function>(
      [re, im](std::span<const double> x, std::span<const double> xi) {
        return Complex(re.evaluate(x, xi), im.evaluate(x, xi));
      });
  f.depends_x_ = re.depends_on_x() || im.depends_on_x();
  f.depends_xi_ = re.depends_on_xi() || im.depends_on_xi();
  f.zero_ = re.is_zero_literal() && im.is_zero_literal();
  f.max_index_ = std::max({re.max_x_index(), re.max_xi_index(), im.max_x_index(),
                           im.max_xi_index()});
  f.exprs_ = std::make_pair(std::move(re), std::move(im));
  return f;
}

ScalarField ScalarField::parse(std::string_view re, std::string_view im) {
  return from_expr(parse_expr(re), parse_expr(im));
}

ScalarField ScalarField::from_function(Function fn, bool depends_on_x, bool depends_on_xi) {
  ScalarField f;
  f.fn_ = std::make_shared<const Function>(std::move(fn));
  f.depends_x_ = depends_on_x;
  f.depends_xi_ = depends_on_xi;
  f.zero_ = false;
  return f;
}

ScalarField ScalarField::tabulated(TabulatedSamples samples) {
  std::size_t slow_total = 1;
  std::size_t cell_total = 1;
  for (int a = 0; a < samples.d; ++a) {
    slow_total *= static_cast<std::size_t>(samples.n_slow);
    cell_total *= static_cast<std::size_t>(samples.n_cell);
  }
  if (samples.values.size() != slow_total) {
    throw ProblemError("tabulated field: slow sample count mismatch");
  }
  for (const auto& v : samples.values) {
    if (v.size() != cell_total) throw ProblemError("tabulated field: cell sample count mismatch");
  }
  auto data = std::make_shared<const TabulatedSamples>(std::move(samples));
  ScalarField f;
  f.fn_ = std::make_shared<const Function>(
      [data](std::span<const double> x, std::span<const double> xi) {
        const TabulatedSamples& t = *data;
        const std::vector<double> w = cell_interpolation_weights(t.d, t.n_cell, xi);
        auto cell_value = [&](std::size_t slow) {
          Complex acc(0.0, 0.0);
          const auto& vals = t.values[slow];
          for (std::size_t j = 0; j < w.size(); ++j) {
            if (w[j] != 0.0) acc += w[j] * vals[j];
          }
          return acc;
        };
        if (t.n_slow == 1) return cell_value(0);
        // Multilinear periodic interpolation over the 2^d surrounding slow nodes.
        std::vector<int> base(static_cast<std::size_t>(t.d));
        std::vector<double> frac(static_cast<std::size_t>(t.d));
        const double h = t.length / t.n_slow;
        for (int a = 0; a < t.d; ++a) {
          double s = x[a] / h;
          const double fl = std::floor(s);
          frac[a] = s - fl;
          base[a] = static_cast<int>(fl);
        }
        Complex acc(0.0, 0.0);
        for (int corner = 0; corner < (1 << t.d); ++corner) {
          double weight = 1.0;
          std::size_t idx = 0;
          std::size_t stride = 1;
          for (int a = 0; a < t.d; ++a) {
            const int bit = (corner >> a) & 1;
            weight *= bit ? frac[a] : 1.0 - frac[a];
            int k = (base[a] + bit) % t.n_slow;
            if (k < 0) k += t.n_slow;
            idx += static_cast<std::size_t>(k) * stride;
            stride *= static_cast<std::size_t>(t.n_slow);
          }
          if (weight != 0.0) acc += weight * cell_value(idx);
        }
        return acc;
      });
  f.depends_x_ = data->n_slow > 1;
  f.depends_xi_ = true;
  f.zero_ = false;
  return f;
}

Complex ScalarField::operator()(std::span<const double> x, std::span<const double> xi) const {
  const Point r = reduce_cell(xi);
  return (*fn_)(x, r);
}

// ---------------------------------------------------------------------------

MatrixField::MatrixField(int rows, int cols, std::vector<ScalarField> entries)
    : rows_(rows), cols_(cols) {
  if (static_cast<int>(entries.size()) != rows * cols) {
    throw ProblemError("matrix field: expected " + std::to_string(rows * cols) + " entries");
  }
  zero_ = true;
  for (const auto& e : entries) {
    depends_x_ = depends_x_ || e.depends_on_x();
    depends_xi_ = depends_xi_ || e.depends_on_xi();
    zero_ = zero_ && e.is_zero();
    max_index_ = std::max(max_index_, e.max_variable_index());
  }
  entries_ = std::make_shared<const std::vector<ScalarField>>(std::move(entries));
  auto ent = entries_;
  fn_ = std::make_shared<const Function>(
      [ent, rows, cols](std::span<const double> x, std::span<const double> xi) {
        CMatrix m(rows, cols);
        for (int r = 0; r < rows; ++r) {
          for (int c = 0; c < cols; ++c) {
            m(r, c) = (*ent)[static_cast<std::size_t>(r * cols + c)].evaluate_reduced(x, xi);
          }
        }
        return m;
      });
}

MatrixField MatrixField::zero(int rows, int cols) {
  return MatrixField(rows, cols, std::vector<ScalarField>(static_cast<std::size_t>(rows * cols)));
}

MatrixField MatrixField::identity(int n) {
  return constant(CMatrix::Identity(n, n));
}

MatrixField MatrixField::constant(const CMatrix& value) {
  std::vector<ScalarField> e;
  e.reserve(static_cast<std::size_t>(value.size()));
  for (int r = 0; r < value.rows(); ++r) {
    for (int c = 0; c < value.cols(); ++c) e.push_back(ScalarField::constant(value(r, c)));
  }
  return MatrixField(static_cast<int>(value.rows()), static_cast<int>(value.cols()), std::move(e));
}

MatrixField MatrixField::scalar(int n, const ScalarField& s) {
  std::vector<ScalarField> e(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i * n + i)] = s;
  return MatrixField(n, n, std::move(e));
}

MatrixField MatrixField::from_function(int rows, int cols, Function f, bool depends_on_x,
                                       bool depends_on_xi) {
  MatrixField m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.fn_ = std::make_shared<const Function>(std::move(f));
  m.depends_x_ = depends_on_x;
  m.depends_xi_ = depends_on_xi;
  m.zero_ = false;
  return m;
}

CMatrix MatrixField::operator()(std::span<const double> x, std::span<const double> xi) const {
  if (!fn_) return CMatrix(rows_, cols_);
  const Point r = reduce_cell(xi);
  return (*fn_)(x, r);
}

MatrixField MatrixField::adjoint() const {
  if (entries_) {
    std::vector<ScalarField> e;
    e.reserve(entries_->size());
    for (int c = 0; c < cols_; ++c) {
      for (int r = 0; r < rows_; ++r) {
        const ScalarField& src = (*entries_)[static_cast<std::size_t>(r * cols_ + c)];
        if (src.is_zero()) {
          e.emplace_back();
        } else if (src.expressions()) {
          // conj(re + i im) = re + i (-im); keep an expression form.
          const auto& [re, im] = *src.expressions();
          if (im.is_zero_literal()) {
            e.push_back(src);
          } else {
            e.push_back(ScalarField::from_function(
                [src](std::span<const double> x, std::span<const double> xi) {
                  return std::conj(src.evaluate_reduced(x, xi));
                },
                src.depends_on_x(), src.depends_on_xi()));
          }
        } else {
          e.push_back(ScalarField::from_function(
              [src](std::span<const double> x, std::span<const double> xi) {
                return std::conj(src.evaluate_reduced(x, xi));
              },
              src.depends_on_x(), src.depends_on_xi()));
        }
      }
    }
    return MatrixField(cols_, rows_, std::move(e));
  }
  MatrixField src = *this;
  MatrixField out = from_function(
      cols_, rows_,
      [src](std::span<const double> x, std::span<const double> xi) {
        return CMatrix((*src.fn_)(x, xi).adjoint());
      },
      depends_x_, depends_xi_);
  out.zero_ = zero_;
  return out;
}

MatrixField operator*(const MatrixField& a, const MatrixField& b) {
  if (a.cols() != b.rows()) throw ProblemError("matrix field product: size mismatch");
  const int rows = a.rows();
  const int cols = b.cols();
  if (a.is_zero() || b.is_zero()) return MatrixField::zero(rows, cols);
  MatrixField out = MatrixField::from_function(
      rows, cols,
      [a, b](std::span<const double> x, std::span<const double> xi) {
        return CMatrix((*a.fn_)(x, xi) * (*b.fn_)(x, xi));
      },
      a.depends_on_x() || b.depends_on_x(), a.depends_on_xi() || b.depends_on_xi());
  out.max_index_ = std::max(a.max_index_, b.max_index_);
  return out;
}

MatrixField operator+(const MatrixField& a, const MatrixField& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ProblemError("matrix field sum: size mismatch");
  }
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  MatrixField out = MatrixField::from_function(
      a.rows(), a.cols(),
      [a, b](std::span<const double> x, std::span<const double> xi) {
        return CMatrix((*a.fn_)(x, xi) + (*b.fn_)(x, xi));
      },
      a.depends_on_x() || b.depends_on_x(), a.depends_on_xi() || b.depends_on_xi());
  out.max_index_ = std::max(a.max_index_, b.max_index_);
  return out;
}

}  // namespace homog
