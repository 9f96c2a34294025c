#include "latentlab/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "latentlab/error.hpp"
#include "latentlab/kernels.hpp"

namespace latentlab {
namespace {

void require_same_dim(const Vec& a, const Vec& b) {
  if (a.dim() != b.dim())
    throw Error(ErrorKind::DimensionMismatch,
                "vector dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
}

}  // namespace

bool Vec::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Vec& Vec::operator+=(const Vec& other) { return add_scaled(1.0, other); }
Vec& Vec::operator-=(const Vec& other) { return add_scaled(-1.0, other); }

Vec& Vec::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Vec& Vec::add_scaled(double alpha, const Vec& x) {
  require_same_dim(*this, x);
  kernels::axpy(alpha, x.data(), data(), dim());
  return *this;
}

Vec operator+(Vec a, const Vec& b) { return a += b; }
Vec operator-(Vec a, const Vec& b) { return a -= b; }
Vec operator*(double s, Vec v) { return v *= s; }
Vec operator-(Vec v) { return v *= -1.0; }

double dot(const Vec& a, const Vec& b) {
  require_same_dim(a, b);
  return kernels::dot(a.data(), b.data(), a.dim());
}

double norm(const Vec& v) { return std::sqrt(kernels::dot(v.data(), v.data(), v.dim())); }

double cosine(const Vec& a, const Vec& b) {
  double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

double max_abs_diff(const Vec& a, const Vec& b) {
  require_same_dim(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Vec basis_vector(std::size_t dim, std::size_t index) {
  Vec v(dim);
  v[index] = 1.0;
  return v;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows * cols)
    throw Error(ErrorKind::DimensionMismatch, "matrix data has " + std::to_string(data_.size()) +
                                                  " entries, expected " +
                                                  std::to_string(rows * cols));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Vec multiply(const Matrix& m, const Vec& x) {
  if (x.dim() != m.cols())
    throw Error(ErrorKind::DimensionMismatch, "matrix-vector product");
  Vec y(m.rows());
  kernels::gemv(m.data(), x.data(), nullptr, y.data(), m.rows(), m.cols());
  return y;
}

Vec multiply_transposed(const Matrix& m, const Vec& v) {
  if (v.dim() != m.rows())
    throw Error(ErrorKind::DimensionMismatch, "transposed matrix-vector product");
  Vec y(m.cols());
  kernels::gemv_t_acc(m.data(), v.data(), y.data(), m.rows(), m.cols());
  return y;
}

}  // namespace latentlab
