#include <cmath>
#include <cstdint>
#include <vector>

#include "derwent/kernels.hpp"
#include "kernels_check.hpp"

namespace derwent::kernels::omp {

// Loop bodies mirror kernels_serial.cpp; only the outer loop is shared out.

Matrix matmul(const Matrix& a, const Matrix& b) {
  detail::check_matmul(a, b);
  const std::int64_t m = static_cast<std::int64_t>(a.rows());
  const std::size_t k = a.cols(), n = b.cols();
  Matrix out(a.rows(), n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    double* o = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a(i, p);
      const double* brow = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += aip * brow[j];
    }
  }
  return out;
}

void matmul_add_at(const Matrix& a, const Matrix& b, Matrix& out) {
  detail::check_add_at(a, b, out);
  const std::size_t m = a.rows(), n = b.cols();
  const std::int64_t k = static_cast<std::int64_t>(a.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < k; ++p) {
    double* o = out.data() + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      const double* brow = b.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += aip * brow[j];
    }
  }
}

void matmul_add_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  detail::check_add_bt(a, b, out);
  const std::int64_t m = static_cast<std::int64_t>(a.rows());
  const std::size_t n = a.cols(), k = b.rows();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    const double* arow = a.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b.data() + p * n;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += arow[j] * brow[j];
      out(i, p) += s;
    }
  }
}

Matrix affine_tanh(const Matrix& x, const Matrix& w, const Matrix& bias) {
  detail::check_affine(x, w, bias);
  Matrix out = matmul(x, w);
  const std::int64_t rows = static_cast<std::int64_t>(out.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) = std::tanh(out(i, j) + bias[j]);
  }
  return out;
}

Matrix pairwise_cosine(const Matrix& rows) {
  const std::size_t d = rows.cols();
  const std::int64_t n = static_cast<std::int64_t>(rows.rows());
  std::vector<double> norms(rows.rows());
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double v : rows.row_span(i)) s += v * v;
    norms[i] = std::sqrt(s);
    if (!(norms[i] > kCosineNormFloor)) {
      throw NumericError("pairwise_cosine: row " + std::to_string(i) + " has degenerate norm");
    }
  }
  Matrix out(rows.rows(), rows.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* ri = rows.data() + i * d;
    for (std::int64_t j = 0; j < n; ++j) {
      const double* rj = rows.data() + j * d;
      double s = 0.0;
      for (std::size_t p = 0; p < d; ++p) s += ri[p] * rj[p];
      out(i, j) = s / (norms[i] * norms[j]);
    }
  }
  return out;
}

}  // namespace derwent::kernels::omp
