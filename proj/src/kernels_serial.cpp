#include <cmath>
#include <vector>

#include "derwent/kernels.hpp"
#include "kernels_check.hpp"

namespace derwent::kernels::serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
  detail::check_matmul(a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Matrix out(m, n);
  for (std::size_t i = 0; i < m; ++i) {
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
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t p = 0; p < k; ++p) {
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
  const std::size_t m = a.rows(), n = a.cols(), k = b.rows();
  for (std::size_t i = 0; i < m; ++i) {
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
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) = std::tanh(out(i, j) + bias[j]);
  }
  return out;
}

Matrix pairwise_cosine(const Matrix& rows) {
  const std::size_t n = rows.rows(), d = rows.cols();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double v : rows.row_span(i)) s += v * v;
    norms[i] = std::sqrt(s);
    if (!(norms[i] > kCosineNormFloor)) {
      throw NumericError("pairwise_cosine: row " + std::to_string(i) + " has degenerate norm");
    }
  }
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ri = rows.data() + i * d;
    for (std::size_t j = 0; j < n; ++j) {
      const double* rj = rows.data() + j * d;
      double s = 0.0;
      for (std::size_t p = 0; p < d; ++p) s += ri[p] * rj[p];
      out(i, j) = s / (norms[i] * norms[j]);
    }
  }
  return out;
}

}  // namespace derwent::kernels::serial
