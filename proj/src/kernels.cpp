#include "derwent/kernels.hpp"

namespace derwent::kernels {
namespace {

// Below this many multiply-adds the OpenMP fork costs more than it saves.
constexpr std::size_t kParallelWork = 1u << 16;

bool go_parallel(Exec exec, std::size_t outer, std::size_t work) {
  switch (exec) {
    case Exec::Serial:
      return false;
    case Exec::Parallel:
      return true;
    case Exec::Auto:
      break;
  }
  return outer >= 8 && work >= kParallelWork;
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b, Exec exec) {
  return go_parallel(exec, a.rows(), a.rows() * a.cols() * b.cols()) ? omp::matmul(a, b)
                                                                     : serial::matmul(a, b);
}

void matmul_add_at(const Matrix& a, const Matrix& b, Matrix& out, Exec exec) {
  if (go_parallel(exec, a.cols(), a.rows() * a.cols() * b.cols())) {
    omp::matmul_add_at(a, b, out);
  } else {
    serial::matmul_add_at(a, b, out);
  }
}

void matmul_add_bt(const Matrix& a, const Matrix& b, Matrix& out, Exec exec) {
  if (go_parallel(exec, a.rows(), a.rows() * a.cols() * b.rows())) {
    omp::matmul_add_bt(a, b, out);
  } else {
    serial::matmul_add_bt(a, b, out);
  }
}

Matrix affine_tanh(const Matrix& x, const Matrix& w, const Matrix& bias, Exec exec) {
  return go_parallel(exec, x.rows(), x.rows() * x.cols() * w.cols())
             ? omp::affine_tanh(x, w, bias)
             : serial::affine_tanh(x, w, bias);
}

Matrix pairwise_cosine(const Matrix& rows, Exec exec) {
  return go_parallel(exec, rows.rows(), rows.rows() * rows.rows() * rows.cols())
             ? omp::pairwise_cosine(rows)
             : serial::pairwise_cosine(rows);
}

}  // namespace derwent::kernels
