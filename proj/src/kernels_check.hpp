#pragma once

#include "derwent/error.hpp"
#include "derwent/matrix.hpp"

namespace derwent::kernels::detail {

inline void check_matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions disagree " + a.shape_string() + " * " +
                         b.shape_string());
  }
}

inline void check_add_at(const Matrix& a, const Matrix& b, const Matrix& out) {
  if (a.rows() != b.rows() || out.rows() != a.cols() || out.cols() != b.cols()) {
    throw DimensionError("matmul_add_at: " + a.shape_string() + "^T * " + b.shape_string() +
                         " into " + out.shape_string());
  }
}

inline void check_add_bt(const Matrix& a, const Matrix& b, const Matrix& out) {
  if (a.cols() != b.cols() || out.rows() != a.rows() || out.cols() != b.rows()) {
    throw DimensionError("matmul_add_bt: " + a.shape_string() + " * " + b.shape_string() +
                         "^T into " + out.shape_string());
  }
}

inline void check_affine(const Matrix& x, const Matrix& w, const Matrix& bias) {
  check_matmul(x, w);
  if (bias.rows() != 1 || bias.cols() != w.cols()) {
    throw DimensionError("affine_tanh: bias " + bias.shape_string() + " for weights " +
                         w.shape_string());
  }
}

}  // namespace derwent::kernels::detail
