#pragma once

// Dense kernels used on the hot paths: the autodiff matmuls, the per-batch
// embedding pass and the pairwise cosine matrix behind the batch graph.
//
// Every kernel exists twice. `serial::` is the reference implementation and
// `omp::` splits the outer loop across OpenMP threads. Both accumulate each
// output element in the same order, so their results are bit-identical for
// any thread count; tests/kernels_test.cpp holds them to exact equality.

#include "derwent/matrix.hpp"

namespace derwent::kernels {

enum class Exec { Serial, Parallel, Auto };

// Norms at or below this are rejected by pairwise_cosine.
inline constexpr double kCosineNormFloor = 1e-8;

namespace serial {
Matrix matmul(const Matrix& a, const Matrix& b);
void matmul_add_at(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_add_bt(const Matrix& a, const Matrix& b, Matrix& out);
Matrix affine_tanh(const Matrix& x, const Matrix& w, const Matrix& bias);
Matrix pairwise_cosine(const Matrix& rows);
}  // namespace serial

namespace omp {
Matrix matmul(const Matrix& a, const Matrix& b);
void matmul_add_at(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_add_bt(const Matrix& a, const Matrix& b, Matrix& out);
Matrix affine_tanh(const Matrix& x, const Matrix& w, const Matrix& bias);
Matrix pairwise_cosine(const Matrix& rows);
}  // namespace omp

// a * b
Matrix matmul(const Matrix& a, const Matrix& b, Exec exec = Exec::Auto);
// out += a^T * b
void matmul_add_at(const Matrix& a, const Matrix& b, Matrix& out, Exec exec = Exec::Auto);
// out += a * b^T
void matmul_add_bt(const Matrix& a, const Matrix& b, Matrix& out, Exec exec = Exec::Auto);
// tanh(x * w + bias), bias is 1 x cols(w) and broadcast over rows.
Matrix affine_tanh(const Matrix& x, const Matrix& w, const Matrix& bias,
                   Exec exec = Exec::Auto);
// n x n matrix of row cosines. Throws NumericError for rows with norm
// <= kCosineNormFloor.
Matrix pairwise_cosine(const Matrix& rows, Exec exec = Exec::Auto);

}  // namespace derwent::kernels
