#include <random>

#include "derwent/error.hpp"
#include "derwent/kernels.hpp"
#include "doctest.h"
#include "support/finite_diff.hpp"

using namespace derwent;
using derwent::testing::random_matrix;

TEST_CASE("matmul small products") {
  const Matrix a = Matrix::from_rows({{1, 2}});
  const Matrix b = Matrix::from_rows({{3}, {4}});
  CHECK(kernels::matmul(a, b) == Matrix::scalar(11));
  CHECK(kernels::matmul(Matrix::identity(2), b) == b);
  CHECK_THROWS_AS(kernels::matmul(b, b), DimensionError);
}

TEST_CASE("transposed accumulations agree with explicit products") {
  std::mt19937_64 rng(3);
  const Matrix a = random_matrix(4, 3, rng);
  const Matrix b = random_matrix(4, 5, rng);
  Matrix out(3, 5, 1.0);
  kernels::matmul_add_at(a, b, out);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 1.0;
      for (std::size_t k = 0; k < 4; ++k) s += a(k, i) * b(k, j);
      CHECK(out(i, j) == doctest::Approx(s).epsilon(1e-14));
    }
  }
  const Matrix c = random_matrix(3, 5, rng);
  Matrix out2(4, 3);
  kernels::matmul_add_bt(b, c, out2);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 5; ++k) s += b(i, k) * c(j, k);
      CHECK(out2(i, j) == doctest::Approx(s).epsilon(1e-14));
    }
  }
}

TEST_CASE("serial and parallel kernels are bit-identical") {
  std::mt19937_64 rng(11);
  for (auto [m, k, n] : {std::tuple{1, 1, 1}, {7, 3, 5}, {64, 40, 33}, {130, 16, 256}}) {
    const Matrix a = random_matrix(m, k, rng);
    const Matrix b = random_matrix(k, n, rng);
    CHECK(kernels::serial::matmul(a, b) == kernels::omp::matmul(a, b));

    const Matrix g = random_matrix(m, n, rng);
    Matrix s1(k, n), p1(k, n);
    kernels::serial::matmul_add_at(a, g, s1);
    kernels::omp::matmul_add_at(a, g, p1);
    CHECK(s1 == p1);

    Matrix s2(m, k), p2(m, k);
    kernels::serial::matmul_add_bt(g, b, s2);
    kernels::omp::matmul_add_bt(g, b, p2);
    CHECK(s2 == p2);

    const Matrix bias = random_matrix(1, n, rng);
    CHECK(kernels::serial::affine_tanh(a, b, bias) == kernels::omp::affine_tanh(a, b, bias));
    CHECK(kernels::serial::pairwise_cosine(a) == kernels::omp::pairwise_cosine(a));
    CHECK(kernels::matmul(a, b, kernels::Exec::Parallel) ==
          kernels::matmul(a, b, kernels::Exec::Serial));
  }
}

TEST_CASE("pairwise cosine values and degenerate rows") {
  const Matrix rows = Matrix::from_rows({{1, 0}, {0, 2}, {3, 3}});
  const Matrix c = kernels::pairwise_cosine(rows);
  CHECK(c(0, 1) == doctest::Approx(0.0));
  CHECK(c(0, 2) == doctest::Approx(std::sqrt(0.5)));
  CHECK(c(1, 1) == doctest::Approx(1.0));
  CHECK(c(2, 0) == c(0, 2));
  const Matrix bad = Matrix::from_rows({{1, 0}, {0, 0}});
  CHECK_THROWS_AS(kernels::pairwise_cosine(bad), NumericError);
  CHECK_THROWS_AS(kernels::omp::pairwise_cosine(bad), NumericError);
}

TEST_CASE("affine_tanh matches the definition") {
  const Matrix x = Matrix::from_rows({{1, -1}});
  const Matrix w = Matrix::from_rows({{0.5, 0.0}, {0.25, 1.0}});
  const Matrix b = Matrix::row({0.1, -0.2});
  const Matrix y = kernels::affine_tanh(x, w, b);
  CHECK(y(0, 0) == doctest::Approx(std::tanh(0.5 - 0.25 + 0.1)));
  CHECK(y(0, 1) == doctest::Approx(std::tanh(-1.0 - 0.2)));
  CHECK_THROWS_AS(kernels::affine_tanh(x, w, Matrix::row({1.0})), DimensionError);
}
