#include <cmath>
#include <random>

#include "derwent/error.hpp"
#include "derwent/nets.hpp"
#include "doctest.h"
#include "support/finite_diff.hpp"
#include "support/param_check.hpp"

using namespace derwent;
using derwent::testing::check_param_gradients;
using derwent::testing::gradient_check;
using derwent::testing::random_matrix;

namespace {

const NetDims kSmall{3, 6, 4};

std::vector<Embedding> random_sequence(std::size_t length, std::size_t width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Embedding> seq;
  for (std::size_t k = 0; k < length; ++k) {
    const Matrix m = random_matrix(1, width, rng, -0.9, 0.9);
    seq.push_back(Embedding{{m.values().begin(), m.values().end()}, static_cast<int>(k)});
  }
  return seq;
}

}  // namespace

TEST_CASE("init_params is deterministic and shaped") {
  const ParameterSet a = init_params(42, 4);
  const ParameterSet b = init_params(42, 4);
  CHECK(a == b);
  CHECK_FALSE(a == init_params(43, 4));
  CHECK(a.phi_w.rows() == 4);
  CHECK(a.phi_w.cols() == 256);
  CHECK(a.phi_b.cols() == 256);
  CHECK(a.lstm_fwd.wx[0].rows() == 256);
  CHECK(a.lstm_fwd.wx[0].cols() == 128);
  CHECK(a.lstm_bwd.wh[3].rows() == 128);
  CHECK(a.dec_w.rows() == 256);
  CHECK(a.dec_w.cols() == 256);
  CHECK(a.cls_w.rows() == 256);
  CHECK(a.cls_w.cols() == 1);
  CHECK(a.cls_b.size() == 1);
  CHECK_THROWS_AS(init_params(0, 0), DimensionError);
}

TEST_CASE("init_params follows the Glorot bounds and bias conventions") {
  const ParameterSet p = init_params(7, 4);
  p.for_each([](std::string_view name, const Matrix& m, ParamGroup) {
    INFO(name);
    const bool bias = name.ends_with(".b") || name.find(".b.") != std::string_view::npos;
    if (bias) {
      const double expected = name == "lstm.fwd.b.f" || name == "lstm.bwd.b.f" ? 1.0 : 0.0;
      for (double v : m.values()) CHECK(v == expected);
    } else {
      const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
      for (double v : m.values()) CHECK(std::abs(v) <= limit);
    }
  });
  double sum = 0.0;
  std::size_t n = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (double v : init_params(seed, 4).phi_w.values()) {
      sum += v;
      ++n;
    }
  }
  CHECK(std::abs(sum / static_cast<double>(n)) < 0.01);
}

TEST_CASE("feature_extract range and zero parameters") {
  ParameterSet p = init_params(1, 4);
  p.phi_w = Matrix(4, 256);
  p.phi_b = Matrix(1, 256);
  const Embedding zero = feature_extract(p, std::vector<double>{1, 2, 3, 4}, 9);
  CHECK(zero.instance_id == 9);
  for (double v : zero.values) CHECK(v == 0.0);

  const ParameterSet q = init_params(2, 4);
  std::mt19937_64 rng(4);
  // tanh rounds to exactly +/-1 once saturated, so large inputs only get the
  // closed bound.
  for (int k = 0; k < 200; ++k) {
    const double scale = k % 2 == 0 ? 1.0 : 50.0;
    const Matrix x = random_matrix(1, 4, rng, -scale, scale);
    const Embedding e = feature_extract(q, x.values());
    CHECK(e.values.size() == 256);
    for (double v : e.values) {
      CHECK(std::abs(v) <= 1.0);
      if (scale == 1.0) CHECK(std::abs(v) < 1.0);
    }
  }
  CHECK_THROWS_AS(feature_extract(q, std::vector<double>{1, 2}), DimensionError);
}

TEST_CASE("embed_rows agrees with feature_extract row by row") {
  const ParameterSet p = init_params(3, 5);
  std::mt19937_64 rng(8);
  const Matrix x = random_matrix(12, 5, rng, -3, 3);
  const Matrix serial = embed_rows(p, x, kernels::Exec::Serial);
  CHECK(serial == embed_rows(p, x, kernels::Exec::Parallel));
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const Embedding e = feature_extract(p, x.row_span(r));
    for (std::size_t c = 0; c < 256; ++c) CHECK(e.values[c] == doctest::Approx(serial(r, c)));
  }
}

TEST_CASE("gradient of squared embedding norm w.r.t. phi weights") {
  std::mt19937_64 rng(12);
  const Matrix x = random_matrix(1, kSmall.d_in, rng);
  const auto f = [&](ad::Tape& t, const ParamVars& p) {
    const ad::Var e = net::feature_extract(p, t.constant(x));
    return ad::sum(ad::mul(e, e));
  };
  const auto r = check_param_gradients(f, init_params(5, kSmall), 0);
  INFO(r.worst_array);
  CHECK(r.worst < 1e-4);
}

TEST_CASE("lstm_encode shapes and degenerate sequences") {
  const ParameterSet p = init_params(3, 4);
  for (std::size_t len : {1u, 2u, 5u, 9u}) {
    CHECK(lstm_encode(p, random_sequence(len, 256, len)).size() == 256);
  }
  CHECK_THROWS_AS(lstm_encode(p, std::vector<Embedding>{}), DimensionError);

  // A single step: each half depends only on that input, through its own
  // direction's weights.
  ParameterSet tied = p;
  tied.lstm_bwd = tied.lstm_fwd;
  const auto one = random_sequence(1, 256, 17);
  const std::vector<double> h = lstm_encode(tied, one);
  for (std::size_t k = 0; k < 128; ++k) CHECK(h[k] == h[128 + k]);
}

TEST_CASE("reversed sequence swaps halves when directions share weights") {
  ParameterSet p = init_params(11, 4);
  p.lstm_bwd = p.lstm_fwd;
  auto seq = random_sequence(5, 256, 3);
  const std::vector<double> h = lstm_encode(p, seq);
  std::reverse(seq.begin(), seq.end());
  const std::vector<double> r = lstm_encode(p, seq);
  for (std::size_t k = 0; k < 128; ++k) {
    CHECK(h[k] == doctest::Approx(r[128 + k]).epsilon(1e-14));
    CHECK(h[128 + k] == doctest::Approx(r[k]).epsilon(1e-14));
  }
}

TEST_CASE("lstm gradients through a length-4 sequence") {
  SUBCASE("all parameters and inputs at reduced width") {
    const ParameterSet p = init_params(21, kSmall);
    std::mt19937_64 rng(2);
    std::vector<Matrix> inputs;
    for (int k = 0; k < 4; ++k) inputs.push_back(random_matrix(1, kSmall.embed, rng));
    const auto f = [&](ad::Tape& t, const ParamVars& v) {
      std::vector<ad::Var> seq;
      for (const Matrix& m : inputs) seq.push_back(t.constant(m));
      const ad::Var h = net::lstm_encode(v, seq);
      return ad::sum(ad::mul(h, h));
    };
    const auto r = check_param_gradients(f, p, 0);
    INFO(r.worst_array);
    CHECK(r.worst < 1e-4);

    const ParameterSet fixed = p;
    const auto g = [&](ad::Tape& t, const std::vector<ad::Var>& seq) {
      const ParamVars v = bind(t, fixed);
      const ad::Var h = net::lstm_encode(v, seq);
      return ad::sum(ad::tanh(h));
    };
    CHECK(gradient_check(g, inputs) < 1e-4);
  }
  SUBCASE("sampled parameters at full width") {
    const ParameterSet p = init_params(22, 4);
    const auto seq = random_sequence(4, 256, 6);
    const auto f = [&](ad::Tape& t, const ParamVars& v) {
      std::vector<ad::Var> xs;
      for (const Embedding& e : seq) xs.push_back(t.constant(Matrix::row(e.values)));
      return ad::sum(ad::tanh(net::lstm_encode(v, xs)));
    };
    const auto r = check_param_gradients(f, p, 3, 1);
    INFO(r.worst_array);
    CHECK(r.worst < 1e-4);
  }
}

TEST_CASE("decoder") {
  ParameterSet p = init_params(4, 4);
  std::vector<double> h(256);
  for (std::size_t k = 0; k < h.size(); ++k) h[k] = std::sin(static_cast<double>(k));
  p.dec_w = Matrix(256, 256);
  p.dec_b = Matrix(1, 256);
  for (double v : decode(p, h)) CHECK(v == 0.0);
  p.dec_w = Matrix::identity(256);
  CHECK(decode(p, h) == h);

  const ParameterSet small = init_params(9, kSmall);
  std::mt19937_64 rng(1);
  const Matrix input = random_matrix(1, 2 * kSmall.lstm_hidden, rng);
  const auto f = [&](ad::Tape& t, const ParamVars& v) {
    const ad::Var y = net::decode(v, t.constant(input));
    return ad::sum(ad::mul(y, y));
  };
  const auto r = check_param_gradients(f, small, 0);
  CHECK(r.worst < 1e-4);
}

TEST_CASE("classifier logit") {
  ParameterSet p = init_params(6, 4);
  std::vector<double> e(256, 0.3);
  e[5] = -0.8;
  p.cls_w = Matrix(256, 1);
  p.cls_b = Matrix(1, 1);
  CHECK(classify(p, e) == 0.0);
  CHECK(1.0 / (1.0 + std::exp(-classify(p, e))) == 0.5);

  const ParameterSet q = init_params(6, 4);
  ParameterSet neg = q;
  for (double& v : neg.cls_w.values()) v = -v;
  const double z = classify(q, e);
  CHECK(z != 0.0);
  CHECK(classify(neg, e) == doctest::Approx(-z));
}

TEST_CASE("binary cross-entropy gradient at logit 0.7, y = 1") {
  // Classifier rigged so the logit is exactly w * 1 + b with w = 0.7, b = 0.
  NetDims dims{1, 1, 1};
  ParameterSet p = init_params(0, dims);
  p.cls_w = Matrix::scalar(0.7);
  p.cls_b = Matrix::scalar(0.0);
  const auto f = [](ad::Tape& t, const ParamVars& v) {
    const ad::Var logit = net::classify(v, t.constant(Matrix::scalar(1.0)));
    return ad::negate(ad::log_sigmoid(logit));
  };
  ad::Tape t;
  const ParamVars v = bind(t, p);
  CHECK(f(t, v).item() == doctest::Approx(std::log1p(std::exp(-0.7))).epsilon(1e-14));
  const auto r = check_param_gradients(f, p, 0);
  CHECK(r.worst < 1e-6);
}

TEST_CASE("parameter bookkeeping") {
  const ParameterSet p = init_params(1, kSmall);
  const ParameterSet z = p.zeros_like();
  std::size_t count = 0;
  z.for_each([&](std::string_view, const Matrix& m, ParamGroup) {
    count += m.size();
    for (double v : m.values()) CHECK(v == 0.0);
  });
  CHECK(count == p.parameter_count());
  CHECK(p.all_finite());
  ParameterSet bad = p;
  bad.dec_b[0] = std::nan("");
  CHECK_FALSE(bad.all_finite());
  std::size_t classifier_arrays = 0;
  p.for_each([&](std::string_view, const Matrix&, ParamGroup g) {
    classifier_arrays += g == ParamGroup::Classifier;
  });
  CHECK(classifier_arrays == 2);
}
