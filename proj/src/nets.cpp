#include "derwent/nets.hpp"

#include <cmath>
#include <random>

#include "derwent/error.hpp"

namespace derwent {
namespace {

void glorot(Matrix& m, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : m.values()) v = dist(rng);
}

LstmDirection make_direction(const NetDims& dims, std::mt19937_64& rng) {
  LstmDirection dir;
  for (std::size_t g = 0; g < 4; ++g) {
    dir.wx[g] = Matrix(dims.embed, dims.lstm_hidden);
    dir.wh[g] = Matrix(dims.lstm_hidden, dims.lstm_hidden);
    dir.b[g] = Matrix(1, dims.lstm_hidden, g == kForgetGate ? 1.0 : 0.0);
    glorot(dir.wx[g], rng);
    glorot(dir.wh[g], rng);
  }
  return dir;
}

LstmDirectionVars bind_direction(ad::Tape& tape, const LstmDirection& dir) {
  LstmDirectionVars v;
  for (std::size_t g = 0; g < 4; ++g) {
    v.wx[g] = tape.parameter(dir.wx[g]);
    v.wh[g] = tape.parameter(dir.wh[g]);
    v.b[g] = tape.parameter(dir.b[g]);
  }
  return v;
}

LstmDirection direction_grads(const LstmDirectionVars& v) {
  LstmDirection dir;
  for (std::size_t g = 0; g < 4; ++g) {
    dir.wx[g] = v.wx[g].grad();
    dir.wh[g] = v.wh[g].grad();
    dir.b[g] = v.b[g].grad();
  }
  return dir;
}

void check_row(std::span<const double> x, std::size_t expected, const char* what) {
  if (x.size() != expected) {
    throw DimensionError(std::string(what) + ": expected width " + std::to_string(expected) +
                         ", got " + std::to_string(x.size()));
  }
}

// One direction over `seq` in the given order; returns the last hidden state.
ad::Var run_direction(const LstmDirectionVars& w, std::span<const ad::Var> seq, bool reverse) {
  ad::Var h, c;
  const std::size_t n = seq.size();
  for (std::size_t step = 0; step < n; ++step) {
    const ad::Var x = seq[reverse ? n - 1 - step : step];
    std::array<ad::Var, 4> gate;
    for (std::size_t g = 0; g < 4; ++g) {
      ad::Var pre = ad::add(ad::matmul(x, w.wx[g]), w.b[g]);
      if (h.valid()) pre = ad::add(pre, ad::matmul(h, w.wh[g]));
      gate[g] = g == kCellGate ? ad::tanh(pre) : ad::sigmoid(pre);
    }
    const ad::Var fresh = ad::mul(gate[kInputGate], gate[kCellGate]);
    c = c.valid() ? ad::add(ad::mul(gate[kForgetGate], c), fresh) : fresh;
    h = ad::mul(gate[kOutputGate], ad::tanh(c));
  }
  return h;
}

}  // namespace

ParameterSet init_params(std::uint64_t seed, const NetDims& dims) {
  if (dims.d_in < 1 || dims.embed < 1 || dims.lstm_hidden < 1) {
    throw DimensionError("init_params: all dimensions must be >= 1");
  }
  std::mt19937_64 rng(seed);
  ParameterSet p;
  p.dims = dims;
  p.phi_w = Matrix(dims.d_in, dims.embed);
  p.phi_b = Matrix(1, dims.embed);
  glorot(p.phi_w, rng);
  p.lstm_fwd = make_direction(dims, rng);
  p.lstm_bwd = make_direction(dims, rng);
  p.dec_w = Matrix(2 * dims.lstm_hidden, dims.embed);
  p.dec_b = Matrix(1, dims.embed);
  glorot(p.dec_w, rng);
  p.cls_w = Matrix(dims.embed, 1);
  p.cls_b = Matrix(1, 1);
  glorot(p.cls_w, rng);
  return p;
}

ParameterSet init_params(std::uint64_t seed, std::size_t d_in) {
  NetDims dims;
  dims.d_in = d_in;
  return init_params(seed, dims);
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet z = *this;
  z.for_each([](std::string_view, Matrix& m, ParamGroup) { m.fill(0.0); });
  return z;
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  for_each([&](std::string_view, const Matrix& m, ParamGroup) { n += m.size(); });
  return n;
}

bool ParameterSet::all_finite() const {
  bool ok = true;
  for_each([&](std::string_view, const Matrix& m, ParamGroup) { ok = ok && m.all_finite(); });
  return ok;
}

Embedding feature_extract(const ParameterSet& params, std::span<const double> x,
                          std::int64_t instance_id) {
  check_row(x, params.dims.d_in, "feature_extract");
  Matrix out = kernels::serial::affine_tanh(Matrix::row(x), params.phi_w, params.phi_b);
  if (!out.all_finite()) throw NumericError("feature_extract: non-finite embedding");
  return Embedding{std::vector<double>(out.values().begin(), out.values().end()), instance_id};
}

Matrix embed_rows(const ParameterSet& params, const Matrix& inputs, kernels::Exec exec) {
  if (inputs.cols() != params.dims.d_in) {
    throw DimensionError("embed_rows: input width " + std::to_string(inputs.cols()) +
                         " != d_in " + std::to_string(params.dims.d_in));
  }
  Matrix out = kernels::affine_tanh(inputs, params.phi_w, params.phi_b, exec);
  if (!out.all_finite()) throw NumericError("embed_rows: non-finite embedding");
  return out;
}

std::vector<double> lstm_encode(const ParameterSet& params, std::span<const Embedding> seq) {
  ad::Tape tape;
  const ParamVars p = bind(tape, params);
  std::vector<ad::Var> xs;
  xs.reserve(seq.size());
  for (const Embedding& e : seq) {
    check_row(e.values, params.dims.embed, "lstm_encode");
    xs.push_back(tape.constant(Matrix::row(e.values)));
  }
  const Matrix& h = net::lstm_encode(p, xs).value();
  return std::vector<double>(h.values().begin(), h.values().end());
}

std::vector<double> decode(const ParameterSet& params, std::span<const double> h) {
  check_row(h, 2 * params.dims.lstm_hidden, "decode");
  Matrix out = kernels::matmul(Matrix::row(h), params.dec_w);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += params.dec_b[j];
  return std::vector<double>(out.values().begin(), out.values().end());
}

double classify(const ParameterSet& params, std::span<const double> embedding) {
  check_row(embedding, params.dims.embed, "classify");
  double s = 0.0;
  for (std::size_t j = 0; j < embedding.size(); ++j) s += embedding[j] * params.cls_w[j];
  return s + params.cls_b[0];
}

ParamVars bind(ad::Tape& tape, const ParameterSet& params) {
  ParamVars v;
  v.dims = params.dims;
  v.phi_w = tape.parameter(params.phi_w);
  v.phi_b = tape.parameter(params.phi_b);
  v.lstm_fwd = bind_direction(tape, params.lstm_fwd);
  v.lstm_bwd = bind_direction(tape, params.lstm_bwd);
  v.dec_w = tape.parameter(params.dec_w);
  v.dec_b = tape.parameter(params.dec_b);
  v.cls_w = tape.parameter(params.cls_w);
  v.cls_b = tape.parameter(params.cls_b);
  return v;
}

ParameterSet gradients(const ParamVars& v) {
  ParameterSet g;
  g.dims = v.dims;
  g.phi_w = v.phi_w.grad();
  g.phi_b = v.phi_b.grad();
  g.lstm_fwd = direction_grads(v.lstm_fwd);
  g.lstm_bwd = direction_grads(v.lstm_bwd);
  g.dec_w = v.dec_w.grad();
  g.dec_b = v.dec_b.grad();
  g.cls_w = v.cls_w.grad();
  g.cls_b = v.cls_b.grad();
  return g;
}

namespace net {

ad::Var feature_extract(const ParamVars& p, ad::Var x) {
  if (x.value().rows() != 1 || x.value().cols() != p.dims.d_in) {
    throw DimensionError("feature_extract: input " + x.value().shape_string() +
                         " for d_in " + std::to_string(p.dims.d_in));
  }
  return ad::tanh(ad::add(ad::matmul(x, p.phi_w), p.phi_b));
}

ad::Var lstm_encode(const ParamVars& p, std::span<const ad::Var> seq) {
  if (seq.empty()) throw DimensionError("lstm_encode: empty sequence");
  const ad::Var fwd = run_direction(p.lstm_fwd, seq, false);
  const ad::Var bwd = run_direction(p.lstm_bwd, seq, true);
  return ad::concat(fwd, bwd);
}

ad::Var decode(const ParamVars& p, ad::Var h) {
  return ad::add(ad::matmul(h, p.dec_w), p.dec_b);
}

ad::Var classify(const ParamVars& p, ad::Var embedding) {
  return ad::add(ad::matmul(embedding, p.cls_w), p.cls_b);
}

}  // namespace net
}  // namespace derwent
