#pragma once

// The four learnable pieces: feature extractor phi (one tanh layer), a
// one-layer bidirectional LSTM encoder, the affine decoder and the scalar
// logit classifier.
//
// All vectors are 1 x n rows, so layers compute x * W + b.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "derwent/autodiff.hpp"
#include "derwent/kernels.hpp"
#include "derwent/matrix.hpp"

namespace derwent {

inline constexpr std::size_t kEmbedWidth = 256;
inline constexpr std::size_t kLstmHidden = 128;

struct NetDims {
  std::size_t d_in = 1;
  std::size_t embed = kEmbedWidth;
  std::size_t lstm_hidden = kLstmHidden;

  friend bool operator==(const NetDims&, const NetDims&) = default;
};

// Which learning rate a parameter array trains with.
enum class ParamGroup { FeatureExtractor, Recurrent, Decoder, Classifier };

enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kCellGate = 2, kOutputGate = 3 };

struct LstmDirection {
  std::array<Matrix, 4> wx;  // embed x hidden
  std::array<Matrix, 4> wh;  // hidden x hidden
  std::array<Matrix, 4> b;   // 1 x hidden

  friend bool operator==(const LstmDirection&, const LstmDirection&) = default;
};

struct ParameterSet {
  NetDims dims;
  Matrix phi_w;  // d_in x embed
  Matrix phi_b;  // 1 x embed
  LstmDirection lstm_fwd;
  LstmDirection lstm_bwd;
  Matrix dec_w;  // 2*hidden x embed
  Matrix dec_b;  // 1 x embed
  Matrix cls_w;  // embed x 1
  Matrix cls_b;  // 1 x 1

  // Visits every array in a fixed order as f(name, matrix, group).
  template <typename F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  // Same shapes, all zeros.
  ParameterSet zeros_like() const;
  std::size_t parameter_count() const;
  bool all_finite() const;

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f);
};

template <typename Self, typename F>
void ParameterSet::visit(Self& self, F& f) {
  static constexpr std::array<std::string_view, 12> kFwd = {
      "lstm.fwd.wx.i", "lstm.fwd.wx.f", "lstm.fwd.wx.g", "lstm.fwd.wx.o",
      "lstm.fwd.wh.i", "lstm.fwd.wh.f", "lstm.fwd.wh.g", "lstm.fwd.wh.o",
      "lstm.fwd.b.i",  "lstm.fwd.b.f",  "lstm.fwd.b.g",  "lstm.fwd.b.o"};
  static constexpr std::array<std::string_view, 12> kBwd = {
      "lstm.bwd.wx.i", "lstm.bwd.wx.f", "lstm.bwd.wx.g", "lstm.bwd.wx.o",
      "lstm.bwd.wh.i", "lstm.bwd.wh.f", "lstm.bwd.wh.g", "lstm.bwd.wh.o",
      "lstm.bwd.b.i",  "lstm.bwd.b.f",  "lstm.bwd.b.g",  "lstm.bwd.b.o"};
  f(std::string_view("phi.w"), self.phi_w, ParamGroup::FeatureExtractor);
  f(std::string_view("phi.b"), self.phi_b, ParamGroup::FeatureExtractor);
  auto lstm = [&](auto& dir, const std::array<std::string_view, 12>& names) {
    for (std::size_t g = 0; g < 4; ++g) f(names[g], dir.wx[g], ParamGroup::Recurrent);
    for (std::size_t g = 0; g < 4; ++g) f(names[4 + g], dir.wh[g], ParamGroup::Recurrent);
    for (std::size_t g = 0; g < 4; ++g) f(names[8 + g], dir.b[g], ParamGroup::Recurrent);
  };
  lstm(self.lstm_fwd, kFwd);
  lstm(self.lstm_bwd, kBwd);
  f(std::string_view("decoder.w"), self.dec_w, ParamGroup::Decoder);
  f(std::string_view("decoder.b"), self.dec_b, ParamGroup::Decoder);
  f(std::string_view("classifier.w"), self.cls_w, ParamGroup::Classifier);
  f(std::string_view("classifier.b"), self.cls_b, ParamGroup::Classifier);
}

// Glorot-uniform weights, zero biases, forget-gate biases 1.0.
ParameterSet init_params(std::uint64_t seed, const NetDims& dims);
ParameterSet init_params(std::uint64_t seed, std::size_t d_in);

struct Embedding {
  std::vector<double> values;
  std::int64_t instance_id = -1;
};

Embedding feature_extract(const ParameterSet& params, std::span<const double> x,
                          std::int64_t instance_id = -1);
// phi over every row of `inputs` (n x d_in) in one pass.
Matrix embed_rows(const ParameterSet& params, const Matrix& inputs,
                  kernels::Exec exec = kernels::Exec::Auto);
std::vector<double> lstm_encode(const ParameterSet& params, std::span<const Embedding> seq);
std::vector<double> decode(const ParameterSet& params, std::span<const double> h);
double classify(const ParameterSet& params, std::span<const double> embedding);

// Parameters bound as leaves of one tape.
struct LstmDirectionVars {
  std::array<ad::Var, 4> wx;
  std::array<ad::Var, 4> wh;
  std::array<ad::Var, 4> b;
};

struct ParamVars {
  NetDims dims;
  ad::Var phi_w, phi_b;
  LstmDirectionVars lstm_fwd, lstm_bwd;
  ad::Var dec_w, dec_b;
  ad::Var cls_w, cls_b;
};

ParamVars bind(ad::Tape& tape, const ParameterSet& params);
// Leaf gradients of `vars`, laid out like a ParameterSet.
ParameterSet gradients(const ParamVars& vars);

namespace net {

ad::Var feature_extract(const ParamVars& p, ad::Var x);
// Concatenation of the forward direction's final hidden state and the
// backward direction's final hidden state.
ad::Var lstm_encode(const ParamVars& p, std::span<const ad::Var> seq);
ad::Var decode(const ParamVars& p, ad::Var h);
ad::Var classify(const ParamVars& p, ad::Var embedding);

}  // namespace net

}  // namespace derwent
