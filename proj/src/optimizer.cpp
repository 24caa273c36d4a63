#include "derwent/optimizer.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "derwent/error.hpp"

namespace derwent {

OptimizerState make_optimizer_state(const ParameterSet& params) {
  return OptimizerState{params.zeros_like()};
}

void nesterov_update(std::span<double> param, std::span<const double> grad,
                     std::span<double> velocity, double lr, double momentum) {
  if (grad.size() != param.size() || velocity.size() != param.size()) {
    throw DimensionError("nesterov_update: array lengths differ");
  }
  for (double gi : grad) {
    if (!std::isfinite(gi)) throw NumericError("nesterov_update: non-finite gradient");
  }
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double previous = velocity[i];
    velocity[i] = momentum * previous - lr * grad[i];
    param[i] += -momentum * previous + (1.0 + momentum) * velocity[i];
  }
}

void sgd_nesterov_step(ParameterSet& params, const ParameterSet& grads, OptimizerState& state,
                       double lr_feature, double lr_classifier, double momentum) {
  if (params.dims != grads.dims || params.dims != state.velocity.dims) {
    throw DimensionError("sgd_nesterov_step: parameter, gradient and state dims differ");
  }
  if (!grads.all_finite()) throw NumericError("sgd_nesterov_step: non-finite gradient");
  std::vector<const Matrix*> g;
  grads.for_each([&](std::string_view, const Matrix& m, ParamGroup) { g.push_back(&m); });
  std::vector<Matrix*> v;
  state.velocity.for_each([&](std::string_view, Matrix& m, ParamGroup) { v.push_back(&m); });
  std::size_t k = 0;
  params.for_each([&](std::string_view name, Matrix& p, ParamGroup group) {
    if (!p.same_shape(*g[k]) || !p.same_shape(*v[k])) {
      throw DimensionError("sgd_nesterov_step: shape mismatch in " + std::string(name));
    }
    const double lr = group == ParamGroup::Classifier ? lr_classifier : lr_feature;
    nesterov_update(p.values(), g[k]->values(), v[k]->values(), lr, momentum);
    ++k;
  });
}

}  // namespace derwent
