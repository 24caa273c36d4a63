#pragma once

#include <span>

#include "derwent/nets.hpp"

namespace derwent {

// Velocity arrays mirroring every parameter array.
struct OptimizerState {
  ParameterSet velocity;

  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

OptimizerState make_optimizer_state(const ParameterSet& params);

// Nesterov momentum in the reformulated form (Sutskever et al.):
//   v' = mu * v - lr * g
//   p' = p - mu * v + (1 + mu) * v'
void nesterov_update(std::span<double> param, std::span<const double> grad,
                     std::span<double> velocity, double lr, double momentum);

// Classifier arrays step with lr_classifier, everything else with lr_feature.
void sgd_nesterov_step(ParameterSet& params, const ParameterSet& grads, OptimizerState& state,
                       double lr_feature, double lr_classifier, double momentum);

}  // namespace derwent
