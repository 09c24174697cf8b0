#pragma once

#include <vector>

#include "shapelab/errors.hpp"
#include "shapelab/tensor.hpp"

namespace shapelab {

struct RmsPropConfig {
  double learning_rate = 1e-3;
  double decay = 0.9;
  double epsilon = 1e-8;
};

// RMSProp with per-weight mean-square accumulators:
//   s <- decay * s + (1 - decay) * g^2
//   w <- w - lr * g / (sqrt(s) + eps)
// Gradients are cleared after each step.
class RmsProp {
 public:
  RmsProp(std::vector<Tensor> params, RmsPropConfig config = {});

  void step();
  const std::vector<Tensor>& params() const { return params_; }
  const RmsPropConfig& config() const { return config_; }

  // Accumulator access for checkpointing.
  std::vector<std::vector<double>>& state() { return state_; }
  const std::vector<std::vector<double>>& state() const { return state_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> state_;
  RmsPropConfig config_;
};

}  // namespace shapelab
