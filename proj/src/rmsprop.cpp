#include "shapelab/rmsprop.hpp"

#include <cmath>
#include <string>

namespace shapelab {

RmsProp::RmsProp(std::vector<Tensor> params, RmsPropConfig config)
    : params_(std::move(params)), config_(config) {
  if (config_.learning_rate <= 0.0) {
    throw ConfigError("rmsprop: learning rate must be > 0, got " +
                      std::to_string(config_.learning_rate));
  }
  if (config_.decay < 0.0 || config_.decay >= 1.0) {
    throw ConfigError("rmsprop: decay must be in [0, 1), got " + std::to_string(config_.decay));
  }
  if (config_.epsilon <= 0.0) {
    throw ConfigError("rmsprop: epsilon must be > 0, got " + std::to_string(config_.epsilon));
  }
  state_.reserve(params_.size());
  for (const Tensor& p : params_) {
    state_.emplace_back(static_cast<std::size_t>(p.size()), 0.0);
  }
}

void RmsProp::step() {
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Tensor& p = params_[pi];
    if (!p.has_grad()) {
      throw StateError("rmsprop: parameter " + std::to_string(pi) +
                       " has no gradient buffer");
    }
    double* w = p.data();
    double* g = p.grad();
    double* s = state_[pi].data();
    const int n = p.size();
    for (int i = 0; i < n; ++i) {
      s[i] = config_.decay * s[i] + (1.0 - config_.decay) * g[i] * g[i];
      w[i] -= config_.learning_rate * g[i] / (std::sqrt(s[i]) + config_.epsilon);
    }
    p.zero_grad();
  }
}

}  // namespace shapelab
