#pragma once

#include <cmath>

#include "shapelab/rng.hpp"
#include "shapelab/tensor.hpp"

namespace shapelab {

// Scaled-uniform fan-based fill: +-sqrt(6/(fan_in+fan_out)).
inline void glorot_fill(Tensor& t, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  double* d = t.data();
  for (int i = 0; i < t.size(); ++i) d[i] = rng.uniform(-limit, limit);
}

}  // namespace shapelab
