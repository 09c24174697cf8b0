#include "shapelab/errors.hpp"
#include "shapelab/models.hpp"
#include "glorot.hpp"

namespace shapelab {

Mlp::Mlp(const MlpSpec& spec, Rng& rng) : spec_(spec) {
  if (spec.input_units < 1 || spec.hidden_units < 1 || spec.output_units < 2) {
    throw ConfigError("mlp: units must be positive and outputs >= 2");
  }
  if (spec.l2_coefficient < 0.0) throw ConfigError("mlp: negative L2 coefficient");
  Tensor w1 = Tensor::zeros({spec.input_units, spec.hidden_units});
  glorot_fill(w1, spec.input_units, spec.hidden_units, rng);
  Tensor b1 = Tensor::zeros({spec.hidden_units});
  Tensor w2 = Tensor::zeros({spec.hidden_units, spec.output_units});
  glorot_fill(w2, spec.hidden_units, spec.output_units, rng);
  Tensor b2 = Tensor::zeros({spec.output_units});
  params_ = {w1, b1, w2, b2};
  names_ = {"w1", "b1", "w2", "b2"};
  for (Tensor& p : params_) p.set_requires_grad(true);
}

int Mlp::param_count() const {
  int total = 0;
  for (const Tensor& p : params_) total += p.size();
  return total;
}

Val Mlp::forward(Tape& tape, Val batch) const {
  Val h = tape.relu(tape.add_rows(tape.matmul(batch, tape.leaf(params_[0])), tape.leaf(params_[1])));
  return tape.add_rows(tape.matmul(h, tape.leaf(params_[2])), tape.leaf(params_[3]));
}

Tensor Mlp::logits(const Tensor& batch) const {
  if (batch.rank() != 2 || batch.extent(1) != spec_.input_units) {
    throw DimensionError("mlp: expected batch [m x " + std::to_string(spec_.input_units) +
                         "], got " + batch.shape_str());
  }
  Tape tape;
  return tape.value(forward(tape, tape.leaf(batch))).clone();
}

std::vector<double> Mlp::hidden_activations(const Tensor& input) const {
  Tensor row = input;
  if (row.rank() == 1) row = row.reshaped({1, row.extent(0)});
  if (row.rank() != 2 || row.extent(0) != 1 || row.extent(1) != spec_.input_units) {
    throw DimensionError("mlp: hidden_activations wants one length-" +
                         std::to_string(spec_.input_units) + " input, got " + input.shape_str());
  }
  Tape tape;
  Val h = tape.relu(
      tape.add_rows(tape.matmul(tape.leaf(row), tape.leaf(params_[0])), tape.leaf(params_[1])));
  const Tensor& t = tape.value(h);
  return std::vector<double>(t.data(), t.data() + t.size());
}

}  // namespace shapelab
