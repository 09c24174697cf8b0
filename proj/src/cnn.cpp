#include <cmath>

#include "shapelab/errors.hpp"
#include "shapelab/models.hpp"
#include "glorot.hpp"

namespace shapelab {

CnnSpec make_single_head_cnn_spec(int resolution, int n_categories) {
  CnnSpec spec;
  spec.resolution = resolution;
  spec.heads = {{"category", n_categories, 1.0}};
  return spec;
}

CnnSpec make_multihead_cnn_spec(int resolution, int n_shapes, int n_colors, int n_textures) {
  CnnSpec spec;
  spec.resolution = resolution;
  spec.heads = {{"shape", n_shapes, 0.6}, {"color", n_colors, 0.2}, {"texture", n_textures, 0.2}};
  return spec;
}

Cnn::Cnn(const CnnSpec& spec, Rng& rng) : spec_(spec) {
  if (spec.input_channels < 1 || spec.feature_maps < 1 || spec.kernel_extent < 1 ||
      spec.pool_window < 1 || spec.pool_stride < 1 || spec.fc_units < 1) {
    throw ConfigError("cnn: all layer extents must be positive");
  }
  if (spec.dropout_rate < 0.0 || spec.dropout_rate >= 1.0) {
    throw ConfigError("cnn: dropout rate must lie in [0, 1)");
  }
  if (spec.l2_coefficient < 0.0) throw ConfigError("cnn: negative L2 coefficient");
  if (spec.heads.empty()) throw ConfigError("cnn: at least one head required");
  double weight_sum = 0.0;
  for (const HeadSpec& h : spec.heads) {
    if (h.class_count < 2) throw ConfigError("cnn: head '" + h.name + "' needs >= 2 classes");
    if (h.loss_weight < 0.0) throw ConfigError("cnn: head '" + h.name + "' has negative weight");
    weight_sum += h.loss_weight;
  }
  if (std::abs(weight_sum - 1.0) > 1e-12) {
    throw ConfigError("cnn: head loss weights must sum to 1");
  }
  // Same-padded convs keep the side length; each pool divides it (floor).
  int side = spec.resolution;
  for (int stage = 0; stage < 2; ++stage) {
    if (side < spec.pool_window) {
      throw ConfigError("cnn: resolution too small for two pooling stages");
    }
    side = (side - spec.pool_window) / spec.pool_stride + 1;
  }
  pooled_side_ = side;

  const int km = spec.feature_maps, ke = spec.kernel_extent;
  const int kernel_field = ke * ke;
  Tensor k1 = Tensor::zeros({km, spec.input_channels, ke, ke});
  glorot_fill(k1, spec.input_channels * kernel_field, km * kernel_field, rng);
  Tensor bc1 = Tensor::zeros({km});
  Tensor k2 = Tensor::zeros({km, km, ke, ke});
  glorot_fill(k2, km * kernel_field, km * kernel_field, rng);
  Tensor bc2 = Tensor::zeros({km});
  Tensor wfc = Tensor::zeros({fc_fan_in(), spec.fc_units});
  glorot_fill(wfc, fc_fan_in(), spec.fc_units, rng);
  Tensor bfc = Tensor::zeros({spec.fc_units});
  params_ = {k1, bc1, k2, bc2, wfc, bfc};
  names_ = {"conv1.kernels", "conv1.bias", "conv2.kernels", "conv2.bias", "fc.weight", "fc.bias"};
  for (const HeadSpec& h : spec.heads) {
    Tensor wh = Tensor::zeros({spec.fc_units, h.class_count});
    glorot_fill(wh, spec.fc_units, h.class_count, rng);
    params_.push_back(wh);
    params_.push_back(Tensor::zeros({h.class_count}));
    names_.push_back("head." + h.name + ".weight");
    names_.push_back("head." + h.name + ".bias");
  }
  for (Tensor& p : params_) p.set_requires_grad(true);
}

std::vector<int> Cnn::weight_param_indices() const {
  std::vector<int> idx = {0, 2, 4};
  for (std::size_t h = 0; h < spec_.heads.size(); ++h) {
    idx.push_back(static_cast<int>(6 + 2 * h));
  }
  return idx;
}

int Cnn::param_count() const {
  int total = 0;
  for (const Tensor& p : params_) total += p.size();
  return total;
}

Val Cnn::embed_image(Tape& tape, const Tensor& image) const {
  if (image.rank() != 3 || image.extent(0) != spec_.input_channels ||
      image.extent(1) != spec_.resolution || image.extent(2) != spec_.resolution) {
    throw DimensionError("cnn: expected image [" + std::to_string(spec_.input_channels) + " x " +
                         std::to_string(spec_.resolution) + " x " +
                         std::to_string(spec_.resolution) + "], got " + image.shape_str());
  }
  Val x = tape.leaf(image);
  x = tape.relu(tape.conv2d(x, tape.leaf(params_[0]), tape.leaf(params_[1]), Padding::kSame));
  x = tape.maxpool2d(x, spec_.pool_window, spec_.pool_stride);
  x = tape.relu(tape.conv2d(x, tape.leaf(params_[2]), tape.leaf(params_[3]), Padding::kSame));
  x = tape.maxpool2d(x, spec_.pool_window, spec_.pool_stride);
  return tape.reshape(x, {fc_fan_in()});
}

Cnn::Forward Cnn::forward(Tape& tape, const std::vector<const Tensor*>& images, Rng& dropout_rng,
                          bool training) const {
  if (images.empty()) throw ArgumentError("cnn: empty image batch");
  std::vector<Val> rows;
  rows.reserve(images.size());
  for (const Tensor* img : images) rows.push_back(embed_image(tape, *img));
  Val flat = tape.stack_rows(rows);
  Val fc = tape.relu(
      tape.add_rows(tape.matmul(flat, tape.leaf(params_[4])), tape.leaf(params_[5])));
  Val dropped = tape.dropout(fc, spec_.dropout_rate, dropout_rng, training);
  Forward out;
  out.fc = fc;
  for (std::size_t h = 0; h < spec_.heads.size(); ++h) {
    Val wh = tape.leaf(params_[6 + 2 * h]);
    Val bh = tape.leaf(params_[7 + 2 * h]);
    out.head_logits.push_back(tape.add_rows(tape.matmul(dropped, wh), bh));
  }
  return out;
}

std::vector<Tensor> Cnn::head_logits(const Tensor& image) const {
  Tape tape;
  Rng dummy(0);
  Forward out = forward(tape, {&image}, dummy, false);
  std::vector<Tensor> logits;
  logits.reserve(out.head_logits.size());
  for (Val v : out.head_logits) logits.push_back(tape.value(v).clone());
  return logits;
}

std::vector<double> Cnn::hidden_activations(const Tensor& image) const {
  Tape tape;
  Rng dummy(0);
  Forward out = forward(tape, {&image}, dummy, false);
  const Tensor& t = tape.value(out.fc);
  return std::vector<double>(t.data(), t.data() + t.size());
}

}  // namespace shapelab
