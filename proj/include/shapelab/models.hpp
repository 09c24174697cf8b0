#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shapelab/rmsprop.hpp"
#include "shapelab/rng.hpp"
#include "shapelab/stimuli.hpp"
#include "shapelab/tape.hpp"
#include "shapelab/tensor.hpp"

namespace shapelab {

struct MlpSpec {
  int input_units = kBitInputUnits;
  int hidden_units = 30;
  int output_units = 0;
  double l2_coefficient = 1e-3;
};

// One classification head reading the shared fully-connected layer.
struct HeadSpec {
  std::string name;
  int class_count = 0;
  double loss_weight = 1.0;
};

struct CnnSpec {
  int resolution = 200;
  int input_channels = 4;
  int feature_maps = 5;  // per conv layer
  int kernel_extent = 5;
  int pool_window = 4;
  int pool_stride = 4;
  int fc_units = 25;
  double dropout_rate = 0.5;
  double l2_coefficient = 1e-3;
  std::vector<HeadSpec> heads;
};

CnnSpec make_single_head_cnn_spec(int resolution, int n_categories);
CnnSpec make_multihead_cnn_spec(int resolution, int n_shapes, int n_colors, int n_textures);

// Two-layer perceptron: input -> hidden ReLU -> logits.
class Mlp {
 public:
  // Scaled-uniform fan-based init (+-sqrt(6/(fan_in+fan_out))), zero biases.
  Mlp(const MlpSpec& spec, Rng& rng);

  const MlpSpec& spec() const { return spec_; }
  std::vector<Tensor>& params() { return params_; }
  const std::vector<Tensor>& params() const { return params_; }
  const std::vector<std::string>& param_names() const { return names_; }
  // Indices of weight matrices (L2 applies to these, not biases).
  std::vector<int> weight_param_indices() const { return {0, 2}; }
  int param_count() const;

  // Graph forward over an [m x inputs] batch val; returns the logits val.
  Val forward(Tape& tape, Val batch) const;
  // Evaluation-mode logits for an [m x inputs] batch.
  Tensor logits(const Tensor& batch) const;
  // Post-ReLU hidden layer for one input ([inputs] or [1 x inputs]).
  std::vector<double> hidden_activations(const Tensor& input) const;

 private:
  MlpSpec spec_;
  std::vector<Tensor> params_;  // w1, b1, w2, b2
  std::vector<std::string> names_;
};

// conv -> ReLU -> pool -> conv -> ReLU -> pool -> FC ReLU -> dropout -> heads.
class Cnn {
 public:
  Cnn(const CnnSpec& spec, Rng& rng);

  const CnnSpec& spec() const { return spec_; }
  std::vector<Tensor>& params() { return params_; }
  const std::vector<Tensor>& params() const { return params_; }
  const std::vector<std::string>& param_names() const { return names_; }
  std::vector<int> weight_param_indices() const;
  int param_count() const;
  // Feature-map side length after both conv/pool stages.
  int pooled_side() const { return pooled_side_; }
  int fc_fan_in() const { return spec_.feature_maps * pooled_side_ * pooled_side_; }

  struct Forward {
    Val fc;                       // [m x fc_units], post-ReLU (pre-dropout)
    std::vector<Val> head_logits; // one [m x classes] val per head
  };
  Forward forward(Tape& tape, const std::vector<const Tensor*>& images, Rng& dropout_rng,
                  bool training) const;
  // Evaluation-mode logits per head for one image.
  std::vector<Tensor> head_logits(const Tensor& image) const;
  // Post-ReLU FC layer for one [channels x res x res] image, dropout off.
  std::vector<double> hidden_activations(const Tensor& image) const;

 private:
  Val embed_image(Tape& tape, const Tensor& image) const;  // flat conv features

  CnnSpec spec_;
  int pooled_side_ = 0;
  std::vector<Tensor> params_;  // k1, bc1, k2, bc2, wfc, bfc, then per-head wh, bh
  std::vector<std::string> names_;
};

// Per-epoch training record. `loss` is the optimized objective (weighted
// data loss plus L2) averaged over the epoch's batches; `data_loss` is the
// same average without the L2 term; `head_losses` splits it per head.
// Accuracy fields come from a full-pass over the training set in
// evaluation mode at epoch end, scored on the first (category/shape) head.
struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double data_loss = 0.0;
  std::vector<double> head_losses;
  double train_accuracy = 0.0;
  std::vector<double> per_class_accuracy;
};

struct TrainConfig {
  int epochs = 200;
  RmsPropConfig optimizer;
  std::uint64_t seed = 0;  // drives epoch shuffling and dropout masks
  // Called after each epoch while the model still holds that epoch's
  // parameters (not the restored best).
  std::function<void(int epoch, const EpochStats&)> on_epoch;
};

struct TrainResult {
  std::vector<EpochStats> trace;
  int best_epoch = -1;
  double best_train_loss = 0.0;
};

// min(32, floor(items/5)), at least 1.
int batch_size_rule(int n_items);

// Trains in place; on return the model holds the parameters of the epoch
// with minimum training loss. Labels: the item label for single-head
// models, (shape_id, color_id, texture_id) per head for multi-head CNNs.
TrainResult train(Mlp& model, const BitStimulusSet& set, const TrainConfig& config);
TrainResult train(Cnn& model, const ImageStimulusSet& set, const TrainConfig& config);

// Checkpoint container: everything needed to rebuild a trained model.
struct Checkpoint {
  std::string model_kind;  // "mlp" or "cnn"
  MlpSpec mlp_spec;
  CnnSpec cnn_spec;
  std::uint64_t seed = 0;
  int best_epoch = -1;
  double best_train_loss = 0.0;
  std::vector<std::string> names;
  std::vector<std::vector<int>> shapes;
  std::vector<std::vector<double>> payloads;
};

Checkpoint make_checkpoint(const Mlp& model, const TrainResult& result, std::uint64_t seed);
Checkpoint make_checkpoint(const Cnn& model, const TrainResult& result, std::uint64_t seed);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);
Mlp mlp_from_checkpoint(const Checkpoint& ckpt);
Cnn cnn_from_checkpoint(const Checkpoint& ckpt);

}  // namespace shapelab
