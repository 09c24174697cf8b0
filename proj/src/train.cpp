#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "shapelab/errors.hpp"
#include "shapelab/models.hpp"

namespace shapelab {

int batch_size_rule(int n_items) { return std::max(1, std::min(32, n_items / 5)); }

namespace {

struct BatchLoss {
  double total = 0.0;  // optimized objective: weighted data + L2
  double data = 0.0;
  std::vector<double> heads;
};

// Shared epoch driver: shuffling, batching, divergence checks, best-model
// tracking and restoration. run_batch() must record the graph, call
// backward(), and leave gradients populated; eval_pass() fills the
// accuracy fields of the epoch's stats.
template <typename RunBatch, typename EvalPass>
TrainResult train_loop(std::vector<Tensor>& params, int n_items, const TrainConfig& config,
                       RunBatch&& run_batch, EvalPass&& eval_pass) {
  if (config.epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (n_items < 1) throw ConfigError("train: empty training set");
  RmsProp opt(params, config.optimizer);
  Rng master(config.seed);
  Rng shuffle_rng = master.derive(rng_stream::kShuffle);
  const int bsz = batch_size_rule(n_items);

  std::vector<int> order(static_cast<std::size_t>(n_items));
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::vector<Tensor> best;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0, data_sum = 0.0;
    std::vector<double> head_sums;
    int n_batches = 0;
    for (int start = 0; start < n_items; start += bsz) {
      const int stop = std::min(n_items, start + bsz);
      const std::vector<int> idx(order.begin() + start, order.begin() + stop);
      BatchLoss bl = run_batch(idx);
      if (!std::isfinite(bl.total)) {
        throw DivergenceError("training loss became non-finite at epoch " +
                                  std::to_string(epoch) + ", batch " + std::to_string(n_batches),
                              epoch, n_batches);
      }
      opt.step();
      loss_sum += bl.total;
      data_sum += bl.data;
      if (head_sums.empty()) head_sums.resize(bl.heads.size(), 0.0);
      for (std::size_t h = 0; h < bl.heads.size(); ++h) head_sums[h] += bl.heads[h];
      ++n_batches;
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = loss_sum / n_batches;
    stats.data_loss = data_sum / n_batches;
    for (double s : head_sums) stats.head_losses.push_back(s / n_batches);
    eval_pass(stats);
    if (result.trace.empty() || stats.loss < result.best_train_loss) {
      result.best_train_loss = stats.loss;
      result.best_epoch = epoch;
      best.clear();
      for (const Tensor& p : params) best.push_back(p.clone());
    }
    result.trace.push_back(stats);
    if (config.on_epoch) config.on_epoch(epoch, stats);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::copy(best[i].data(), best[i].data() + best[i].size(), params[i].data());
    params[i].zero_grad();
  }
  return result;
}

void fill_class_accuracy(EpochStats& stats, const std::vector<int>& labels,
                         const std::vector<int>& predictions, int n_classes) {
  std::vector<int> hits(static_cast<std::size_t>(n_classes), 0);
  std::vector<int> totals(static_cast<std::size_t>(n_classes), 0);
  int correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t c = static_cast<std::size_t>(labels[i]);
    ++totals[c];
    if (predictions[i] == labels[i]) {
      ++hits[c];
      ++correct;
    }
  }
  stats.train_accuracy = static_cast<double>(correct) / labels.size();
  stats.per_class_accuracy.resize(static_cast<std::size_t>(n_classes), 0.0);
  for (int c = 0; c < n_classes; ++c) {
    const std::size_t cc = static_cast<std::size_t>(c);
    stats.per_class_accuracy[cc] = totals[cc] ? static_cast<double>(hits[cc]) / totals[cc] : 0.0;
  }
}

int argmax_row(const double* row, int n) {
  int best = 0;
  for (int j = 1; j < n; ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

}  // namespace

TrainResult train(Mlp& model, const BitStimulusSet& set, const TrainConfig& config) {
  const int n_items = static_cast<int>(set.items.size());
  const int n_classes = model.spec().output_units;
  std::vector<int> labels;
  for (const BitObject& obj : set.items) {
    if (obj.label < 0 || obj.label >= n_classes) {
      throw IndexError("train: label " + std::to_string(obj.label) + " outside [0, " +
                       std::to_string(n_classes) + ")");
    }
    labels.push_back(obj.label);
  }
  const Tensor all_rows = bit_feature_rows(set.items);
  const int width = model.spec().input_units;

  auto run_batch = [&](const std::vector<int>& idx) {
    Tensor batch = Tensor::zeros({static_cast<int>(idx.size()), width});
    std::vector<int> batch_labels;
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const double* src = all_rows.data() + static_cast<std::size_t>(idx[r]) * width;
      std::copy(src, src + width, batch.data() + r * static_cast<std::size_t>(width));
      batch_labels.push_back(labels[static_cast<std::size_t>(idx[r])]);
    }
    Tape tape;
    Val logits = model.forward(tape, tape.leaf(batch));
    Val data = tape.softmax_nll(logits, batch_labels);
    Val loss = data;
    if (model.spec().l2_coefficient > 0.0) {
      std::vector<Val> weights;
      for (int i : model.weight_param_indices()) weights.push_back(tape.leaf(model.params()[i]));
      loss = tape.add(data, tape.l2_penalty(weights, model.spec().l2_coefficient));
    }
    tape.backward(loss);
    BatchLoss bl;
    bl.total = tape.scalar_value(loss);
    bl.data = tape.scalar_value(data);
    bl.heads = {bl.data};
    return bl;
  };

  auto eval_pass = [&](EpochStats& stats) {
    const Tensor logits = model.logits(all_rows);
    std::vector<int> predictions;
    for (int r = 0; r < n_items; ++r) {
      predictions.push_back(argmax_row(logits.data() + static_cast<std::size_t>(r) * n_classes,
                                       n_classes));
    }
    fill_class_accuracy(stats, labels, predictions, n_classes);
  };

  return train_loop(model.params(), n_items, config, run_batch, eval_pass);
}

TrainResult train(Cnn& model, const ImageStimulusSet& set, const TrainConfig& config) {
  const std::vector<HeadSpec>& heads = model.spec().heads;
  if (heads.size() != 1 && heads.size() != 3) {
    throw ConfigError("train: expected a single head or shape/color/texture heads");
  }
  const int n_items = static_cast<int>(set.items.size());
  // Per-head label columns: the item label for a single head, the three
  // attribute ids for the multi-head variant.
  std::vector<std::vector<int>> head_labels(heads.size());
  for (const ImageObject& obj : set.items) {
    if (heads.size() == 1) {
      head_labels[0].push_back(obj.label);
    } else {
      head_labels[0].push_back(obj.shape_id);
      head_labels[1].push_back(obj.color_id);
      head_labels[2].push_back(obj.texture_id);
    }
  }
  for (std::size_t h = 0; h < heads.size(); ++h) {
    for (int label : head_labels[h]) {
      if (label < 0 || label >= heads[h].class_count) {
        throw IndexError("train: head '" + heads[h].name + "' label " + std::to_string(label) +
                         " outside [0, " + std::to_string(heads[h].class_count) + ")");
      }
    }
  }

  Rng master(config.seed);
  Rng dropout_rng = master.derive(rng_stream::kDropout);

  auto run_batch = [&](const std::vector<int>& idx) {
    std::vector<const Tensor*> images;
    for (int i : idx) images.push_back(&set.items[static_cast<std::size_t>(i)].pixels);
    Tape tape;
    Cnn::Forward fw = model.forward(tape, images, dropout_rng, true);
    std::vector<Val> nll;
    for (std::size_t h = 0; h < heads.size(); ++h) {
      std::vector<int> batch_labels;
      for (int i : idx) batch_labels.push_back(head_labels[h][static_cast<std::size_t>(i)]);
      nll.push_back(tape.softmax_nll(fw.head_logits[h], batch_labels));
    }
    Val data = tape.scale(nll[0], heads[0].loss_weight);
    for (std::size_t h = 1; h < heads.size(); ++h) {
      data = tape.add(data, tape.scale(nll[h], heads[h].loss_weight));
    }
    Val loss = data;
    if (model.spec().l2_coefficient > 0.0) {
      std::vector<Val> weights;
      for (int i : model.weight_param_indices()) weights.push_back(tape.leaf(model.params()[i]));
      loss = tape.add(data, tape.l2_penalty(weights, model.spec().l2_coefficient));
    }
    tape.backward(loss);
    BatchLoss bl;
    bl.total = tape.scalar_value(loss);
    bl.data = tape.scalar_value(data);
    for (Val v : nll) bl.heads.push_back(tape.scalar_value(v));
    return bl;
  };

  auto eval_pass = [&](EpochStats& stats) {
    std::vector<int> predictions;
    for (const ImageObject& obj : set.items) {
      const Tensor logits = model.head_logits(obj.pixels)[0];
      predictions.push_back(argmax_row(logits.data(), heads[0].class_count));
    }
    fill_class_accuracy(stats, head_labels[0], predictions, heads[0].class_count);
  };

  return train_loop(model.params(), n_items, config, run_batch, eval_pass);
}

}  // namespace shapelab
