#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "shapelab/experiments.hpp"
#include "shapelab/vecmath.hpp"
#include "worker_pool.hpp"

namespace shapelab {
namespace {

constexpr std::uint64_t kVocabSalt = 0x564F4341;
// Per-session stream tags: trials take even offsets, ties odd, so the
// two families can never collide; the fixed-set tag sits below both.
constexpr std::uint64_t kFixedTrials = 0x20;
constexpr std::uint64_t kSessionBase = 0x30;

std::uint64_t vocab_net_seed(std::uint64_t master, int network) {
  return hash_mix(hash_mix(master, kVocabSalt), static_cast<std::uint64_t>(network));
}

VocabRecord run_vocab_network(const VocabConfig& config, int network) {
  VocabRecord record;
  record.network = network;

  const std::uint64_t seed = vocab_net_seed(config.master_seed, network);
  Rng net_rng(seed);
  Rng data_rng = net_rng.derive(rng_stream::kData);
  Rng weight_rng = net_rng.derive(rng_stream::kWeights);
  Rng session_rng = net_rng.derive(rng_stream::kSession);

  const ImageStimulusSet set =
      gen_vocab_image_dataset(config.n_shapes, config.examples_per_shape, config.n_colors,
                              config.n_textures, data_rng, config.resolution);
  CnnSpec spec = make_multihead_cnn_spec(config.resolution, config.n_shapes, config.n_colors,
                                         config.n_textures);
  spec.l2_coefficient = config.l2_coefficient;
  Cnn model(spec, weight_rng);

  std::vector<ImageTrial> fixed_trials;
  if (!config.redraw_trials) {
    Rng fixed_rng = session_rng.derive(kFixedTrials);
    fixed_trials = build_image_trials(set, 2, config.trials_per_session, fixed_rng);
  }

  // A shape joins the vocabulary the first epoch its per-class training
  // accuracy reaches the threshold, and never leaves: the cumulative
  // count-noun series is monotone by construction.
  std::vector<std::uint8_t> ever_reached(static_cast<std::size_t>(config.n_shapes), 0);
  int cum_choices = 0;

  TrainConfig train_config;
  train_config.epochs = config.epochs;
  train_config.optimizer = config.optimizer;
  train_config.seed = seed;
  train_config.on_epoch = [&](int epoch, const EpochStats& stats) {
    for (std::size_t c = 0; c < stats.per_class_accuracy.size() && c < ever_reached.size(); ++c) {
      if (stats.per_class_accuracy[c] >= config.accuracy_threshold) ever_reached[c] = 1;
    }
    if ((epoch + 1) % config.session_stride != 0) return;
    const int session = (epoch + 1) / config.session_stride - 1;

    // The model still holds this epoch's parameters here, so the session
    // test probes the network exactly as it stands mid-training.
    const std::uint64_t tag = kSessionBase + 2 * static_cast<std::uint64_t>(session);
    Rng tie_rng = session_rng.derive(tag + 1);
    TestReport report;
    if (config.redraw_trials) {
      Rng trial_rng = session_rng.derive(tag);
      const std::vector<ImageTrial> trials =
          build_image_trials(set, 2, config.trials_per_session, trial_rng);
      report = run_generalization_test(model, trials, tie_rng);
    } else {
      report = run_generalization_test(model, fixed_trials, tie_rng);
    }
    cum_choices += static_cast<int>(std::llround(report.shares[0] * report.trial_count));

    VocabSession entry;
    entry.session = session;
    entry.epoch = epoch;
    entry.cum_count_nouns = static_cast<int>(
        std::count(ever_reached.begin(), ever_reached.end(), std::uint8_t{1}));
    entry.cum_shape_choices = cum_choices;
    record.sessions.push_back(entry);
  };

  try {
    train(model, set, train_config);
  } catch (const DivergenceError& e) {
    record.diverged = true;
    record.note = std::string("diverged: ") + e.what();
  }
  return record;
}

std::string network_label(const std::vector<VocabRecord>& records, std::size_t index) {
  return "network " + std::to_string(records[index].network);
}

}  // namespace

std::vector<VocabRecord> run_vocab_accel(const VocabConfig& config) {
  if (config.network_count < 1) throw ArgumentError("vocab: network_count must be >= 1");
  if (config.epochs < 1) throw ArgumentError("vocab: epochs must be >= 1");
  if (config.session_stride < 1) throw ArgumentError("vocab: session_stride must be >= 1");
  if (config.trials_per_session < 1) {
    throw ArgumentError("vocab: trials_per_session must be >= 1");
  }
  if (config.accuracy_threshold < 0.0 || config.accuracy_threshold > 1.0) {
    throw ArgumentError("vocab: accuracy_threshold must lie in [0, 1]");
  }
  if (config.workers < 1) throw ArgumentError("vocab: workers must be >= 1");

  std::vector<VocabRecord> records(static_cast<std::size_t>(config.network_count));
  detail::run_jobs(config.network_count, config.workers, [&](int i) {
    records[static_cast<std::size_t>(i)] = run_vocab_network(config, i);
  });
  return records;
}

std::vector<double> session_increments(const std::vector<int>& cumulative) {
  std::vector<double> increments;
  increments.reserve(cumulative.size());
  int previous = 0;
  for (int value : cumulative) {
    increments.push_back(static_cast<double>(value - previous));
    previous = value;
  }
  return increments;
}

Metric1Report metric1_within(const std::vector<VocabRecord>& records, bool use_raw_cumulative) {
  Metric1Report report;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const VocabRecord& rec = records[i];
    if (rec.diverged) {
      report.excluded.push_back(static_cast<int>(i));
      report.exclusion_notes.push_back(network_label(records, i) + " " + rec.note);
      continue;
    }
    if (rec.sessions.size() < 3) {
      throw ArgumentError("metric1: " + network_label(records, i) +
                          " has fewer than 3 sessions");
    }
    std::vector<int> nouns, choices;
    for (const VocabSession& s : rec.sessions) {
      nouns.push_back(s.cum_count_nouns);
      choices.push_back(s.cum_shape_choices);
    }
    std::vector<double> a, b;
    if (use_raw_cumulative) {
      a.assign(nouns.begin(), nouns.end());
      b.assign(choices.begin(), choices.end());
    } else {
      a = session_increments(nouns);
      b = session_increments(choices);
    }
    double r = 0.0;
    try {
      r = pearson_r(a, b);
    } catch (const ArgumentError& e) {
      report.excluded.push_back(static_cast<int>(i));
      report.exclusion_notes.push_back(network_label(records, i) + ": " + e.what());
      continue;
    }
    report.networks.push_back(static_cast<int>(i));
    report.r_values.push_back(r);
    report.p_values.push_back(pearson_p(r, static_cast<int>(a.size())));
  }
  if (report.r_values.empty()) {
    throw ArgumentError("metric1: no network with usable variance");
  }
  report.mean_r = mean(report.r_values);
  return report;
}

Metric2Report metric2_across(const std::vector<VocabRecord>& records) {
  std::vector<double> mean_noun_inc, mean_choice_inc;
  for (const VocabRecord& rec : records) {
    if (rec.diverged) continue;
    if (rec.sessions.empty()) continue;
    const double n = static_cast<double>(rec.sessions.size());
    mean_noun_inc.push_back(rec.sessions.back().cum_count_nouns / n);
    mean_choice_inc.push_back(rec.sessions.back().cum_shape_choices / n);
  }
  Metric2Report report;
  report.networks = static_cast<int>(mean_noun_inc.size());
  report.r = pearson_r(mean_noun_inc, mean_choice_inc);
  report.p = pearson_p(report.r, report.networks);
  return report;
}

CorrelationReport correlation_report(const std::vector<VocabRecord>& records) {
  CorrelationReport report;
  report.metric1 = metric1_within(records);
  report.metric2 = metric2_across(records);
  return report;
}

}  // namespace shapelab
