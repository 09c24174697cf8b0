#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shapelab/models.hpp"
#include "shapelab/probes.hpp"
#include "shapelab/stats.hpp"
#include "shapelab/stimuli.hpp"

namespace shapelab {

enum class ModelKind { kMlp, kCnn };

// One (N, K, seed, order) generalization run: accuracy is the share of
// the labeled attribute's match (shape share for shape-labeled training,
// color share for the color-labeled variant).
struct SweepRun {
  int n = 0, k = 0, seed = 0;
  int order = 0;  // 1 or 2
  double accuracy = 0.0;
  double shape_share = 0.0, color_share = 0.0, texture_share = 0.0;
};

struct SweepCell {
  int n = 0, k = 0;
  bool feasible = true;
  double order1_mean = 0.0, order1_stddev = 0.0;
  double order2_mean = 0.0, order2_stddev = 0.0;
};

struct SweepConfig {
  ModelKind model_kind = ModelKind::kMlp;
  LabelAttribute label_attribute = LabelAttribute::kShape;
  std::vector<int> n_values, k_values;
  int seeds = 10;
  int trial_count = 1000;
  std::uint64_t master_seed = 0;
  int workers = 1;
  int resolution = 64;  // image form only
  int epochs = 0;       // 0 -> model default (200 MLP, 400 CNN)
  double l2_coefficient = 1e-3;
  RmsPropConfig optimizer;
  bool allow_repeats = false;  // lift the K <= N^2 uniqueness law
};

struct SweepGrid {
  SweepConfig config;
  std::vector<SweepCell> cells;  // row-major over n_values x k_values
  std::vector<SweepRun> runs;    // every individual run, for export

  const SweepCell& cell(int n, int k) const;
};

// Full grid: per feasible (N, K, seed) generate a dataset labeled by the
// chosen attribute, train a fresh model, and score 1st- and 2nd-order
// generalization tests with `trial_count` trials each. Every job draws
// its streams from (master_seed, N, K, seed), so results are identical
// for any worker count. A failed job is retried once before the error
// propagates with its cell coordinates.
SweepGrid run_sweep(const SweepConfig& config);

// Cells whose order-2 mean reaches `threshold` and that are
// Pareto-minimal in (N, K): no other qualifying cell is <= in both axes.
std::vector<SweepCell> detect_bias_onset(const SweepGrid& grid, double threshold = 0.7);

struct TwoPhaseReport {
  double margin = 0.05;
  int feasible_cells = 0;
  std::vector<SweepCell> violations;  // order1 < order2 - margin
  double conforming_fraction = 1.0;
};

// Checks the "first-order generalization needs less data" ordering:
// order1_mean >= order2_mean - margin per feasible cell.
TwoPhaseReport two_phase_check(const SweepGrid& grid, double margin = 0.05);

// One trained model with everything needed to reproduce its scores.
// The bias scores are computed from the checkpointed (best-epoch)
// parameters, never from the final epoch.
struct TrainedRun {
  Checkpoint checkpoint;
  std::vector<EpochStats> trace;
  std::string dataset_descriptor;
  std::uint64_t seed = 0;
  double order1_accuracy = 0.0;
  double order2_accuracy = 0.0;
};

// ---------------------------------------------------------------------------
// Vocabulary-acceleration protocol.
// ---------------------------------------------------------------------------

struct VocabSession {
  int session = 0;             // 0-based session index
  int epoch = 0;               // 0-based epoch it closed
  int cum_count_nouns = 0;     // shapes ever at >= threshold train accuracy
  int cum_shape_choices = 0;   // running sum of shape picks over the tests
};

struct VocabRecord {
  int network = 0;
  bool diverged = false;
  std::string note;
  std::vector<VocabSession> sessions;
};

struct VocabConfig {
  int network_count = 20;
  std::uint64_t master_seed = 0;
  int resolution = 64;
  int n_shapes = 36, n_colors = 12, n_textures = 12;
  int examples_per_shape = 10;
  int epochs = 30;
  int session_stride = 3;        // one session per this many epochs
  int trials_per_session = 500;  // fresh order-2 trials per session
  double accuracy_threshold = 0.8;
  bool redraw_trials = true;  // false: one fixed trial set reused
  int workers = 1;
  double l2_coefficient = 1e-3;
  RmsPropConfig optimizer;
};

// Trains `network_count` independent multi-head networks and measures, at
// every session, the cumulative vocabulary (shapes that have ever reached
// the training-accuracy threshold) and cumulative shape choices on a
// 2nd-order test using the network's current parameters. A diverged
// network is recorded with its note and excluded from the statistics.
std::vector<VocabRecord> run_vocab_accel(const VocabConfig& config);

struct Metric1Report {
  std::vector<int> networks;     // record indices included
  std::vector<double> r_values;  // per included network
  std::vector<double> p_values;
  double mean_r = 0.0;
  std::vector<int> excluded;         // record indices left out
  std::vector<std::string> exclusion_notes;
};

// Within-network correlation of per-session increments of the two
// cumulative series (first differences over the zero baseline).
// Zero-variance and diverged networks are excluded with a note.
// `use_raw_cumulative` switches to raw cumulative values for comparison
// only; cumulative series are near-monotone together, so this setting
// inflates r and is never the default.
Metric1Report metric1_within(const std::vector<VocabRecord>& records,
                             bool use_raw_cumulative = false);

struct Metric2Report {
  double r = 0.0;
  double p = 1.0;
  int networks = 0;
};

// Across-network correlation of the two mean per-session increments.
Metric2Report metric2_across(const std::vector<VocabRecord>& records);

struct CorrelationReport {
  Metric1Report metric1;
  Metric2Report metric2;
};

CorrelationReport correlation_report(const std::vector<VocabRecord>& records);

// Per-session increments of a cumulative series, measured from the zero
// baseline that precedes training (so n sessions give n increments).
std::vector<double> session_increments(const std::vector<int>& cumulative);

}  // namespace shapelab
