#include <algorithm>
#include <cstddef>
#include <sstream>
#include <vector>

#include "shapelab/experiments.hpp"
#include "shapelab/vecmath.hpp"
#include "worker_pool.hpp"

namespace shapelab {
namespace {

// Stream tags local to sweep jobs; distinct from every rng_stream tag so
// the training loop's internal streams can never collide with them.
constexpr std::uint64_t kOrder1Trials = 0x10;
constexpr std::uint64_t kOrder1Ties = 0x11;
constexpr std::uint64_t kOrder2Trials = 0x12;
constexpr std::uint64_t kOrder2Ties = 0x13;
constexpr std::uint64_t kSweepSalt = 0x53574545;

// Seed depends only on (master, N, K, seed index), never on worker
// scheduling, so any worker count reproduces the same grid.
std::uint64_t sweep_job_seed(std::uint64_t master, int n, int k, int seed_idx) {
  std::uint64_t h = hash_mix(master, kSweepSalt);
  h = hash_mix(h, static_cast<std::uint64_t>(n));
  h = hash_mix(h, static_cast<std::uint64_t>(k));
  return hash_mix(h, static_cast<std::uint64_t>(seed_idx));
}

struct JobOutput {
  SweepRun order1, order2;
};

SweepRun score_run(const SweepConfig& config, const TestReport& report, int n, int k, int seed_idx,
                   int order) {
  SweepRun run;
  run.n = n;
  run.k = k;
  run.seed = seed_idx;
  run.order = order;
  run.shape_share = report.shares[0];
  run.color_share = report.shares[1];
  run.texture_share = report.shares[2];
  run.accuracy = config.label_attribute == LabelAttribute::kShape ? report.shares[0]
                                                                  : report.shares[1];
  return run;
}

JobOutput run_sweep_job(const SweepConfig& config, int n, int k, int seed_idx) {
  const std::uint64_t seed = sweep_job_seed(config.master_seed, n, k, seed_idx);
  Rng job_rng(seed);
  Rng data_rng = job_rng.derive(rng_stream::kData);
  Rng weight_rng = job_rng.derive(rng_stream::kWeights);

  DatasetOptions options;
  options.allow_repeats = config.allow_repeats;
  options.label_attribute = config.label_attribute;

  TrainConfig train_config;
  train_config.optimizer = config.optimizer;
  train_config.seed = seed;

  JobOutput out;
  try {
    if (config.model_kind == ModelKind::kMlp) {
      const BitStimulusSet set = gen_bit_dataset(n, k, data_rng, options);
      MlpSpec spec;
      spec.output_units = n;
      spec.l2_coefficient = config.l2_coefficient;
      Mlp model(spec, weight_rng);
      train_config.epochs = config.epochs > 0 ? config.epochs : 200;
      train(model, set, train_config);
      for (int order = 1; order <= 2; ++order) {
        Rng trial_rng = job_rng.derive(order == 1 ? kOrder1Trials : kOrder2Trials);
        Rng tie_rng = job_rng.derive(order == 1 ? kOrder1Ties : kOrder2Ties);
        const std::vector<BitTrial> trials = build_bit_trials(set, order, config.trial_count,
                                                              trial_rng);
        const SweepRun run = score_run(config, run_generalization_test(model, trials, tie_rng), n,
                                       k, seed_idx, order);
        (order == 1 ? out.order1 : out.order2) = run;
      }
    } else {
      const ImageStimulusSet set = gen_image_dataset(n, k, data_rng, config.resolution, options);
      CnnSpec spec = make_single_head_cnn_spec(config.resolution, n);
      spec.l2_coefficient = config.l2_coefficient;
      Cnn model(spec, weight_rng);
      train_config.epochs = config.epochs > 0 ? config.epochs : 400;
      train(model, set, train_config);
      for (int order = 1; order <= 2; ++order) {
        Rng trial_rng = job_rng.derive(order == 1 ? kOrder1Trials : kOrder2Trials);
        Rng tie_rng = job_rng.derive(order == 1 ? kOrder1Ties : kOrder2Ties);
        const std::vector<ImageTrial> trials = build_image_trials(set, order, config.trial_count,
                                                                  trial_rng);
        const SweepRun run = score_run(config, run_generalization_test(model, trials, tie_rng), n,
                                       k, seed_idx, order);
        (order == 1 ? out.order1 : out.order2) = run;
      }
    }
  } catch (const DivergenceError& e) {
    std::ostringstream msg;
    msg << e.what() << " [cell N=" << n << " K=" << k << " seed " << seed_idx << "]";
    throw DivergenceError(msg.str(), e.epoch, e.batch);
  }
  return out;
}

}  // namespace

const SweepCell& SweepGrid::cell(int n, int k) const {
  for (const SweepCell& c : cells) {
    if (c.n == n && c.k == k) return c;
  }
  throw ArgumentError("sweep grid: no cell at N=" + std::to_string(n) +
                      " K=" + std::to_string(k));
}

SweepGrid run_sweep(const SweepConfig& config) {
  if (config.n_values.empty() || config.k_values.empty()) {
    throw ArgumentError("run_sweep: axis lists must be non-empty");
  }
  if (config.seeds < 1) throw ArgumentError("run_sweep: seeds must be >= 1");
  if (config.trial_count < 1) throw ArgumentError("run_sweep: trial_count must be >= 1");
  if (config.workers < 1) throw ArgumentError("run_sweep: workers must be >= 1");

  SweepGrid grid;
  grid.config = config;

  struct Job {
    std::size_t cell_index;
    int n, k, seed_idx;
  };
  std::vector<Job> jobs;
  for (int n : config.n_values) {
    for (int k : config.k_values) {
      SweepCell cell;
      cell.n = n;
      cell.k = k;
      cell.feasible = config.allow_repeats || k <= n * n;
      if (cell.feasible) {
        for (int s = 0; s < config.seeds; ++s) {
          jobs.push_back({grid.cells.size(), n, k, s});
        }
      }
      grid.cells.push_back(cell);
    }
  }

  std::vector<JobOutput> outputs(jobs.size());
  detail::run_jobs(static_cast<int>(jobs.size()), config.workers, [&](int i) {
    const Job& job = jobs[static_cast<std::size_t>(i)];
    outputs[static_cast<std::size_t>(i)] = run_sweep_job(config, job.n, job.k, job.seed_idx);
  });

  // Keyed merge: jobs were enumerated row-major with seeds in order, so
  // walking them back in that order rebuilds a scheduling-independent grid.
  std::vector<std::vector<double>> order1_acc(grid.cells.size()), order2_acc(grid.cells.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    grid.runs.push_back(outputs[i].order1);
    grid.runs.push_back(outputs[i].order2);
    order1_acc[jobs[i].cell_index].push_back(outputs[i].order1.accuracy);
    order2_acc[jobs[i].cell_index].push_back(outputs[i].order2.accuracy);
  }
  for (std::size_t c = 0; c < grid.cells.size(); ++c) {
    if (!grid.cells[c].feasible) continue;
    grid.cells[c].order1_mean = mean(order1_acc[c]);
    grid.cells[c].order1_stddev = stddev(order1_acc[c]);
    grid.cells[c].order2_mean = mean(order2_acc[c]);
    grid.cells[c].order2_stddev = stddev(order2_acc[c]);
  }
  return grid;
}

std::vector<SweepCell> detect_bias_onset(const SweepGrid& grid, double threshold) {
  std::vector<SweepCell> qualifying;
  for (const SweepCell& cell : grid.cells) {
    if (cell.feasible && cell.order2_mean >= threshold) qualifying.push_back(cell);
  }
  std::vector<SweepCell> frontier;
  for (const SweepCell& cell : qualifying) {
    bool dominated = false;
    for (const SweepCell& other : qualifying) {
      if (other.n <= cell.n && other.k <= cell.k && (other.n < cell.n || other.k < cell.k)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) frontier.push_back(cell);
  }
  std::sort(frontier.begin(), frontier.end(), [](const SweepCell& a, const SweepCell& b) {
    return a.n != b.n ? a.n < b.n : a.k < b.k;
  });
  return frontier;
}

TwoPhaseReport two_phase_check(const SweepGrid& grid, double margin) {
  TwoPhaseReport report;
  report.margin = margin;
  for (const SweepCell& cell : grid.cells) {
    if (!cell.feasible) continue;
    ++report.feasible_cells;
    if (cell.order1_mean < cell.order2_mean - margin) report.violations.push_back(cell);
  }
  report.conforming_fraction =
      report.feasible_cells == 0
          ? 1.0
          : 1.0 - static_cast<double>(report.violations.size()) /
                      static_cast<double>(report.feasible_cells);
  return report;
}

}  // namespace shapelab
