// shapelab: command-line front end for the inductive-bias laboratory.
//
// Subcommands: gen-data, train, eval, sweep, vocab-accel, probe, report.
// Every option can come from a flat key=value config file (--config);
// command-line flags override file values, and the merged effective
// config is echoed next to the results as config_echo.<command>.txt so
// any run is reproducible from its artifacts alone.
//
// Exit codes: 0 success, 2 configuration/argument errors, 3 infeasible
// dataset requests, 4 training divergence, 5 I/O failures.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "shapelab/experiments.hpp"
#include "shapelab/io.hpp"
#include "shapelab/models.hpp"
#include "shapelab/probes.hpp"
#include "shapelab/stats.hpp"
#include "shapelab/stimuli.hpp"
#include "shapelab/vecmath.hpp"

namespace fs = std::filesystem;
using namespace shapelab;

namespace {

// Trial-stream tags shared by train, eval and probe so that a saved
// checkpoint evaluated later reproduces the training run's report bytes.
constexpr std::uint64_t kOrder1Trials = 0x10;
constexpr std::uint64_t kOrder1Ties = 0x11;
constexpr std::uint64_t kOrder2Trials = 0x12;
constexpr std::uint64_t kOrder2Ties = 0x13;
constexpr std::uint64_t kProbeShape = 0x40;
constexpr std::uint64_t kProbeColor = 0x41;
constexpr std::uint64_t kProbeMorph = 0x42;
constexpr std::uint64_t kProbeSteps = 0x43;

// ---------------------------------------------------------------------------
// Effective configuration: defaults, overlaid by file, overlaid by flags.
// ---------------------------------------------------------------------------

class RunConfig {
 public:
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
  }

  std::string get_string(const std::string& key) const { return raw(key); }

  int get_int(const std::string& key) const {
    try {
      std::size_t used = 0;
      const int v = std::stoi(raw(key), &used);
      if (used != raw(key).size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': expected an integer, got '" + raw(key) + "'");
    }
  }

  std::uint64_t get_u64(const std::string& key) const {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(raw(key), &used);
      if (used != raw(key).size()) throw std::invalid_argument(key);
      return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" +
                        raw(key) + "'");
    }
  }

  double get_double(const std::string& key) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(raw(key), &used);
      if (used != raw(key).size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': expected a number, got '" + raw(key) + "'");
    }
  }

  bool get_bool(const std::string& key) const {
    const std::string& v = raw(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
  }

  std::vector<int> get_int_list(const std::string& key) const {
    std::vector<int> out;
    std::stringstream ss(raw(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        out.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a comma-separated integer list");
      }
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
  }

  std::string echo() const {
    std::string out;
    for (const auto& [key, value] : values_) {
      out += key + " = " + value + "\n";
    }
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  const std::string text = read_text_file(path);
  std::map<std::string, std::string> values;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    values[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
  }
  return values;
}

// One CLI option: config key, default value, help text.
struct OptSpec {
  std::string key, default_value, help;
};

struct Command {
  CLI::App* app = nullptr;
  std::string name;
  std::map<std::string, std::string> defaults;
  std::shared_ptr<std::map<std::string, std::string>> given =
      std::make_shared<std::map<std::string, std::string>>();
  std::shared_ptr<std::string> config_path = std::make_shared<std::string>();
};

Command add_command(CLI::App& app, const std::string& name, const std::string& description,
                    const std::vector<OptSpec>& opts) {
  Command command;
  command.name = name;
  command.app = app.add_subcommand(name, description);
  command.app->add_option("--config", *command.config_path,
                          "key=value config file; flags override file values");
  for (const OptSpec& opt : opts) {
    command.defaults[opt.key] = opt.default_value;
    command.app->add_option_function<std::string>(
        "--" + opt.key,
        [given = command.given, key = opt.key](const std::string& v) { (*given)[key] = v; },
        opt.help + " [" + opt.default_value + "]");
  }
  return command;
}

RunConfig resolve_config(const Command& command) {
  RunConfig cfg;
  for (const auto& [key, value] : command.defaults) cfg.set(key, value);
  if (!command.config_path->empty()) {
    for (const auto& [key, value] : parse_config_file(*command.config_path)) {
      if (key == "command") continue;  // provenance note in echoes, not a setting
      if (command.defaults.count(key) == 0) {
        throw ConfigError(*command.config_path + ": unknown config key '" + key + "' for " +
                          command.name);
      }
      cfg.set(key, value);
    }
  }
  for (const auto& [key, value] : *command.given) cfg.set(key, value);
  cfg.set("command", command.name);
  return cfg;
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory " + path + ": " + ec.message());
}

void write_echo(const RunConfig& cfg, const std::string& out, const std::string& command) {
  write_text_file(out + "/config_echo." + command + ".txt", cfg.echo());
}

LabelAttribute parse_attribute(const std::string& s) {
  if (s == "shape") return LabelAttribute::kShape;
  if (s == "color") return LabelAttribute::kColor;
  throw ConfigError("label-attribute must be 'shape' or 'color', got '" + s + "'");
}

DatasetOptions dataset_options(const RunConfig& cfg) {
  DatasetOptions options;
  options.allow_repeats = cfg.get_bool("allow-repeats");
  options.label_attribute = parse_attribute(cfg.get_string("label-attribute"));
  return options;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string item_file_name(int index, const std::string& suffix) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "item_%04d%s", index, suffix.c_str());
  return buf;
}

std::string bits20(std::uint32_t v) {
  std::string s(20, '0');
  for (int i = 0; i < 20; ++i) {
    if ((v >> i) & 1u) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

// ---------------------------------------------------------------------------
// Shared train/eval plumbing.
// ---------------------------------------------------------------------------

const std::vector<std::string> kReportHeader{"order",       "accuracy",      "shape_share",
                                             "color_share", "texture_share", "trial_count"};
const std::vector<std::string> kTraceHeader{"epoch", "loss", "data_loss", "train_accuracy"};

std::vector<std::vector<std::string>> trace_rows(const std::vector<EpochStats>& trace) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(trace.size());
  for (const EpochStats& s : trace) {
    rows.push_back({std::to_string(s.epoch), format_double(s.loss), format_double(s.data_loss),
                    format_double(s.train_accuracy)});
  }
  return rows;
}

std::vector<std::string> report_row(int order, const TestReport& report) {
  return {std::to_string(order),           format_double(report.accuracy),
          format_double(report.shares[0]), format_double(report.shares[1]),
          format_double(report.shares[2]), std::to_string(report.trial_count)};
}

std::vector<int> parse_orders(const std::string& s) {
  if (s == "1") return {1};
  if (s == "2") return {2};
  if (s == "both") return {1, 2};
  throw ConfigError("order must be '1', '2' or 'both', got '" + s + "'");
}

template <typename Model, typename Set, typename TrialBuilder>
std::vector<std::vector<std::string>> score_orders(const Model& model, const Set& set,
                                                   const std::vector<int>& orders, int trials,
                                                   std::uint64_t seed,
                                                   const TrialBuilder& build_trials) {
  Rng base(seed);
  std::vector<std::vector<std::string>> rows;
  for (int order : orders) {
    Rng trial_rng = base.derive(order == 1 ? kOrder1Trials : kOrder2Trials);
    Rng tie_rng = base.derive(order == 1 ? kOrder1Ties : kOrder2Ties);
    const auto trial_set = build_trials(set, order, trials, trial_rng);
    rows.push_back(report_row(order, run_generalization_test(model, trial_set, tie_rng)));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

int cmd_gen_data(const RunConfig& cfg) {
  const std::string out = cfg.get_string("out");
  ensure_dir(out);
  write_echo(cfg, out, "gen-data");

  const std::string kind = cfg.get_string("kind");
  const int n = cfg.get_int("n"), k = cfg.get_int("k");
  Rng data_rng = Rng(cfg.get_u64("seed")).derive(rng_stream::kData);
  DatasetOptions options = dataset_options(cfg);
  options.holdout_size = cfg.get_int("holdout");
  std::ostringstream summary;

  if (kind == "bits") {
    const BitStimulusSet set = gen_bit_dataset(n, k, data_rng, options);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < set.items.size(); ++i) {
      const BitObject& item = set.items[i];
      rows.push_back({std::to_string(i), std::to_string(item.label),
                      std::to_string(item.shape_id), std::to_string(item.color_id),
                      std::to_string(item.texture_id), bits20(item.shape_bits),
                      bits20(item.color_bits), bits20(item.texture_bits)});
    }
    write_csv(out + "/manifest.csv",
              {"index", "label", "shape_id", "color_id", "texture_id", "shape_bits", "color_bits",
               "texture_bits"},
              rows);
    summary << "bit dataset: N=" << n << " K=" << k << ", " << set.items.size() << " items, "
            << set.holdout_shapes.size() << " holdout attributes per pool\n";
  } else if (kind == "images" || kind == "vocab-images") {
    const int resolution = cfg.get_int("resolution");
    const ImageStimulusSet set =
        kind == "images"
            ? gen_image_dataset(n, k, data_rng, resolution, options)
            : gen_vocab_image_dataset(n, k, cfg.get_int("n-colors"), cfg.get_int("n-textures"),
                                      data_rng, resolution, options.holdout_size);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < set.items.size(); ++i) {
      const ImageObject& item = set.items[i];
      const std::string image_name = item_file_name(static_cast<int>(i), ".ppm");
      const std::string texture_name = item_file_name(static_cast<int>(i), "_texture.pgm");
      write_ppm(out + "/" + image_name, item.pixels);
      write_pgm(out + "/" + texture_name, item.pixels, 3);
      rows.push_back({std::to_string(i), std::to_string(item.label),
                      std::to_string(item.shape_id), std::to_string(item.color_id),
                      std::to_string(item.texture_id), std::to_string(item.offset[0]),
                      std::to_string(item.offset[1]), image_name, texture_name});
    }
    write_csv(out + "/manifest.csv",
              {"index", "label", "shape_id", "color_id", "texture_id", "offset_x", "offset_y",
               "image", "texture_map"},
              rows);
    summary << kind << " dataset: N=" << n << " K=" << k << " at " << resolution << "x"
            << resolution << ", " << set.items.size() << " items\n";
  } else {
    throw ConfigError("gen-data: kind must be bits, images or vocab-images, got '" + kind + "'");
  }

  std::cout << summary.str();
  return 0;
}

// ---------------------------------------------------------------------------
// train / eval
// ---------------------------------------------------------------------------

int cmd_train(const RunConfig& cfg) {
  const std::string out = cfg.get_string("out");
  ensure_dir(out);
  write_echo(cfg, out, "train");

  const std::string model_kind = cfg.get_string("model");
  const int n = cfg.get_int("n"), k = cfg.get_int("k");
  const std::uint64_t seed = cfg.get_u64("seed");
  const int trials = cfg.get_int("trials");
  const DatasetOptions options = dataset_options(cfg);

  TrainConfig train_config;
  train_config.optimizer.learning_rate = cfg.get_double("learning-rate");
  train_config.seed = seed;
  std::vector<EpochStats> live_trace;
  train_config.on_epoch = [&live_trace](int, const EpochStats& stats) {
    live_trace.push_back(stats);
  };

  Rng data_rng = Rng(seed).derive(rng_stream::kData);
  Rng weight_rng = Rng(seed).derive(rng_stream::kWeights);
  const int epochs = cfg.get_int("epochs");

  std::vector<std::vector<std::string>> report_rows;
  TrainResult result;
  std::ostringstream summary;

  if (model_kind == "mlp") {
    const BitStimulusSet set = gen_bit_dataset(n, k, data_rng, options);
    MlpSpec spec;
    spec.hidden_units = cfg.get_int("hidden");
    spec.output_units = n;
    spec.l2_coefficient = cfg.get_double("l2");
    Mlp model(spec, weight_rng);
    train_config.epochs = epochs > 0 ? epochs : 200;
    try {
      result = train(model, set, train_config);
    } catch (const DivergenceError&) {
      write_csv(out + "/trace.csv", kTraceHeader, trace_rows(live_trace));
      throw;  // partial trace preserved; exit code 4 upstream
    }
    save_checkpoint(out + "/checkpoint.ckpt", make_checkpoint(model, result, seed));
    report_rows = score_orders(model, set, {1, 2}, trials, seed,
                               [](const BitStimulusSet& s, int order, int count, Rng& rng) {
                                 return build_bit_trials(s, order, count, rng);
                               });
  } else if (model_kind == "cnn") {
    const int resolution = cfg.get_int("resolution");
    const ImageStimulusSet set = gen_image_dataset(n, k, data_rng, resolution, options);
    CnnSpec spec = make_single_head_cnn_spec(resolution, n);
    spec.l2_coefficient = cfg.get_double("l2");
    Cnn model(spec, weight_rng);
    train_config.epochs = epochs > 0 ? epochs : 400;
    try {
      result = train(model, set, train_config);
    } catch (const DivergenceError&) {
      write_csv(out + "/trace.csv", kTraceHeader, trace_rows(live_trace));
      throw;
    }
    save_checkpoint(out + "/checkpoint.ckpt", make_checkpoint(model, result, seed));
    report_rows = score_orders(model, set, {1, 2}, trials, seed,
                               [](const ImageStimulusSet& s, int order, int count, Rng& rng) {
                                 return build_image_trials(s, order, count, rng);
                               });
  } else {
    throw ConfigError("train: model must be 'mlp' or 'cnn', got '" + model_kind + "'");
  }

  write_csv(out + "/trace.csv", kTraceHeader, trace_rows(result.trace));
  write_csv(out + "/report.csv", kReportHeader, report_rows);

  summary << "trained " << model_kind << " N=" << n << " K=" << k << ": best epoch "
          << result.best_epoch << ", best loss " << format_double(result.best_train_loss) << "\n";
  for (const std::vector<std::string>& row : report_rows) {
    summary << "order-" << row[0] << " accuracy " << row[1] << "\n";
  }
  std::cout << summary.str();
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  const std::string checkpoint_path = cfg.get_string("checkpoint");
  if (checkpoint_path.empty()) throw ConfigError("eval: --checkpoint is required");
  const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
  const std::string model_kind = cfg.get_string("model");
  if (checkpoint.model_kind != model_kind) {
    throw ConfigError("eval: checkpoint holds a " + checkpoint.model_kind +
                      " but the config says " + model_kind);
  }

  const std::string out = cfg.get_string("out");
  ensure_dir(out);
  write_echo(cfg, out, "eval");

  const int n = cfg.get_int("n"), k = cfg.get_int("k");
  const std::uint64_t seed = cfg.get_u64("seed");
  const std::vector<int> orders = parse_orders(cfg.get_string("order"));
  const int trials = cfg.get_int("trials");
  Rng data_rng = Rng(seed).derive(rng_stream::kData);

  std::vector<std::vector<std::string>> rows;
  if (model_kind == "mlp") {
    const BitStimulusSet set = gen_bit_dataset(n, k, data_rng, dataset_options(cfg));
    const Mlp model = mlp_from_checkpoint(checkpoint);
    rows = score_orders(model, set, orders, trials, seed,
                        [](const BitStimulusSet& s, int order, int count, Rng& rng) {
                          return build_bit_trials(s, order, count, rng);
                        });
  } else {
    const ImageStimulusSet set =
        gen_image_dataset(n, k, data_rng, cfg.get_int("resolution"), dataset_options(cfg));
    const Cnn model = cnn_from_checkpoint(checkpoint);
    rows = score_orders(model, set, orders, trials, seed,
                        [](const ImageStimulusSet& s, int order, int count, Rng& rng) {
                          return build_image_trials(s, order, count, rng);
                        });
  }

  write_csv(out + "/report.csv", kReportHeader, rows);
  for (const std::vector<std::string>& row : rows) {
    std::cout << "order-" << row[0] << " accuracy " << row[1] << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

const std::vector<std::string> kCellsHeader{"N",           "K",           "feasible",
                                            "order1_mean", "order1_stddev", "order2_mean",
                                            "order2_stddev"};

std::string sweep_summary(const SweepGrid& grid, double threshold, double margin) {
  std::ostringstream text;
  const SweepConfig& config = grid.config;
  int feasible = 0;
  for (const SweepCell& cell : grid.cells) feasible += cell.feasible ? 1 : 0;
  text << "sweep: model=" << (config.model_kind == ModelKind::kMlp ? "mlp" : "cnn")
       << " label=" << (config.label_attribute == LabelAttribute::kShape ? "shape" : "color")
       << " grid " << config.n_values.size() << "x" << config.k_values.size()
       << " seeds=" << config.seeds << " trials=" << config.trial_count << "\n";
  text << "feasible cells: " << feasible << "/" << grid.cells.size() << "\n";

  const std::vector<SweepCell> frontier = detect_bias_onset(grid, threshold);
  text << "bias onset (order-2 mean >= " << format_double(threshold) << "):";
  if (frontier.empty()) {
    text << " none";
  } else {
    for (const SweepCell& cell : frontier) {
      text << " (N=" << cell.n << ",K=" << cell.k << " at " << format_double(cell.order2_mean)
           << ")";
    }
  }
  text << "\n";

  const TwoPhaseReport phase = two_phase_check(grid, margin);
  text << "two-phase check (margin " << format_double(margin)
       << "): " << format_double(100.0 * phase.conforming_fraction) << "% conforming, "
       << phase.violations.size() << " violation(s)";
  for (const SweepCell& cell : phase.violations) {
    text << " (N=" << cell.n << ",K=" << cell.k << ")";
  }
  text << "\n";
  return text.str();
}

void write_sweep_artifacts(const SweepGrid& grid, const std::string& out, double threshold,
                           double margin) {
  write_csv(out + "/sweep.csv", kSweepCsvHeader, sweep_csv_rows(grid));

  std::vector<std::vector<std::string>> cell_rows;
  for (const SweepCell& cell : grid.cells) {
    cell_rows.push_back({std::to_string(cell.n), std::to_string(cell.k),
                         cell.feasible ? "1" : "0", format_double(cell.order1_mean),
                         format_double(cell.order1_stddev), format_double(cell.order2_mean),
                         format_double(cell.order2_stddev)});
  }
  write_csv(out + "/cells.csv", kCellsHeader, cell_rows);

  std::vector<std::vector<std::string>> onset_rows;
  for (const SweepCell& cell : detect_bias_onset(grid, threshold)) {
    onset_rows.push_back(
        {std::to_string(cell.n), std::to_string(cell.k), format_double(cell.order2_mean)});
  }
  write_csv(out + "/onset.csv", {"N", "K", "order2_mean"}, onset_rows);

  write_text_file(out + "/heatmap_order1.svg", svg_sweep_heatmap(grid, 1));
  write_text_file(out + "/heatmap_order2.svg", svg_sweep_heatmap(grid, 2));
  write_text_file(out + "/summary.txt", sweep_summary(grid, threshold, margin));
}

SweepConfig sweep_config_from(const RunConfig& cfg) {
  SweepConfig config;
  config.model_kind = cfg.get_string("model") == "cnn" ? ModelKind::kCnn : ModelKind::kMlp;
  if (cfg.get_string("model") != "mlp" && cfg.get_string("model") != "cnn") {
    throw ConfigError("sweep: model must be 'mlp' or 'cnn', got '" + cfg.get_string("model") +
                      "'");
  }
  config.label_attribute = parse_attribute(cfg.get_string("label-attribute"));
  config.n_values = cfg.get_int_list("n-values");
  config.k_values = cfg.get_int_list("k-values");
  config.seeds = cfg.get_int("seeds");
  config.trial_count = cfg.get_int("trials");
  config.master_seed = cfg.get_u64("seed");
  config.workers = resolve_workers(cfg.get_int("workers"));
  config.resolution = cfg.get_int("resolution");
  config.epochs = cfg.get_int("epochs");
  config.l2_coefficient = cfg.get_double("l2");
  config.optimizer.learning_rate = cfg.get_double("learning-rate");
  config.allow_repeats = cfg.get_bool("allow-repeats");
  return config;
}

int cmd_sweep(const RunConfig& cfg) {
  const std::string out = cfg.get_string("out");
  ensure_dir(out);
  write_echo(cfg, out, "sweep");

  const SweepGrid grid = run_sweep(sweep_config_from(cfg));
  const double threshold = cfg.get_double("threshold"), margin = cfg.get_double("margin");
  write_sweep_artifacts(grid, out, threshold, margin);
  std::cout << sweep_summary(grid, threshold, margin);
  return 0;
}

// ---------------------------------------------------------------------------
// vocab-accel
// ---------------------------------------------------------------------------

const std::vector<std::string> kCorrelationHeader{"metric", "network", "r", "p"};

std::string vocab_summary(const std::vector<VocabRecord>& records, const Metric1Report& metric1,
                          const Metric2Report& metric2, int n_shapes) {
  std::ostringstream text;
  int diverged = 0;
  std::vector<double> final_vocab;
  for (const VocabRecord& record : records) {
    if (record.diverged) {
      ++diverged;
      continue;
    }
    if (!record.sessions.empty()) {
      final_vocab.push_back(static_cast<double>(record.sessions.back().cum_count_nouns));
    }
  }
  text << "vocabulary protocol: " << records.size() << " network(s), " << diverged
       << " diverged\n";
  if (!final_vocab.empty()) {
    text << "mean final vocabulary: " << format_double(mean(final_vocab)) << " of " << n_shapes
         << "\n";
  }
  text << "metric 1 (within-network increment correlation): mean r = "
       << format_double(metric1.mean_r) << " over " << metric1.networks.size()
       << " network(s)\n";
  for (std::size_t i = 0; i < metric1.excluded.size(); ++i) {
    text << "  excluded: " << metric1.exclusion_notes[i] << "\n";
  }
  text << "metric 2 (across-network mean increments): r = " << format_double(metric2.r)
       << ", p = " << format_double(metric2.p) << " over " << metric2.networks
       << " network(s)\n";
  return text.str();
}

void write_vocab_artifacts(const std::vector<VocabRecord>& records, const std::string& out,
                           const Metric1Report& metric1, const Metric2Report& metric2,
                           int n_shapes) {
  write_csv(out + "/vocab.csv", kVocabCsvHeader, vocab_csv_rows(records));

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < metric1.networks.size(); ++i) {
    const int record_index = metric1.networks[i];
    rows.push_back({"within",
                    std::to_string(records[static_cast<std::size_t>(record_index)].network),
                    format_double(metric1.r_values[i]), format_double(metric1.p_values[i])});
  }
  rows.push_back({"within_mean", "all", format_double(metric1.mean_r), ""});
  rows.push_back({"across", "all", format_double(metric2.r), format_double(metric2.p)});
  write_csv(out + "/correlations.csv", kCorrelationHeader, rows);

  // Mean cumulative curves across the non-diverged networks.
  std::size_t session_count = 0;
  for (const VocabRecord& record : records) {
    if (!record.diverged) session_count = std::max(session_count, record.sessions.size());
  }
  CurveSeries nouns{"mean cumulative count nouns", {}, {}};
  CurveSeries choices{"mean cumulative shape choices", {}, {}};
  for (std::size_t s = 0; s < session_count; ++s) {
    std::vector<double> noun_values, choice_values;
    for (const VocabRecord& record : records) {
      if (record.diverged || s >= record.sessions.size()) continue;
      noun_values.push_back(static_cast<double>(record.sessions[s].cum_count_nouns));
      choice_values.push_back(static_cast<double>(record.sessions[s].cum_shape_choices));
    }
    if (noun_values.empty()) continue;
    nouns.x.push_back(static_cast<double>(s));
    nouns.y.push_back(mean(noun_values));
    choices.x.push_back(static_cast<double>(s));
    choices.y.push_back(mean(choice_values));
  }
  CurvePlotOptions noun_options;
  noun_options.title = "Cumulative count nouns";
  noun_options.x_label = "session";
  noun_options.y_label = "count nouns";
  write_text_file(out + "/vocab_nouns.svg", svg_curve_plot({nouns}, noun_options));
  CurvePlotOptions choice_options;
  choice_options.title = "Cumulative shape choices";
  choice_options.x_label = "session";
  choice_options.y_label = "shape choices";
  write_text_file(out + "/vocab_choices.svg", svg_curve_plot({choices}, choice_options));

  write_text_file(out + "/summary.txt", vocab_summary(records, metric1, metric2, n_shapes));
}

int cmd_vocab(const RunConfig& cfg) {
  const std::string out = cfg.get_string("out");
  ensure_dir(out);
  write_echo(cfg, out, "vocab-accel");

  VocabConfig config;
  config.network_count = cfg.get_int("networks");
  config.master_seed = cfg.get_u64("seed");
  config.resolution = cfg.get_int("resolution");
  config.n_shapes = cfg.get_int("n-shapes");
  config.n_colors = cfg.get_int("n-colors");
  config.n_textures = cfg.get_int("n-textures");
  config.examples_per_shape = cfg.get_int("examples");
  config.epochs = cfg.get_int("epochs");
  config.session_stride = cfg.get_int("session-stride");
  config.trials_per_session = cfg.get_int("trials");
  config.accuracy_threshold = cfg.get_double("accuracy-threshold");
  config.redraw_trials = cfg.get_bool("redraw-trials");
  config.workers = resolve_workers(cfg.get_int("workers"));
  config.l2_coefficient = cfg.get_double("l2");
  config.optimizer.learning_rate = cfg.get_double("learning-rate");

  const std::vector<VocabRecord> records = run_vocab_accel(config);
  write_csv(out + "/vocab.csv", kVocabCsvHeader, vocab_csv_rows(records));  // before metrics

  const Metric1Report metric1 = metric1_within(records);
  const Metric2Report metric2 = metric2_across(records);
  write_vocab_artifacts(records, out, metric1, metric2, config.n_shapes);
  std::cout << vocab_summary(records, metric1, metric2, config.n_shapes);
  return 0;
}

// ---------------------------------------------------------------------------
// probe
// ---------------------------------------------------------------------------

std::vector<std::vector<std::string>> morph_rows(const std::vector<MorphPoint>& points) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(points.size());
  for (const MorphPoint& point : points) {
    rows.push_back({format_double(point.distance), format_double(point.similarity)});
  }
  return rows;
}

CurveSeries morph_series(const std::string& label, const std::vector<MorphPoint>& points) {
  CurveSeries series{label, {}, {}};
  for (const MorphPoint& point : points) {
    series.x.push_back(point.distance);
    series.y.push_back(point.similarity);
  }
  return series;
}

int cmd_probe(const RunConfig& cfg) {
  const std::string checkpoint_path = cfg.get_string("checkpoint");
  if (checkpoint_path.empty()) throw ConfigError("probe: --checkpoint is required");
  const Checkpoint checkpoint = load_checkpoint(checkpoint_path);

  const std::string out = cfg.get_string("out");
  ensure_dir(out);
  write_echo(cfg, out, "probe");

  const std::string kind = cfg.get_string("kind");
  const std::uint64_t seed = cfg.get_u64("seed");
  const int n = cfg.get_int("n"), k = cfg.get_int("k");
  const int object_index = cfg.get_int("object");
  Rng data_rng = Rng(seed).derive(rng_stream::kData);
  Rng probe_base(seed);

  if (kind == "bitflip") {
    if (checkpoint.model_kind != "mlp") {
      throw ConfigError("probe bitflip: needs an mlp checkpoint, got " + checkpoint.model_kind);
    }
    const Mlp model = mlp_from_checkpoint(checkpoint);
    const BitStimulusSet set = gen_bit_dataset(n, k, data_rng, dataset_options(cfg));
    if (object_index < 0 || object_index >= static_cast<int>(set.items.size())) {
      throw ArgumentError("probe: object index " + std::to_string(object_index) +
                          " out of range");
    }
    const BitObject& object = set.items[static_cast<std::size_t>(object_index)];
    const int max_flips = cfg.get_int("max-flips"), repeats = cfg.get_int("repeats");
    Rng shape_rng = probe_base.derive(kProbeShape);
    Rng color_rng = probe_base.derive(kProbeColor);
    const std::vector<CurvePoint> shape_curve =
        bitflip_sensitivity(model, object, LabelAttribute::kShape, max_flips, shape_rng, repeats);
    const std::vector<CurvePoint> color_curve =
        bitflip_sensitivity(model, object, LabelAttribute::kColor, max_flips, color_rng, repeats);
    write_csv(out + "/bitflip_shape.csv", kCurveCsvHeader, curve_csv_rows(shape_curve));
    write_csv(out + "/bitflip_color.csv", kCurveCsvHeader, curve_csv_rows(color_curve));

    CurveSeries shape_series{"shape flips", {}, {}}, color_series{"color flips", {}, {}};
    for (const CurvePoint& point : shape_curve) {
      shape_series.x.push_back(point.x);
      shape_series.y.push_back(point.mean);
    }
    for (const CurvePoint& point : color_curve) {
      color_series.x.push_back(point.x);
      color_series.y.push_back(point.mean);
    }
    CurvePlotOptions options;
    options.title = "Hidden-layer similarity under bit flips";
    options.x_label = "flipped bits";
    options.y_label = "cosine similarity";
    write_text_file(out + "/bitflip.svg",
                    svg_curve_plot({shape_series, color_series}, options));
    std::cout << "bitflip probe: " << shape_curve.size() << " points per curve\n";
    return 0;
  }

  if (kind == "morph" || kind == "color-step" || kind == "filters") {
    if (checkpoint.model_kind != "cnn") {
      throw ConfigError("probe " + kind + ": needs a cnn checkpoint, got " +
                        checkpoint.model_kind);
    }
    const Cnn model = cnn_from_checkpoint(checkpoint);

    if (kind == "filters") {
      const std::vector<FilterVisualization> filters = export_filters(model);
      std::vector<std::vector<std::string>> rows;
      std::vector<double> differences;
      for (const FilterVisualization& filter : filters) {
        Tensor image = Tensor::zeros({3, filter.extent, filter.extent});
        for (int c = 0; c < 3; ++c) {
          for (int i = 0; i < filter.extent * filter.extent; ++i) {
            image[c * filter.extent * filter.extent + i] =
                filter.channels[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
          }
        }
        char name[32];
        std::snprintf(name, sizeof name, "filter_%02d.ppm", filter.filter_index);
        write_ppm(out + "/" + name, image);
        const double difference = cross_channel_difference(filter);
        differences.push_back(difference);
        rows.push_back({std::to_string(filter.filter_index), format_double(difference)});
      }
      write_csv(out + "/cross_channel.csv", {"filter", "difference"}, rows);
      std::cout << "filters probe: " << filters.size()
                << " filters, mean cross-channel difference " << format_double(mean(differences))
                << "\n";
      return 0;
    }

    const int resolution = cfg.get_int("resolution");
    if (resolution != model.spec().resolution) {
      throw ConfigError("probe: config resolution " + std::to_string(resolution) +
                        " does not match checkpoint resolution " +
                        std::to_string(model.spec().resolution));
    }
    const ImageStimulusSet set =
        gen_image_dataset(n, k, data_rng, resolution, dataset_options(cfg));
    if (object_index < 0 || object_index >= static_cast<int>(set.items.size())) {
      throw ArgumentError("probe: object index " + std::to_string(object_index) +
                          " out of range");
    }
    const ImageObject& item = set.items[static_cast<std::size_t>(object_index)];
    const PolygonSpec& polygon = set.shape_pool[static_cast<std::size_t>(item.shape_id)];
    const Rgb& color = set.color_pool[static_cast<std::size_t>(item.color_id)];
    const Tensor texture_field = gen_texture(item.texture_id, resolution, Rng(set.texture_seed));

    if (kind == "morph") {
      Rng morph_rng = probe_base.derive(kProbeMorph);
      const std::vector<MorphPoint> points = shape_morph_sensitivity(
          model, polygon, color, texture_field, item.offset, cfg.get_int("candidates"),
          morph_rng);
      write_csv(out + "/morph.csv", {"distance", "similarity"}, morph_rows(points));
      CurvePlotOptions options;
      options.title = "Similarity under shape morphing";
      options.x_label = "boundary distance (MHD)";
      options.y_label = "fc similarity";
      write_text_file(out + "/morph.svg",
                      svg_curve_plot({morph_series("shape morph", points)}, options));
      const double rho = [&] {
        std::vector<double> d, s;
        for (const MorphPoint& point : points) {
          d.push_back(point.distance);
          s.push_back(point.similarity);
        }
        return spearman_rho(d, s);
      }();
      std::cout << "morph probe: " << points.size() << " points, spearman rho "
                << format_double(rho) << "\n";
    } else {
      Rng step_rng = probe_base.derive(kProbeSteps);
      const std::vector<MorphPoint> points = color_step_sensitivity(
          model, polygon, color, texture_field, item.offset, cfg.get_int("steps"), step_rng);
      write_csv(out + "/color_step.csv", {"distance", "similarity"}, morph_rows(points));
      CurvePlotOptions options;
      options.title = "Similarity under color steps";
      options.x_label = "RGB cosine distance";
      options.y_label = "fc similarity";
      write_text_file(out + "/color_step.svg",
                      svg_curve_plot({morph_series("color step", points)}, options));
      std::cout << "color-step probe: " << points.size() << " points\n";
    }
    return 0;
  }

  throw ConfigError("probe: kind must be bitflip, morph, color-step or filters, got '" + kind +
                    "'");
}

// ---------------------------------------------------------------------------
// report: refresh plots and summaries from a results directory.
// ---------------------------------------------------------------------------

int report_sweep(const std::string& in, const std::string& out, double threshold, double margin) {
  const std::map<std::string, std::string> echo =
      parse_config_file(in + "/config_echo.sweep.txt");
  RunConfig cfg;
  for (const auto& [key, value] : echo) cfg.set(key, value);

  SweepGrid grid;
  grid.config = sweep_config_from(cfg);

  const std::vector<std::vector<std::string>> records = read_csv(in + "/sweep.csv");
  if (records.empty() || records[0] != kSweepCsvHeader) {
    throw IoError(in + "/sweep.csv: missing or unrecognized header");
  }
  for (std::size_t i = 1; i < records.size(); ++i) {
    const std::vector<std::string>& row = records[i];
    if (row.size() != kSweepCsvHeader.size()) {
      throw IoError(in + "/sweep.csv: malformed row " + std::to_string(i));
    }
    SweepRun run;
    run.n = std::stoi(row[2]);
    run.k = std::stoi(row[3]);
    run.seed = std::stoi(row[4]);
    run.order = std::stoi(row[5]);
    run.accuracy = std::strtod(row[6].c_str(), nullptr);
    run.shape_share = std::strtod(row[7].c_str(), nullptr);
    run.color_share = std::strtod(row[8].c_str(), nullptr);
    run.texture_share = std::strtod(row[9].c_str(), nullptr);
    grid.runs.push_back(run);
  }

  for (int n : grid.config.n_values) {
    for (int k : grid.config.k_values) {
      SweepCell cell;
      cell.n = n;
      cell.k = k;
      std::vector<double> order1, order2;
      for (const SweepRun& run : grid.runs) {
        if (run.n != n || run.k != k) continue;
        (run.order == 1 ? order1 : order2).push_back(run.accuracy);
      }
      cell.feasible = !order2.empty();
      if (cell.feasible) {
        cell.order1_mean = mean(order1);
        cell.order1_stddev = stddev(order1);
        cell.order2_mean = mean(order2);
        cell.order2_stddev = stddev(order2);
      }
      grid.cells.push_back(cell);
    }
  }

  write_sweep_artifacts(grid, out, threshold, margin);
  std::cout << sweep_summary(grid, threshold, margin);
  return 0;
}

int report_vocab(const std::string& in, const std::string& out) {
  const std::map<std::string, std::string> echo =
      parse_config_file(in + "/config_echo.vocab-accel.txt");
  const int n_shapes = std::stoi(echo.count("n-shapes") ? echo.at("n-shapes") : "36");

  const std::vector<std::vector<std::string>> records_csv = read_csv(in + "/vocab.csv");
  if (records_csv.empty() || records_csv[0] != kVocabCsvHeader) {
    throw IoError(in + "/vocab.csv: missing or unrecognized header");
  }
  std::map<int, VocabRecord> by_network;
  for (std::size_t i = 1; i < records_csv.size(); ++i) {
    const std::vector<std::string>& row = records_csv[i];
    if (row.size() != kVocabCsvHeader.size()) {
      throw IoError(in + "/vocab.csv: malformed row " + std::to_string(i));
    }
    const int network = std::stoi(row[0]);
    VocabRecord& record = by_network[network];
    record.network = network;
    VocabSession session;
    session.session = std::stoi(row[1]);
    session.epoch = std::stoi(row[2]);
    session.cum_count_nouns = std::stoi(row[3]);
    session.cum_shape_choices = std::stoi(row[4]);
    record.sessions.push_back(session);
  }
  std::vector<VocabRecord> records;
  for (auto& [network, record] : by_network) records.push_back(std::move(record));

  const Metric1Report metric1 = metric1_within(records);
  const Metric2Report metric2 = metric2_across(records);
  write_vocab_artifacts(records, out, metric1, metric2, n_shapes);
  std::cout << vocab_summary(records, metric1, metric2, n_shapes);
  return 0;
}

int cmd_report(const RunConfig& cfg) {
  const std::string in = cfg.get_string("in");
  if (in.empty()) throw ConfigError("report: --in is required");
  std::string out = cfg.get_string("out");
  if (out.empty()) out = in;
  ensure_dir(out);

  if (fs::exists(in + "/config_echo.sweep.txt")) {
    return report_sweep(in, out, cfg.get_double("threshold"), cfg.get_double("margin"));
  }
  if (fs::exists(in + "/config_echo.vocab-accel.txt")) {
    return report_vocab(in, out);
  }
  throw ConfigError("report: " + in + " holds neither sweep nor vocab-accel results");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shapelab: a laboratory for learned inductive bias in small networks"};
  app.require_subcommand(1);

  const std::vector<OptSpec> dataset_opts{
      {"n", "4", "categories"},
      {"k", "3", "examples per category"},
      {"seed", "0", "master seed"},
      {"resolution", "64", "image side length (image datasets)"},
      {"label-attribute", "shape", "attribute aligned with labels (shape|color)"},
      {"allow-repeats", "false", "permit repeated attribute pairs within a category"},
      {"out", "results", "output directory"},
  };

  std::vector<OptSpec> gen_opts = dataset_opts;
  gen_opts.push_back({"kind", "bits", "dataset family (bits|images|vocab-images)"});
  gen_opts.push_back({"holdout", "20", "novel attributes per holdout pool"});
  gen_opts.push_back({"n-colors", "12", "color categories (vocab-images)"});
  gen_opts.push_back({"n-textures", "12", "texture categories (vocab-images)"});

  std::vector<OptSpec> train_opts = dataset_opts;
  train_opts.push_back({"model", "mlp", "model family (mlp|cnn)"});
  train_opts.push_back({"epochs", "0", "training epochs (0 = model default)"});
  train_opts.push_back({"learning-rate", "0.001", "optimizer learning rate"});
  train_opts.push_back({"l2", "0.001", "L2 penalty coefficient"});
  train_opts.push_back({"hidden", "30", "mlp hidden units"});
  train_opts.push_back({"trials", "1000", "generalization trials per order"});

  std::vector<OptSpec> eval_opts = train_opts;
  eval_opts.push_back({"checkpoint", "", "checkpoint file to evaluate"});
  eval_opts.push_back({"order", "both", "generalization order (1|2|both)"});

  std::vector<OptSpec> sweep_opts{
      {"model", "mlp", "model family (mlp|cnn)"},
      {"label-attribute", "shape", "attribute aligned with labels (shape|color)"},
      {"n-values", "2,4,8,16", "category counts"},
      {"k-values", "1,3,6", "example counts"},
      {"seeds", "10", "training runs per cell"},
      {"trials", "1000", "generalization trials per order"},
      {"epochs", "0", "training epochs (0 = model default)"},
      {"resolution", "64", "image side length (cnn sweeps)"},
      {"seed", "0", "master seed"},
      {"workers", "0", "worker threads (0 = hardware parallelism)"},
      {"learning-rate", "0.001", "optimizer learning rate"},
      {"l2", "0.001", "L2 penalty coefficient"},
      {"threshold", "0.7", "bias-onset accuracy threshold"},
      {"margin", "0.05", "two-phase check margin"},
      {"allow-repeats", "false", "permit repeated attribute pairs within a category"},
      {"out", "results", "output directory"},
  };

  const std::vector<OptSpec> vocab_opts{
      {"networks", "20", "independent networks"},
      {"seed", "0", "master seed"},
      {"workers", "0", "worker threads (0 = hardware parallelism)"},
      {"resolution", "64", "image side length"},
      {"epochs", "30", "training epochs"},
      {"session-stride", "3", "epochs between sessions"},
      {"trials", "500", "order-2 trials per session"},
      {"n-shapes", "36", "shape categories"},
      {"n-colors", "12", "color categories"},
      {"n-textures", "12", "texture categories"},
      {"examples", "10", "examples per shape"},
      {"accuracy-threshold", "0.8", "per-class accuracy bar for the vocabulary"},
      {"redraw-trials", "true", "draw a fresh trial set each session"},
      {"learning-rate", "0.001", "optimizer learning rate"},
      {"l2", "0.001", "L2 penalty coefficient"},
      {"out", "results", "output directory"},
  };

  // Superset of the train options so a train run's config echo loads as-is.
  std::vector<OptSpec> probe_opts = train_opts;
  probe_opts.push_back({"kind", "bitflip", "probe family (bitflip|morph|color-step|filters)"});
  probe_opts.push_back({"checkpoint", "", "checkpoint file to probe"});
  probe_opts.push_back({"object", "0", "probed item index"});
  probe_opts.push_back({"max-flips", "20", "bitflip curve extent"});
  probe_opts.push_back({"repeats", "200", "flip sets per count"});
  probe_opts.push_back({"candidates", "40", "morph candidate shapes"});
  probe_opts.push_back({"steps", "30", "color step candidates"});

  const std::vector<OptSpec> report_opts{
      {"in", "", "results directory to summarize"},
      {"out", "", "plot output directory (default: the input directory)"},
      {"threshold", "0.7", "bias-onset accuracy threshold"},
      {"margin", "0.05", "two-phase check margin"},
  };

  const Command gen = add_command(app, "gen-data", "generate a stimulus dataset", gen_opts);
  const Command train_cmd = add_command(app, "train", "train one model", train_opts);
  const Command eval_cmd = add_command(app, "eval", "evaluate a checkpoint", eval_opts);
  const Command sweep = add_command(app, "sweep", "run an (N, K) generalization grid",
                                    sweep_opts);
  const Command vocab = add_command(app, "vocab-accel", "run the vocabulary protocol",
                                    vocab_opts);
  const Command probe = add_command(app, "probe", "run sensitivity probes on a checkpoint",
                                    probe_opts);
  const Command report = add_command(app, "report", "rebuild plots and summaries", report_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen.app->parsed()) return cmd_gen_data(resolve_config(gen));
    if (train_cmd.app->parsed()) return cmd_train(resolve_config(train_cmd));
    if (eval_cmd.app->parsed()) return cmd_eval(resolve_config(eval_cmd));
    if (sweep.app->parsed()) return cmd_sweep(resolve_config(sweep));
    if (vocab.app->parsed()) return cmd_vocab(resolve_config(vocab));
    if (probe.app->parsed()) return cmd_probe(resolve_config(probe));
    if (report.app->parsed()) return cmd_report(resolve_config(report));
  } catch (const InfeasibleError& e) {
    std::cerr << "error (infeasible): " << e.what() << "\n";
    return 3;
  } catch (const DivergenceError& e) {
    std::cerr << "error (divergence): " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return 5;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
