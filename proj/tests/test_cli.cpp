// End-to-end tests driving the command-line binary.
//
// SHAPELAB_CLI_PATH is injected by the build so the tests exercise the
// exact executable a user runs: exit codes, artifact layout, and
// byte-level determinism of reruns.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "shapelab/io.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch_root() {
  static const fs::path root = fs::temp_directory_path() / "shapelab_cli_tests";
  return root;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = scratch_root() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string command =
      std::string(SHAPELAB_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

int run_cli(const std::string& args) { return run_cli(args, scratch_root() / "log.txt"); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::size_t csv_records(const fs::path& path) {
  return shapelab::read_csv(path.string()).size();
}

}  // namespace

TEST_CASE("cli gen-data writes a deterministic bit manifest") {
  const fs::path a = fresh_dir("gen_bits_a"), b = fresh_dir("gen_bits_b");
  const std::string args = "gen-data --kind bits --n 4 --k 3 --seed 7 --out ";
  CHECK(run_cli(args + a.string()) == 0);
  CHECK(run_cli(args + b.string()) == 0);

  // 4 categories x 3 examples = 12 items plus the header row.
  CHECK(csv_records(a / "manifest.csv") == 13);
  CHECK(slurp(a / "manifest.csv") == slurp(b / "manifest.csv"));

  const std::string echo = slurp(a / "config_echo.gen-data.txt");
  CHECK(echo.find("command = gen-data") != std::string::npos);
  CHECK(echo.find("n = 4") != std::string::npos);
  CHECK(echo.find("seed = 7") != std::string::npos);

  const auto rows = shapelab::read_csv((a / "manifest.csv").string());
  REQUIRE(rows.size() == 13);
  CHECK(rows[0][0] == "index");
  CHECK(rows[1].size() == 8);
  CHECK(rows[1][5].size() == 20);  // 20-bit attribute string
}

TEST_CASE("cli gen-data writes images with previews") {
  const fs::path dir = fresh_dir("gen_images");
  CHECK(run_cli("gen-data --kind images --n 2 --k 2 --resolution 32 --seed 3 --out " +
                dir.string()) == 0);
  CHECK(csv_records(dir / "manifest.csv") == 5);
  CHECK(slurp(dir / "item_0000.ppm").rfind("P6\n32 32\n255\n", 0) == 0);
  CHECK(slurp(dir / "item_0003_texture.pgm").rfind("P5\n32 32\n255\n", 0) == 0);
}

TEST_CASE("cli train then eval reproduces the report exactly") {
  const fs::path t1 = fresh_dir("train_mlp");
  CHECK(run_cli("train --model mlp --n 3 --k 3 --seed 5 --epochs 40 --trials 60 --out " +
                t1.string()) == 0);
  CHECK(fs::exists(t1 / "checkpoint.ckpt"));
  CHECK(csv_records(t1 / "trace.csv") == 41);   // header + one row per epoch
  CHECK(csv_records(t1 / "report.csv") == 3);   // header + both orders

  const fs::path e1 = fresh_dir("eval_mlp");
  CHECK(run_cli("eval --config " + (t1 / "config_echo.train.txt").string() + " --checkpoint " +
                (t1 / "checkpoint.ckpt").string() + " --order both --out " + e1.string()) == 0);
  CHECK(slurp(e1 / "report.csv") == slurp(t1 / "report.csv"));

  // Asking for one order yields exactly that slice of the training report.
  const fs::path e2 = fresh_dir("eval_mlp_order2");
  CHECK(run_cli("eval --config " + (t1 / "config_echo.train.txt").string() + " --checkpoint " +
                (t1 / "checkpoint.ckpt").string() + " --order 2 --out " + e2.string()) == 0);
  const auto full = shapelab::read_csv((t1 / "report.csv").string());
  const auto part = shapelab::read_csv((e2 / "report.csv").string());
  REQUIRE(part.size() == 2);
  CHECK(part[0] == full[0]);
  CHECK(part[1] == full[2]);
}

TEST_CASE("cli exit codes distinguish failure families") {
  const fs::path dir = fresh_dir("exit_codes");
  const fs::path log = dir / "log.txt";

  SUBCASE("infeasible dataset request exits 3") {
    CHECK(run_cli("gen-data --kind bits --n 2 --k 6 --out " + (dir / "o").string(), log) == 3);
    const std::string text = slurp(log);
    CHECK(text.find("infeasible") != std::string::npos);
  }

  SUBCASE("training divergence exits 4 and preserves the partial trace") {
    const fs::path out = dir / "diverged";
    CHECK(run_cli("train --model mlp --n 2 --k 2 --epochs 5 --learning-rate 1e300 --out " +
                  out.string(), log) == 4);
    CHECK(fs::exists(out / "trace.csv"));
    CHECK(fs::exists(out / "config_echo.train.txt"));
    CHECK(!fs::exists(out / "checkpoint.ckpt"));
  }

  SUBCASE("missing checkpoint exits 5") {
    CHECK(run_cli("eval --checkpoint " + (dir / "absent.ckpt").string() + " --out " +
                  (dir / "o").string(), log) == 5);
  }

  SUBCASE("missing config file exits 5") {
    CHECK(run_cli("train --config " + (dir / "absent.cfg").string(), log) == 5);
  }

  SUBCASE("unknown config key exits 2") {
    const fs::path cfg = dir / "bad.cfg";
    std::ofstream(cfg) << "bogus = 1\n";
    CHECK(run_cli("train --config " + cfg.string(), log) == 2);
    CHECK(slurp(log).find("bogus") != std::string::npos);
  }

  SUBCASE("bad option value exits 2") {
    CHECK(run_cli("train --model frobnicate --out " + (dir / "o").string(), log) == 2);
    CHECK(run_cli("gen-data --n nope --out " + (dir / "o").string(), log) == 2);
  }

  SUBCASE("unknown flag and missing subcommand exit 2, help exits 0") {
    CHECK(run_cli("train --nope", log) == 2);
    CHECK(run_cli("", log) == 2);
    CHECK(run_cli("--help", log) == 0);
    CHECK(slurp(log).find("gen-data") != std::string::npos);
  }
}

TEST_CASE("cli sweep logs every run and reruns byte-identically") {
  const fs::path s1 = fresh_dir("sweep_a"), s2 = fresh_dir("sweep_b");
  const std::string base =
      "sweep --model mlp --n-values 2,3 --k-values 1,4 --seeds 2 --trials 30 --epochs 25 "
      "--seed 11 ";
  CHECK(run_cli(base + "--workers 2 --out " + s1.string()) == 0);
  CHECK(run_cli(base + "--workers 1 --out " + s2.string()) == 0);

  // 2x2 grid, all feasible, 2 seeds: 8 training runs, each scored at both orders.
  const auto rows = shapelab::read_csv((s1 / "sweep.csv").string());
  REQUIRE(rows.size() == 17);
  std::vector<std::string> triples;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    triples.push_back(rows[i][2] + "/" + rows[i][3] + "/" + rows[i][4]);
  }
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  CHECK(triples.size() == 8);

  CHECK(csv_records(s1 / "cells.csv") == 5);
  CHECK(slurp(s1 / "heatmap_order2.svg").rfind("<svg", 0) == 0);

  // Worker count must not leak into any artifact byte.
  CHECK(slurp(s1 / "sweep.csv") == slurp(s2 / "sweep.csv"));
  CHECK(slurp(s1 / "cells.csv") == slurp(s2 / "cells.csv"));
  CHECK(slurp(s1 / "heatmap_order1.svg") == slurp(s2 / "heatmap_order1.svg"));
  CHECK(slurp(s1 / "heatmap_order2.svg") == slurp(s2 / "heatmap_order2.svg"));
  CHECK(slurp(s1 / "summary.txt") == slurp(s2 / "summary.txt"));

  SUBCASE("report rebuilds identical summaries from the artifacts") {
    const fs::path r1 = fresh_dir("sweep_report");
    CHECK(run_cli("report --in " + s1.string() + " --out " + r1.string()) == 0);
    CHECK(slurp(r1 / "summary.txt") == slurp(s1 / "summary.txt"));
    CHECK(slurp(r1 / "heatmap_order2.svg") == slurp(s1 / "heatmap_order2.svg"));
    CHECK(slurp(r1 / "onset.csv") == slurp(s1 / "onset.csv"));
  }

  SUBCASE("infeasible cells are reported, not silently dropped") {
    const fs::path s3 = fresh_dir("sweep_gaps");
    CHECK(run_cli("sweep --model mlp --n-values 2 --k-values 2,6 --seeds 1 --trials 20 "
                  "--epochs 10 --out " + s3.string()) == 0);
    CHECK(slurp(s3 / "summary.txt").find("feasible cells: 1/2") != std::string::npos);
    const auto cells = shapelab::read_csv((s3 / "cells.csv").string());
    REQUIRE(cells.size() == 3);
    CHECK(cells[2][2] == "0");  // K=6 > N^2
  }
}

TEST_CASE("cli vocab-accel emits per-session records and correlations") {
  const fs::path v1 = fresh_dir("vocab_a");
  const std::string base =
      "vocab-accel --networks 3 --n-shapes 3 --n-colors 3 --n-textures 3 --examples 3 "
      "--epochs 10 --session-stride 2 --trials 30 --resolution 32 --seed 2 ";
  CHECK(run_cli(base + "--workers 2 --out " + v1.string()) == 0);

  // 3 networks x 5 sessions plus the header row.
  CHECK(csv_records(v1 / "vocab.csv") == 16);
  const auto correlations = shapelab::read_csv((v1 / "correlations.csv").string());
  REQUIRE(correlations.size() >= 3);
  CHECK(correlations[0][0] == "metric");
  CHECK(correlations[correlations.size() - 2][0] == "within_mean");
  CHECK(correlations.back()[0] == "across");
  CHECK(slurp(v1 / "vocab_nouns.svg").rfind("<svg", 0) == 0);
  CHECK(slurp(v1 / "summary.txt").find("metric 2") != std::string::npos);

  SUBCASE("worker count does not change any byte") {
    const fs::path v2 = fresh_dir("vocab_b");
    CHECK(run_cli(base + "--workers 1 --out " + v2.string()) == 0);
    CHECK(slurp(v1 / "vocab.csv") == slurp(v2 / "vocab.csv"));
    CHECK(slurp(v1 / "correlations.csv") == slurp(v2 / "correlations.csv"));
  }

  SUBCASE("report recomputes the metrics from the CSV alone") {
    const fs::path rv = fresh_dir("vocab_report");
    CHECK(run_cli("report --in " + v1.string() + " --out " + rv.string()) == 0);
    CHECK(slurp(rv / "correlations.csv") == slurp(v1 / "correlations.csv"));
    CHECK(slurp(rv / "summary.txt") == slurp(v1 / "summary.txt"));
  }
}

TEST_CASE("cli probes read a checkpoint and its config echo") {
  const fs::path t1 = fresh_dir("probe_train_mlp");
  REQUIRE(run_cli("train --model mlp --n 3 --k 3 --seed 5 --epochs 30 --trials 40 --out " +
                  t1.string()) == 0);

  SUBCASE("bitflip writes both attribute curves") {
    const fs::path p1 = fresh_dir("probe_bitflip");
    CHECK(run_cli("probe --kind bitflip --config " + (t1 / "config_echo.train.txt").string() +
                  " --checkpoint " + (t1 / "checkpoint.ckpt").string() +
                  " --max-flips 4 --repeats 10 --out " + p1.string()) == 0);
    CHECK(csv_records(p1 / "bitflip_shape.csv") == 6);  // header + flips 0..4
    CHECK(csv_records(p1 / "bitflip_color.csv") == 6);
    CHECK(slurp(p1 / "bitflip.svg").rfind("<svg", 0) == 0);

    // Zero flips is the identity: mean similarity exactly 1.
    const auto rows = shapelab::read_csv((p1 / "bitflip_shape.csv").string());
    CHECK(rows[1][0] == "0");
    CHECK(rows[1][1] == "1");
  }

  SUBCASE("kind and checkpoint model family must agree") {
    const fs::path p = fresh_dir("probe_mismatch");
    CHECK(run_cli("probe --kind morph --config " + (t1 / "config_echo.train.txt").string() +
                  " --checkpoint " + (t1 / "checkpoint.ckpt").string() + " --out " + p.string(),
                  p / "log.txt") == 2);
  }

  SUBCASE("morph, color-step and filters run on a cnn checkpoint") {
    const fs::path tc = fresh_dir("probe_train_cnn");
    REQUIRE(run_cli("train --model cnn --n 2 --k 2 --resolution 32 --epochs 6 --trials 20 "
                    "--seed 9 --out " + tc.string()) == 0);
    const std::string shared = " --config " + (tc / "config_echo.train.txt").string() +
                               " --checkpoint " + (tc / "checkpoint.ckpt").string();

    const fs::path pm = fresh_dir("probe_morph");
    CHECK(run_cli("probe --kind morph" + shared + " --candidates 6 --out " + pm.string()) == 0);
    CHECK(csv_records(pm / "morph.csv") == 8);  // header + exemplar + candidates
    const auto morph = shapelab::read_csv((pm / "morph.csv").string());
    CHECK(morph[1][0] == "0");  // exemplar distance 0
    CHECK(morph[1][1] == "1");  // exemplar similarity 1

    const fs::path pc = fresh_dir("probe_color");
    CHECK(run_cli("probe --kind color-step" + shared + " --steps 5 --out " + pc.string()) == 0);
    CHECK(csv_records(pc / "color_step.csv") == 7);

    const fs::path pf = fresh_dir("probe_filters");
    CHECK(run_cli("probe --kind filters" + shared + " --out " + pf.string()) == 0);
    CHECK(csv_records(pf / "cross_channel.csv") == 6);  // header + 5 feature maps
    CHECK(slurp(pf / "filter_00.ppm").rfind("P6\n5 5\n255\n", 0) == 0);
  }
}
