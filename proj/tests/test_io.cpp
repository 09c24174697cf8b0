#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "doctest.h"
#include "shapelab/errors.hpp"
#include "shapelab/io.hpp"

using namespace shapelab;

namespace {

std::string temp_path(const std::string& name) {
  return "io_test_" + name;
}

SweepGrid synthetic_grid() {
  SweepGrid grid;
  grid.config.n_values = {2, 4};
  grid.config.k_values = {1, 3};
  const double means[2][2] = {{0.0, 1.0}, {0.0, 1.0}};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      SweepCell cell;
      cell.n = grid.config.n_values[static_cast<std::size_t>(i)];
      cell.k = grid.config.k_values[static_cast<std::size_t>(j)];
      cell.order1_mean = means[i][j];
      cell.order2_mean = means[i][j];
      grid.cells.push_back(cell);
    }
  }
  return grid;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.1, 1.0 / 3.0, 1e300, -2.5e-8, 0.0, 123456.0, -7.25, 0.8315218406202999}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
    CHECK(format_double(v) == s);  // deterministic
  }
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5) == "-2.5");
}

TEST_CASE("csv escaping and round-trip") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");

  const std::string path = temp_path("round.csv");
  const std::vector<std::string> header{"name", "value"};
  const std::vector<std::vector<std::string>> rows{{"plain", "1"},
                                                   {"a,b", "2"},
                                                   {"say \"hi\"", "3"},
                                                   {"two\nlines", "4"}};
  write_csv(path, header, rows);
  const auto records = read_csv(path);
  REQUIRE(records.size() == 5);
  CHECK(records[0] == header);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(records[i + 1] == rows[i]);

  CHECK_THROWS_AS(write_csv(path, header, {{"only-one-field"}}), ArgumentError);
  CHECK_THROWS_AS(read_csv("does_not_exist.csv"), IoError);
  std::remove(path.c_str());
}

TEST_CASE("ppm and pgm emit exact binary payloads") {
  // [4 x 1 x 2]: R = {0, 2 (clamped)}, G = {0.5, -1 (clamped)}, B = {1, 0}, tex = {0.25, 0.75}
  Tensor image = Tensor::from({4, 1, 2}, {0.0, 2.0, 0.5, -1.0, 1.0, 0.0, 0.25, 0.75});

  const std::string ppm_path = temp_path("img.ppm");
  write_ppm(ppm_path, image);
  const std::string ppm = read_text_file(ppm_path);
  const std::string expected_header = "P6\n2 1\n255\n";
  REQUIRE(ppm.size() == expected_header.size() + 6);
  CHECK(ppm.substr(0, expected_header.size()) == expected_header);
  const unsigned char* px = reinterpret_cast<const unsigned char*>(ppm.data() +
                                                                   expected_header.size());
  CHECK(px[0] == 0);    // R(0,0) = 0
  CHECK(px[1] == 128);  // G(0,0) = 0.5 -> round(127.5)
  CHECK(px[2] == 255);  // B(0,0) = 1
  CHECK(px[3] == 255);  // R(0,1) clamped above
  CHECK(px[4] == 0);    // G(0,1) clamped below
  CHECK(px[5] == 0);    // B(0,1) = 0

  const std::string pgm_path = temp_path("img.pgm");
  write_pgm(pgm_path, image, 3);
  const std::string pgm = read_text_file(pgm_path);
  const std::string pgm_header = "P5\n2 1\n255\n";
  REQUIRE(pgm.size() == pgm_header.size() + 2);
  const unsigned char* gx = reinterpret_cast<const unsigned char*>(pgm.data() +
                                                                   pgm_header.size());
  CHECK(gx[0] == 64);   // 0.25 -> round(63.75)
  CHECK(gx[1] == 191);  // 0.75 -> round(191.25)

  CHECK_THROWS_AS(write_ppm(ppm_path, Tensor::zeros({2, 4, 4})), DimensionError);
  CHECK_THROWS_AS(write_pgm(pgm_path, image, 4), IndexError);
  CHECK_THROWS_AS(write_pgm(pgm_path, Tensor::zeros({16}), 0), DimensionError);
  std::remove(ppm_path.c_str());
  std::remove(pgm_path.c_str());
}

TEST_CASE("sweep heatmap svg: cells, N/A, contour placement, determinism") {
  SweepGrid grid = synthetic_grid();
  const std::string svg = svg_sweep_heatmap(grid, 2);

  CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\"") != std::string::npos);
  CHECK(svg.find("N=2") != std::string::npos);
  CHECK(svg.find("N=4") != std::string::npos);
  CHECK(svg.find("K=1") != std::string::npos);
  CHECK(svg.find("K=3") != std::string::npos);
  // Left column at 0 renders the dark end of the map, right column the light end.
  CHECK(svg.find("#0d2154") != std::string::npos);
  CHECK(svg.find("#f7f06a") != std::string::npos);
  // The 0.5 iso-line crosses the column midpoint: a vertical segment from
  // the first row of centers to the second.
  CHECK(svg.find("M 154 92 L 154 156") != std::string::npos);

  CHECK(svg_sweep_heatmap(grid, 2) == svg);  // byte-identical rerun
  CHECK_THROWS_AS(svg_sweep_heatmap(grid, 3), ArgumentError);

  SUBCASE("infeasible cells are blacked out and break contours") {
    grid.cells[0].feasible = false;
    const std::string flagged = svg_sweep_heatmap(grid, 2);
    CHECK(flagged.find("#000000") != std::string::npos);
    CHECK(flagged.find(">N/A</text>") != std::string::npos);
    // Any square touching the N/A cell is skipped, so no contour remains.
    CHECK(flagged.find("#d62828") == std::string::npos);
  }
}

TEST_CASE("curve plot svg: polylines, labels, determinism") {
  CurveSeries a{"first & best", {0, 1, 2, 3}, {0.0, 0.5, 0.25, 1.0}};
  CurveSeries b{"second", {0, 1, 2, 3}, {1.0, 0.75, 0.5, 0.0}};
  CurvePlotOptions options;
  options.title = "sensitivity";
  options.x_label = "flips";
  options.y_label = "similarity";
  const std::string svg = svg_curve_plot({a, b}, options);

  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("first &amp; best") != std::string::npos);
  CHECK(svg.find("second") != std::string::npos);
  CHECK(svg.find("sensitivity") != std::string::npos);
  CHECK(svg_curve_plot({a, b}, options) == svg);

  CurveSeries bad{"bad", {0, 1}, {0.0}};
  CHECK_THROWS_AS(svg_curve_plot({bad}), DimensionError);
}

TEST_CASE("result csv row builders use the fixed schemas") {
  SweepGrid grid = synthetic_grid();
  SweepRun run;
  run.n = 2;
  run.k = 3;
  run.seed = 1;
  run.order = 2;
  run.accuracy = 0.75;
  run.shape_share = 0.75;
  run.color_share = 0.15;
  run.texture_share = 0.1;
  grid.runs.push_back(run);

  REQUIRE(kSweepCsvHeader.size() == 10);
  const auto rows = sweep_csv_rows(grid);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == std::vector<std::string>{"mlp", "shape", "2", "3", "1", "2", "0.75", "0.75",
                                            "0.15", "0.1"});

  VocabRecord record;
  record.network = 4;
  VocabSession s;
  s.session = 0;
  s.epoch = 2;
  s.cum_count_nouns = 7;
  s.cum_shape_choices = 311;
  record.sessions.push_back(s);
  const auto vrows = vocab_csv_rows({record});
  REQUIRE(vrows.size() == 1);
  CHECK(vrows[0] == std::vector<std::string>{"4", "0", "2", "7", "311"});

  CurvePoint p;
  p.x = 3;
  p.mean = 0.5;
  p.stddev = 0.125;
  p.n = 20;
  const auto crows = curve_csv_rows({p});
  REQUIRE(crows.size() == 1);
  CHECK(crows[0] == std::vector<std::string>{"3", "0.5", "0.125", "20"});
}
