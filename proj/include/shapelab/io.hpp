#pragma once

#include <string>
#include <vector>

#include "shapelab/experiments.hpp"
#include "shapelab/probes.hpp"
#include "shapelab/tensor.hpp"

namespace shapelab {

// Shortest decimal form that round-trips the exact double. Deterministic,
// locale-free; the backbone of byte-identical result files.
std::string format_double(double v);

// RFC-4180 style quoting: fields containing commas, quotes or newlines
// are wrapped in double quotes with inner quotes doubled.
std::string csv_escape(const std::string& field);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// UTF-8 CSV with a header row and fixed column order.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
// Minimal reader for the files this library writes (quoted fields
// supported); returns all records including the header row.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

// Binary P6 image from the first three channels of a [C x H x W] tensor
// (values clamped to [0, 1], quantized to 8 bits).
void write_ppm(const std::string& path, const Tensor& image);
// Binary P5 grayscale from one channel of a [C x H x W] tensor.
void write_pgm(const std::string& path, const Tensor& image, int channel);

// ---------------------------------------------------------------------------
// Hand-rolled SVG 1.1 plots. Pure functions of their inputs with
// deterministic number formatting, so re-running a command reproduces
// each file byte for byte.
// ---------------------------------------------------------------------------

// Accuracy heatmap over the (N, K) grid for one test order, Fig-style:
// one rect per cell colored by a documented monotone map (dark blue at
// 0 to warm yellow at 1), infeasible cells blacked out, cell values
// printed, and marching-squares iso-lines at the given levels drawn
// over the feasible region.
struct HeatmapOptions {
  std::string title;
  std::vector<double> contour_levels{0.5, 0.6, 0.7, 0.8, 0.9};
};
std::string svg_sweep_heatmap(const SweepGrid& grid, int order, HeatmapOptions options = {});

// Polyline chart for learning or sensitivity curves.
struct CurveSeries {
  std::string label;
  std::vector<double> x, y;
};
struct CurvePlotOptions {
  std::string title, x_label, y_label;
};
std::string svg_curve_plot(const std::vector<CurveSeries>& series, CurvePlotOptions options = {});

// Fixed column orders for the result CSVs.
std::vector<std::vector<std::string>> sweep_csv_rows(const SweepGrid& grid);
extern const std::vector<std::string> kSweepCsvHeader;    // model,label_attribute,N,K,seed,order,accuracy,shape_share,color_share,texture_share
extern const std::vector<std::string> kVocabCsvHeader;    // network,session,epoch,cum_count_nouns,cum_shape_choices
std::vector<std::vector<std::string>> vocab_csv_rows(const std::vector<VocabRecord>& records);
extern const std::vector<std::string> kCurveCsvHeader;    // x,mean,stddev,n
std::vector<std::vector<std::string>> curve_csv_rows(const std::vector<CurvePoint>& curve);

}  // namespace shapelab
