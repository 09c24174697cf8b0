#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "shapelab/io.hpp"

namespace shapelab {
namespace {

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Monotone two-stop color map: dark blue at 0 through warm yellow at 1.
std::string accuracy_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const std::array<int, 3> lo{13, 33, 84}, hi{247, 240, 106};
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(lo[0] + t * (hi[0] - lo[0]))),
                static_cast<int>(std::lround(lo[1] + t * (hi[1] - lo[1]))),
                static_cast<int>(std::lround(lo[2] + t * (hi[2] - lo[2]))));
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Point {
  double x, y;
};

// Marching squares over the feasible cell-center lattice. Corners at or
// above the level count as inside; the ambiguous saddle cases resolve by
// the center average, and any square touching an infeasible cell is
// skipped so contours stop at N/A gaps.
void contour_segments(const std::vector<std::vector<double>>& values,
                      const std::vector<std::vector<bool>>& feasible, double level,
                      const std::function<Point(double row, double col)>& to_canvas,
                      std::vector<std::array<Point, 2>>& segments) {
  const std::size_t rows = values.size();
  if (rows < 2) return;
  const std::size_t cols = values[0].size();
  for (std::size_t i = 0; i + 1 < rows; ++i) {
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      if (!feasible[i][j] || !feasible[i][j + 1] || !feasible[i + 1][j] ||
          !feasible[i + 1][j + 1]) {
        continue;
      }
      const double a = values[i][j];      // top-left
      const double b = values[i][j + 1];  // top-right
      const double c = values[i + 1][j + 1];  // bottom-right
      const double d = values[i + 1][j];      // bottom-left
      const int index = (a >= level ? 8 : 0) + (b >= level ? 4 : 0) + (c >= level ? 2 : 0) +
                        (d >= level ? 1 : 0);
      if (index == 0 || index == 15) continue;

      const double fi = static_cast<double>(i), fj = static_cast<double>(j);
      const auto lerp = [&](double va, double vb, double ra, double ca, double rb,
                            double cb) -> Point {
        const double t = (level - va) / (vb - va);
        return to_canvas(ra + t * (rb - ra), ca + t * (cb - ca));
      };
      const Point top = lerp(a, b, fi, fj, fi, fj + 1);
      const Point right = lerp(b, c, fi, fj + 1, fi + 1, fj + 1);
      const Point bottom = lerp(d, c, fi + 1, fj, fi + 1, fj + 1);
      const Point left = lerp(a, d, fi, fj, fi + 1, fj);
      const bool center_high = (a + b + c + d) / 4.0 >= level;

      switch (index) {
        case 1: case 14: segments.push_back({left, bottom}); break;
        case 2: case 13: segments.push_back({bottom, right}); break;
        case 3: case 12: segments.push_back({left, right}); break;
        case 4: case 11: segments.push_back({top, right}); break;
        case 6: case 9: segments.push_back({top, bottom}); break;
        case 7: case 8: segments.push_back({left, top}); break;
        case 5:  // B and D inside
          if (center_high) {
            segments.push_back({left, top});
            segments.push_back({bottom, right});
          } else {
            segments.push_back({top, right});
            segments.push_back({left, bottom});
          }
          break;
        case 10:  // A and C inside
          if (center_high) {
            segments.push_back({top, right});
            segments.push_back({left, bottom});
          } else {
            segments.push_back({left, top});
            segments.push_back({bottom, right});
          }
          break;
        default: break;
      }
    }
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, result.ptr);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path + " for writing");
  file.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!file) throw IoError("write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path);
  std::ostringstream out;
  out << file.rdbuf();
  if (file.bad()) throw IoError("read failed for " + path);
  return out.str();
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  const auto append_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(row[i]);
    }
    out += '\n';
  };
  append_row(header);
  for (const std::vector<std::string>& row : rows) {
    if (row.size() != header.size()) {
      throw ArgumentError("csv row width " + std::to_string(row.size()) +
                          " does not match header width " + std::to_string(header.size()));
    }
    append_row(row);
  }
  write_text_file(path, out);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      row.push_back(field);
      field.clear();
    } else if (c == '\n') {
      row.push_back(field);
      field.clear();
      records.push_back(row);
      row.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(field);
    records.push_back(row);
  }
  return records;
}

void write_ppm(const std::string& path, const Tensor& image) {
  if (image.rank() != 3 || image.extent(0) < 3) {
    throw DimensionError("write_ppm: need a [channels x H x W] tensor with >= 3 channels, got " +
                         image.shape_str());
  }
  const int h = image.extent(1), w = image.extent(2);
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(3 * h * w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(image[(c * h + y) * w + x], 0.0, 1.0);
        out += static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
      }
    }
  }
  write_text_file(path, out);
}

void write_pgm(const std::string& path, const Tensor& image, int channel) {
  if (image.rank() != 3) {
    throw DimensionError("write_pgm: need a [channels x H x W] tensor, got " + image.shape_str());
  }
  if (channel < 0 || channel >= image.extent(0)) {
    throw IndexError("write_pgm: channel " + std::to_string(channel) + " out of range for " +
                     image.shape_str());
  }
  const int h = image.extent(1), w = image.extent(2);
  std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(h * w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = std::clamp(image[(channel * h + y) * w + x], 0.0, 1.0);
      out += static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
    }
  }
  write_text_file(path, out);
}

std::string svg_sweep_heatmap(const SweepGrid& grid, int order, HeatmapOptions options) {
  if (order != 1 && order != 2) throw ArgumentError("svg_sweep_heatmap: order must be 1 or 2");
  const std::vector<int>& n_values = grid.config.n_values;
  const std::vector<int>& k_values = grid.config.k_values;
  const std::size_t rows = n_values.size(), cols = k_values.size();
  if (rows == 0 || cols == 0) throw ArgumentError("svg_sweep_heatmap: empty grid");

  const double cell = 64.0, left = 90.0, top = 60.0, bottom = 70.0, right = 40.0;
  const double width = left + cell * static_cast<double>(cols) + right;
  const double height = top + cell * static_cast<double>(rows) + bottom;

  std::vector<std::vector<double>> values(rows, std::vector<double>(cols, 0.0));
  std::vector<std::vector<bool>> feasible(rows, std::vector<bool>(cols, false));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const SweepCell& c = grid.cell(n_values[i], k_values[j]);
      feasible[i][j] = c.feasible;
      values[i][j] = order == 1 ? c.order1_mean : c.order2_mean;
    }
  }

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << format_double(width) << "\" height=\"" << format_double(height) << "\" viewBox=\"0 0 "
      << format_double(width) << " " << format_double(height) << "\">\n";
  svg << "<rect width=\"" << format_double(width) << "\" height=\"" << format_double(height)
      << "\" fill=\"#ffffff\"/>\n";
  const std::string title = options.title.empty()
                                ? ("Order-" + std::to_string(order) + " generalization accuracy")
                                : options.title;
  svg << "<text x=\"" << format_double(width / 2) << "\" y=\"28\" font-family=\"sans-serif\" "
         "font-size=\"16\" text-anchor=\"middle\">"
      << xml_escape(title) << "</text>\n";

  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double x = left + cell * static_cast<double>(j);
      const double y = top + cell * static_cast<double>(i);
      const std::string fill = feasible[i][j] ? accuracy_color(values[i][j]) : "#000000";
      svg << "<rect x=\"" << format_double(x) << "\" y=\"" << format_double(y) << "\" width=\""
          << format_double(cell) << "\" height=\"" << format_double(cell) << "\" fill=\"" << fill
          << "\" stroke=\"#ffffff\" stroke-width=\"1\"/>\n";
      const std::string label = feasible[i][j] ? format_fixed(values[i][j], 2) : "N/A";
      const std::string text_color =
          feasible[i][j] ? (values[i][j] > 0.55 ? "#1a1a1a" : "#ffffff") : "#888888";
      svg << "<text x=\"" << format_double(x + cell / 2) << "\" y=\""
          << format_double(y + cell / 2 + 4) << "\" font-family=\"sans-serif\" font-size=\"12\" "
             "text-anchor=\"middle\" fill=\""
          << text_color << "\">" << label << "</text>\n";
    }
  }

  for (std::size_t i = 0; i < rows; ++i) {
    svg << "<text x=\"" << format_double(left - 10) << "\" y=\""
        << format_double(top + cell * (static_cast<double>(i) + 0.5) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">N="
        << n_values[i] << "</text>\n";
  }
  for (std::size_t j = 0; j < cols; ++j) {
    svg << "<text x=\"" << format_double(left + cell * (static_cast<double>(j) + 0.5)) << "\" y=\""
        << format_double(top + cell * static_cast<double>(rows) + 22)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">K="
        << k_values[j] << "</text>\n";
  }
  svg << "<text x=\"" << format_double(left + cell * static_cast<double>(cols) / 2) << "\" y=\""
      << format_double(height - 18)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">examples per "
         "category (K)</text>\n";
  svg << "<text x=\"22\" y=\"" << format_double(top + cell * static_cast<double>(rows) / 2)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 22 "
      << format_double(top + cell * static_cast<double>(rows) / 2)
      << ")\">categories (N)</text>\n";

  const auto to_canvas = [&](double row, double col) -> Point {
    return {left + cell * (col + 0.5), top + cell * (row + 0.5)};
  };
  for (double level : options.contour_levels) {
    std::vector<std::array<Point, 2>> segments;
    contour_segments(values, feasible, level, to_canvas, segments);
    for (const std::array<Point, 2>& s : segments) {
      svg << "<path d=\"M " << format_double(s[0].x) << " " << format_double(s[0].y) << " L "
          << format_double(s[1].x) << " " << format_double(s[1].y)
          << "\" stroke=\"#d62828\" stroke-width=\"1.5\" fill=\"none\"/>\n";
    }
  }

  svg << "</svg>\n";
  return svg.str();
}

std::string svg_curve_plot(const std::vector<CurveSeries>& series, CurvePlotOptions options) {
  const double width = 560.0, height = 380.0;
  const double left = 70.0, top = 50.0, right = 30.0, bottom = 60.0;
  const double plot_w = width - left - right, plot_h = height - top - bottom;

  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  bool first = true;
  for (const CurveSeries& s : series) {
    if (s.x.size() != s.y.size()) {
      throw DimensionError("svg_curve_plot: series '" + s.label + "' has mismatched x/y lengths");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x_min = x_max = s.x[i];
        y_min = y_max = s.y[i];
        first = false;
      } else {
        x_min = std::min(x_min, s.x[i]);
        x_max = std::max(x_max, s.x[i]);
        y_min = std::min(y_min, s.y[i]);
        y_max = std::max(y_max, s.y[i]);
      }
    }
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;

  const auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  const auto py = [&](double y) { return top + plot_h - (y - y_min) / (y_max - y_min) * plot_h; };

  static const std::array<const char*, 6> palette{"#1d3557", "#e63946", "#2a9d8f",
                                                  "#e9c46a", "#6d597a", "#588157"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << format_double(width) << "\" height=\"" << format_double(height) << "\" viewBox=\"0 0 "
      << format_double(width) << " " << format_double(height) << "\">\n";
  svg << "<rect width=\"" << format_double(width) << "\" height=\"" << format_double(height)
      << "\" fill=\"#ffffff\"/>\n";
  if (!options.title.empty()) {
    svg << "<text x=\"" << format_double(width / 2) << "\" y=\"26\" font-family=\"sans-serif\" "
           "font-size=\"15\" text-anchor=\"middle\">"
        << xml_escape(options.title) << "</text>\n";
  }

  svg << "<path d=\"M " << format_double(left) << " " << format_double(top) << " L "
      << format_double(left) << " " << format_double(top + plot_h) << " L "
      << format_double(left + plot_w) << " " << format_double(top + plot_h)
      << "\" stroke=\"#333333\" stroke-width=\"1\" fill=\"none\"/>\n";

  for (int tick = 0; tick <= 4; ++tick) {
    const double fx = x_min + (x_max - x_min) * tick / 4.0;
    const double fy = y_min + (y_max - y_min) * tick / 4.0;
    svg << "<text x=\"" << format_double(px(fx)) << "\" y=\"" << format_double(top + plot_h + 18)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
        << format_fixed(fx, 2) << "</text>\n";
    svg << "<text x=\"" << format_double(left - 8) << "\" y=\"" << format_double(py(fy) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
        << format_fixed(fy, 2) << "</text>\n";
    svg << "<path d=\"M " << format_double(px(fx)) << " " << format_double(top + plot_h) << " L "
        << format_double(px(fx)) << " " << format_double(top + plot_h + 4)
        << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg << "<path d=\"M " << format_double(left - 4) << " " << format_double(py(fy)) << " L "
        << format_double(left) << " " << format_double(py(fy))
        << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  }

  for (std::size_t s = 0; s < series.size(); ++s) {
    if (series[s].x.empty()) continue;
    const char* color = palette[s % palette.size()];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (i) svg << ' ';
      svg << format_double(px(series[s].x[i])) << ',' << format_double(py(series[s].y[i]));
    }
    svg << "\"/>\n";
    if (!series[s].label.empty()) {
      svg << "<text x=\"" << format_double(left + plot_w - 6) << "\" y=\""
          << format_double(top + 16.0 * static_cast<double>(s + 1))
          << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\" fill=\"" << color
          << "\">" << xml_escape(series[s].label) << "</text>\n";
    }
  }

  if (!options.x_label.empty()) {
    svg << "<text x=\"" << format_double(left + plot_w / 2) << "\" y=\""
        << format_double(height - 16)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
        << xml_escape(options.x_label) << "</text>\n";
  }
  if (!options.y_label.empty()) {
    svg << "<text x=\"20\" y=\"" << format_double(top + plot_h / 2)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 20 "
        << format_double(top + plot_h / 2) << ")\">" << xml_escape(options.y_label)
        << "</text>\n";
  }

  svg << "</svg>\n";
  return svg.str();
}

const std::vector<std::string> kSweepCsvHeader{"model",       "label_attribute", "N",
                                               "K",           "seed",            "order",
                                               "accuracy",    "shape_share",     "color_share",
                                               "texture_share"};

std::vector<std::vector<std::string>> sweep_csv_rows(const SweepGrid& grid) {
  const std::string model = grid.config.model_kind == ModelKind::kMlp ? "mlp" : "cnn";
  const std::string attribute =
      grid.config.label_attribute == LabelAttribute::kShape ? "shape" : "color";
  std::vector<std::vector<std::string>> rows;
  rows.reserve(grid.runs.size());
  for (const SweepRun& run : grid.runs) {
    rows.push_back({model, attribute, std::to_string(run.n), std::to_string(run.k),
                    std::to_string(run.seed), std::to_string(run.order),
                    format_double(run.accuracy), format_double(run.shape_share),
                    format_double(run.color_share), format_double(run.texture_share)});
  }
  return rows;
}

const std::vector<std::string> kVocabCsvHeader{"network", "session", "epoch", "cum_count_nouns",
                                               "cum_shape_choices"};

std::vector<std::vector<std::string>> vocab_csv_rows(const std::vector<VocabRecord>& records) {
  std::vector<std::vector<std::string>> rows;
  for (const VocabRecord& record : records) {
    for (const VocabSession& s : record.sessions) {
      rows.push_back({std::to_string(record.network), std::to_string(s.session),
                      std::to_string(s.epoch), std::to_string(s.cum_count_nouns),
                      std::to_string(s.cum_shape_choices)});
    }
  }
  return rows;
}

const std::vector<std::string> kCurveCsvHeader{"x", "mean", "stddev", "n"};

std::vector<std::vector<std::string>> curve_csv_rows(const std::vector<CurvePoint>& curve) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(curve.size());
  for (const CurvePoint& point : curve) {
    rows.push_back({format_double(point.x), format_double(point.mean),
                    format_double(point.stddev), std::to_string(point.n)});
  }
  return rows;
}

}  // namespace shapelab
