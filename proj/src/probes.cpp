#include <algorithm>
#include <cmath>
#include <limits>

#include "shapelab/errors.hpp"
#include "shapelab/probes.hpp"

namespace shapelab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Cosine with the curve convention: degenerate (zero-norm) pairs score 0.
double curve_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  const double c = cosine_similarity(a, b);
  return std::isnan(c) ? 0.0 : c;
}

}  // namespace

TrialOutcome choose_match(const std::vector<double>& exemplar,
                          const std::vector<double>& shape_match,
                          const std::vector<double>& color_match,
                          const std::vector<double>& texture_match, Rng& tie_rng) {
  TrialOutcome outcome;
  const std::vector<double>* matches[3] = {&shape_match, &color_match, &texture_match};
  for (int i = 0; i < 3; ++i) {
    const double c = cosine_similarity(exemplar, *matches[i]);
    outcome.similarities[static_cast<std::size_t>(i)] = std::isnan(c) ? kNegInf : c;
  }
  double best = kNegInf;
  for (double s : outcome.similarities) best = std::max(best, s);
  std::vector<int> tied;
  for (int i = 0; i < 3; ++i) {
    if (outcome.similarities[static_cast<std::size_t>(i)] == best) tied.push_back(i);
  }
  if (tied.empty()) tied = {0, 1, 2};  // everything -inf: uniform over all three
  outcome.chosen = tied.size() == 1
                       ? tied[0]
                       : tied[static_cast<std::size_t>(
                             tie_rng.uniform_int(0, static_cast<int>(tied.size()) - 1))];
  return outcome;
}

TestReport run_generalization_test(const Mlp& model, const std::vector<BitTrial>& trials,
                                   Rng& tie_rng) {
  std::function<std::vector<double>(const BitObject&)> embed = [&](const BitObject& obj) {
    return model.hidden_activations(bit_features(obj));
  };
  return run_generalization_trials(trials, embed, tie_rng);
}

TestReport run_generalization_test(const Cnn& model, const std::vector<ImageTrial>& trials,
                                   Rng& tie_rng) {
  std::function<std::vector<double>(const ImageObject&)> embed = [&](const ImageObject& obj) {
    return model.hidden_activations(obj.pixels);
  };
  return run_generalization_trials(trials, embed, tie_rng);
}

std::vector<CurvePoint> bitflip_sensitivity(const Mlp& model, const BitObject& object,
                                            LabelAttribute attribute, int max_flips, Rng& rng,
                                            int repeats) {
  if (max_flips < 0 || max_flips > kBitsPerPool) {
    throw ArgumentError("bitflip_sensitivity: flip count must lie in [0, " +
                        std::to_string(kBitsPerPool) + "]");
  }
  if (repeats < 1) throw ArgumentError("bitflip_sensitivity: repeats must be >= 1");
  const int block = attribute == LabelAttribute::kShape ? 0 : kBitsPerPool;
  const Tensor base = bit_features(object);
  const std::vector<double> base_hidden = model.hidden_activations(base);

  std::vector<CurvePoint> curve;
  std::vector<int> bits(static_cast<std::size_t>(kBitsPerPool));
  for (int f = 0; f <= max_flips; ++f) {
    CurvePoint point;
    point.x = f;
    point.n = repeats;
    if (f == 0) {  // identity: no modification to average over
      point.mean = 1.0;
      point.stddev = 0.0;
      curve.push_back(point);
      continue;
    }
    std::vector<double> sims;
    for (int r = 0; r < repeats; ++r) {
      for (int i = 0; i < kBitsPerPool; ++i) bits[static_cast<std::size_t>(i)] = i;
      // Partial Fisher-Yates: the first f entries form the flip set.
      for (int i = 0; i < f; ++i) {
        const int j = static_cast<int>(rng.uniform_int(i, kBitsPerPool - 1));
        std::swap(bits[static_cast<std::size_t>(i)], bits[static_cast<std::size_t>(j)]);
      }
      Tensor modified = base.clone();
      for (int i = 0; i < f; ++i) {
        const int idx = block + bits[static_cast<std::size_t>(i)];
        modified.data()[idx] = 1.0 - modified.data()[idx];
      }
      sims.push_back(curve_similarity(base_hidden, model.hidden_activations(modified)));
    }
    point.mean = mean(sims);
    point.stddev = stddev(sims);
    curve.push_back(point);
  }
  return curve;
}

double modified_hausdorff(const std::vector<std::array<double, 2>>& a,
                          const std::vector<std::array<double, 2>>& b) {
  if (a.empty() || b.empty()) throw ArgumentError("modified_hausdorff: empty point set");
  auto directed = [](const std::vector<std::array<double, 2>>& from,
                     const std::vector<std::array<double, 2>>& to) {
    double total = 0.0;
    for (const auto& p : from) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& q : to) {
        const double dx = p[0] - q[0], dy = p[1] - q[1];
        nearest = std::min(nearest, std::sqrt(dx * dx + dy * dy));
      }
      total += nearest;
    }
    return total / static_cast<double>(from.size());
  };
  return std::max(directed(a, b), directed(b, a));
}

std::vector<std::array<double, 2>> densify_boundary(const PolygonSpec& poly, int count) {
  if (count < 1) throw ArgumentError("densify_boundary: need at least one point");
  const std::size_t n = poly.vertices.size();
  std::vector<double> edge_len(n);
  double perimeter = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = poly.vertices[i];
    const auto& b = poly.vertices[(i + 1) % n];
    edge_len[i] = std::hypot(b[0] - a[0], b[1] - a[1]);
    perimeter += edge_len[i];
  }
  std::vector<std::array<double, 2>> points;
  points.reserve(static_cast<std::size_t>(count));
  std::size_t edge = 0;
  double consumed = 0.0;  // arclength before the current edge
  for (int i = 0; i < count; ++i) {
    const double target = perimeter * i / count;
    while (edge + 1 < n && consumed + edge_len[edge] <= target) {
      consumed += edge_len[edge];
      ++edge;
    }
    const auto& a = poly.vertices[edge];
    const auto& b = poly.vertices[(edge + 1) % n];
    const double t = edge_len[edge] > 0.0 ? (target - consumed) / edge_len[edge] : 0.0;
    points.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
  }
  return points;
}

std::vector<MorphPoint> shape_morph_sensitivity(const Cnn& model, const PolygonSpec& exemplar,
                                                const Rgb& color, const Tensor& texture_field,
                                                const std::array<int, 2>& offset,
                                                int candidate_count, Rng& rng) {
  if (candidate_count < 1) throw ArgumentError("shape_morph_sensitivity: need candidates");
  const int extent = texture_field.extent(0);
  const ImageObject base = rasterize(exemplar, color, texture_field, offset);
  const std::vector<double> base_hidden = model.hidden_activations(base.pixels);
  const auto exemplar_boundary = densify_boundary(exemplar);

  std::vector<MorphPoint> curve;
  curve.push_back({0.0, 1.0});  // self-comparison anchors the curve
  for (int i = 0; i < candidate_count; ++i) {
    const PolygonSpec candidate = sample_polygon(rng, extent);
    MorphPoint point;
    point.distance = modified_hausdorff(exemplar_boundary, densify_boundary(candidate));
    const ImageObject img = rasterize(candidate, color, texture_field, offset);
    point.similarity = curve_similarity(base_hidden, model.hidden_activations(img.pixels));
    curve.push_back(point);
  }
  std::sort(curve.begin(), curve.end(),
            [](const MorphPoint& a, const MorphPoint& b) { return a.distance < b.distance; });
  return curve;
}

double rgb_cosine_distance(const Rgb& a, const Rgb& b) {
  const double dot = a.r * b.r + a.g * b.g + a.b * b.b;
  const double na = a.r * a.r + a.g * a.g + a.b * a.b;
  const double nb = b.r * b.r + b.g * b.g + b.b * b.b;
  if (na == 0.0 && nb == 0.0) return 0.0;
  if (na == 0.0 || nb == 0.0) return 1.0;
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<MorphPoint> color_step_sensitivity(const Cnn& model, const PolygonSpec& shape,
                                               const Rgb& base_color, const Tensor& texture_field,
                                               const std::array<int, 2>& offset, int steps,
                                               Rng& rng) {
  if (steps < 1) throw ArgumentError("color_step_sensitivity: need steps");
  const ImageObject base = rasterize(shape, base_color, texture_field, offset);
  const std::vector<double> base_hidden = model.hidden_activations(base.pixels);

  std::vector<MorphPoint> curve;
  curve.push_back({0.0, 1.0});  // unaltered color
  for (int i = 0; i < steps; ++i) {
    const Rgb candidate{rng.uniform(), rng.uniform(), rng.uniform()};
    MorphPoint point;
    point.distance = rgb_cosine_distance(base_color, candidate);
    const ImageObject img = rasterize(shape, candidate, texture_field, offset);
    point.similarity = curve_similarity(base_hidden, model.hidden_activations(img.pixels));
    curve.push_back(point);
  }
  std::sort(curve.begin(), curve.end(),
            [](const MorphPoint& a, const MorphPoint& b) { return a.distance < b.distance; });
  return curve;
}

std::vector<FilterVisualization> export_filters(const Cnn& model) {
  const Tensor& kernels = model.params()[0];  // [maps x channels x k x k]
  const int maps = kernels.extent(0);
  const int channels = kernels.extent(1);
  const int ke = kernels.extent(2);
  const int plane = ke * ke;
  if (channels < 3) throw DimensionError("export_filters: first layer has fewer than 3 channels");

  std::vector<FilterVisualization> out;
  for (int f = 0; f < maps; ++f) {
    FilterVisualization vis;
    vis.filter_index = f;
    vis.extent = ke;
    const double* base = kernels.data() + static_cast<std::size_t>(f) * channels * plane;
    double lo = base[0], hi = base[0];
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < plane; ++i) {
        const double v = base[c * plane + i];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    for (int c = 0; c < 3; ++c) {
      std::vector<double>& img = vis.channels[static_cast<std::size_t>(c)];
      img.resize(static_cast<std::size_t>(plane));
      for (int i = 0; i < plane; ++i) {
        const double v = base[c * plane + i];
        img[static_cast<std::size_t>(i)] = hi > lo ? (v - lo) / (hi - lo) : 0.5;
      }
    }
    out.push_back(std::move(vis));
  }
  return out;
}

double cross_channel_difference(const FilterVisualization& filter) {
  const std::size_t plane = filter.channels[0].size();
  double total = 0.0;
  for (std::size_t i = 0; i < plane; ++i) {
    const double r = filter.channels[0][i], g = filter.channels[1][i], b = filter.channels[2][i];
    total += (std::abs(r - g) + std::abs(g - b) + std::abs(r - b)) / 3.0;
  }
  return total / static_cast<double>(plane);
}

}  // namespace shapelab
