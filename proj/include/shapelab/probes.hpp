#pragma once

#include <array>
#include <functional>
#include <vector>

#include "shapelab/models.hpp"
#include "shapelab/stimuli.hpp"
#include "shapelab/vecmath.hpp"

namespace shapelab {

// Attribute indices used throughout the probe reports.
inline constexpr int kShapeChoice = 0;
inline constexpr int kColorChoice = 1;
inline constexpr int kTextureChoice = 2;

struct TrialOutcome {
  int chosen = 0;  // 0 shape, 1 color, 2 texture
  std::array<double, 3> similarities{};
};

struct TestReport {
  double accuracy = 0.0;           // fraction choosing the shape match
  std::array<double, 3> shares{};  // shape, color, texture selection fractions
  int trial_count = 0;
};

// Argmax over cosine similarities with the documented degenerate rule:
// a zero-norm activation scores -inf; exact ties (including the all
// zero-norm case) resolve by a seeded uniform draw among the tied set.
TrialOutcome choose_match(const std::vector<double>& exemplar,
                          const std::vector<double>& shape_match,
                          const std::vector<double>& color_match,
                          const std::vector<double>& texture_match, Rng& tie_rng);

template <typename Obj>
TestReport run_generalization_trials(const std::vector<Trial<Obj>>& trials,
                                     const std::function<std::vector<double>(const Obj&)>& embed,
                                     Rng& tie_rng) {
  if (trials.empty()) throw ArgumentError("generalization test: no trials");
  std::array<int, 3> counts{};
  for (const Trial<Obj>& t : trials) {
    const TrialOutcome outcome = choose_match(embed(t.exemplar), embed(t.shape_match),
                                              embed(t.color_match), embed(t.texture_match),
                                              tie_rng);
    ++counts[static_cast<std::size_t>(outcome.chosen)];
  }
  TestReport report;
  report.trial_count = static_cast<int>(trials.size());
  for (int i = 0; i < 3; ++i) {
    report.shares[static_cast<std::size_t>(i)] =
        static_cast<double>(counts[static_cast<std::size_t>(i)]) / report.trial_count;
  }
  report.accuracy = report.shares[0];
  return report;
}

TestReport run_generalization_test(const Mlp& model, const std::vector<BitTrial>& trials,
                                   Rng& tie_rng);
TestReport run_generalization_test(const Cnn& model, const std::vector<ImageTrial>& trials,
                                   Rng& tie_rng);

// One point of a sensitivity curve: x is the manipulation magnitude.
struct CurvePoint {
  double x = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  int n = 0;
};

// Cosine similarity between the hidden activations of `object` and copies
// with `flips` random bits inverted inside the chosen attribute's 20-bit
// block, averaged over `repeats` flip sets per count. Zero flips is the
// identity (similarity exactly 1). A zero-norm activation pair scores 0.
std::vector<CurvePoint> bitflip_sensitivity(const Mlp& model, const BitObject& object,
                                            LabelAttribute attribute, int max_flips, Rng& rng,
                                            int repeats);

// Modified Hausdorff Distance: max of the two directed mean
// nearest-neighbour distances (Euclidean).
double modified_hausdorff(const std::vector<std::array<double, 2>>& a,
                          const std::vector<std::array<double, 2>>& b);

// `count` points spaced uniformly by arclength along the polygon boundary,
// starting at vertex 0, so polygons of different order are comparable.
std::vector<std::array<double, 2>> densify_boundary(const PolygonSpec& poly, int count = 64);

struct MorphPoint {
  double distance = 0.0;    // MHD (shape morph) or RGB cosine distance (color step)
  double similarity = 0.0;  // network similarity to the exemplar
};

// Renders `candidate_count` random shapes with the exemplar's color,
// texture and offset, and reports network similarity ordered by boundary
// MHD from the exemplar shape. The first point is the exemplar itself
// (distance 0, similarity 1).
std::vector<MorphPoint> shape_morph_sensitivity(const Cnn& model, const PolygonSpec& exemplar,
                                                const Rgb& color, const Tensor& texture_field,
                                                const std::array<int, 2>& offset,
                                                int candidate_count, Rng& rng);

// Same protocol with only the color altered: `steps` random colors ordered
// by RGB cosine distance from the base color. A zero-norm RGB vector takes
// distance 1 against any non-zero color (0 against another zero vector).
std::vector<MorphPoint> color_step_sensitivity(const Cnn& model, const PolygonSpec& shape,
                                               const Rgb& base_color, const Tensor& texture_field,
                                               const std::array<int, 2>& offset, int steps,
                                               Rng& rng);

double rgb_cosine_distance(const Rgb& a, const Rgb& b);

// First-layer filter visualization: R, G and B kernel planes plus a
// composite, min-max normalized over the three planes jointly so that
// cross-channel structure survives. A constant filter maps to mid-gray.
// The fourth input channel is not visualized.
struct FilterVisualization {
  int filter_index = 0;
  int extent = 0;                                // kernel side length
  std::array<std::vector<double>, 3> channels{}; // row-major planes in [0,1]
};

std::vector<FilterVisualization> export_filters(const Cnn& model);

// Mean over pixels of the mean pairwise absolute difference between the
// normalized R, G and B planes; 0 for perfectly channel-uniform filters.
double cross_channel_difference(const FilterVisualization& filter);

}  // namespace shapelab
