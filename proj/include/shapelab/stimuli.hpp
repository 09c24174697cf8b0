#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "shapelab/errors.hpp"
#include "shapelab/rng.hpp"
#include "shapelab/tensor.hpp"

namespace shapelab {

// ---------------------------------------------------------------------------
// Bit-vector stimuli: three pools of 20 binary units each.
// ---------------------------------------------------------------------------

inline constexpr int kBitsPerPool = 20;
inline constexpr int kBitInputUnits = 3 * kBitsPerPool;

struct BitObject {
  int label = -1;
  int shape_id = -1, color_id = -1, texture_id = -1;
  std::uint32_t shape_bits = 0, color_bits = 0, texture_bits = 0;
};

struct BitStimulusSet {
  int n_categories = 0;
  int n_examples = 0;
  std::vector<BitObject> items;
  // Training attribute pools (size N each) and disjoint holdout pools.
  std::vector<std::uint32_t> shape_pool, color_pool, texture_pool;
  std::vector<std::uint32_t> holdout_shapes, holdout_colors, holdout_textures;
};

enum class LabelAttribute { kShape, kColor };

struct DatasetOptions {
  // Within a category the (non-label attribute) pairs must be unique unless
  // repeats are explicitly allowed; K > N^2 is infeasible without repeats.
  bool allow_repeats = false;
  int holdout_size = 20;
  LabelAttribute label_attribute = LabelAttribute::kShape;
};

BitStimulusSet gen_bit_dataset(int n, int k, Rng& rng, DatasetOptions options = {});

// 60-unit input encoding: shape bits 0-19, color bits 20-39, texture bits 40-59.
Tensor bit_features(const BitObject& obj);
Tensor bit_feature_rows(const std::vector<BitObject>& objects);

// ---------------------------------------------------------------------------
// Image stimuli: colored, textured polygons on a white ground.
// ---------------------------------------------------------------------------

struct Rgb {
  double r = 0.0, g = 0.0, b = 0.0;
};

// Evenly separated colors: greedy farthest-point sampling over a step-0.2
// RGB lattice with near-white points excluded.
std::vector<Rgb> gen_color_palette(int count, Rng& rng);

struct PolygonSpec {
  std::vector<std::array<double, 2>> vertices;  // (x, y) image coordinates, angle-sorted
  int order = 0;
};

// Random polygon centered in the frame: order uniform in [3,10], vertex
// radius r = R*(0.6 + 0.4u) with R = 0.6 * extent/2, angles uniform, sorted.
PolygonSpec sample_polygon(Rng& rng, int image_extent);

// Procedural stand-in for a scanned texture archive: oriented gratings,
// rotated checkerboards, and multi-octave value noise, cycled by id.
inline constexpr int kTextureBankSize = 64;
Tensor gen_texture(int texture_id, int extent, const Rng& texture_rng);

struct ImageObject {
  Tensor pixels;  // [4 x H x W]: R, G, B (white ground), texture (0 ground)
  int label = -1;
  int shape_id = -1, color_id = -1, texture_id = -1;
  std::array<int, 2> offset{0, 0};
};

// Pixel-center scanline mask of the jittered polygon: extent*extent bytes, 0/1.
std::vector<std::uint8_t> polygon_mask(const PolygonSpec& spec, int extent,
                                       std::array<int, 2> jitter);

ImageObject rasterize(const PolygonSpec& spec, const Rgb& color, const Tensor& texture_field,
                      std::array<int, 2> jitter);

// Uniform integer jitter in [-J, J]^2 with J = round(0.1 * extent), re-drawn
// (bounded) while the shifted polygon would leave the frame.
std::array<int, 2> sample_jitter(const PolygonSpec& spec, int extent, Rng& rng);

struct ImageStimulusSet {
  int n_categories = 0;
  int n_examples = 0;
  int resolution = 0;
  std::uint64_t texture_seed = 0;  // anchors texture fields for re-rendering
  std::vector<ImageObject> items;
  std::vector<PolygonSpec> shape_pool, holdout_shapes;
  std::vector<Rgb> color_pool, holdout_colors;
  std::vector<int> texture_pool, holdout_textures;
};

ImageStimulusSet gen_image_dataset(int n, int k, Rng& rng, int resolution = 200,
                                   DatasetOptions options = {});

// Naming-protocol variant: shapes align with labels as usual, but colors and
// textures come from their own (smaller) category pools, assigned uniformly
// at random with no balance law.
ImageStimulusSet gen_vocab_image_dataset(int n_shapes, int k, int n_colors, int n_textures,
                                         Rng& rng, int resolution, int holdout_size = 20);

// ---------------------------------------------------------------------------
// Generalization trials.
// ---------------------------------------------------------------------------

template <typename Obj>
struct Trial {
  Obj exemplar, shape_match, color_match, texture_match;
  int order = 1;
};

using BitTrial = Trial<BitObject>;
using ImageTrial = Trial<ImageObject>;

// Order 1: exemplar is a training attribute combination; each match shares
// exactly that one attribute, the rest drawn from holdout pools.
// Order 2: every attribute of every object is novel (holdout).
std::vector<BitTrial> build_bit_trials(const BitStimulusSet& set, int order, int count, Rng& rng);
std::vector<ImageTrial> build_image_trials(const ImageStimulusSet& set, int order, int count,
                                           Rng& rng);

// Shared balance law: N*K rows of (label, shape_id, color_id, texture_id)
// with the label-aligned attribute equal to the label and the other two each
// appearing exactly K times in random association.
struct AttributeRow {
  int label, shape_id, color_id, texture_id;
};
std::vector<AttributeRow> assign_attributes(int n, int k, Rng& rng, DatasetOptions options);

}  // namespace shapelab
