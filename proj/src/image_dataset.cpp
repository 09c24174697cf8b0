#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>

#include "shapelab/stimuli.hpp"

namespace shapelab {

namespace {

// Lazily rendered texture fields, one per id, anchored to the set's seed.
class TextureCache {
 public:
  TextureCache(std::uint64_t texture_seed, int extent)
      : rng_(texture_seed), extent_(extent) {}

  const Tensor& field(int texture_id) {
    auto it = cache_.find(texture_id);
    if (it == cache_.end()) {
      it = cache_.emplace(texture_id, gen_texture(texture_id, extent_, rng_)).first;
    }
    return it->second;
  }

 private:
  Rng rng_;
  int extent_;
  std::unordered_map<int, Tensor> cache_;
};

}  // namespace

ImageStimulusSet gen_image_dataset(int n, int k, Rng& rng, int resolution, DatasetOptions options) {
  if (resolution < 32) {
    throw ConfigError("image dataset: resolution must be >= 32, got " +
                      std::to_string(resolution));
  }
  if (n > kTextureBankSize) {
    throw ConfigError("image dataset: n=" + std::to_string(n) + " exceeds the texture bank (" +
                      std::to_string(kTextureBankSize) + ")");
  }
  ImageStimulusSet set;
  set.n_categories = n;
  set.n_examples = k;
  set.resolution = resolution;
  set.texture_seed = rng.next_u64();

  const int h = options.holdout_size;
  for (int i = 0; i < n + h; ++i) {
    (i < n ? set.shape_pool : set.holdout_shapes).push_back(sample_polygon(rng, resolution));
  }
  {
    std::vector<Rgb> palette = gen_color_palette(n + h, rng);
    set.color_pool.assign(palette.begin(), palette.begin() + n);
    set.holdout_colors.assign(palette.begin() + n, palette.end());
  }
  {
    // Distinct texture ids; the holdout shrinks if the bank runs short.
    std::vector<int> ids(kTextureBankSize);
    std::iota(ids.begin(), ids.end(), 0);
    rng.shuffle(ids);
    const int h_tex = std::min(h, kTextureBankSize - n);
    set.texture_pool.assign(ids.begin(), ids.begin() + n);
    set.holdout_textures.assign(ids.begin() + n, ids.begin() + n + h_tex);
  }

  TextureCache textures(set.texture_seed, resolution);
  for (const AttributeRow& row : assign_attributes(n, k, rng, options)) {
    const PolygonSpec& poly = set.shape_pool[static_cast<std::size_t>(row.shape_id)];
    const int tex_id = set.texture_pool[static_cast<std::size_t>(row.texture_id)];
    ImageObject obj = rasterize(poly, set.color_pool[static_cast<std::size_t>(row.color_id)],
                                textures.field(tex_id), sample_jitter(poly, resolution, rng));
    obj.label = row.label;
    obj.shape_id = row.shape_id;
    obj.color_id = row.color_id;
    obj.texture_id = row.texture_id;
    set.items.push_back(std::move(obj));
  }
  return set;
}

ImageStimulusSet gen_vocab_image_dataset(int n_shapes, int k, int n_colors, int n_textures,
                                         Rng& rng, int resolution, int holdout_size) {
  if (n_shapes < 2 || k < 1 || n_colors < 1 || n_textures < 1) {
    throw ArgumentError("vocab dataset: invalid pool sizes");
  }
  if (n_textures + holdout_size > kTextureBankSize) {
    throw ConfigError("vocab dataset: texture categories plus holdout exceed the bank");
  }
  if (resolution < 32) throw ConfigError("vocab dataset: resolution must be >= 32");
  ImageStimulusSet set;
  set.n_categories = n_shapes;
  set.n_examples = k;
  set.resolution = resolution;
  set.texture_seed = rng.next_u64();
  for (int i = 0; i < n_shapes + holdout_size; ++i) {
    (i < n_shapes ? set.shape_pool : set.holdout_shapes).push_back(sample_polygon(rng, resolution));
  }
  {
    std::vector<Rgb> palette = gen_color_palette(n_colors + holdout_size, rng);
    set.color_pool.assign(palette.begin(), palette.begin() + n_colors);
    set.holdout_colors.assign(palette.begin() + n_colors, palette.end());
  }
  {
    std::vector<int> ids(kTextureBankSize);
    std::iota(ids.begin(), ids.end(), 0);
    rng.shuffle(ids);
    set.texture_pool.assign(ids.begin(), ids.begin() + n_textures);
    set.holdout_textures.assign(ids.begin() + n_textures, ids.begin() + n_textures + holdout_size);
  }
  TextureCache textures(set.texture_seed, resolution);
  for (int i = 0; i < n_shapes * k; ++i) {
    const int label = i / k;
    const int color_id = static_cast<int>(rng.uniform_int(0, n_colors - 1));
    const int texture_id = static_cast<int>(rng.uniform_int(0, n_textures - 1));
    const PolygonSpec& poly = set.shape_pool[static_cast<std::size_t>(label)];
    const int tex_bank = set.texture_pool[static_cast<std::size_t>(texture_id)];
    ImageObject obj = rasterize(poly, set.color_pool[static_cast<std::size_t>(color_id)],
                                textures.field(tex_bank), sample_jitter(poly, resolution, rng));
    obj.label = label;
    obj.shape_id = label;
    obj.color_id = color_id;
    obj.texture_id = texture_id;
    set.items.push_back(std::move(obj));
  }
  return set;
}

std::vector<ImageTrial> build_image_trials(const ImageStimulusSet& set, int order, int count,
                                           Rng& rng) {
  if (order != 1 && order != 2) {
    throw ArgumentError("trials: order must be 1 or 2, got " + std::to_string(order));
  }
  if (count < 0) throw ArgumentError("trials: negative count");
  if (set.holdout_shapes.empty() || set.holdout_colors.empty() || set.holdout_textures.empty()) {
    throw ConfigError("trials: empty holdout pool");
  }
  if (order == 2 && (set.holdout_shapes.size() < 2 || set.holdout_colors.size() < 2 ||
                     set.holdout_textures.size() < 2)) {
    throw ConfigError("trials: order-2 needs at least 2 holdout values per attribute");
  }
  // Holdout ids are offset by each attribute's own training pool size
  // (pools may differ in size, e.g. many shapes but few color categories).
  const int ns = static_cast<int>(set.shape_pool.size());
  const int nc = static_cast<int>(set.color_pool.size());
  const int nt = static_cast<int>(set.texture_pool.size());
  TextureCache textures(set.texture_seed, set.resolution);
  auto polygon_of = [&](int id) -> const PolygonSpec& {
    return id < ns ? set.shape_pool[static_cast<std::size_t>(id)]
                   : set.holdout_shapes[static_cast<std::size_t>(id - ns)];
  };
  auto color_of = [&](int id) -> const Rgb& {
    return id < nc ? set.color_pool[static_cast<std::size_t>(id)]
                   : set.holdout_colors[static_cast<std::size_t>(id - nc)];
  };
  auto bank_id_of = [&](int id) {
    return id < nt ? set.texture_pool[static_cast<std::size_t>(id)]
                   : set.holdout_textures[static_cast<std::size_t>(id - nt)];
  };
  auto make = [&](int s, int c, int t, int label) {
    const PolygonSpec& poly = polygon_of(s);
    ImageObject obj = rasterize(poly, color_of(c), textures.field(bank_id_of(t)),
                                sample_jitter(poly, set.resolution, rng));
    obj.label = label;
    obj.shape_id = s;
    obj.color_id = c;
    obj.texture_id = t;
    return obj;
  };
  auto pick = [&rng](std::size_t pool_size) {
    return static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(pool_size) - 1));
  };
  auto pick_other = [&](std::size_t pool_size, int avoid) {
    for (;;) {
      const int i = pick(pool_size);
      if (i != avoid) return i;
    }
  };

  std::vector<ImageTrial> trials;
  trials.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    ImageTrial trial;
    trial.order = order;
    if (order == 1) {
      const auto idx =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(set.items.size()) - 1));
      const ImageObject& item = set.items[idx];
      const int es = item.shape_id, ec = item.color_id, et = item.texture_id;
      trial.exemplar = make(es, ec, et, item.label);  // fresh jitter, same attributes
      trial.shape_match = make(es, nc + pick(set.holdout_colors.size()),
                               nt + pick(set.holdout_textures.size()), -1);
      trial.color_match = make(ns + pick(set.holdout_shapes.size()), ec,
                               nt + pick(set.holdout_textures.size()), -1);
      trial.texture_match = make(ns + pick(set.holdout_shapes.size()),
                                 nc + pick(set.holdout_colors.size()), et, -1);
    } else {
      const int hs = pick(set.holdout_shapes.size());
      const int hc = pick(set.holdout_colors.size());
      const int ht = pick(set.holdout_textures.size());
      trial.exemplar = make(ns + hs, nc + hc, nt + ht, -1);
      trial.shape_match = make(ns + hs, nc + pick_other(set.holdout_colors.size(), hc),
                               nt + pick_other(set.holdout_textures.size(), ht), -1);
      trial.color_match = make(ns + pick_other(set.holdout_shapes.size(), hs), nc + hc,
                               nt + pick_other(set.holdout_textures.size(), ht), -1);
      trial.texture_match = make(ns + pick_other(set.holdout_shapes.size(), hs),
                                 nc + pick_other(set.holdout_colors.size(), hc), nt + ht, -1);
    }
    trials.push_back(std::move(trial));
  }
  return trials;
}

}  // namespace shapelab
