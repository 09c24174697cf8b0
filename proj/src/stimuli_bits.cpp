#include <string>
#include <unordered_set>
#include <utility>

#include "shapelab/stimuli.hpp"

namespace shapelab {

namespace {

void validate_nk(int n, int k, const DatasetOptions& options) {
  if (n < 2) throw ArgumentError("dataset: need at least 2 categories, got " + std::to_string(n));
  if (k < 1) throw ArgumentError("dataset: need at least 1 example per category, got " +
                                 std::to_string(k));
  if (!options.allow_repeats && k > n * n) {
    throw InfeasibleError("dataset: k=" + std::to_string(k) + " unique attribute pairs per " +
                          "category is infeasible with n=" + std::to_string(n) +
                          " (max n^2=" + std::to_string(n * n) +
                          "); enable repeats to permit duplicates");
  }
  if (options.holdout_size < 0) throw ConfigError("dataset: negative holdout size");
}

// Within-group duplicate (b, c) pairs are repaired by swapping c entries
// across groups. Returns false when a pass makes no progress.
bool repair_pairs(std::vector<int>& b, std::vector<int>& c, int n, int k, Rng& rng) {
  const int total = n * k;
  auto pair_key = [n](int bv, int cv) { return bv * n + cv; };
  for (int pass = 0; pass < 4 * total + 16; ++pass) {
    int dup = -1;
    for (int g = 0; g < n && dup < 0; ++g) {
      std::unordered_set<int> seen;
      for (int i = g * k; i < (g + 1) * k; ++i) {
        if (!seen.insert(pair_key(b[i], c[i])).second) {
          dup = i;
          break;
        }
      }
    }
    if (dup < 0) return true;
    const int gd = dup / k;
    std::unordered_set<int> group_d;
    for (int i = gd * k; i < (gd + 1) * k; ++i)
      if (i != dup) group_d.insert(pair_key(b[i], c[i]));
    const int start = static_cast<int>(rng.uniform_int(0, total - 1));
    bool swapped = false;
    for (int t = 0; t < total && !swapped; ++t) {
      const int j = (start + t) % total;
      const int gj = j / k;
      if (gj == gd) continue;
      if (group_d.count(pair_key(b[dup], c[j]))) continue;
      std::unordered_set<int> group_j;
      for (int i = gj * k; i < (gj + 1) * k; ++i)
        if (i != j) group_j.insert(pair_key(b[i], c[i]));
      if (group_j.count(pair_key(b[j], c[dup]))) continue;
      std::swap(c[dup], c[j]);
      swapped = true;
    }
    if (!swapped) return false;
  }
  return false;
}

}  // namespace

std::vector<AttributeRow> assign_attributes(int n, int k, Rng& rng, DatasetOptions options) {
  validate_nk(n, k, options);
  const int total = n * k;
  std::vector<int> b(static_cast<std::size_t>(total)), c(static_cast<std::size_t>(total));
  bool arranged = false;
  for (int attempt = 0; attempt < 200 && !arranged; ++attempt) {
    for (int i = 0; i < total; ++i) {
      b[static_cast<std::size_t>(i)] = i / k;
      c[static_cast<std::size_t>(i)] = i / k;
    }
    rng.shuffle(b);
    rng.shuffle(c);
    arranged = options.allow_repeats || repair_pairs(b, c, n, k, rng);
  }
  if (!arranged) {
    throw InfeasibleError("dataset: failed to arrange unique attribute pairs for n=" +
                          std::to_string(n) + ", k=" + std::to_string(k));
  }
  std::vector<AttributeRow> rows;
  rows.reserve(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    const int label = i / k;
    const int bv = b[static_cast<std::size_t>(i)];
    const int cv = c[static_cast<std::size_t>(i)];
    if (options.label_attribute == LabelAttribute::kShape) {
      rows.push_back({label, label, bv, cv});
    } else {
      rows.push_back({label, bv, label, cv});
    }
  }
  return rows;
}

BitStimulusSet gen_bit_dataset(int n, int k, Rng& rng, DatasetOptions options) {
  validate_nk(n, k, options);
  BitStimulusSet set;
  set.n_categories = n;
  set.n_examples = k;
  const int h = options.holdout_size;
  // All 3*(n+h) patterns mutually distinct, training and holdout alike.
  std::unordered_set<std::uint32_t> used;
  auto draw_pattern = [&]() {
    for (;;) {
      const auto p = static_cast<std::uint32_t>(rng.next_u64() & ((1u << kBitsPerPool) - 1));
      if (used.insert(p).second) return p;
    }
  };
  auto fill = [&](std::vector<std::uint32_t>& pool, int count) {
    pool.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) pool.push_back(draw_pattern());
  };
  fill(set.shape_pool, n);
  fill(set.color_pool, n);
  fill(set.texture_pool, n);
  fill(set.holdout_shapes, h);
  fill(set.holdout_colors, h);
  fill(set.holdout_textures, h);

  for (const AttributeRow& row : assign_attributes(n, k, rng, options)) {
    BitObject obj;
    obj.label = row.label;
    obj.shape_id = row.shape_id;
    obj.color_id = row.color_id;
    obj.texture_id = row.texture_id;
    obj.shape_bits = set.shape_pool[static_cast<std::size_t>(row.shape_id)];
    obj.color_bits = set.color_pool[static_cast<std::size_t>(row.color_id)];
    obj.texture_bits = set.texture_pool[static_cast<std::size_t>(row.texture_id)];
    set.items.push_back(obj);
  }
  return set;
}

Tensor bit_features(const BitObject& obj) {
  Tensor t({kBitInputUnits});
  const std::uint32_t pools[3] = {obj.shape_bits, obj.color_bits, obj.texture_bits};
  for (int p = 0; p < 3; ++p)
    for (int i = 0; i < kBitsPerPool; ++i)
      t[p * kBitsPerPool + i] = (pools[p] >> i) & 1u ? 1.0 : 0.0;
  return t;
}

Tensor bit_feature_rows(const std::vector<BitObject>& objects) {
  Tensor t({static_cast<int>(objects.size()), kBitInputUnits});
  for (std::size_t r = 0; r < objects.size(); ++r) {
    const Tensor row = bit_features(objects[r]);
    for (int i = 0; i < kBitInputUnits; ++i)
      t[static_cast<int>(r) * kBitInputUnits + i] = row[i];
  }
  return t;
}

namespace {

int pick(const std::vector<std::uint32_t>& pool, Rng& rng) {
  return static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1));
}

int pick_other(const std::vector<std::uint32_t>& pool, int avoid, Rng& rng) {
  for (;;) {
    const int i = pick(pool, rng);
    if (i != avoid) return i;
  }
}

}  // namespace

std::vector<BitTrial> build_bit_trials(const BitStimulusSet& set, int order, int count, Rng& rng) {
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
  const int n = set.n_categories;
  // Holdout attribute ids are offset by the training pool size.
  auto bits_of = [&](const std::vector<std::uint32_t>& training,
                     const std::vector<std::uint32_t>& holdout, int id) {
    return id < n ? training[static_cast<std::size_t>(id)]
                  : holdout[static_cast<std::size_t>(id - n)];
  };
  auto make = [&](int s, int c, int t, int label) {
    BitObject o;
    o.label = label;
    o.shape_id = s;
    o.color_id = c;
    o.texture_id = t;
    o.shape_bits = bits_of(set.shape_pool, set.holdout_shapes, s);
    o.color_bits = bits_of(set.color_pool, set.holdout_colors, c);
    o.texture_bits = bits_of(set.texture_pool, set.holdout_textures, t);
    return o;
  };

  std::vector<BitTrial> trials;
  trials.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    BitTrial trial;
    trial.order = order;
    int es, ec, et;
    if (order == 1) {
      const auto idx =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(set.items.size()) - 1));
      const BitObject& item = set.items[idx];
      es = item.shape_id;
      ec = item.color_id;
      et = item.texture_id;
      trial.exemplar = make(es, ec, et, item.label);
      trial.shape_match = make(es, n + pick(set.holdout_colors, rng),
                               n + pick(set.holdout_textures, rng), -1);
      trial.color_match = make(n + pick(set.holdout_shapes, rng), ec,
                               n + pick(set.holdout_textures, rng), -1);
      trial.texture_match = make(n + pick(set.holdout_shapes, rng),
                                 n + pick(set.holdout_colors, rng), et, -1);
    } else {
      const int hs = pick(set.holdout_shapes, rng);
      const int hc = pick(set.holdout_colors, rng);
      const int ht = pick(set.holdout_textures, rng);
      es = n + hs;
      ec = n + hc;
      et = n + ht;
      trial.exemplar = make(es, ec, et, -1);
      trial.shape_match = make(es, n + pick_other(set.holdout_colors, hc, rng),
                               n + pick_other(set.holdout_textures, ht, rng), -1);
      trial.color_match = make(n + pick_other(set.holdout_shapes, hs, rng), ec,
                               n + pick_other(set.holdout_textures, ht, rng), -1);
      trial.texture_match = make(n + pick_other(set.holdout_shapes, hs, rng),
                                 n + pick_other(set.holdout_colors, hc, rng), et, -1);
    }
    trials.push_back(std::move(trial));
  }
  return trials;
}

}  // namespace shapelab
