#include <cmath>
#include <string>

#include "shapelab/stimuli.hpp"

namespace shapelab {

namespace {

constexpr int kLatticeSteps = 6;  // 0, 0.2, ..., 1.0 per channel
constexpr double kWhiteExclusion = 0.15;

double dist2(const Rgb& a, const Rgb& b) {
  const double dr = a.r - b.r, dg = a.g - b.g, db = a.b - b.b;
  return dr * dr + dg * dg + db * db;
}

std::vector<Rgb> lattice_candidates() {
  std::vector<Rgb> pts;
  pts.reserve(kLatticeSteps * kLatticeSteps * kLatticeSteps);
  const Rgb white{1.0, 1.0, 1.0};
  for (int r = 0; r < kLatticeSteps; ++r)
    for (int g = 0; g < kLatticeSteps; ++g)
      for (int b = 0; b < kLatticeSteps; ++b) {
        const Rgb p{r / 5.0, g / 5.0, b / 5.0};
        if (std::sqrt(dist2(p, white)) < kWhiteExclusion) continue;
        pts.push_back(p);
      }
  return pts;
}

}  // namespace

std::vector<Rgb> gen_color_palette(int count, Rng& rng) {
  (void)rng;  // greedy farthest-point sampling is fully deterministic
  if (count < 1) throw ArgumentError("palette: count must be >= 1");
  const std::vector<Rgb> candidates = lattice_candidates();
  if (count > static_cast<int>(candidates.size())) {
    throw ConfigError("palette: count " + std::to_string(count) + " exceeds lattice size " +
                      std::to_string(candidates.size()));
  }
  const Rgb white{1.0, 1.0, 1.0};
  std::vector<bool> taken(candidates.size(), false);
  std::vector<Rgb> palette;
  palette.reserve(static_cast<std::size_t>(count));
  // Seed point: farthest from white (ties to the lowest lattice index);
  // thereafter greedily maximize the minimum distance to the chosen set.
  std::size_t seed = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (dist2(candidates[i], white) > dist2(candidates[seed], white)) seed = i;
  }
  taken[seed] = true;
  palette.push_back(candidates[seed]);
  std::vector<double> min_d2(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) min_d2[i] = dist2(candidates[i], candidates[seed]);
  for (int c = 1; c < count; ++c) {
    std::size_t best = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (taken[i]) continue;
      if (best == candidates.size() || min_d2[i] > min_d2[best]) best = i;
    }
    taken[best] = true;
    palette.push_back(candidates[best]);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      min_d2[i] = std::min(min_d2[i], dist2(candidates[i], candidates[best]));
    }
  }
  return palette;
}

}  // namespace shapelab
