#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "shapelab/stimuli.hpp"

namespace shapelab {

PolygonSpec sample_polygon(Rng& rng, int image_extent) {
  if (image_extent < 32) {
    throw ArgumentError("polygon: image extent must be >= 32, got " +
                        std::to_string(image_extent));
  }
  PolygonSpec spec;
  spec.order = static_cast<int>(rng.uniform_int(3, 10));
  const double center = image_extent / 2.0;
  const double big_r = 0.6 * (image_extent / 2.0);
  std::vector<double> angles(static_cast<std::size_t>(spec.order));
  for (double& a : angles) a = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::sort(angles.begin(), angles.end());
  spec.vertices.reserve(angles.size());
  for (double a : angles) {
    const double r = big_r * (0.6 + 0.4 * rng.uniform());
    spec.vertices.push_back({center + r * std::cos(a), center + r * std::sin(a)});
  }
  return spec;
}

std::vector<std::uint8_t> polygon_mask(const PolygonSpec& spec, int extent,
                                       std::array<int, 2> jitter) {
  if (spec.vertices.size() < 3) throw ArgumentError("polygon: fewer than 3 vertices");
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(extent) * extent, 0);
  const std::size_t nv = spec.vertices.size();
  std::vector<double> xs;
  xs.reserve(nv);
  // Even-odd scanline fill sampled at pixel centers (x+0.5, y+0.5); edges
  // counted on the half-open span [min_y, max_y) so shared vertices are
  // crossed exactly once.
  for (int y = 0; y < extent; ++y) {
    const double py = y + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < nv; ++i) {
      const auto& a = spec.vertices[i];
      const auto& b = spec.vertices[(i + 1) % nv];
      const double ay = a[1] + jitter[1], by = b[1] + jitter[1];
      if ((ay <= py && py < by) || (by <= py && py < ay)) {
        const double ax = a[0] + jitter[0], bx = b[0] + jitter[0];
        xs.push_back(ax + (py - ay) * (bx - ax) / (by - ay));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      // Center inclusion is half-open: xs[i] <= x + 0.5 < xs[i+1].
      const int x0 = std::max(0, static_cast<int>(std::ceil(xs[i] - 0.5)));
      const int x1 = std::min(extent - 1, static_cast<int>(std::ceil(xs[i + 1] - 0.5)) - 1);
      for (int x = x0; x <= x1; ++x) mask[static_cast<std::size_t>(y) * extent + x] = 1;
    }
  }
  return mask;
}

ImageObject rasterize(const PolygonSpec& spec, const Rgb& color, const Tensor& texture_field,
                      std::array<int, 2> jitter) {
  if (texture_field.rank() != 2 || texture_field.extent(0) != texture_field.extent(1)) {
    throw DimensionError("rasterize: texture field must be square, got " +
                         texture_field.shape_str());
  }
  const int extent = texture_field.extent(0);
  const std::vector<std::uint8_t> mask = polygon_mask(spec, extent, jitter);
  ImageObject obj;
  obj.offset = jitter;
  obj.pixels = Tensor({4, extent, extent});
  double* px = obj.pixels.data();
  const int plane = extent * extent;
  const double rgb[3] = {color.r, color.g, color.b};
  for (int i = 0; i < plane; ++i) {
    const bool inside = mask[static_cast<std::size_t>(i)] != 0;
    for (int c = 0; c < 3; ++c) px[c * plane + i] = inside ? rgb[c] : 1.0;
    px[3 * plane + i] = inside ? texture_field[i] : 0.0;
  }
  return obj;
}

std::array<int, 2> sample_jitter(const PolygonSpec& spec, int extent, Rng& rng) {
  const int j = static_cast<int>(std::lround(0.1 * extent));
  double min_x = 1e18, max_x = -1e18, min_y = 1e18, max_y = -1e18;
  for (const auto& v : spec.vertices) {
    min_x = std::min(min_x, v[0]);
    max_x = std::max(max_x, v[0]);
    min_y = std::min(min_y, v[1]);
    max_y = std::max(max_y, v[1]);
  }
  for (int tries = 0; tries < 128; ++tries) {
    const int dx = static_cast<int>(rng.uniform_int(-j, j));
    const int dy = static_cast<int>(rng.uniform_int(-j, j));
    if (min_x + dx >= 0.0 && max_x + dx <= extent && min_y + dy >= 0.0 && max_y + dy <= extent) {
      return {dx, dy};
    }
  }
  throw ArgumentError("rasterize: polygon cannot be placed inside the frame after 128 jitters");
}

}  // namespace shapelab
