#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "shapelab/stimuli.hpp"

namespace shapelab {

namespace {

// Value noise on an integer lattice, bilinear interpolation, anchored to the
// frame. Cell values depend only on (key, cell), never on draw order.
double value_noise(double x, double y, double cell, std::uint64_t key) {
  const double gx = x / cell, gy = y / cell;
  const auto x0 = static_cast<std::int64_t>(std::floor(gx));
  const auto y0 = static_cast<std::int64_t>(std::floor(gy));
  const double fx = gx - static_cast<double>(x0), fy = gy - static_cast<double>(y0);
  auto corner = [key](std::int64_t cx, std::int64_t cy) {
    const auto ux = static_cast<std::uint64_t>(cx + (1LL << 32));
    const auto uy = static_cast<std::uint64_t>(cy + (1LL << 32));
    return hash_unit(hash_mix(key, ux * 0x1F123BB5ULL + uy));
  };
  const double sx = fx * fx * (3.0 - 2.0 * fx);
  const double sy = fy * fy * (3.0 - 2.0 * fy);
  const double top = corner(x0, y0) * (1.0 - sx) + corner(x0 + 1, y0) * sx;
  const double bot = corner(x0, y0 + 1) * (1.0 - sx) + corner(x0 + 1, y0 + 1) * sx;
  return top * (1.0 - sy) + bot * sy;
}

}  // namespace

Tensor gen_texture(int texture_id, int extent, const Rng& texture_rng) {
  if (texture_id < 0 || texture_id >= kTextureBankSize) {
    throw ConfigError("texture: id " + std::to_string(texture_id) + " outside bank of " +
                      std::to_string(kTextureBankSize));
  }
  // Parameters come from a stream keyed on the id, so every id is a fixed
  // texture for a given generator seed regardless of evaluation order.
  Rng params = texture_rng.derive(0x74657874ULL + static_cast<std::uint64_t>(texture_id));
  const double scale = extent / 200.0;  // geometry scales with resolution
  Tensor field({extent, extent});
  const int family = texture_id % 3;
  if (family == 0) {
    // Oriented grating.
    const double angle = params.uniform(0.0, std::numbers::pi);
    const double wavelength = params.uniform(8.0, 32.0) * scale;
    const double phase = params.uniform(0.0, 2.0 * std::numbers::pi);
    const double cx = std::cos(angle), sy = std::sin(angle);
    for (int y = 0; y < extent; ++y)
      for (int x = 0; x < extent; ++x) {
        const double t = (x * cx + y * sy) * 2.0 * std::numbers::pi / wavelength + phase;
        field[y * extent + x] = 0.5 + 0.5 * std::sin(t);
      }
  } else if (family == 1) {
    // Rotated checkerboard.
    const double angle = params.uniform(0.0, std::numbers::pi / 2.0);
    const double cell = params.uniform(6.0, 20.0) * scale;
    const double shift_x = params.uniform(0.0, cell);
    const double shift_y = params.uniform(0.0, cell);
    const double ca = std::cos(angle), sa = std::sin(angle);
    const double lo = params.uniform(0.0, 0.15), hi = params.uniform(0.85, 1.0);
    for (int y = 0; y < extent; ++y)
      for (int x = 0; x < extent; ++x) {
        const double u = (x * ca - y * sa + shift_x) / cell;
        const double v = (x * sa + y * ca + shift_y) / cell;
        const auto parity = (static_cast<std::int64_t>(std::floor(u)) +
                             static_cast<std::int64_t>(std::floor(v))) & 1;
        field[y * extent + x] = parity ? hi : lo;
      }
  } else {
    // Multi-octave value noise, stretched to full contrast.
    const std::uint64_t key = params.next_u64();
    const double base_cell = params.uniform(20.0, 60.0) * scale;
    double mn = 1e18, mx = -1e18;
    for (int y = 0; y < extent; ++y)
      for (int x = 0; x < extent; ++x) {
        double v = 0.0, amp = 1.0, total = 0.0, cell = base_cell;
        for (int octave = 0; octave < 3; ++octave) {
          v += amp * value_noise(x, y, cell, key + static_cast<std::uint64_t>(octave));
          total += amp;
          amp *= 0.5;
          cell *= 0.5;
        }
        const double val = v / total;
        field[y * extent + x] = val;
        mn = std::min(mn, val);
        mx = std::max(mx, val);
      }
    const double span = mx > mn ? mx - mn : 1.0;
    for (int i = 0; i < field.size(); ++i) field[i] = (field[i] - mn) / span;
  }
  for (int i = 0; i < field.size(); ++i) field[i] = std::clamp(field[i], 0.0, 1.0);
  return field;
}

}  // namespace shapelab
