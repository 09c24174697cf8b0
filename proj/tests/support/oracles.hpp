#pragma once

// Independent reference implementations used to pin expected values in tests.
// These deliberately use the most literal formulation of each definition and
// share no code with the library under test.

#include <cmath>
#include <vector>

#include "shapelab/rng.hpp"
#include "shapelab/tensor.hpp"

namespace shapelab::testing {

// Direct quadruple-loop cross-correlation over an explicitly padded input.
// pt/pl: top/left zero padding.
inline Tensor conv2d_oracle(const Tensor& input, const Tensor& kernels, const Tensor& bias,
                            int pt, int pl, int pb, int pr) {
  const int cin = input.extent(0), h = input.extent(1), w = input.extent(2);
  const int cout = kernels.extent(0), kh = kernels.extent(2), kw = kernels.extent(3);
  const int hp = h + pt + pb, wp = w + pl + pr;
  const int oh = hp - kh + 1, ow = wp - kw + 1;
  std::vector<double> padded(static_cast<std::size_t>(cin) * hp * wp, 0.0);
  for (int c = 0; c < cin; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        padded[static_cast<std::size_t>((c * hp + y + pt) * wp + x + pl)] =
            input[(c * h + y) * w + x];
  Tensor out({cout, oh, ow});
  for (int co = 0; co < cout; ++co)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double acc = bias[co];
        for (int ci = 0; ci < cin; ++ci)
          for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx)
              acc += kernels[((co * cin + ci) * kh + ky) * kw + kx] *
                     padded[static_cast<std::size_t>((ci * hp + oy + ky) * wp + ox + kx)];
        out[(co * oh + oy) * ow + ox] = acc;
      }
  return out;
}

// Two-tailed permutation test for a Pearson correlation: the fraction of
// label permutations whose |r| meets or exceeds the observed |r|.
inline double pearson_p_permutation_oracle(const std::vector<double>& x,
                                           const std::vector<double>& y, int permutations,
                                           Rng& rng) {
  auto r_of = [](const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ma += a[i];
      mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sab += (a[i] - ma) * (b[i] - mb);
      saa += (a[i] - ma) * (a[i] - ma);
      sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
  };
  const double observed = std::abs(r_of(x, y));
  std::vector<double> shuffled = y;
  int hits = 0;
  for (int p = 0; p < permutations; ++p) {
    rng.shuffle(shuffled);
    if (std::abs(r_of(x, shuffled)) >= observed) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(permutations);
}

}  // namespace shapelab::testing
