#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "shapelab/errors.hpp"
#include "shapelab/stats.hpp"

namespace shapelab {

namespace {

// Textbook continued fraction for I_x(a,b), evaluated with the modified
// Lentz iteration. Converges quickly for x <= (a+1)/(a+b+2); the caller
// applies the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) otherwise.
double beta_continued_fraction(double x, double a, double b) {
  constexpr double kTiny = 1e-300;
  constexpr double kTolerance = 1e-15;
  constexpr int kMaxTerms = 100000;
  auto term = [&](int n) {
    if (n % 2 == 0) {
      const double m = n / 2;
      return m * (b - m) * x / (a + 2.0 * m - 1.0) / (a + 2.0 * m);
    }
    const double m = (n - 1) / 2;
    return -(a + m) * (a + b + m) * x / (a + 2.0 * m) / (a + 2.0 * m + 1.0);
  };
  double f = 1.0, c = 1.0, d = 0.0;  // b0 = 1 for this fraction
  for (int n = 1; n < kMaxTerms; ++n) {
    const double num = term(n);
    d = 1.0 + num * d;
    if (d == 0.0) d = kTiny;
    c = 1.0 + num / c;
    if (c == 0.0) c = kTiny;
    d = 1.0 / d;
    const double mult = c * d;
    f *= mult;
    if (std::abs(mult - 1.0) <= kTolerance) break;
  }
  return f;
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

void rank_transform(const std::vector<double>& v, std::vector<double>& ranks) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  ranks.assign(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    // Tied block [i, j]: everyone gets the average 1-based rank.
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
}

}  // namespace

double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ArgumentError("pearson_r: series lengths differ");
  const std::size_t n = x.size();
  if (n < 3) throw ArgumentError("pearson_r: need at least 3 pairs");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw ArgumentError("pearson_r: undefined correlation for a zero-variance series");
  }
  // Rounding can push exactly collinear data a few ulp past +-1; the true
  // value never leaves [-1, 1], so clamp rather than leak the artifact.
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0) || !(a > 0.0) || !(b > 0.0)) {
    throw ArgumentError("regularized_incomplete_beta: need x in [0,1], a > 0, b > 0");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x <= (a + 1.0) / (a + b + 2.0)) {
    return front / a / beta_continued_fraction(x, a, b);
  }
  return 1.0 - std::exp(b * std::log(1.0 - x) + a * std::log(x) - log_beta(b, a)) / b /
                   beta_continued_fraction(1.0 - x, b, a);
}

double pearson_p(double r, int n) {
  if (n < 3) throw ArgumentError("pearson_p: need n >= 3");
  if (!(r >= -1.0 && r <= 1.0)) throw ArgumentError("pearson_p: r outside [-1, 1]");
  if (r == 1.0 || r == -1.0) return 0.0;
  const double df = n - 2;
  const double t2 = r * r * df / (1.0 - r * r);
  // Two-tailed: p = I_{df/(df+t^2)}(df/2, 1/2).
  return regularized_incomplete_beta(df / (df + t2), df / 2.0, 0.5);
}

double pearson_p_permutation(const std::vector<double>& x, const std::vector<double>& y,
                             int samples, Rng& rng) {
  if (samples < 1) throw ArgumentError("pearson_p_permutation: need samples >= 1");
  const double observed = std::abs(pearson_r(x, y));
  std::vector<double> shuffled = y;
  int hits = 0;
  for (int s = 0; s < samples; ++s) {
    rng.shuffle(shuffled);
    double r;
    try {
      r = pearson_r(x, shuffled);
    } catch (const ArgumentError&) {
      r = 0.0;  // a degenerate permutation cannot beat a real correlation
    }
    if (std::abs(r) >= observed) ++hits;
  }
  return static_cast<double>(hits) / samples;
}

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ArgumentError("spearman_rho: series lengths differ");
  std::vector<double> rx, ry;
  rank_transform(x, rx);
  rank_transform(y, ry);
  return pearson_r(rx, ry);
}

}  // namespace shapelab
