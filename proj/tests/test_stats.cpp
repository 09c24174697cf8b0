#include <cmath>

#include "doctest.h"
#include "shapelab/errors.hpp"
#include "shapelab/stats.hpp"

using namespace shapelab;

TEST_CASE("pearson_r matches hand-computed and reference fixtures") {
  CHECK(pearson_r({1, 2, 3}, {3, 5, 7}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson_r({1, 2, 3}, {-1, -2, -3}) == doctest::Approx(-1.0).epsilon(1e-12));
  // Frozen independent evaluation of the direct formula.
  CHECK(pearson_r({1, 2, 3, 4}, {1, 3, 2, 5}) ==
        doctest::Approx(0.8315218406202999).epsilon(1e-12));

  CHECK_THROWS_AS(pearson_r({1, 2}, {1, 2}), ArgumentError);
  CHECK_THROWS_AS(pearson_r({1, 2, 3}, {1, 2}), ArgumentError);
  CHECK_THROWS_AS(pearson_r({2, 2, 2}, {1, 2, 3}), ArgumentError);
}

TEST_CASE("pearson_r affine invariance and sign flip") {
  Rng rng(7);
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(rng.uniform(-3, 3));
    y.push_back(0.7 * x.back() + rng.uniform(-1, 1));
  }
  const double base = pearson_r(x, y);
  std::vector<double> xs = x, yn = y;
  for (double& v : xs) v = 2.5 * v + 11.0;
  CHECK(pearson_r(xs, y) == doctest::Approx(base).epsilon(1e-12));
  for (double& v : yn) v = -v;
  CHECK(pearson_r(x, yn) == doctest::Approx(-base).epsilon(1e-12));
  CHECK(base > 0.5);  // sanity: the construction correlates
}

TEST_CASE("regularized incomplete beta evaluates reference points") {
  // I_x(a,b) closed forms: I_x(1,1) = x; I_x(2,1) = x^2.
  CHECK(regularized_incomplete_beta(0.3, 1, 1) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(0.7, 2, 1) == doctest::Approx(0.49).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(0.0, 2, 3) == 0.0);
  CHECK(regularized_incomplete_beta(1.0, 2, 3) == 1.0);
  // Symmetry I_x(a,b) = 1 - I_{1-x}(b,a).
  const double a = 3.7, b = 1.9, x = 0.42;
  CHECK(regularized_incomplete_beta(x, a, b) ==
        doctest::Approx(1.0 - regularized_incomplete_beta(1.0 - x, b, a)).epsilon(1e-12));
  CHECK_THROWS_AS(regularized_incomplete_beta(-0.1, 1, 1), ArgumentError);
  CHECK_THROWS_AS(regularized_incomplete_beta(0.5, 0, 1), ArgumentError);
}

TEST_CASE("pearson_p matches frozen t-distribution references") {
  // Values frozen from an independent statistics package evaluation.
  CHECK(pearson_p(0.5, 10) == doctest::Approx(0.14111328125).epsilon(1e-10));
  CHECK(pearson_p(0.8, 20) == doctest::Approx(2.292887199439995e-05).epsilon(1e-9));
  CHECK(pearson_p(0.3, 50) == doctest::Approx(0.03428618003292995).epsilon(1e-10));
  CHECK(pearson_p(-0.6, 8) == doctest::Approx(0.11583999999999989).epsilon(1e-10));
  CHECK(pearson_p(0.95, 5) == doctest::Approx(0.013320011010141254).epsilon(1e-10));
  CHECK(pearson_p(0.8315218406202999, 4) == doctest::Approx(0.1684781593797).epsilon(1e-10));

  CHECK(pearson_p(0.0, 12) == 1.0);
  CHECK(pearson_p(1.0, 10) == 0.0);
  CHECK(pearson_p(-1.0, 10) == 0.0);
  CHECK_THROWS_AS(pearson_p(0.3, 2), ArgumentError);
  CHECK_THROWS_AS(pearson_p(1.5, 10), ArgumentError);
}

TEST_CASE("analytic p agrees with a large permutation test") {
  // Build a fixed n=20 sample with a strong but imperfect correlation.
  Rng rng(21);
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(rng.uniform(0, 1));
    y.push_back(x.back() + rng.uniform(-0.35, 0.35));
  }
  const double r = pearson_r(x, y);
  CHECK(r > 0.6);
  CHECK(r < 0.95);
  const double analytic = pearson_p(r, 20);
  Rng perm_rng(22);
  const double monte_carlo = pearson_p_permutation(x, y, 100000, perm_rng);
  CHECK(std::abs(analytic - monte_carlo) < 0.01);
}

TEST_CASE("spearman uses average ranks and tracks monotone association") {
  // Perfectly co-monotone but nonlinear data: rho is exactly 1.
  CHECK(spearman_rho({3.1, 4.2, 0.5, 9.9, 7.3, 2.2}, {2.0, 4.1, 1.0, 8.5, 8.1, 1.9}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spearman_rho({1, 2, 3, 4}, {8, 4, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-12));
  // Tied block takes the average rank; frozen reference value.
  CHECK(spearman_rho({1, 2, 2, 3}, {10, 20, 30, 40}) ==
        doctest::Approx(0.9486832980505139).epsilon(1e-12));
  CHECK_THROWS_AS(spearman_rho({1, 1, 1}, {1, 2, 3}), ArgumentError);
}
