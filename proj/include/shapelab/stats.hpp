#pragma once

#include <vector>

#include "shapelab/rng.hpp"

namespace shapelab {

// Sample Pearson correlation. Requires equal lengths >= 3 and nonzero
// variance in both series (an exactly constant series has no defined
// correlation).
double pearson_r(const std::vector<double>& x, const std::vector<double>& y);

// Two-tailed p-value for a sample correlation r over n pairs, via
// t = r*sqrt((n-2)/(1-r^2)) and the t-distribution CDF expressed through
// the regularized incomplete beta function. |r| = 1 gives p = 0.
double pearson_p(double r, int n);

// I_x(a, b), evaluated by the symmetry-split continued fraction
// (modified Lentz iteration).
double regularized_incomplete_beta(double x, double a, double b);

// Monte-Carlo cross-check: fraction of `samples` random permutations of y
// whose |r| meets or exceeds the observed |r|.
double pearson_p_permutation(const std::vector<double>& x, const std::vector<double>& y,
                             int samples, Rng& rng);

// Spearman rank correlation with average ranks on ties.
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace shapelab
