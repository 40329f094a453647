#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace gk {

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation (Lentz), accurate to ~1e-14 for a, b >= 0.5.
double regularized_incomplete_beta(double a, double b, double x);

// Quantile of Beta(a, b) by bisection on the CDF.
double beta_quantile(double a, double b, double p);

// Equal-tailed credible interval of the posterior Beta(successes + 1/2,
// failures + 1/2), i.e. a Jeffreys prior over the binomial rate.
std::pair<double, double> credible_interval(std::uint64_t successes, std::uint64_t trials,
                                            double level = 0.95);

struct CorrelationResult {
  double pearson_r;
  double spearman_rho;
};

// Sample Pearson on values; Spearman as Pearson on mid-ranks (ties averaged).
// Throws ValidationError for |x| != |y|, fewer than 3 points, or zero
// variance in either input.
CorrelationResult correlation(const std::vector<double>& x, const std::vector<double>& y);

// Mid-ranks with ties averaged, 1-based.
std::vector<double> midranks(const std::vector<double>& values);

}  // namespace gk
