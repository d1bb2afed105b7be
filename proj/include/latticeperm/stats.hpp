#pragma once

#include <cstdint>
#include <vector>

namespace latticeperm {

// Regularized upper incomplete gamma Q(a, x); series/continued-fraction form.
double gamma_q(double a, double x);

// Survival function of the chi-square distribution with `dof` degrees.
double chi_square_survival(double statistic, int dof);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Goodness of fit of observed counts against expected probabilities; bins
// with expected count below `min_expected` are pooled into a tail bin.
ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& counts,
                               const std::vector<double>& probabilities,
                               double min_expected = 5.0);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// Wilson score interval, default 95%.
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                               double z = 1.959963984540054);

}  // namespace latticeperm
