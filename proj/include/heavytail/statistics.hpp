#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ht {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Sample mean and standard error of the mean.
Estimate mean_estimate(std::span<const double> xs);
double sample_std(std::span<const double> xs);

// Two-sample Kolmogorov-Smirnov statistic sup |F_x - F_y|.
double ks_two_sample(std::vector<double> xs, std::vector<double> ys);
// Asymptotic critical value of the two-sample statistic at level `level`.
double ks_critical_value(double level, std::size_t n, std::size_t m);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

// Pearson goodness of fit of `counts` against equal expected cell counts.
ChiSquareResult chi_square_uniform(std::span<const std::size_t> counts);

// Least-squares slope of ys against xs.
double ols_slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace ht
