#pragma once

#include <span>

namespace capcom::stats {

double mean(std::span<const double> xs);
// Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> xs);

// Sample Pearson correlation. Throws InsufficientDataError for fewer than two
// points or a zero-variance side.
double pearson_r(std::span<const double> xs, std::span<const double> ys);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 0.5;  // one-sided, alternative "greater"
};

// One-sample t-test of H0: mean == mu against mean > mu. A zero-variance
// sample gives t = 0 and p = 0.5 when it sits exactly on mu, and +/-inf with
// p = 0 or 1 otherwise.
TTestResult one_sample_t_greater(std::span<const double> xs, double mu = 0.0);

// Welch two-sample t-test against the alternative mean(a) > mean(b).
TTestResult welch_t_greater(std::span<const double> a, std::span<const double> b);

// Upper tail P(T > t) of Student's t with `df` degrees of freedom.
double student_t_sf(double t, double df);

}  // namespace capcom::stats
