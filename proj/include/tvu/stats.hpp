// Statistical primitives for the verification harnesses: normal CDF,
// two-sample Kolmogorov-Smirnov, Welch z-test, paired one-sided t-test.
#pragma once

#include <cstddef>
#include <vector>

namespace tvu {

double normal_cdf(double x);

// Regularized incomplete beta I_x(a,b); Student-t CDF built on it.
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);

// Two-sample KS: returns the asymptotic p-value for the hypothesis that both
// samples come from the same distribution. Inputs need not be sorted.
struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Welch two-sample z-test for equal means; two-sided p-value.
double z_test_two_sample(const std::vector<double>& a,
                         const std::vector<double>& b);

// One-sided paired test: p-value for the alternative mean(diffs) > 0.
// diffs.size() >= 2 required.
double paired_increase_p_value(const std::vector<double>& diffs);

double mean_of(const std::vector<double>& xs);
double variance_of(const std::vector<double>& xs);  // unbiased

}  // namespace tvu
