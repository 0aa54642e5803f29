#pragma once

#include <span>

namespace neurotrack::stats {

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // two-sided
  double df = 0.0;
};

// Classical paired t-test on a[i] - b[i]. Needs n >= 2 and differences with
// nonzero variance.
TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

// Pooled-variance two-sample t-test.
TTestResult two_sample_ttest(std::span<const double> group1, std::span<const double> group2);

struct AnovaResult {
  double f = 0.0;
  double p = 1.0;
  double df_between = 0.0;
  double df_within = 0.0;
};

// One-way ANOVA with two groups, each of size >= 2.
AnovaResult two_group_test(std::span<const double> group1, std::span<const double> group2);

// Two-sided exact binomial test of k successes in n trials against p = 0.5.
double sign_test_p(long successes, long trials);

struct Interval {
  double low = 0.0;
  double high = 0.0;
  bool contains(double x) const { return low <= x && x <= high; }
};

// Central 95% range of the proportion k/n under Binomial(n, 0.5):
// [q(0.025)/n, q(0.975)/n] from the exact binomial quantiles.
Interval chance_band_95(long trials);

}  // namespace neurotrack::stats
