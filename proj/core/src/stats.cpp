#include "neurotrack/stats.hpp"

#include "neurotrack/error.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace neurotrack::stats {

namespace {

struct Summary {
  double mean = 0.0;
  double ss = 0.0;  // sum of squared deviations
};

Summary summarize(std::span<const double> x) {
  Summary s;
  for (double v : x) s.mean += v;
  s.mean /= static_cast<double>(x.size());
  for (double v : x) s.ss += (v - s.mean) * (v - s.mean);
  return s;
}

double two_sided_t_p(double t, double df) {
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

void require_finite(std::span<const double> x, const char* who) {
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidArgument(std::string(who) + ": non-finite value");
  }
}

}  // namespace

TTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("paired_ttest: samples differ in length");
  if (a.size() < 2) throw InvalidArgument("paired_ttest: need at least 2 pairs");
  require_finite(a, "paired_ttest");
  require_finite(b, "paired_ttest");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const Summary s = summarize(d);
  const double n = static_cast<double>(d.size());
  const double var = s.ss / (n - 1.0);
  if (!(var > 0.0)) throw NumericError("paired_ttest: differences have zero variance");
  TTestResult r;
  r.df = n - 1.0;
  r.t = s.mean / std::sqrt(var / n);
  r.p = two_sided_t_p(r.t, r.df);
  return r;
}

TTestResult two_sample_ttest(std::span<const double> group1, std::span<const double> group2) {
  if (group1.size() < 2 || group2.size() < 2) throw InvalidArgument("two_sample_ttest: each group needs >= 2 values");
  require_finite(group1, "two_sample_ttest");
  require_finite(group2, "two_sample_ttest");
  const Summary s1 = summarize(group1);
  const Summary s2 = summarize(group2);
  const double n1 = static_cast<double>(group1.size());
  const double n2 = static_cast<double>(group2.size());
  const double df = n1 + n2 - 2.0;
  const double pooled = (s1.ss + s2.ss) / df;
  if (!(pooled > 0.0)) throw NumericError("two_sample_ttest: both groups are constant");
  TTestResult r;
  r.df = df;
  r.t = (s1.mean - s2.mean) / std::sqrt(pooled * (1.0 / n1 + 1.0 / n2));
  r.p = two_sided_t_p(r.t, r.df);
  return r;
}

AnovaResult two_group_test(std::span<const double> group1, std::span<const double> group2) {
  if (group1.size() < 2 || group2.size() < 2) throw InvalidArgument("two_group_test: each group needs >= 2 values");
  require_finite(group1, "two_group_test");
  require_finite(group2, "two_group_test");
  const Summary s1 = summarize(group1);
  const Summary s2 = summarize(group2);
  const double n1 = static_cast<double>(group1.size());
  const double n2 = static_cast<double>(group2.size());
  const double grand = (n1 * s1.mean + n2 * s2.mean) / (n1 + n2);
  const double ss_between = n1 * (s1.mean - grand) * (s1.mean - grand) + n2 * (s2.mean - grand) * (s2.mean - grand);
  const double ss_within = s1.ss + s2.ss;
  AnovaResult r;
  r.df_between = 1.0;
  r.df_within = n1 + n2 - 2.0;
  if (!(ss_within > 0.0)) throw NumericError("two_group_test: degenerate groups (no within-group variance)");
  r.f = (ss_between / r.df_between) / (ss_within / r.df_within);
  const boost::math::fisher_f dist(r.df_between, r.df_within);
  r.p = boost::math::cdf(boost::math::complement(dist, r.f));
  return r;
}

double sign_test_p(long successes, long trials) {
  if (trials < 1 || successes < 0 || successes > trials) throw InvalidArgument("sign_test_p: invalid counts");
  const boost::math::binomial dist(static_cast<double>(trials), 0.5);
  const double k = static_cast<double>(std::min(successes, trials - successes));
  // P(X <= k) doubled, by symmetry of Binomial(n, 1/2).
  return std::min(1.0, 2.0 * boost::math::cdf(dist, k));
}

Interval chance_band_95(long trials) {
  if (trials < 1) throw InvalidArgument("chance_band_95: need at least one trial");
  const auto n = static_cast<double>(trials);
  const boost::math::binomial dist(n, 0.5);
  // Smallest k with CDF(k) >= 0.025 and its mirror image.
  long lo = 0;
  while (boost::math::cdf(dist, static_cast<double>(lo)) < 0.025) ++lo;
  return {static_cast<double>(lo) / n, static_cast<double>(trials - lo) / n};
}

}  // namespace neurotrack::stats
