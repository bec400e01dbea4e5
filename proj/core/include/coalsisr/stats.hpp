#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace coalsisr {

double logsumexp(std::span<const double> x);

/// (sum w)^2 / sum w^2 from log-weights. Throws on empty input.
double ess(std::span<const double> log_w);

/// Mean, standard error and ESS of a weighted sample held in log space.
struct LogMeanSummary {
  double log_mean = 0.0;
  double log_se = 0.0;  // log of the standard error of the mean
  double rel_se = 0.0;  // se / mean
  bool se_defined = false;
  double ess = 0.0;
};
LogMeanSummary summarize_log_weights(std::span<const double> log_w);

double mean(std::span<const double> x);
/// Sample variance with n - 1 in the denominator; 0 for fewer than two values.
double variance(std::span<const double> x);

/// Upper tail of the chi-square distribution with one degree of freedom.
double chi2_1_sf(double x);
double chi2_1_quantile(double level);

/// Asymptotic Kolmogorov distribution tail P(K > x).
double kolmogorov_sf(double x);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  /// The asymptotic law is coarse below this effective sample size.
  bool small_sample = false;
};

/// One-sample test against Uniform(0, 1).
KsResult ks_uniform(std::vector<double> x);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace coalsisr
