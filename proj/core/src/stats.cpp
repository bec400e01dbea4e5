#include "coalsisr/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "coalsisr/error.hpp"

namespace coalsisr {

double logsumexp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double v : x) s += std::exp(v - top);
  return top + std::log(s);
}

double ess(std::span<const double> log_w) {
  if (log_w.empty()) throw Error("ess of an empty collection");
  const double top = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(top)) throw Error("ess: log-weights must be finite");
  double s1 = 0.0, s2 = 0.0;
  for (double v : log_w) {
    const double w = std::exp(v - top);
    s1 += w;
    s2 += w * w;
  }
  return s1 * s1 / s2;
}

LogMeanSummary summarize_log_weights(std::span<const double> log_w) {
  if (log_w.empty()) throw Error("summary of an empty collection");
  const double top = *std::max_element(log_w.begin(), log_w.end());
  const double n = static_cast<double>(log_w.size());
  LogMeanSummary out;
  if (!std::isfinite(top)) {
    out.log_mean = top;
    out.log_se = std::numeric_limits<double>::quiet_NaN();
    out.rel_se = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double s1 = 0.0, s2 = 0.0;
  for (double v : log_w) {
    const double w = std::exp(v - top);
    s1 += w;
    s2 += w * w;
  }
  const double m = s1 / n;
  out.log_mean = top + std::log(m);
  out.ess = s1 * s1 / s2;
  if (log_w.size() < 2) {
    out.log_se = std::numeric_limits<double>::quiet_NaN();
    out.rel_se = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double ss = 0.0;
  for (double v : log_w) {
    const double d = std::exp(v - top) - m;
    ss += d * d;
  }
  const double se = std::sqrt(ss / (n - 1.0) / n);
  out.se_defined = true;
  out.log_se = top + std::log(se);
  out.rel_se = se / m;
  return out;
}

double mean(std::span<const double> x) {
  if (x.empty()) throw Error("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double chi2_1_sf(double x) {
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(1.0), x));
}

double chi2_1_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error("confidence level must lie in (0, 1)");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(1.0), level);
}

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) {
    // theta-function form converges where the alternating series does not
    const double c = M_PI * M_PI / (8.0 * x * x);
    double s = 0.0;
    for (int k = 1; k < 50; k += 2) s += std::exp(-k * k * c);
    return std::clamp(1.0 - std::sqrt(2.0 * M_PI) / x * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

namespace {

double ks_p(double d, double n_eff) {
  // Stephens' finite-sample adjustment of the asymptotic argument
  const double sn = std::sqrt(n_eff);
  return kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
}

}  // namespace

KsResult ks_uniform(std::vector<double> x) {
  if (x.empty()) throw Error("KS test needs at least one value");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = std::clamp(x[i], 0.0, 1.0);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return {d, ks_p(d, n), x.size() < 35};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error("KS test needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double n_eff = na * nb / (na + nb);
  return {d, ks_p(d, n_eff), n_eff < 35};
}

}  // namespace coalsisr
