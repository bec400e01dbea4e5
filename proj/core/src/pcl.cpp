#include "coalsisr/pcl.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "coalsisr/error.hpp"

namespace coalsisr {

double rho(double theta) {
  if (!(theta >= 0.0)) throw Error("rho: theta must be nonnegative");
  if (std::isinf(theta)) return 1.0;
  return theta / (1.0 + theta + std::sqrt(1.0 + 2.0 * theta));
}

PclContext::PclContext(double theta_anc)
    : theta(theta_anc),
      rho(coalsisr::rho(theta_anc)),
      log_rho(rho > 0.0 ? std::log(rho) : -std::numeric_limits<double>::infinity()),
      log_norm(-0.5 * std::log1p(2.0 * theta_anc)) {}

double log_pair_likelihood(int x, int y, const PclContext& ctx) noexcept {
  return ctx.log_norm + ctx.log_rho_pow(std::abs(x - y));
}

double pair_distance_sum(const AlleleConfig& h) noexcept {
  double below_count = 0.0, below_sum = 0.0, total = 0.0;
  for (int b : h.occupied()) {
    const double n = h.count(b);
    total += n * (below_count * b - below_sum);
    below_count += n;
    below_sum += n * b;
  }
  return total;
}

double distance_to(const AlleleConfig& h, int A) noexcept {
  double total = 0.0;
  for (int b : h.occupied()) total += h.count(b) * std::abs(b - A);
  return total;
}

double log_pcl(const AlleleConfig& h, const PclContext& ctx) {
  if (h.empty()) throw Error("log_pcl: empty configuration");
  const double n = h.size();
  return 0.5 * n * (n - 1.0) * ctx.log_norm + ctx.log_rho_pow(pair_distance_sum(h));
}

double log_pcl_delta(const AlleleConfig& h, const BackwardEvent& e, const PclContext& ctx) {
  if (h.size() < 2) throw InvalidEvent("log_pcl_delta: configuration " + h.to_string() + " is already at the MRCA");
  if (e.allele < 1 || e.allele > h.K() || e.parent < 0 || e.parent > h.K())
    throw InvalidEvent("log_pcl_delta: event " + e.to_string() + " outside the allele range");
  const int A = e.allele;
  if (ctx.rho == 0.0) return log_pcl(apply_backward(h, e), ctx) - log_pcl(h, ctx);
  if (e.is_coalescence()) {
    if (h.count(A) < 2) throw InvalidEvent("log_pcl_delta: invalid " + e.to_string() + " for " + h.to_string());
    // the removed gene loses its n-1 pairs
    const double n = h.size();
    return -(n - 1.0) * ctx.log_norm - ctx.log_rho * distance_to(h, A);
  }
  if (h.count(A) < 1 || e.parent == A || e.parent < 1)
    throw InvalidEvent("log_pcl_delta: invalid " + e.to_string() + " for " + h.to_string());
  const int B = e.parent;
  const double lost = distance_to(h, A);
  const double gained = distance_to(h, B) - std::abs(A - B);
  return ctx.log_rho * (gained - lost);
}

}  // namespace coalsisr
