#include "coalsisr/timing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coalsisr/error.hpp"

namespace coalsisr {

HazardTerms HazardTerms::of(const AlleleConfig& h, const Model& model) {
  if (h.empty()) throw Error("hazard of an empty configuration");
  const double n = h.size();
  return {n * (n - 1.0), model.demography.theta() * mutation_mass(h, model.mutation)};
}

double integrated_hazard(const HazardTerms& r, double u, double delta, const Demography& d) noexcept {
  if (delta <= 0.0) return 0.0;
  return r.coal * d.integrated_coal_scale(u, delta) + r.mut * delta;
}

double integrated_hazard(const AlleleConfig& h, double u, double delta, const Model& model) {
  return integrated_hazard(HazardTerms::of(h, model), u, delta, model.demography);
}

namespace {

constexpr double kHazardTol = 1e-12;

// Root of coal*e^{-bu}(1-e^{-b x})/b + mut*x = target on [0, len].
double solve_exponential_piece(double coal, double mut, double b, double u, double len, double target) {
  const double c0 = coal * std::exp(-b * u);
  auto f = [&](double x) { return (b == 0.0 ? c0 * x : c0 * -std::expm1(-b * x) / b) + mut * x - target; };
  auto df = [&](double x) { return c0 * std::exp(-b * x) + mut; };
  double lo = 0.0, hi = len;
  double x = std::clamp(target / df(0.0), lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = f(x);
    if (std::abs(fx) <= kHazardTol) return x;
    if (fx > 0.0)
      hi = x;
    else
      lo = x;
    double next = x - fx / df(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) return next;
    x = next;
  }
  return x;
}

}  // namespace

double sample_holding_inverse(const HazardTerms& r, double u, const Demography& d, double U) {
  if (!(U >= 0.0 && U < 1.0)) throw Error("uniform draw must lie in [0, 1)");
  const double target = -std::log1p(-U);
  if (target == 0.0) return 0.0;
  if (d.kind() == Demography::Kind::Constant) return target / (r.coal + r.mut);

  const double tail_rate = r.coal * d.coal_scale(std::max(u, d.D())) + r.mut;
  if (u >= d.D()) return target / tail_rate;
  const double len = d.D() - u;
  const double head = integrated_hazard(r, u, len, d);
  if (target >= head) {
    if (tail_rate <= 0.0) return std::numeric_limits<double>::infinity();
    return len + (target - head) / tail_rate;
  }
  return solve_exponential_piece(r.coal, r.mut, d.decay(), u, len, target);
}

double sample_holding_inverse(const AlleleConfig& h, double u, const Model& model, double U) {
  return sample_holding_inverse(HazardTerms::of(h, model), u, model.demography, U);
}

double sample_holding_thinning(const HazardTerms& r, double u, const Demography& d, RandomStream& rng,
                               std::uint64_t* candidates) {
  std::uint64_t n = 0;
  double s = u;
  for (;;) {
    // r is monotone past s, so its supremum over [s, inf) sits at s or at D
    const double bound = std::max(r.at(s, d), r.at(std::max(s, d.D()), d));
    if (!(bound > 0.0) || !std::isfinite(bound)) throw Error("thinning: hazard has no finite positive bound");
    s += rng.exponential(bound);
    ++n;
    if (rng.uniform() * bound < r.at(s, d)) break;
  }
  if (candidates) *candidates = n;
  return s - u;
}

double sample_holding_thinning(const AlleleConfig& h, double u, const Model& model, RandomStream& rng,
                               std::uint64_t* candidates) {
  return sample_holding_thinning(HazardTerms::of(h, model), u, model.demography, rng, candidates);
}

}  // namespace coalsisr
