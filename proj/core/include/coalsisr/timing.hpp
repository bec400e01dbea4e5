#pragma once

// Holding times of the backward jump process. While in state h the hazard at
// scaled time s is r(s) = coal * theta/theta(s) + mut, with coal = |h|(|h|-1)
// and mut = theta * sum_B h(B)(1 - p_BB).

#include <cstdint>

#include "coalsisr/model.hpp"
#include "coalsisr/random.hpp"

namespace coalsisr {

enum class HoldingStrategy { InverseCDF, Thinning };

struct HazardTerms {
  double coal = 0.0;
  double mut = 0.0;

  static HazardTerms of(const AlleleConfig& h, const Model& model);
  double at(double s, const Demography& d) const noexcept { return coal * d.coal_scale(s) + mut; }
};

/// Integral of the hazard over [u, u + delta].
double integrated_hazard(const HazardTerms& r, double u, double delta, const Demography& d) noexcept;
double integrated_hazard(const AlleleConfig& h, double u, double delta, const Model& model);

/// Smallest delta with integrated_hazard = -log(1 - U). Solved in closed form
/// where possible, otherwise by safeguarded Newton to 1e-12 in hazard units.
double sample_holding_inverse(const HazardTerms& r, double u, const Demography& d, double U);
double sample_holding_inverse(const AlleleConfig& h, double u, const Model& model, double U);

/// Poisson thinning with a bound recomputed at each candidate. When
/// `candidates` is non-null it receives the number of proposals made.
double sample_holding_thinning(const HazardTerms& r, double u, const Demography& d, RandomStream& rng,
                               std::uint64_t* candidates = nullptr);
double sample_holding_thinning(const AlleleConfig& h, double u, const Model& model, RandomStream& rng,
                               std::uint64_t* candidates = nullptr);

inline double sample_holding(HoldingStrategy s, const HazardTerms& r, double u, const Demography& d,
                             RandomStream& rng) {
  if (s == HoldingStrategy::Thinning) return sample_holding_thinning(r, u, d, rng);
  return sample_holding_inverse(r, u, d, rng.uniform());
}

}  // namespace coalsisr
