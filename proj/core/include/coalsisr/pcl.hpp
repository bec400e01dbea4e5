#pragma once

// Pairwise composite likelihood of a configuration under a constant size and
// the stepwise model: the product over all gene pairs of the two-gene sample
// probability 1/sqrt(1+2 theta) * rho^|x-y|.

#include "coalsisr/model.hpp"

namespace coalsisr {

double rho(double theta);

struct PclContext {
  double theta = 0.0;
  double rho = 0.0;
  double log_rho = 0.0;  // -inf when rho == 0
  double log_norm = 0.0;

  explicit PclContext(double theta_anc);
  /// rho^d handled so that d == 0 contributes exactly zero even when rho == 0.
  double log_rho_pow(double d) const noexcept { return d == 0.0 ? 0.0 : d * log_rho; }
};

double log_pair_likelihood(int x, int y, const PclContext& ctx) noexcept;

/// Sum over unordered pairs of |x - y|.
double pair_distance_sum(const AlleleConfig& h) noexcept;

/// Sum over genes of |x - A| for a hypothetical extra gene at A.
double distance_to(const AlleleConfig& h, int A) noexcept;

double log_pcl(const AlleleConfig& h, const PclContext& ctx);

/// log_pcl(apply_backward(h, e)) - log_pcl(h), touching only the changed genes.
double log_pcl_delta(const AlleleConfig& h, const BackwardEvent& e, const PclContext& ctx);

}  // namespace coalsisr
