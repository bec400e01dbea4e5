#pragma once

// Particle collection with ESS-triggered resampling at checkpoints.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coalsisr/pcl.hpp"
#include "coalsisr/sis.hpp"

namespace coalsisr {

struct CheckpointPolicy {
  enum class Mode { ByCoalescences, ByEvents };
  Mode mode = Mode::ByCoalescences;
  int k = 1;
};

std::string to_string(CheckpointPolicy::Mode m);
/// "coal" | "event"
CheckpointPolicy::Mode parse_checkpoint_mode(std::string_view name);

struct ResamplingParams {
  double alpha = 0.7;
  double beta = 0.01;
  /// Resample when ESS+ < ESS- / ess_divisor. Infinity disables resampling.
  double ess_divisor = 10.0;

  void validate() const;
};

/// v proportional to w^alpha * L2(h)^beta. `configs` may be empty when beta is 0.
std::vector<double> resampling_distribution(std::span<const double> log_w, std::span<const AlleleConfig> configs,
                                            const ResamplingParams& rp, const PclContext& ctx);

/// n independent draws from v, in draw order.
std::vector<std::size_t> multinomial_indices(std::span<const double> v, std::size_t n, RandomStream& rng);

/// Replaces the collection with copies drawn from v, reweighted by
/// w / (v n) so that the expected total weight is unchanged.
void resample(std::vector<Particle>& particles, std::span<const double> v, RandomStream& rng);

struct SisrOptions {
  std::size_t nH = 100;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  CheckpointPolicy policy;
  ResamplingParams rp;
};

/// Particle j draws from the same substream as history j of estimate_sis, so
/// with resampling disabled the two agree bit for bit.
EstimateResult estimate_sisr(const AlleleConfig& h0, const HistorySampler& sampler, const SisrOptions& opt);

}  // namespace coalsisr
