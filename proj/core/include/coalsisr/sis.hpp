#pragma once

// Sequential importance sampling of histories from the observed
// configuration back to the most recent common ancestor.

#include <cstdint>
#include <vector>

#include "coalsisr/model.hpp"
#include "coalsisr/proposal.hpp"
#include "coalsisr/random.hpp"
#include "coalsisr/timing.hpp"

namespace coalsisr {

/// One partial history.
struct Particle {
  AlleleConfig config;
  double u = 0.0;
  double log_w = 0.0;
  int n_coal = 0;
  int n_events = 0;

  explicit Particle(AlleleConfig h0 = {}) : config(std::move(h0)) {}
  bool at_mrca() const noexcept { return config.size() <= 1; }
};

struct TracePoint {
  double u = 0.0;
  int lineages = 0;
  double log_w = 0.0;
};

struct SamplerConfig {
  ProposalKind proposal = ProposalKind::StephensDonnelly;
  HoldingStrategy holding = HoldingStrategy::InverseCDF;
  double pcl_beta = 1.0;
};

/// Model, proposal and holding-time sampler bundled for stepping particles.
class HistorySampler {
 public:
  HistorySampler(const Model& model, const SamplerConfig& cfg);

  const Model& model() const noexcept { return proposal_.model(); }
  const SamplerConfig& config() const noexcept { return cfg_; }

  /// Advances one event. No-op at the MRCA.
  void step(Particle& p, RandomStream& rng, std::vector<Candidate>& scratch) const;
  /// Multiplies in the stationary probability of the ancestral allele.
  void finish(Particle& p) const;

 private:
  SamplerConfig cfg_;
  Proposal proposal_;
};

struct CheckpointRecord {
  int index = 0;
  double ess_plus = 0.0;
  double ess_minus = 0.0;
  bool resampled = false;
};

struct EstimateResult {
  double log_lik = 0.0;
  /// Log of the Monte Carlo standard error of the likelihood estimate.
  double log_se = 0.0;
  double rel_se = 0.0;
  bool se_defined = false;
  double ess_final = 0.0;
  std::size_t nH = 0;
  int n_resamples = 0;
  std::vector<CheckpointRecord> diagnostics;
};

/// Runs one complete history and returns log W. `trace`, when given,
/// receives (u, |h|, log w) after every coalescence.
double run_history(const AlleleConfig& h0, const HistorySampler& sampler, RandomStream& rng,
                   std::vector<TracePoint>* trace = nullptr);

struct SisOptions {
  std::size_t nH = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// Log-weights of nH independent histories; history j draws from the
/// (seed, particle, j) substream.
std::vector<double> sis_log_weights(const AlleleConfig& h0, const HistorySampler& sampler, const SisOptions& opt);

EstimateResult estimate_sis(const AlleleConfig& h0, const HistorySampler& sampler, const SisOptions& opt);

struct TrajectoryRow {
  std::size_t replicate = 0;
  int coal_index = 0;
  double u = 0.0;
  double norm_log_weight = 0.0;
};

/// Per-coalescence log-weights normalized across replicates.
std::vector<TrajectoryRow> weight_trajectory(const AlleleConfig& h0, const HistorySampler& sampler,
                                             const SisOptions& opt);

}  // namespace coalsisr
