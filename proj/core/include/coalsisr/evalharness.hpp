#pragma once

// Exact small-instance likelihoods and the simulation experiments used to
// evaluate the estimators and the inference pipeline.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "coalsisr/inference.hpp"
#include "coalsisr/stats.hpp"

namespace coalsisr {

/// Exact probability of the configuration under a constant size, solved one
/// lineage level at a time. Guarded to K <= 8 and at most
/// as many configurations per level as K = 8, |h0| = 5 has.
double exact_likelihood_dp(const AlleleConfig& h0, double theta, const MutationModel& mutation);

/// Sampling probability of a configuration under parent-independent mutation
/// and constant size.
double pim_likelihood(const AlleleConfig& h, double theta, const MutationModel& mutation);

struct BiasRmse {
  double bias = 0.0;
  double rmse = 0.0;
};

/// Relative bias and relative RMSE of estimates of a positive truth.
BiasRmse bias_rmse(const std::vector<double>& estimates, double truth);

struct EcdfPoint {
  double p = 0.0;
  double ecdf = 0.0;
};
std::vector<EcdfPoint> ecdf(std::vector<double> values);

/// One resampling configuration compared against plain SIS.
struct SisrVariant {
  CheckpointPolicy policy;
  ResamplingParams rp;
  std::string label() const;
};

struct MseExperimentSpec {
  ScaledParams scenario;
  int K = 200;
  int datasets = 20;
  int replicates = 100;
  int genes = 100;
  std::size_t nH = 100;
  std::size_t reference_nH = 1000000;
  SamplerConfig sampler;
  std::vector<SisrVariant> variants;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct DatasetReference {
  double log_lik = 0.0;
  double rel_se = 0.0;
  /// Relative standard error of one nH-sized SIS estimate, from the replicates.
  double sis_rel_sd = 0.0;
  bool reference_ok = false;
};

struct MseRow {
  std::string label;  // "sis" or a variant label
  SisrVariant variant;
  bool is_sis = false;
  double mse = 0.0;    // mean over datasets of the mean relative squared error
  double ratio = 1.0;  // mse / mse of SIS
  std::vector<double> per_dataset;
};

struct BoxplotSample {
  std::string cfg;
  int dataset = 0;
  int replicate = 0;
  double loglik = 0.0;
};

struct MseExperimentResult {
  std::vector<DatasetReference> references;
  std::vector<MseRow> rows;  // SIS first, then variants in spec order
  std::vector<BoxplotSample> samples;
  bool references_ok() const;
};

using ExperimentProgress = std::function<void(const std::string& stage, std::size_t done, std::size_t total)>;

/// Relative MSE of SIS and of every SISR variant against a large-nH SIS
/// reference. All estimators of replicate r on dataset d share one seed.
MseExperimentResult mse_ratio_experiment(const MseExperimentSpec& spec, const ExperimentProgress& progress = {});

/// The (alpha, beta, k) grid of resampling settings: alpha in {0.5, 0.7, 1},
/// beta in {0, 0.01}, k in {1, 6}, checkpoints by coalescences.
std::vector<SisrVariant> default_variant_grid();

struct CalibrationSpec {
  ScaledParams truth;
  int K = 200;
  int datasets = 100;
  int loci = 10;
  int genes = 100;
  InferenceConfig inference;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct CalibrationRecord {
  int dataset = 0;
  ScaledParams mle;
  std::array<double, 3> pvalue{};
  std::array<ConfidenceInterval, 3> ci;
};

struct CalibrationResult {
  std::vector<CalibrationRecord> records;
  std::array<KsResult, 3> ks;
  std::array<BiasRmse, 3> error;
  std::array<std::vector<EcdfPoint>, 3> ecdf;
};

/// Repeated simulation and inference at a known parameter point: LRT
/// p-values at the truth, their ECDF and KS uniformity test, and the
/// relative bias and RMSE of the estimates.
CalibrationResult pvalue_ecdf_experiment(const CalibrationSpec& spec, const ExperimentProgress& progress = {});

}  // namespace coalsisr
