#pragma once

// Run configuration for the command line tool. Stored as JSON; every object
// rejects keys it does not know.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "coalsisr/inference.hpp"

namespace coalsisr::cli {

struct DemographySpec {
  bool constant = false;
  ScaledParams params;  // theta only when constant

  Demography build() const;
};

struct MutationSpec {
  MutationModel::Kind kind = MutationModel::Kind::SMM;
  int K = 200;
  std::vector<double> psi;  // PIM only

  MutationModel build() const;
};

struct SimulateSpec {
  int loci = 10;
  int genes = 100;
};

struct ExperimentSpec {
  enum class Kind { Mse, Calibration };
  Kind kind = Kind::Mse;
  int datasets = 20;
  int replicates = 100;
  int loci = 10;
  int genes = 100;
  std::size_t reference_nH = 1000000;
  /// Adds ByEvents variants at k = 1 and 6 to the default grid.
  bool event_variants = true;
};

struct RunConfig {
  DemographySpec demography;
  MutationSpec mutation;
  EstimatorConfig estimator;
  InferenceConfig inference;  // estimator, seed and threads are taken from the fields above
  SimulateSpec simulate;
  ExperimentSpec experiment;
  std::optional<std::string> data;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out = "out";

  /// Range checks on every field.
  void validate() const;
  InferenceConfig inference_config() const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config(const std::string& path);

/// FNV-1a of the canonical JSON dump.
std::string config_hash(const RunConfig& c);

}  // namespace coalsisr::cli
