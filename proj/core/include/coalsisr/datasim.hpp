#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "coalsisr/model.hpp"
#include "coalsisr/random.hpp"

namespace coalsisr {

struct Dataset {
  int K = 0;
  std::vector<AlleleConfig> loci;
  /// Set when the data were simulated.
  std::optional<ScaledParams> params;
  std::optional<std::uint64_t> seed;

  int genes_per_locus() const { return loci.empty() ? 0 : loci.front().size(); }
  /// Throws unless all loci share K and the gene count.
  void validate() const;
};

/// One locus: coalescent genealogy backward in time, ancestral allele from
/// the stationary law, mutations dropped forward along the branches.
AlleleConfig simulate_locus(int n, const Model& model, RandomStream& rng);

/// Locus l draws from the (seed, locus, l) substream.
Dataset simulate_dataset(int n_loci, int n, const ScaledParams& params, const MutationModel& mutation,
                         std::uint64_t seed);
Dataset simulate_dataset(int n_loci, int n, const Model& model, std::uint64_t seed);

}  // namespace coalsisr
