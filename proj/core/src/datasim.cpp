#include "coalsisr/datasim.hpp"

#include "coalsisr/error.hpp"
#include "coalsisr/timing.hpp"

namespace coalsisr {

void Dataset::validate() const {
  if (loci.empty()) throw Error("dataset has no loci");
  const int n = loci.front().size();
  for (std::size_t l = 0; l < loci.size(); ++l) {
    if (loci[l].K() != K) throw Error("locus " + std::to_string(l + 1) + " uses a different allele range");
    if (loci[l].size() != n)
      throw Error("locus " + std::to_string(l + 1) + " has " + std::to_string(loci[l].size()) + " genes, expected " +
                  std::to_string(n));
  }
}

namespace {

int draw_stationary(const MutationModel& m, RandomStream& rng) {
  if (m.kind() == MutationModel::Kind::SMM) return 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(m.K())));
  double x = rng.uniform();
  for (int a = 1; a < m.K(); ++a) {
    x -= m.stationary(a);
    if (x < 0.0) return a;
  }
  return m.K();
}

int mutate(const MutationModel& m, int b, RandomStream& rng) {
  if (m.kind() == MutationModel::Kind::PIM) return draw_stationary(m, rng);
  const int a = rng.uniform() < 0.5 ? b - 1 : b + 1;
  return (a < 1 || a > m.K()) ? b : a;
}

}  // namespace

AlleleConfig simulate_locus(int n, const Model& model, RandomStream& rng) {
  if (n < 1) throw Error("simulate_locus: need at least one gene");
  const Demography& demo = model.demography;
  const std::size_t nodes = 2 * static_cast<std::size_t>(n) - 1;
  std::vector<std::size_t> parent(nodes, 0);
  std::vector<double> time(nodes, 0.0);
  std::vector<std::size_t> lineages(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < lineages.size(); ++i) lineages[i] = i;

  double u = 0.0;
  std::size_t next = static_cast<std::size_t>(n);
  while (lineages.size() > 1) {
    const double k = static_cast<double>(lineages.size());
    u += sample_holding_inverse(HazardTerms{k * (k - 1.0), 0.0}, u, demo, rng.uniform());
    const std::size_t i = rng.index(lineages.size());
    std::size_t j = rng.index(lineages.size() - 1);
    if (j >= i) ++j;
    parent[lineages[i]] = parent[lineages[j]] = next;
    time[next] = u;
    lineages[std::min(i, j)] = next;
    lineages.erase(lineages.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
    ++next;
  }

  const MutationModel& mut = model.mutation;
  const double theta = demo.theta();
  std::vector<int> allele(nodes, 0);
  allele[nodes - 1] = draw_stationary(mut, rng);
  for (std::size_t v = nodes - 1; v-- > 0;) {
    int a = allele[parent[v]];
    if (theta > 0.0) {
      const double len = time[parent[v]] - time[v];
      for (double t = rng.exponential(theta); t < len; t += rng.exponential(theta)) a = mutate(mut, a, rng);
    }
    allele[v] = a;
  }

  AlleleConfig h(mut.K());
  for (int leaf = 0; leaf < n; ++leaf) h.add(allele[static_cast<std::size_t>(leaf)]);
  return h;
}

Dataset simulate_dataset(int n_loci, int n, const Model& model, std::uint64_t seed) {
  if (n_loci < 1) throw Error("simulate_dataset: need at least one locus");
  Dataset ds;
  ds.K = model.mutation.K();
  ds.seed = seed;
  ds.loci.reserve(static_cast<std::size_t>(n_loci));
  for (int l = 0; l < n_loci; ++l) {
    RandomStream rng(seed, {stream_tag::locus, static_cast<std::uint64_t>(l)});
    ds.loci.push_back(simulate_locus(n, model, rng));
  }
  return ds;
}

Dataset simulate_dataset(int n_loci, int n, const ScaledParams& params, const MutationModel& mutation,
                         std::uint64_t seed) {
  Dataset ds = simulate_dataset(n_loci, n, Model{Demography::contraction(params), mutation}, seed);
  ds.params = params;
  return ds;
}

}  // namespace coalsisr
