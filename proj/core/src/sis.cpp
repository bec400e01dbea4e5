#include "coalsisr/sis.hpp"

#include <cmath>

#include "coalsisr/error.hpp"
#include "coalsisr/parallel.hpp"
#include "coalsisr/stats.hpp"

namespace coalsisr {

HistorySampler::HistorySampler(const Model& model, const SamplerConfig& cfg)
    : cfg_(cfg), proposal_(model, cfg.proposal, cfg.pcl_beta) {}

void HistorySampler::step(Particle& p, RandomStream& rng, std::vector<Candidate>& scratch) const {
  if (p.at_mrca()) return;
  const Model& m = proposal_.model();
  const HazardTerms r = HazardTerms::of(p.config, m);
  p.u += sample_holding(cfg_.holding, r, p.u, m.demography, rng);
  const ProposalStep s = proposal_.propose(p.config, p.u, r.at(p.u, m.demography), rng, scratch);
  apply_backward_inplace(p.config, s.event);
  p.log_w += s.log_increment;
  ++p.n_events;
  if (s.event.is_coalescence()) ++p.n_coal;
}

void HistorySampler::finish(Particle& p) const {
  if (!p.at_mrca()) throw Error("finish: particle has not reached the MRCA");
  p.log_w += std::log(model().mutation.stationary(p.config.occupied().front()));
}

double run_history(const AlleleConfig& h0, const HistorySampler& sampler, RandomStream& rng,
                   std::vector<TracePoint>* trace) {
  if (h0.empty()) throw Error("run_history: empty sample");
  Particle p(h0);
  std::vector<Candidate> scratch;
  if (trace) trace->clear();
  while (!p.at_mrca()) {
    const int before = p.n_coal;
    sampler.step(p, rng, scratch);
    if (trace && p.n_coal != before) trace->push_back({p.u, p.config.size(), p.log_w});
  }
  sampler.finish(p);
  return p.log_w;
}

std::vector<double> sis_log_weights(const AlleleConfig& h0, const HistorySampler& sampler, const SisOptions& opt) {
  if (opt.nH == 0) throw Error("nH must be at least 1");
  std::vector<double> log_w(opt.nH);
  parallel_for(opt.nH, opt.threads, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t j = begin; j < end; ++j) {
      RandomStream rng(opt.seed, {stream_tag::particle, j});
      log_w[j] = run_history(h0, sampler, rng);
    }
  });
  return log_w;
}

EstimateResult estimate_sis(const AlleleConfig& h0, const HistorySampler& sampler, const SisOptions& opt) {
  const auto log_w = sis_log_weights(h0, sampler, opt);
  const auto s = summarize_log_weights(log_w);
  EstimateResult out;
  out.log_lik = s.log_mean;
  out.log_se = s.log_se;
  out.rel_se = s.rel_se;
  out.se_defined = s.se_defined;
  out.ess_final = s.ess;
  out.nH = opt.nH;
  return out;
}

std::vector<TrajectoryRow> weight_trajectory(const AlleleConfig& h0, const HistorySampler& sampler,
                                             const SisOptions& opt) {
  if (opt.nH < 2) throw Error("weight_trajectory needs at least two replicates");
  std::vector<std::vector<TracePoint>> traces(opt.nH);
  parallel_for(opt.nH, opt.threads, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t j = begin; j < end; ++j) {
      RandomStream rng(opt.seed, {stream_tag::particle, j});
      run_history(h0, sampler, rng, &traces[j]);
    }
  });
  const std::size_t n_coal = traces.front().size();
  std::vector<TrajectoryRow> rows;
  rows.reserve(n_coal * opt.nH);
  std::vector<double> column(opt.nH);
  std::vector<double> norm(n_coal * opt.nH);
  for (std::size_t i = 0; i < n_coal; ++i) {
    for (std::size_t j = 0; j < opt.nH; ++j) column[j] = traces[j][i].log_w;
    const double lse = logsumexp(column);
    for (std::size_t j = 0; j < opt.nH; ++j) norm[j * n_coal + i] = column[j] - lse;
  }
  for (std::size_t j = 0; j < opt.nH; ++j)
    for (std::size_t i = 0; i < n_coal; ++i)
      rows.push_back({j, static_cast<int>(i + 1), traces[j][i].u, norm[j * n_coal + i]});
  return rows;
}

}  // namespace coalsisr
