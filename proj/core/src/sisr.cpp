#include "coalsisr/sisr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coalsisr/error.hpp"
#include "coalsisr/parallel.hpp"
#include "coalsisr/stats.hpp"

namespace coalsisr {

std::string to_string(CheckpointPolicy::Mode m) {
  return m == CheckpointPolicy::Mode::ByCoalescences ? "coal" : "event";
}

CheckpointPolicy::Mode parse_checkpoint_mode(std::string_view name) {
  if (name == "coal") return CheckpointPolicy::Mode::ByCoalescences;
  if (name == "event") return CheckpointPolicy::Mode::ByEvents;
  throw Error("unknown checkpoint mode '" + std::string(name) + "' (expected coal or event)");
}

void ResamplingParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error("beta must lie in [0, 1]");
  if (!(ess_divisor > 0.0)) throw Error("ESS divisor must be positive");
}

std::vector<double> resampling_distribution(std::span<const double> log_w, std::span<const AlleleConfig> configs,
                                            const ResamplingParams& rp, const PclContext& ctx) {
  if (log_w.empty()) throw Error("resampling distribution of an empty collection");
  if (rp.beta != 0.0 && configs.size() != log_w.size())
    throw Error("resampling distribution: weights and configurations differ in length");
  std::vector<double> score(log_w.size());
  for (std::size_t j = 0; j < log_w.size(); ++j) {
    score[j] = rp.alpha == 0.0 ? 0.0 : rp.alpha * log_w[j];
    if (rp.beta != 0.0) score[j] += rp.beta * log_pcl(configs[j], ctx);
  }
  const double lse = logsumexp(score);
  if (!std::isfinite(lse)) throw Error("resampling distribution underflowed");
  for (double& s : score) s = std::exp(s - lse);
  return score;
}

std::vector<std::size_t> multinomial_indices(std::span<const double> v, std::size_t n, RandomStream& rng) {
  std::vector<double> cum(v.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) cum[i] = (acc += v[i]);
  std::vector<std::size_t> out(n);
  for (auto& idx : out) {
    const double x = rng.uniform() * acc;
    idx = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), x) - cum.begin());
    idx = std::min(idx, v.size() - 1);
    while (v[idx] <= 0.0 && idx > 0) --idx;
  }
  return out;
}

void resample(std::vector<Particle>& particles, std::span<const double> v, RandomStream& rng) {
  if (v.size() != particles.size()) throw Error("resample: distribution and collection differ in length");
  const std::size_t n = particles.size();
  const auto picks = multinomial_indices(v, n, rng);
  const double log_n = std::log(static_cast<double>(n));
  std::vector<Particle> next;
  next.reserve(n);
  for (std::size_t j : picks) {
    next.push_back(particles[j]);
    next.back().log_w = particles[j].log_w - std::log(v[j]) - log_n;
  }
  particles = std::move(next);
}

EstimateResult estimate_sisr(const AlleleConfig& h0, const HistorySampler& sampler, const SisrOptions& opt) {
  if (opt.nH == 0) throw Error("nH must be at least 1");
  if (opt.policy.k < 1) throw Error("checkpoint interval k must be at least 1");
  opt.rp.validate();
  const std::size_t nH = opt.nH;
  const bool by_coal = opt.policy.mode == CheckpointPolicy::Mode::ByCoalescences;
  const PclContext ctx(sampler.model().demography.ancestral_theta());

  std::vector<Particle> particles(nH, Particle(h0));
  std::vector<RandomStream> rngs;
  rngs.reserve(nH);
  for (std::size_t j = 0; j < nH; ++j) rngs.emplace_back(opt.seed, std::initializer_list<std::uint64_t>{stream_tag::particle, j});
  RandomStream resample_rng(opt.seed, {stream_tag::resample});
  const unsigned workers = std::max(1u, opt.threads);
  std::vector<std::vector<Candidate>> scratch(workers);

  EstimateResult out;
  std::vector<double> log_w(nH);
  auto collect = [&] {
    for (std::size_t j = 0; j < nH; ++j) log_w[j] = particles[j].log_w;
  };
  double ess_minus = static_cast<double>(nH);
  std::vector<std::size_t> active;
  for (int index = 1;; ++index) {
    parallel_for(nH, workers, [&](std::size_t begin, std::size_t end, unsigned w) {
      for (std::size_t j = begin; j < end; ++j) {
        Particle& p = particles[j];
        const int start = by_coal ? p.n_coal : p.n_events;
        while (!p.at_mrca() && (by_coal ? p.n_coal : p.n_events) - start < opt.policy.k)
          sampler.step(p, rngs[j], scratch[w]);
      }
    });
    active.clear();
    for (std::size_t j = 0; j < nH; ++j)
      if (!particles[j].at_mrca()) active.push_back(j);
    if (active.empty()) break;

    collect();
    CheckpointRecord rec{index, ess(log_w), ess_minus, false};
    if (rec.ess_plus < ess_minus / opt.rp.ess_divisor) {
      std::vector<Particle> pool;
      std::vector<double> pool_w;
      std::vector<AlleleConfig> pool_h;
      pool.reserve(active.size());
      for (std::size_t j : active) {
        pool.push_back(particles[j]);
        pool_w.push_back(particles[j].log_w);
        if (opt.rp.beta != 0.0) pool_h.push_back(particles[j].config);
      }
      const auto v = resampling_distribution(pool_w, pool_h, opt.rp, ctx);
      resample(pool, v, resample_rng);
      for (std::size_t i = 0; i < active.size(); ++i) particles[active[i]] = std::move(pool[i]);
      collect();
      ess_minus = ess(log_w);
      rec.resampled = true;
      ++out.n_resamples;
    }
    out.diagnostics.push_back(rec);
  }

  for (auto& p : particles) sampler.finish(p);
  collect();
  const auto s = summarize_log_weights(log_w);
  out.log_lik = s.log_mean;
  out.log_se = s.log_se;
  out.rel_se = s.rel_se;
  out.se_defined = s.se_defined;
  out.ess_final = s.ess;
  out.nH = nH;
  return out;
}

}  // namespace coalsisr
