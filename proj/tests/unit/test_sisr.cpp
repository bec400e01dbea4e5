#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "coalsisr/error.hpp"
#include "coalsisr/evalharness.hpp"
#include "coalsisr/sisr.hpp"
#include "coalsisr/stats.hpp"

using namespace coalsisr;

namespace {

std::vector<Particle> collection(const std::vector<double>& log_w) {
  std::vector<Particle> out;
  for (double w : log_w) {
    Particle p(AlleleConfig(10, {{5, 2}}));
    p.log_w = w;
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST(Sisr, ModeNames) {
  EXPECT_EQ(parse_checkpoint_mode("coal"), CheckpointPolicy::Mode::ByCoalescences);
  EXPECT_EQ(parse_checkpoint_mode(to_string(CheckpointPolicy::Mode::ByEvents)), CheckpointPolicy::Mode::ByEvents);
  EXPECT_THROW(parse_checkpoint_mode("time"), Error);
}

TEST(Sisr, ResamplingDistribution) {
  const PclContext ctx(40.0);
  const std::vector<double> lw{std::log(1.0), std::log(4.0)};
  ResamplingParams rp;
  rp.alpha = 1.0;
  rp.beta = 0.0;
  auto v = resampling_distribution(lw, {}, rp, ctx);
  EXPECT_NEAR(v[0], 0.2, 1e-12);
  rp.alpha = 0.0;
  v = resampling_distribution(lw, {}, rp, ctx);
  EXPECT_NEAR(v[0], 0.5, 1e-12);
  rp.alpha = 0.5;
  v = resampling_distribution(lw, {}, rp, ctx);
  EXPECT_NEAR(v[0], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(v[1], 2.0 / 3.0, 1e-12);

  // beta tilts towards configurations with a larger composite likelihood
  const std::vector<AlleleConfig> h{AlleleConfig(50, {{10, 2}}), AlleleConfig(50, {{10, 1}, {30, 1}})};
  rp.alpha = 0.0;
  rp.beta = 0.5;
  v = resampling_distribution(std::vector<double>{0.0, 0.0}, h, rp, ctx);
  const double d = 0.5 * (log_pcl(h[0], ctx) - log_pcl(h[1], ctx));
  EXPECT_NEAR(v[0] / v[1], std::exp(d), 1e-9);
  EXPECT_THROW(resampling_distribution(std::vector<double>{0.0, 0.0, 0.0}, h, ResamplingParams{0.7, 0.01, 10.0}, ctx), Error);
}

TEST(Sisr, ProportionalResamplingEqualizesWeights) {
  const std::vector<double> lw{0.0, std::log(3.0), std::log(0.5), std::log(10.0), -2.0};
  auto ps = collection(lw);
  ResamplingParams rp{1.0, 0.0, 10.0};
  const auto v = resampling_distribution(lw, {}, rp, PclContext(1.0));
  RandomStream rng(4);
  resample(ps, v, rng);
  std::vector<double> after;
  for (const auto& p : ps) after.push_back(p.log_w);
  const double target = logsumexp(lw) - std::log(5.0);
  for (double w : after) EXPECT_NEAR(w, target, 1e-12);
  EXPECT_DOUBLE_EQ(ess(after), 5.0);
}

TEST(Sisr, UniformResamplingKeepsWeightsAndIsUnbiased) {
  const std::vector<double> lw{0.0, std::log(2.0), std::log(7.0)};
  const std::vector<double> v{1.0 / 3, 1.0 / 3, 1.0 / 3};
  double total = 0.0;
  const int reps = 20000;
  RandomStream rng(8);
  for (int r = 0; r < reps; ++r) {
    auto ps = collection(lw);
    resample(ps, v, rng);
    for (const auto& p : ps) {
      // w / (v n) with v = 1/n leaves each copied weight unchanged
      EXPECT_TRUE(std::abs(p.log_w) < 1e-12 || std::abs(p.log_w - std::log(2.0)) < 1e-12 ||
                  std::abs(p.log_w - std::log(7.0)) < 1e-12);
      total += std::exp(p.log_w);
    }
  }
  EXPECT_NEAR(total / reps, 10.0, 0.15);
  auto single = collection({1.5});
  resample(single, std::vector<double>{1.0}, rng);
  EXPECT_DOUBLE_EQ(single[0].log_w, 1.5);
}

TEST(Sisr, MultinomialFrequencies) {
  const std::vector<double> v{0.1, 0.0, 0.6, 0.3};
  RandomStream rng(1);
  const auto idx = multinomial_indices(v, 100000, rng);
  std::array<int, 4> c{};
  for (auto i : idx) ++c[i];
  EXPECT_EQ(c[1], 0);
  EXPECT_NEAR(c[0] / 1e5, 0.1, 0.005);
  EXPECT_NEAR(c[2] / 1e5, 0.6, 0.005);
}

TEST(Sisr, DisabledTriggerReproducesSisExactly) {
  const Model m{Demography::contraction({0.4, 0.25, 400.0}), MutationModel::smm(200)};
  const HistorySampler s(m, {});
  const AlleleConfig h(200, {{100, 8}, {101, 3}, {104, 2}, {109, 1}});
  SisrOptions opt;
  opt.nH = 64;
  opt.seed = 21;
  opt.rp.ess_divisor = std::numeric_limits<double>::infinity();
  const auto a = estimate_sisr(h, s, opt);
  const auto b = estimate_sis(h, s, {64, 21, 1});
  EXPECT_EQ(a.log_lik, b.log_lik);
  EXPECT_EQ(a.n_resamples, 0);
}

TEST(Sisr, TriggerSemanticsOnTheDiagnosticTrace) {
  const Model m{Demography::contraction({0.4, 0.25, 400.0}), MutationModel::smm(200)};
  const HistorySampler s(m, {});
  const AlleleConfig h(200, {{100, 10}, {101, 4}, {103, 3}, {108, 2}, {112, 1}});
  for (auto mode : {CheckpointPolicy::Mode::ByCoalescences, CheckpointPolicy::Mode::ByEvents}) {
    SisrOptions opt;
    opt.nH = 50;
    opt.policy = {mode, 1};
    const auto r = estimate_sisr(h, s, opt);
    ASSERT_FALSE(r.diagnostics.empty());
    EXPECT_DOUBLE_EQ(r.diagnostics.front().ess_minus, 50.0);
    int resamples = 0;
    for (std::size_t i = 0; i < r.diagnostics.size(); ++i) {
      const auto& c = r.diagnostics[i];
      EXPECT_EQ(c.index, static_cast<int>(i) + 1);
      EXPECT_EQ(c.resampled, c.ess_plus < c.ess_minus / 10.0);
      EXPECT_GE(c.ess_plus, 1.0 - 1e-9);
      EXPECT_LE(c.ess_plus, 50.0 + 1e-9);
      if (c.resampled) ++resamples;
      // the reference moves only when the collection was resampled
      if (i + 1 < r.diagnostics.size() && !c.resampled)
        EXPECT_DOUBLE_EQ(r.diagnostics[i + 1].ess_minus, c.ess_minus);
    }
    EXPECT_EQ(r.n_resamples, resamples);
    EXPECT_GT(resamples, 0);
  }
}

TEST(Sisr, ReproducibleAcrossThreadCounts) {
  const Model m{Demography::contraction({0.4, 0.25, 40.0}), MutationModel::smm(200)};
  const HistorySampler s(m, {});
  const AlleleConfig h(200, {{100, 10}, {101, 4}, {103, 3}, {108, 2}});
  SisrOptions opt;
  opt.nH = 40;
  opt.seed = 3;
  const auto a = estimate_sisr(h, s, opt);
  opt.threads = 3;
  const auto b = estimate_sisr(h, s, opt);
  EXPECT_EQ(a.log_lik, b.log_lik);
  EXPECT_EQ(a.n_resamples, b.n_resamples);
}

TEST(Sisr, CoversTheExactLikelihood) {
  const auto mut = MutationModel::smm(5);
  const Model m{Demography::constant(1.0), mut};
  const AlleleConfig h(5, {{1, 1}, {3, 2}, {4, 1}});
  const double exact = exact_likelihood_dp(h, 1.0, mut);
  SamplerConfig cfg;
  cfg.proposal = ProposalKind::GriffithsTavare;
  const HistorySampler s(m, cfg);
  std::vector<double> est;
  for (int r = 0; r < 200; ++r) {
    SisrOptions opt;
    opt.nH = 50;
    opt.seed = 1000 + static_cast<std::uint64_t>(r);
    est.push_back(std::exp(estimate_sisr(h, s, opt).log_lik));
  }
  const double se = std::sqrt(variance(est) / static_cast<double>(est.size()));
  EXPECT_LT(std::abs(mean(est) - exact), 3.5 * se);
}

TEST(Sisr, Errors) {
  const Model m{Demography::constant(1.0), MutationModel::smm(10)};
  const HistorySampler s(m, {});
  SisrOptions opt;
  opt.nH = 0;
  EXPECT_THROW(estimate_sisr(AlleleConfig(10, {{3, 2}}), s, opt), Error);
  opt.nH = 10;
  opt.policy.k = 0;
  EXPECT_THROW(estimate_sisr(AlleleConfig(10, {{3, 2}}), s, opt), Error);
  opt.policy.k = 1;
  opt.rp.alpha = 1.5;
  EXPECT_THROW(estimate_sisr(AlleleConfig(10, {{3, 2}}), s, opt), Error);
}
