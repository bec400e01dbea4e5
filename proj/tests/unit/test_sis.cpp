#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "coalsisr/error.hpp"
#include "coalsisr/evalharness.hpp"
#include "coalsisr/sis.hpp"

using namespace coalsisr;

namespace {

// Probability of the unordered pair {x, y} by integrating over the pair's
// coalescence time T: the two branches carry 2 theta T of mutation, so the
// types differ by the kernel exp(2 theta T (P - I)) started from psi.
double two_gene_oracle(const Model& m, int x, int y) {
  const int K = m.mutation.K();
  Eigen::MatrixXd P(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) P(i, j) = m.mutation.p(i + 1, j + 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  const auto& V = es.eigenvectors();
  const auto& ev = es.eigenvalues();
  const double theta = m.demography.theta();
  double C = 0.0, sum = 0.0, t0 = 0.0;
  while (2.0 * C < 60.0) {
    const double dt = 1e-3 / std::max(m.demography.coal_scale(t0), 4.0 * theta);
    const double t = t0 + 0.5 * dt;
    t0 += dt;
    const double c = m.demography.coal_scale(t);
    const double density = 2.0 * c * std::exp(-2.0 * (C + 0.5 * c * dt));
    double kernel = 0.0;
    for (int k = 0; k < K; ++k) kernel += V(x - 1, k) * V(y - 1, k) * std::exp(2.0 * theta * t * (ev(k) - 1.0));
    sum += density * kernel * dt;
    C += c * dt;
  }
  return sum * m.mutation.stationary(x) * (x == y ? 1.0 : 2.0);
}

double z_score(const EstimateResult& r, double exact) {
  const double est = std::exp(r.log_lik);
  return (est - exact) / (est * r.rel_se);
}

}  // namespace

TEST(Sis, SingleGeneIsStationaryProbability) {
  const Model m{Demography::constant(1.0), MutationModel::smm(200)};
  const HistorySampler s(m, {});
  RandomStream rng(1);
  EXPECT_DOUBLE_EQ(run_history(AlleleConfig(200, {{77, 1}}), s, rng), std::log(1.0 / 200));
  const auto r = estimate_sis(AlleleConfig(200, {{77, 1}}), s, {1, 1, 1});
  EXPECT_DOUBLE_EQ(r.log_lik, std::log(1.0 / 200));
  EXPECT_FALSE(r.se_defined);
  EXPECT_THROW(estimate_sis(AlleleConfig(200, {{77, 1}}), s, {0, 1, 1}), Error);
}

TEST(Sis, ReproducibleAndThreadIndependent) {
  const Model m{Demography::contraction({0.4, 0.25, 40.0}), MutationModel::smm(200)};
  const HistorySampler s(m, {});
  const AlleleConfig h(200, {{90, 5}, {92, 3}, {95, 1}});
  const auto a = estimate_sis(h, s, {300, 5, 1});
  const auto b = estimate_sis(h, s, {300, 5, 3});
  const auto c = estimate_sis(h, s, {300, 6, 1});
  EXPECT_EQ(a.log_lik, b.log_lik);
  EXPECT_NE(a.log_lik, c.log_lik);
}

TEST(Sis, PimOptimalHasZeroVariance) {
  const auto mut = MutationModel::pim({0.1, 0.2, 0.3, 0.4});
  const Model m{Demography::constant(0.7), mut};
  SamplerConfig cfg;
  cfg.proposal = ProposalKind::PimOptimal;
  const HistorySampler s(m, cfg);
  const AlleleConfig h(4, {{1, 2}, {3, 4}, {4, 1}});
  const auto w = sis_log_weights(h, s, {50, 3, 1});
  for (double x : w) EXPECT_NEAR(x, w.front(), 1e-12);
  EXPECT_NEAR(w.front(), std::log(pim_likelihood(h, 0.7, mut)), 1e-10);
}

TEST(Sis, MatchesExactDpAtConstantSize) {
  const auto mut = MutationModel::smm(5);
  const Model m{Demography::constant(1.0), mut};
  const AlleleConfig h(5, {{2, 2}, {3, 1}, {5, 1}});
  const double exact = exact_likelihood_dp(h, 1.0, mut);
  for (auto kind : {ProposalKind::GriffithsTavare, ProposalKind::PclGuided, ProposalKind::StephensDonnelly}) {
    SamplerConfig cfg;
    cfg.proposal = kind;
    const auto r = estimate_sis(h, HistorySampler(m, cfg), {20000, 11, 1});
    EXPECT_LT(std::abs(z_score(r, exact)), 4.0) << to_string(kind);
  }
}

TEST(Sis, MatchesTwoGeneOracleUnderContraction) {
  for (const ScaledParams& p : {ScaledParams{0.4, 0.25, 40.0}, ScaledParams{2.0, 0.5, 0.2}}) {
    const Model m{Demography::contraction(p), MutationModel::smm(40)};
    const AlleleConfig h(40, {{20, 1}, {22, 1}});
    const double exact = two_gene_oracle(m, 20, 22);
    for (auto kind : {ProposalKind::GriffithsTavare, ProposalKind::StephensDonnelly}) {
      SamplerConfig cfg;
      cfg.proposal = kind;
      const auto r = estimate_sis(h, HistorySampler(m, cfg), {20000, 12, 1});
      EXPECT_LT(std::abs(z_score(r, exact)), 4.0) << to_string(kind) << " theta=" << p.theta;
    }
  }
}

TEST(Sis, WeightsDoNotDependOnTheHoldingSamplerAtConstantSize) {
  const Model m{Demography::constant(0.8), MutationModel::smm(200)};
  SamplerConfig a, b;
  b.holding = HoldingStrategy::Thinning;
  const AlleleConfig h(200, {{50, 3}, {52, 2}});
  // the proposal never looks at time under constant size, but the holding
  // samplers consume different amounts of randomness; compare laws instead
  const auto wa = sis_log_weights(h, HistorySampler(m, a), {4000, 1, 1});
  const auto wb = sis_log_weights(h, HistorySampler(m, b), {4000, 2, 1});
  EXPECT_GT(ks_two_sample(wa, wb).p_value, 0.001);
}

TEST(Sis, TrajectoryNormalization) {
  const Model m{Demography::contraction({0.4, 0.25, 400.0}), MutationModel::smm(200)};
  const HistorySampler s(m, {});
  const AlleleConfig h(200, {{100, 6}, {101, 2}, {104, 1}});
  const auto rows = weight_trajectory(h, s, {20, 3, 1});
  ASSERT_EQ(rows.size(), 20u * 8u);
  for (int idx = 1; idx <= 8; ++idx) {
    double sum = 0.0;
    for (const auto& r : rows)
      if (r.coal_index == idx) sum += std::exp(r.norm_log_weight);
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  EXPECT_THROW(weight_trajectory(h, s, {1, 3, 1}), Error);
}

TEST(Sis, RunHistoryMatchesManualStepping) {
  const Model m{Demography::contraction({0.4, 0.25, 40.0}), MutationModel::smm(200)};
  const HistorySampler s(m, {});
  const AlleleConfig h(200, {{80, 3}, {83, 2}});
  RandomStream rng(2), replay(2);
  Particle p(h);
  std::vector<Candidate> scratch;
  double prev_u = 0.0;
  while (!p.at_mrca()) {
    s.step(p, rng, scratch);
    EXPECT_GE(p.u, prev_u);
    prev_u = p.u;
    EXPECT_EQ(p.n_coal, h.size() - p.config.size());
  }
  const double before_psi = p.log_w;
  s.finish(p);
  EXPECT_NEAR(p.log_w - before_psi, std::log(1.0 / 200), 1e-15);
  std::vector<TracePoint> trace;
  EXPECT_DOUBLE_EQ(run_history(h, s, replay, &trace), p.log_w);
  ASSERT_EQ(trace.size(), 4u);
  EXPECT_EQ(trace.back().lineages, 1);
}
