#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "coalsisr/error.hpp"
#include "coalsisr/pcl.hpp"

using namespace coalsisr;

namespace {

// Sum over every unordered pair of genes, genes listed one by one.
double brute_log_pcl(const AlleleConfig& h, double theta) {
  std::vector<int> genes;
  for (int a : h.occupied())
    for (int i = 0; i < h.count(a); ++i) genes.push_back(a);
  const double r = theta / (1.0 + theta + std::sqrt(1.0 + 2.0 * theta));
  double s = 0.0;
  for (std::size_t i = 0; i < genes.size(); ++i)
    for (std::size_t j = i + 1; j < genes.size(); ++j)
      s += std::log(std::pow(r, std::abs(genes[i] - genes[j])) / std::sqrt(1.0 + 2.0 * theta));
  return s;
}

}  // namespace

TEST(Pcl, Rho) {
  EXPECT_EQ(rho(0.0), 0.0);
  EXPECT_GT(rho(1e12), 1.0 - 1e-5);
  EXPECT_NEAR(rho(400.0), 400.0 / (401.0 + std::sqrt(801.0)), 1e-15);
  EXPECT_NEAR(rho(400.0), 0.93175, 1e-5);
  double prev = -1.0;
  for (double t = 0.0; t < 100.0; t += 0.37) {
    EXPECT_GT(rho(t), prev);
    prev = rho(t);
  }
}

TEST(Pcl, PairLikelihood) {
  const PclContext zero(0.0);
  EXPECT_EQ(log_pair_likelihood(7, 7, zero), 0.0);
  const PclContext ctx(400.0);
  EXPECT_NEAR(std::exp(log_pair_likelihood(10, 11, ctx)), 0.032922, 1e-6);
  EXPECT_DOUBLE_EQ(log_pair_likelihood(10, 11, ctx), log_pair_likelihood(11, 10, ctx));
  const double step = log_pair_likelihood(10, 11, ctx) - log_pair_likelihood(10, 10, ctx);
  EXPECT_NEAR(log_pair_likelihood(10, 12, ctx), log_pair_likelihood(10, 10, ctx) + 2.0 * step, 1e-12);
}

TEST(Pcl, LogPclMatchesPairEnumeration) {
  const PclContext ctx(3.0);
  EXPECT_EQ(log_pcl(AlleleConfig(50, {{5, 1}}), ctx), 0.0);
  EXPECT_DOUBLE_EQ(log_pcl(AlleleConfig(50, {{5, 2}}), ctx), log_pair_likelihood(5, 5, ctx));
  const AlleleConfig h(50, {{5, 2}, {6, 1}});
  EXPECT_NEAR(log_pcl(h, ctx), log_pair_likelihood(5, 5, ctx) + 2.0 * log_pair_likelihood(5, 6, ctx), 1e-12);
  std::mt19937_64 g(1);
  std::uniform_int_distribution<int> allele(10, 25), size(2, 30);
  for (int rep = 0; rep < 50; ++rep) {
    AlleleConfig r(50);
    const int n = size(g);
    for (int i = 0; i < n; ++i) r.add(allele(g));
    EXPECT_NEAR(log_pcl(r, ctx), brute_log_pcl(r, 3.0), 1e-9);
  }
}

TEST(Pcl, TranslationInvariance) {
  const PclContext ctx(40.0);
  const AlleleConfig a(100, {{20, 3}, {24, 1}, {30, 2}});
  const AlleleConfig b(100, {{50, 3}, {54, 1}, {60, 2}});
  EXPECT_NEAR(log_pcl(a, ctx), log_pcl(b, ctx), 1e-12);
}

TEST(Pcl, DeltaMatchesFullRecompute) {
  std::mt19937_64 g(2);
  const auto mut = MutationModel::smm(40);
  for (double theta : {0.0, 0.4, 40.0}) {
    const PclContext ctx(theta);
    int checked = 0;
    while (checked < 1000) {
      std::uniform_int_distribution<int> allele(1, 40), size(2, 15);
      AlleleConfig h(40);
      const int centre = allele(g), n = size(g);
      std::uniform_int_distribution<int> jitter(-4, 4);
      for (int i = 0; i < n; ++i) h.add(std::clamp(centre + jitter(g), 1, 40));
      const auto support = backward_support(h, mut);
      const auto& e = support[std::uniform_int_distribution<std::size_t>(0, support.size() - 1)(g)];
      const double full_before = log_pcl(h, ctx), full_after = log_pcl(apply_backward(h, e), ctx);
      const double d = log_pcl_delta(h, e, ctx);
      if (std::isfinite(full_before) && std::isfinite(full_after)) {
        EXPECT_NEAR(full_before + d, full_after, 1e-10) << h.to_string() << ' ' << e.to_string();
      }
      ++checked;
    }
  }
}

TEST(Pcl, DeltaExamplesAndErrors) {
  const PclContext ctx(2.0);
  const AlleleConfig h(20, {{8, 2}});
  EXPECT_NEAR(log_pcl_delta(h, BackwardEvent::coalescence(8), ctx), -log_pair_likelihood(8, 8, ctx), 1e-12);
  EXPECT_THROW(log_pcl_delta(AlleleConfig(20, {{8, 1}}), BackwardEvent::mutation(8, 9), ctx), Error);
}
