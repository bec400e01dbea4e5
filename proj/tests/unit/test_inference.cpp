#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "coalsisr/error.hpp"
#include "coalsisr/inference.hpp"
#include "coalsisr/stats.hpp"

using namespace coalsisr;

namespace {

ParamRanges test_ranges() {
  ParamRanges r;
  r.lo = {0.1, 0.01, 1.0};
  r.hi = {10.0, 1.0, 1000.0};
  return r;
}

template <class F>
LikelihoodSurface surface_from(const ParamRanges& r, int n, F f, std::uint64_t seed = 3) {
  LikelihoodSurface s(r);
  for (const auto& p : design_points(r, n, seed)) {
    SurfacePoint sp;
    sp.phi = p;
    sp.loglik = f(std::array<double, 3>{r.to_unit(Axis::Theta, p.theta), r.to_unit(Axis::D, p.D),
                                        r.to_unit(Axis::ThetaAnc, p.theta_anc)});
    s.add(sp);
  }
  s.fit();
  return s;
}

// Separable concave quadratic in unit coordinates, curvature c on every axis.
struct Bowl {
  std::array<double, 3> m{0.4, 0.55, 0.6};
  double c = 20.0;
  double operator()(const std::array<double, 3>& x) const {
    double v = -3.0;
    for (int i = 0; i < 3; ++i) v -= c * (x[i] - m[i]) * (x[i] - m[i]);
    return v;
  }
};

}  // namespace

TEST(Axis, NamesRoundTrip) {
  for (Axis a : kAxes) EXPECT_EQ(parse_axis(to_string(a)), a);
  EXPECT_THROW(parse_axis("N"), Error);
  EXPECT_EQ(parse_mode("sis"), EstimatorConfig::Mode::SIS);
  EXPECT_EQ(to_string(parse_mode("sisr")), "sisr");
  EXPECT_THROW(parse_mode("smc"), Error);
}

TEST(ParamRanges, UnitMapIsLogLinear) {
  const auto r = test_ranges();
  EXPECT_NEAR(r.to_unit(Axis::Theta, 1.0), 0.5, 1e-12);
  EXPECT_NEAR(r.from_unit(Axis::ThetaAnc, 1.0 / 3.0), 10.0, 1e-9);
  for (double t : {0.0, 0.2, 0.77, 1.0}) EXPECT_NEAR(r.to_unit(Axis::D, r.from_unit(Axis::D, t)), t, 1e-12);
  EXPECT_NEAR(r.from_unit(Axis::Theta, 1.5), 10.0, 1e-12);
}

TEST(ParamRanges, ValidationRejectsBadBounds) {
  auto r = test_ranges();
  r.lo[0] = 0.0;
  EXPECT_THROW(r.validate(), Error);
  r = test_ranges();
  r.hi[1] = 0.001;
  EXPECT_THROW(r.validate(), Error);
  r = test_ranges();
  r.hi[2] = INFINITY;
  EXPECT_THROW(r.validate(), Error);
}

TEST(Design, LatinHypercubeStrata) {
  const auto r = test_ranges();
  const int n = 37;
  const auto pts = design_points(r, n, 11);
  ASSERT_EQ(pts.size(), static_cast<std::size_t>(n));
  for (const auto& p : pts) EXPECT_TRUE(r.contains(p));
  for (Axis a : kAxes) {
    std::set<int> strata;
    for (const auto& p : pts) strata.insert(static_cast<int>(std::floor(r.to_unit(a, coordinate(p, a)) * n)));
    EXPECT_EQ(strata.size(), static_cast<std::size_t>(n));
  }
  const auto again = design_points(r, n, 11);
  EXPECT_EQ(again[5].theta, pts[5].theta);
  EXPECT_NE(design_points(r, n, 12)[5].theta, pts[5].theta);
  EXPECT_THROW(design_points(r, 0, 1), Error);
}

TEST(Surface, ReproducesQuadratics) {
  const auto r = test_ranges();
  auto f = [](const std::array<double, 3>& x) {
    return 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[2] - 3.0 * x[0] * x[0] + x[0] * x[1] - 2.0 * x[2] * x[2] + 0.7 * x[1] * x[2];
  };
  const auto s = surface_from(r, 120, f);
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    const std::array<double, 3> x{U(g), U(g), U(g)};
    EXPECT_NEAR(s.predict_unit(x), f(x), 1e-5);
  }
}

TEST(Surface, FitRejectsSmallOrDegenerateDesigns) {
  const auto r = test_ranges();
  LikelihoodSurface s(r);
  for (int i = 0; i < 9; ++i) s.add({{1.0, 0.1, 10.0 + i}, 0.0, std::nullopt, 1});
  EXPECT_THROW(s.fit(), Error);
  LikelihoodSurface flat(r);
  for (int i = 0; i < 40; ++i) flat.add({{1.0, 0.1 + 0.01 * i, 10.0 + i}, 0.0, std::nullopt, 1});
  EXPECT_THROW(flat.fit(), Error);
  LikelihoodSurface bad(r);
  for (const auto& p : design_points(r, 30, 1)) bad.add({p, NAN, std::nullopt, 1});
  EXPECT_THROW(bad.fit(), Error);
  EXPECT_THROW(LikelihoodSurface(r).predict({1.0, 0.1, 10.0}), Error);
}

TEST(Surface, DuplicateRmse) {
  LikelihoodSurface s(test_ranges());
  EXPECT_FALSE(s.duplicate_rmse().has_value());
  s.add({{1.0, 0.1, 10.0}, -10.0, -12.0, 1});
  s.add({{2.0, 0.1, 10.0}, -10.0, -10.0, 1});
  s.add({{3.0, 0.1, 10.0}, -10.0, std::nullopt, 1});
  ASSERT_TRUE(s.duplicate_rmse().has_value());
  EXPECT_NEAR(*s.duplicate_rmse(), 1.0, 1e-12);
}

TEST(Surface, RetainsOnlyPointsNearTheTop) {
  const auto r = test_ranges();
  const Bowl b;
  LikelihoodSurface s(r);
  for (const auto& p : design_points(r, 200, 3))
    s.add({p, b({r.to_unit(Axis::Theta, p.theta), r.to_unit(Axis::D, p.D), r.to_unit(Axis::ThetaAnc, p.theta_anc)}),
           std::nullopt, 1});
  s.fit();
  EXPECT_EQ(s.retained().size(), 200u);

  s.set_retain_drop(4.0);
  s.fit();
  double top = -INFINITY;
  for (const auto& p : s.points()) top = std::max(top, p.loglik);
  std::size_t within = 0;
  for (const auto& p : s.points()) within += p.loglik >= top - 4.0;
  ASSERT_GT(within, 30u);
  EXPECT_EQ(s.retained().size(), within);
  for (std::size_t i : s.retained()) EXPECT_GE(s.points()[i].loglik, top - 4.0);
  // the bowl is still a quadratic on the retained set
  EXPECT_NEAR(s.predict_unit(b.m), b(b.m), 1e-6);

  s.set_retain_drop(1e-9);
  s.fit();
  EXPECT_EQ(s.retained().size(), 30u);
}

TEST(Minimize, FindsInteriorAndBoundaryMinima) {
  double fmin = 0.0;
  const std::function<double(const std::vector<double>&)> bowl = [](const std::vector<double>& x) {
    return (x[0] - 0.3) * (x[0] - 0.3) + 2.0 * (x[1] - 0.7) * (x[1] - 0.7) + 1.0;
  };
  auto x = minimize_unit(bowl, {0.9, 0.1}, 0.1, &fmin);
  EXPECT_NEAR(x[0], 0.3, 1e-3);
  EXPECT_NEAR(x[1], 0.7, 1e-3);
  EXPECT_NEAR(fmin, 1.0, 1e-6);
  const std::function<double(const std::vector<double>&)> slope = [](const std::vector<double>& x) {
    return -x[0] + (x[1] - 0.5) * (x[1] - 0.5);
  };
  x = minimize_unit(slope, {0.5, 0.5}, 0.1, &fmin);
  EXPECT_NEAR(x[0], 1.0, 1e-3);
  EXPECT_NEAR(x[1], 0.5, 1e-2);
}

TEST(Maximize, RecoversBowlPeak) {
  const auto r = test_ranges();
  Bowl b;
  auto s = surface_from(r, 150, b);
  const auto mle = smooth_and_maximize(s);
  EXPECT_NEAR(r.to_unit(Axis::Theta, mle.phi.theta), b.m[0], 1e-3);
  EXPECT_NEAR(r.to_unit(Axis::D, mle.phi.D), b.m[1], 1e-3);
  EXPECT_NEAR(r.to_unit(Axis::ThetaAnc, mle.phi.theta_anc), b.m[2], 1e-3);
  EXPECT_NEAR(mle.loglik, -3.0, 1e-5);

  LikelihoodSurface few(r);
  for (const auto& p : design_points(r, 15, 2)) few.add({p, 0.0, std::nullopt, 1});
  EXPECT_THROW(smooth_and_maximize(few), Error);
}

TEST(Profile, MaximizesOverOtherAxes) {
  const auto r = test_ranges();
  Bowl b;
  const auto s = surface_from(r, 150, b);
  const double t = 0.2;
  ScaledParams arg;
  const double pl = profile_loglik(s, Axis::Theta, r.from_unit(Axis::Theta, t), nullptr, &arg);
  EXPECT_NEAR(pl, -3.0 - b.c * (t - b.m[0]) * (t - b.m[0]), 1e-4);
  EXPECT_NEAR(r.to_unit(Axis::D, arg.D), b.m[1], 2e-3);
  EXPECT_THROW(profile_loglik(s, Axis::Theta, 100.0), Error);
}

TEST(Profile, CurveIsAnchoredAtTheMaximum) {
  const auto r = test_ranges();
  auto s = surface_from(r, 150, Bowl{});
  const auto mle = smooth_and_maximize(s);
  const auto grid = log_grid(r.lo[1], r.hi[1], 9);
  ASSERT_EQ(grid.size(), 9u);
  EXPECT_NEAR(grid.front(), 0.01, 1e-15);
  EXPECT_NEAR(grid[4], 0.1, 1e-12);
  const auto c = profile_curve(s, Axis::D, grid, mle);
  ASSERT_EQ(c.log_ratio.size(), grid.size());
  for (double v : c.log_ratio) EXPECT_LE(v, 1e-12);
  EXPECT_THROW(log_grid(0.0, 1.0, 3), Error);
}

TEST(ConfidenceInterval, HalfWidthMatchesCurvature) {
  const auto r = test_ranges();
  Bowl b;
  auto s = surface_from(r, 150, b);
  const auto mle = smooth_and_maximize(s);
  const double half = std::sqrt(chi2_1_quantile(0.95) / (2.0 * b.c));
  for (Axis a : kAxes) {
    const auto i = static_cast<std::size_t>(a);
    const auto ci = confidence_interval(s, a, mle, 0.95);
    EXPECT_FALSE(ci.uninformative());
    EXPECT_NEAR(r.to_unit(a, ci.lower), b.m[i] - half, 2e-3) << to_string(a);
    EXPECT_NEAR(r.to_unit(a, ci.upper), b.m[i] + half, 2e-3) << to_string(a);
    EXPECT_LE(ci.lower, ci.estimate);
    EXPECT_GE(ci.upper, ci.estimate);
  }
}

TEST(ConfidenceInterval, NestedInLevel) {
  const auto r = test_ranges();
  auto s = surface_from(r, 150, Bowl{});
  const auto mle = smooth_and_maximize(s);
  const auto c90 = confidence_interval(s, Axis::Theta, mle, 0.90);
  const auto c95 = confidence_interval(s, Axis::Theta, mle, 0.95);
  const auto c99 = confidence_interval(s, Axis::Theta, mle, 0.99);
  EXPECT_LT(c95.lower, c90.lower);
  EXPECT_GT(c95.upper, c90.upper);
  EXPECT_LT(c99.lower, c95.lower);
  EXPECT_GT(c99.upper, c95.upper);
}

TEST(ConfidenceInterval, FlatAxisIsOpen) {
  const auto r = test_ranges();
  Bowl b;
  auto f = [&](const std::array<double, 3>& x) { return -b.c * (x[0] - 0.5) * (x[0] - 0.5) - 0.01 * x[1]; };
  auto s = surface_from(r, 150, f);
  const auto mle = smooth_and_maximize(s);
  const auto ci_d = confidence_interval(s, Axis::D, mle, 0.95);
  EXPECT_TRUE(ci_d.uninformative());
  EXPECT_TRUE(ci_d.lower_open);
  EXPECT_TRUE(ci_d.upper_open);
  EXPECT_NEAR(ci_d.lower, r.lo[1], 1e-9);
  EXPECT_FALSE(confidence_interval(s, Axis::Theta, mle, 0.95).uninformative());
}

TEST(ConfidenceInterval, FlatSurfaceWithNoiseIsUninformative) {
  const auto r = test_ranges();
  std::mt19937_64 g(9);
  std::normal_distribution<double> N(0.0, 0.05);
  auto s = surface_from(r, 150, [&](const std::array<double, 3>&) { return -50.0 + N(g); });
  const auto mle = smooth_and_maximize(s);
  for (Axis a : kAxes) EXPECT_TRUE(confidence_interval(s, a, mle, 0.95).uninformative()) << to_string(a);
}

TEST(Lrt, PValuesFollowChiSquare) {
  const auto r = test_ranges();
  Bowl b;
  auto s = surface_from(r, 150, b);
  const auto mle = smooth_and_maximize(s);
  EXPECT_NEAR(lrt_pvalue(s, Axis::Theta, mle.phi.theta, mle), 1.0, 1e-3);
  // 2 c d^2 = 3.8415 gives p = 0.05
  const double d = std::sqrt(chi2_1_quantile(0.95) / (2.0 * b.c));
  const double v = r.from_unit(Axis::ThetaAnc, b.m[2] + d);
  EXPECT_NEAR(lrt_pvalue(s, Axis::ThetaAnc, v, mle), 0.05, 2e-3);
}

TEST(RefineRanges, ShrinksAroundEstimate) {
  const auto base = test_ranges();
  Maximum mle{{1.0, 0.1, 10.0}, -5.0};
  std::array<ConfidenceInterval, 3> ci;
  ci[0].lower = 0.5;
  ci[0].upper = 2.0;
  ci[1].lower = 0.001;
  ci[1].upper = 10.0;
  ci[2].lower = 9.9;
  ci[2].upper = 10.1;
  const auto out = refine_ranges(base, mle, ci);
  EXPECT_NEAR(out.lo[0], 0.25, 1e-12);
  EXPECT_NEAR(out.hi[0], 4.0, 1e-12);
  EXPECT_NEAR(out.lo[1], base.lo[1], 1e-15);
  EXPECT_NEAR(out.hi[1], base.hi[1], 1e-14);
  // floor of 5% of the axis length on each side, doubled
  const double w = 0.1 * std::log(1000.0);
  EXPECT_NEAR(std::log(out.hi[2] / out.lo[2]), 2.0 * w, 1e-9);
}

TEST(Multilocus, SumsPerLocusEstimates) {
  const auto mut = MutationModel::smm(30);
  Dataset d;
  d.K = 30;
  d.loci = {AlleleConfig(30, {{14, 3}, {15, 2}}), AlleleConfig(30, {{10, 1}, {12, 4}})};
  const ScaledParams phi{1.0, 0.3, 5.0};
  EstimatorConfig cfg;
  cfg.mode = EstimatorConfig::Mode::SIS;
  cfg.nH = 200;
  const auto total = multilocus_loglik(phi, d, mut, cfg, 77);
  const Model model{Demography::contraction(phi), mut};
  double sum = 0.0;
  for (std::size_t l = 0; l < d.loci.size(); ++l)
    sum += estimate_locus(d.loci[l], model, cfg, derive_seed(77, {stream_tag::locus, l})).log_lik;
  EXPECT_DOUBLE_EQ(total.log_lik, sum);
  EXPECT_TRUE(total.se_defined);
  EXPECT_GT(total.rel_se, 0.0);

  const HistorySampler sampler(model, cfg.sampler);
  const auto direct = estimate_sis(d.loci[0], sampler, {cfg.nH, 5, 1});
  EXPECT_DOUBLE_EQ(estimate_locus(d.loci[0], model, cfg, 5).log_lik, direct.log_lik);
  EXPECT_THROW(multilocus_loglik(phi, Dataset{}, mut, cfg, 1), Error);
}

TEST(Infer, SmallRunProducesConsistentOutput) {
  const auto mut = MutationModel::smm(40);
  const auto data = simulate_dataset(3, 12, ScaledParams{1.0, 0.3, 5.0}, mut, 21);
  InferenceConfig cfg;
  cfg.ranges.lo = {0.2, 0.05, 0.5};
  cfg.ranges.hi = {5.0, 2.0, 50.0};
  cfg.points_per_round = 40;
  cfg.rounds = 2;
  cfg.profile_points = 5;
  cfg.estimator.nH = 20;
  cfg.seed = 4;
  int calls = 0;
  const auto res = infer(data, mut, cfg, [&](int, std::size_t, std::size_t) { ++calls; });
  EXPECT_GT(calls, 0);
  EXPECT_EQ(res.surface.points().size(), 80u);
  EXPECT_TRUE(cfg.ranges.contains(res.mle.phi));
  EXPECT_TRUE(res.lik_rmse.has_value());
  for (Axis a : kAxes) {
    const auto i = static_cast<std::size_t>(a);
    EXPECT_LE(res.ci[i].lower, res.ci[i].estimate * (1 + 1e-9));
    EXPECT_GE(res.ci[i].upper, res.ci[i].estimate * (1 - 1e-9));
    EXPECT_EQ(res.profiles[i].grid.size(), 5u);
  }
  const auto again = infer(data, mut, cfg);
  EXPECT_DOUBLE_EQ(again.mle.loglik, res.mle.loglik);

  cfg.points_per_round = 10;
  EXPECT_THROW(infer(data, mut, cfg), Error);
}
