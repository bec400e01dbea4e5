#include "coalsisr/inference.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "coalsisr/error.hpp"
#include "coalsisr/parallel.hpp"
#include "coalsisr/stats.hpp"

namespace coalsisr {

std::string to_string(Axis a) {
  switch (a) {
    case Axis::Theta: return "theta";
    case Axis::D: return "D";
    case Axis::ThetaAnc: return "theta_anc";
  }
  return "?";
}

Axis parse_axis(std::string_view name) {
  if (name == "theta") return Axis::Theta;
  if (name == "D") return Axis::D;
  if (name == "theta_anc") return Axis::ThetaAnc;
  throw Error("unknown parameter axis '" + std::string(name) + "'");
}

double coordinate(const ScaledParams& p, Axis a) noexcept {
  switch (a) {
    case Axis::Theta: return p.theta;
    case Axis::D: return p.D;
    case Axis::ThetaAnc: return p.theta_anc;
  }
  return 0.0;
}

void set_coordinate(ScaledParams& p, Axis a, double v) noexcept {
  switch (a) {
    case Axis::Theta: p.theta = v; break;
    case Axis::D: p.D = v; break;
    case Axis::ThetaAnc: p.theta_anc = v; break;
  }
}

std::string to_string(EstimatorConfig::Mode m) { return m == EstimatorConfig::Mode::SIS ? "sis" : "sisr"; }

EstimatorConfig::Mode parse_mode(std::string_view name) {
  if (name == "sis") return EstimatorConfig::Mode::SIS;
  if (name == "sisr") return EstimatorConfig::Mode::SISR;
  throw Error("unknown estimator mode '" + std::string(name) + "' (expected sis or sisr)");
}

EstimateResult estimate_locus(const AlleleConfig& h, const Model& model, const EstimatorConfig& cfg,
                              std::uint64_t seed) {
  const HistorySampler sampler(model, cfg.sampler);
  if (cfg.mode == EstimatorConfig::Mode::SIS) return estimate_sis(h, sampler, {cfg.nH, seed, cfg.threads});
  SisrOptions opt;
  opt.nH = cfg.nH;
  opt.seed = seed;
  opt.threads = cfg.threads;
  opt.policy = cfg.policy;
  opt.rp = cfg.rp;
  return estimate_sisr(h, sampler, opt);
}

EstimateResult multilocus_loglik(const ScaledParams& phi, const Dataset& data, const MutationModel& mutation,
                                 const EstimatorConfig& cfg, std::uint64_t seed) {
  if (data.loci.empty()) throw Error("multilocus likelihood of an empty dataset");
  const Model model{Demography::contraction(phi), mutation};
  EstimateResult total;
  total.se_defined = true;
  double rel2 = 0.0;
  for (std::size_t l = 0; l < data.loci.size(); ++l) {
    const auto r = estimate_locus(data.loci[l], model, cfg, derive_seed(seed, {stream_tag::locus, l}));
    total.log_lik += r.log_lik;
    total.se_defined = total.se_defined && r.se_defined;
    rel2 += r.rel_se * r.rel_se;
    total.n_resamples += r.n_resamples;
    total.ess_final = l == 0 ? r.ess_final : std::min(total.ess_final, r.ess_final);
  }
  total.nH = cfg.nH;
  total.rel_se = std::sqrt(rel2);
  total.log_se = total.se_defined ? total.log_lik + std::log(total.rel_se) : std::numeric_limits<double>::quiet_NaN();
  return total;
}

void ParamRanges::validate() const {
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(lo[a] > 0.0) || !(hi[a] > 0.0) || !std::isfinite(hi[a]))
      throw Error("range for " + to_string(kAxes[a]) + " must have positive finite bounds");
    if (!(hi[a] >= lo[a])) throw Error("range for " + to_string(kAxes[a]) + " is reversed");
  }
}

bool ParamRanges::contains(const ScaledParams& p) const noexcept {
  for (Axis a : kAxes) {
    const double v = coordinate(p, a);
    if (v < lo_of(a) * (1 - 1e-12) || v > hi_of(a) * (1 + 1e-12)) return false;
  }
  return true;
}

double ParamRanges::to_unit(Axis a, double v) const noexcept {
  const double l = std::log(lo_of(a)), h = std::log(hi_of(a));
  return h == l ? 0.5 : (std::log(v) - l) / (h - l);
}

double ParamRanges::from_unit(Axis a, double t) const noexcept {
  const double l = std::log(lo_of(a)), h = std::log(hi_of(a));
  return std::exp(l + std::clamp(t, 0.0, 1.0) * (h - l));
}

std::vector<ScaledParams> design_points(const ParamRanges& ranges, int n, std::uint64_t seed) {
  ranges.validate();
  if (n < 1) throw Error("design needs at least one point");
  RandomStream rng(seed, {stream_tag::design});
  const auto N = static_cast<std::size_t>(n);
  std::vector<ScaledParams> pts(N);
  std::vector<std::size_t> perm(N);
  for (Axis a : kAxes) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = N; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
    for (std::size_t i = 0; i < N; ++i)
      set_coordinate(pts[i], a, ranges.from_unit(a, (static_cast<double>(perm[i]) + rng.uniform()) / n));
  }
  return pts;
}

LikelihoodSurface::LikelihoodSurface(ParamRanges ranges) : ranges_(ranges) { ranges_.validate(); }

void LikelihoodSurface::add(const SurfacePoint& p) {
  points_.push_back(p);
  fitted_ = false;
}

namespace {

constexpr int kCoef = 10;
using Features = Eigen::Matrix<double, kCoef, 1>;

Features quad_features(double z0, double z1, double z2) {
  Features f;
  f << 1.0, z0, z1, z2, z0 * z0, z1 * z1, z2 * z2, z0 * z1, z0 * z2, z1 * z2;
  return f;
}

std::array<double, 3> unit_of(const ParamRanges& r, const ScaledParams& p) {
  return {r.to_unit(Axis::Theta, p.theta), r.to_unit(Axis::D, p.D), r.to_unit(Axis::ThetaAnc, p.theta_anc)};
}

ScaledParams params_of(const ParamRanges& r, const std::array<double, 3>& x) {
  return {r.from_unit(Axis::Theta, x[0]), r.from_unit(Axis::D, x[1]), r.from_unit(Axis::ThetaAnc, x[2])};
}

double dist2(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

void LikelihoodSurface::fit() {
  unit_.clear();
  response_.clear();
  const std::size_t n_all = points_.size();
  if (n_all < static_cast<std::size_t>(kCoef))
    throw Error("surface has " + std::to_string(n_all) + " points; at least 10 are needed for a quadratic smoother");
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < n_all; ++i) {
    const auto& p = points_[i];
    if (!std::isfinite(p.loglik) || (p.loglik_dup && !std::isfinite(*p.loglik_dup)))
      throw Error("surface contains a non-finite log-likelihood");
    order.emplace_back(-(p.loglik_dup ? 0.5 * (p.loglik + *p.loglik_dup) : p.loglik), i);
  }
  std::sort(order.begin(), order.end());
  const std::size_t floor_count = std::min(n_all, std::max<std::size_t>(3 * kCoef, static_cast<std::size_t>(min_neighbors_)));
  retained_.clear();
  for (std::size_t r = 0; r < n_all; ++r)
    if (r < floor_count || -order[r].first >= -order[0].first - retain_drop_) retained_.push_back(order[r].second);
  std::sort(retained_.begin(), retained_.end());

  const std::size_t n = retained_.size();
  std::vector<std::array<double, 3>> xs;
  for (std::size_t i : retained_) {
    const auto& p = points_[i];
    xs.push_back(unit_of(ranges_, p.phi));
    unit_.push_back(xs.back());
    response_.push_back(p.loglik);
    if (p.loglik_dup) {
      unit_.push_back(xs.back());
      response_.push_back(*p.loglik_dup);
    }
  }

  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), kCoef);
  double nn_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    X.row(static_cast<Eigen::Index>(i)) = quad_features(xs[i][0] - 0.5, xs[i][1] - 0.5, xs[i][2] - 0.5).transpose();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) best = std::min(best, dist2(xs[i], xs[j]));
    nn_sum += std::sqrt(best);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < kCoef)
    throw Error("degenerate design: the parameter points do not support a quadratic surface (rank " +
                std::to_string(qr.rank()) + " < 10); add design points or widen the parameter ranges");
  base_bandwidth_ = 1.5 * nn_sum / static_cast<double>(n);
  fitted_ = true;
}

double LikelihoodSurface::predict(const ScaledParams& phi) const { return predict_unit(unit_of(ranges_, phi)); }

double LikelihoodSurface::predict_unit(const std::array<double, 3>& x) const {
  if (!fitted_) throw Error("surface must be fitted before prediction");
  const std::size_t n = unit_.size();
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = dist2(x, unit_[i]);
  std::vector<double> sorted = d2;
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(min_neighbors_, 1)), n) - 1;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
  const double h = std::max(base_bandwidth_, std::sqrt(sorted[k]));
  const double inv = 1.0 / (2.0 * h * h);

  Eigen::Matrix<double, kCoef, kCoef> A = Eigen::Matrix<double, kCoef, kCoef>::Zero();
  Features b = Features::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(-d2[i] * inv);
    if (w < 1e-14) continue;
    const Features f = quad_features(unit_[i][0] - x[0], unit_[i][1] - x[1], unit_[i][2] - x[2]);
    A.selfadjointView<Eigen::Lower>().rankUpdate(f, w);
    b += w * response_[i] * f;
  }
  A = A.selfadjointView<Eigen::Lower>();
  for (int j = 1; j < kCoef; ++j) A(j, j) += 1e-8;
  const Features beta = A.ldlt().solve(b);
  return beta(0);
}

std::optional<double> LikelihoodSurface::duplicate_rmse() const {
  double ss = 0.0;
  std::size_t n = 0;
  for (const auto& p : points_) {
    if (!p.loglik_dup) continue;
    const double d = p.loglik - *p.loglik_dup;
    ss += d * d;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return std::sqrt(ss / (2.0 * static_cast<double>(n)));
}

namespace {

struct GslFn {
  const std::function<double(const std::vector<double>&)>* f;
  std::size_t dim;
};

double gsl_trampoline(const gsl_vector* v, void* params) {
  const auto* g = static_cast<const GslFn*>(params);
  std::vector<double> x(g->dim);
  for (std::size_t i = 0; i < g->dim; ++i) x[i] = std::clamp(gsl_vector_get(v, i), 0.0, 1.0);
  return (*g->f)(x);
}

}  // namespace

std::vector<double> minimize_unit(const std::function<double(const std::vector<double>&)>& f,
                                  std::vector<double> start, double step, double* fmin, int max_iter) {
  const std::size_t dim = start.size();
  for (double& v : start) v = std::clamp(v, 0.0, 1.0);
  if (dim == 0) {
    if (fmin) *fmin = f(start);
    return start;
  }
  GslFn g{&f, dim};
  gsl_multimin_function fn{&gsl_trampoline, dim, &g};
  gsl_vector* x = gsl_vector_alloc(dim);
  gsl_vector* ss = gsl_vector_alloc(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    gsl_vector_set(x, i, start[i]);
    // step toward the interior so the first simplex is not degenerate at a bound
    gsl_vector_set(ss, i, start[i] > 0.5 ? -step : step);
  }
  gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
  gsl_multimin_fminimizer_set(m, &fn, x, ss);
  for (int it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-6) == GSL_SUCCESS) break;
  }
  std::vector<double> best(dim);
  for (std::size_t i = 0; i < dim; ++i) best[i] = std::clamp(gsl_vector_get(m->x, i), 0.0, 1.0);
  if (fmin) *fmin = f(best);
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(ss);
  gsl_vector_free(x);
  return best;
}

namespace {

// Raw points with the highest responses, as starting points.
std::vector<std::array<double, 3>> best_starts(const LikelihoodSurface& s, std::size_t count) {
  std::vector<std::pair<double, std::size_t>> order;
  const auto& pts = s.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double y = pts[i].loglik_dup ? 0.5 * (pts[i].loglik + *pts[i].loglik_dup) : pts[i].loglik;
    order.emplace_back(-y, i);
  }
  std::sort(order.begin(), order.end());
  std::vector<std::array<double, 3>> out;
  for (std::size_t i = 0; i < std::min(count, order.size()); ++i)
    out.push_back(unit_of(s.ranges(), pts[order[i].second].phi));
  out.push_back({0.5, 0.5, 0.5});
  return out;
}

struct GslSilencer {
  gsl_error_handler_t* old;
  GslSilencer() : old(gsl_set_error_handler_off()) {}
  ~GslSilencer() { gsl_set_error_handler(old); }
};

}  // namespace

Maximum smooth_and_maximize(LikelihoodSurface& surface) {
  GslSilencer silence;
  if (surface.points().size() < 20) throw Error("at least 20 surface points are needed before maximization");
  if (!surface.fitted()) surface.fit();
  const std::function<double(const std::vector<double>&)> neg = [&](const std::vector<double>& x) {
    return -surface.predict_unit({x[0], x[1], x[2]});
  };
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> arg;
  for (const auto& s : best_starts(surface, 5)) {
    double v;
    auto x = minimize_unit(neg, {s[0], s[1], s[2]}, 0.1, &v);
    if (v < best) {
      best = v;
      arg = x;
    }
  }
  return {params_of(surface.ranges(), {arg[0], arg[1], arg[2]}), -best};
}

double profile_loglik(const LikelihoodSurface& s, Axis axis, double value, const ScaledParams* hint,
                      ScaledParams* argmax) {
  GslSilencer silence;
  const auto& r = s.ranges();
  if (value < r.lo_of(axis) * (1 - 1e-9) || value > r.hi_of(axis) * (1 + 1e-9))
    throw Error("profile value " + std::to_string(value) + " outside the range of " + to_string(axis));
  const auto ai = static_cast<std::size_t>(axis);
  const double t = r.to_unit(axis, value);
  std::array<std::size_t, 2> free{};
  for (std::size_t i = 0, j = 0; i < 3; ++i)
    if (i != ai) free[j++] = i;
  auto full = [&](const std::vector<double>& y) {
    std::array<double, 3> x{};
    x[ai] = t;
    x[free[0]] = y[0];
    x[free[1]] = y[1];
    return x;
  };
  const std::function<double(const std::vector<double>&)> neg = [&](const std::vector<double>& y) {
    return -s.predict_unit(full(y));
  };
  auto starts = best_starts(s, 3);
  if (hint) starts.push_back(unit_of(r, *hint));
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> arg;
  for (const auto& st : starts) {
    double v;
    auto y = minimize_unit(neg, {st[free[0]], st[free[1]]}, 0.1, &v, 300);
    if (v < best) {
      best = v;
      arg = y;
    }
  }
  if (argmax) *argmax = params_of(r, full(arg));
  return -best;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw Error("invalid log grid");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] = n == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
  return g;
}

ProfileCurve profile_curve(const LikelihoodSurface& s, Axis axis, const std::vector<double>& grid,
                           const Maximum& mle) {
  ProfileCurve c;
  c.axis = axis;
  c.grid = grid;
  std::vector<double> pl;
  for (double v : grid) {
    ScaledParams arg;
    pl.push_back(profile_loglik(s, axis, v, &mle.phi, &arg));
    c.argmax.push_back(arg);
  }
  double top = mle.loglik;
  for (double v : pl) top = std::max(top, v);
  for (double v : pl) c.log_ratio.push_back(v - top);
  return c;
}

ConfidenceInterval confidence_interval(const LikelihoodSurface& s, Axis axis, const Maximum& mle, double level,
                                       int scan_points) {
  const double q = chi2_1_quantile(level);
  const auto& r = s.ranges();
  ConfidenceInterval ci;
  ci.axis = axis;
  ci.level = level;
  ci.estimate = coordinate(mle.phi, axis);
  const double top = std::max(mle.loglik, profile_loglik(s, axis, ci.estimate, &mle.phi));
  const double threshold = top - 0.5 * q;
  const double lo = std::log(r.lo_of(axis)), hi = std::log(r.hi_of(axis)), x0 = std::log(ci.estimate);
  const double step = (hi - lo) / std::max(scan_points, 2);
  auto inside = [&](double lx) { return profile_loglik(s, axis, std::exp(lx), &mle.phi) >= threshold; };

  auto scan = [&](double dir, double bound, bool& open) {
    double prev = x0;
    for (;;) {
      double next = prev + dir * step;
      if ((dir > 0 && next >= bound) || (dir < 0 && next <= bound)) next = bound;
      if (!inside(next)) {
        double a = prev, b = next;
        for (int it = 0; it < 40 && std::abs(b - a) > 1e-6; ++it) {
          const double mid = 0.5 * (a + b);
          (inside(mid) ? a : b) = mid;
        }
        open = false;
        return std::exp(0.5 * (a + b));
      }
      if (next == bound) {
        open = true;
        return std::exp(bound);
      }
      prev = next;
    }
  };
  ci.upper = scan(+1.0, hi, ci.upper_open);
  ci.lower = scan(-1.0, lo, ci.lower_open);
  return ci;
}

double lrt_pvalue(const LikelihoodSurface& s, Axis axis, double value, const Maximum& mle) {
  const double pl = profile_loglik(s, axis, value, &mle.phi);
  const double top = std::max({mle.loglik, pl, profile_loglik(s, axis, coordinate(mle.phi, axis), &mle.phi)});
  return chi2_1_sf(2.0 * (top - pl));
}

ParamRanges refine_ranges(const ParamRanges& base, const Maximum& mle, const std::array<ConfidenceInterval, 3>& ci) {
  ParamRanges out = base;
  for (Axis a : kAxes) {
    const auto i = static_cast<std::size_t>(a);
    const double l = std::log(base.lo[i]), h = std::log(base.hi[i]);
    const double half = std::max(0.5 * (std::log(ci[i].upper) - std::log(ci[i].lower)), 0.05 * (h - l));
    const double c = std::log(coordinate(mle.phi, a));
    out.lo[i] = std::exp(std::max(l, c - 2.0 * half));
    out.hi[i] = std::exp(std::min(h, c + 2.0 * half));
  }
  return out;
}

InferenceResult infer(const Dataset& data, const MutationModel& mutation, const InferenceConfig& cfg,
                      const ProgressFn& progress) {
  data.validate();
  cfg.ranges.validate();
  if (cfg.rounds < 1) throw Error("inference needs at least one round");
  if (cfg.points_per_round < 20) throw Error("inference needs at least 20 points per round");
  InferenceResult res;
  res.surface = LikelihoodSurface(cfg.ranges);
  res.surface.set_min_neighbors(cfg.min_neighbors);
  res.surface.set_retain_drop(cfg.retain_drop);
  EstimatorConfig est = cfg.estimator;
  est.threads = 1;

  ParamRanges box = cfg.ranges;
  for (int round = 1; round <= cfg.rounds; ++round) {
    const auto pts = design_points(box, cfg.points_per_round, derive_seed(cfg.seed, {stream_tag::design, static_cast<std::uint64_t>(round)}));
    const auto n_dup = static_cast<std::size_t>(std::lround(cfg.duplicate_fraction * static_cast<double>(pts.size())));
    std::vector<SurfacePoint> evaluated(pts.size());
    std::size_t done = 0;
    parallel_for(pts.size(), cfg.threads, [&](std::size_t begin, std::size_t end, unsigned worker) {
      for (std::size_t i = begin; i < end; ++i) {
        const auto r = static_cast<std::uint64_t>(round);
        SurfacePoint sp;
        sp.phi = pts[i];
        sp.round = round;
        sp.loglik = multilocus_loglik(pts[i], data, mutation, est, derive_seed(cfg.seed, {stream_tag::point, r, i})).log_lik;
        if (i < n_dup)
          sp.loglik_dup =
              multilocus_loglik(pts[i], data, mutation, est, derive_seed(cfg.seed, {stream_tag::duplicate, r, i})).log_lik;
        evaluated[i] = sp;
        if (progress && worker == 0) progress(round, ++done * std::max(cfg.threads, 1u), pts.size());
      }
    });
    for (const auto& sp : evaluated) res.surface.add(sp);
    res.surface.fit();
    res.mle = smooth_and_maximize(res.surface);
    for (Axis a : kAxes)
      res.ci[static_cast<std::size_t>(a)] = confidence_interval(res.surface, a, res.mle, cfg.ci_level);
    if (round < cfg.rounds) box = refine_ranges(cfg.ranges, res.mle, res.ci);
  }
  for (Axis a : kAxes) {
    const auto i = static_cast<std::size_t>(a);
    res.profiles[i] = profile_curve(res.surface, a, log_grid(cfg.ranges.lo[i], cfg.ranges.hi[i], cfg.profile_points), res.mle);
  }
  res.lik_rmse = res.surface.duplicate_rmse();
  return res;
}

}  // namespace coalsisr
