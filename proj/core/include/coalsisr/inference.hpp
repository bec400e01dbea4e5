#pragma once

// Multilocus likelihood surfaces over (theta, D, theta_anc), smoothing,
// maximization, profile likelihoods and likelihood-ratio intervals. Every
// parameter axis is handled on the log scale.

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coalsisr/datasim.hpp"
#include "coalsisr/sisr.hpp"

namespace coalsisr {

enum class Axis { Theta = 0, D = 1, ThetaAnc = 2 };
inline constexpr std::array<Axis, 3> kAxes{Axis::Theta, Axis::D, Axis::ThetaAnc};
std::string to_string(Axis a);
Axis parse_axis(std::string_view name);

double coordinate(const ScaledParams& p, Axis a) noexcept;
void set_coordinate(ScaledParams& p, Axis a, double v) noexcept;

struct EstimatorConfig {
  enum class Mode { SIS, SISR };
  Mode mode = Mode::SISR;
  SamplerConfig sampler;
  std::size_t nH = 100;
  CheckpointPolicy policy;
  ResamplingParams rp;
  unsigned threads = 1;
};

std::string to_string(EstimatorConfig::Mode m);
/// "sis" | "sisr"
EstimatorConfig::Mode parse_mode(std::string_view name);

EstimateResult estimate_locus(const AlleleConfig& h, const Model& model, const EstimatorConfig& cfg,
                              std::uint64_t seed);

/// Sum of per-locus estimates at phi; locus l uses the (seed, locus, l)
/// substream. Relative standard errors combine in quadrature.
EstimateResult multilocus_loglik(const ScaledParams& phi, const Dataset& data, const MutationModel& mutation,
                                 const EstimatorConfig& cfg, std::uint64_t seed);

struct ParamRanges {
  std::array<double, 3> lo{0.01, 0.01, 1.0};
  std::array<double, 3> hi{10.0, 10.0, 1000.0};

  void validate() const;
  bool contains(const ScaledParams& p) const noexcept;
  double lo_of(Axis a) const noexcept { return lo[static_cast<std::size_t>(a)]; }
  double hi_of(Axis a) const noexcept { return hi[static_cast<std::size_t>(a)]; }
  /// Position in [0, 1] along the log axis.
  double to_unit(Axis a, double v) const noexcept;
  double from_unit(Axis a, double t) const noexcept;
};

/// Latin hypercube on the log scale: every axis is cut into n equal strata,
/// each stratum is hit exactly once.
std::vector<ScaledParams> design_points(const ParamRanges& ranges, int n, std::uint64_t seed);

struct SurfacePoint {
  ScaledParams phi;
  double loglik = 0.0;
  std::optional<double> loglik_dup;
  int round = 1;
};

/// Locally weighted quadratic regression in unit log coordinates with a
/// Gaussian kernel whose bandwidth at x is the larger of 1.5 times the mean
/// nearest-neighbour spacing and the distance to the `min_neighbors`-th point.
class LikelihoodSurface {
 public:
  LikelihoodSurface() = default;
  explicit LikelihoodSurface(ParamRanges ranges);

  const ParamRanges& ranges() const noexcept { return ranges_; }
  const std::vector<SurfacePoint>& points() const noexcept { return points_; }
  void add(const SurfacePoint& p);
  void set_min_neighbors(int k) { min_neighbors_ = k; }
  /// Only points whose log-likelihood is within `drop` of the best raw
  /// estimate enter the smoother (at least max(30, min_neighbors) of them).
  void set_retain_drop(double drop) { retain_drop_ = drop; }
  /// Indices into points() used by the last fit().
  const std::vector<std::size_t>& retained() const noexcept { return retained_; }

  /// Prepares the smoother. Throws when the design cannot support a quadratic.
  void fit();
  bool fitted() const noexcept { return fitted_; }
  double base_bandwidth() const noexcept { return base_bandwidth_; }

  double predict(const ScaledParams& phi) const;
  double predict_unit(const std::array<double, 3>& x) const;

  /// RMSE of a single estimate, from duplicated points.
  std::optional<double> duplicate_rmse() const;

 private:
  ParamRanges ranges_;
  std::vector<SurfacePoint> points_;
  std::vector<std::array<double, 3>> unit_;
  std::vector<double> response_;
  std::vector<std::size_t> retained_;
  int min_neighbors_ = 30;
  double retain_drop_ = std::numeric_limits<double>::infinity();
  double base_bandwidth_ = 0.0;
  bool fitted_ = false;
};

struct Maximum {
  ScaledParams phi;
  double loglik = 0.0;
};

Maximum smooth_and_maximize(LikelihoodSurface& surface);

struct ProfileCurve {
  Axis axis = Axis::Theta;
  std::vector<double> grid;
  std::vector<double> log_ratio;  // log PL(x) - log PL(x_hat) <= 0
  std::vector<ScaledParams> argmax;
};

/// Profile likelihood: max over the two other coordinates of the smoothed
/// surface, for one fixed coordinate value. `hint` adds a starting point.
double profile_loglik(const LikelihoodSurface& s, Axis axis, double value, const ScaledParams* hint = nullptr,
                      ScaledParams* argmax = nullptr);

/// `mle` anchors the ratio; values on the grid never exceed it.
ProfileCurve profile_curve(const LikelihoodSurface& s, Axis axis, const std::vector<double>& grid,
                           const Maximum& mle);

std::vector<double> log_grid(double lo, double hi, int n);

struct ConfidenceInterval {
  Axis axis = Axis::Theta;
  double level = 0.95;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  /// The profile stays above the threshold up to the search-range bound.
  bool lower_open = false;
  bool upper_open = false;
  bool uninformative() const noexcept { return lower_open || upper_open; }
};

ConfidenceInterval confidence_interval(const LikelihoodSurface& s, Axis axis, const Maximum& mle, double level,
                                       int scan_points = 40);

/// Likelihood-ratio test of the coordinate value against its profile maximum.
double lrt_pvalue(const LikelihoodSurface& s, Axis axis, double value, const Maximum& mle);

struct InferenceConfig {
  ParamRanges ranges;
  int points_per_round = 150;
  int rounds = 2;
  double duplicate_fraction = 0.1;
  double ci_level = 0.95;
  int profile_points = 25;
  int min_neighbors = 30;
  /// Log-likelihood drop below the best raw estimate beyond which points
  /// are left out of the smoother.
  double retain_drop = 10.0;
  EstimatorConfig estimator;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct InferenceResult {
  Maximum mle;
  std::array<ConfidenceInterval, 3> ci;
  std::array<ProfileCurve, 3> profiles;
  LikelihoodSurface surface;
  std::optional<double> lik_rmse;
};

using ProgressFn = std::function<void(int round, std::size_t done, std::size_t total)>;

InferenceResult infer(const Dataset& data, const MutationModel& mutation, const InferenceConfig& cfg,
                      const ProgressFn& progress = {});

/// Shrunken box for the next round: two interval half-widths around the
/// estimate on every log axis, clipped to the original ranges.
ParamRanges refine_ranges(const ParamRanges& base, const Maximum& mle, const std::array<ConfidenceInterval, 3>& ci);

/// Minimizes f on the unit cube of the given dimension with Nelder-Mead;
/// coordinates are clamped to [0, 1] before evaluation.
std::vector<double> minimize_unit(const std::function<double(const std::vector<double>&)>& f,
                                  std::vector<double> start, double step, double* fmin = nullptr,
                                  int max_iter = 400);

}  // namespace coalsisr
