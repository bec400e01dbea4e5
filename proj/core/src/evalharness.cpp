#include "coalsisr/evalharness.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "coalsisr/error.hpp"
#include "coalsisr/parallel.hpp"

namespace coalsisr {

namespace {

// All count vectors over alleles 1..K with the given total, in lexicographic order.
void enumerate_level(int K, int total, std::vector<AlleleConfig>& out) {
  std::vector<int> c(static_cast<std::size_t>(K), 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == K - 1) {
      c[static_cast<std::size_t>(pos)] = left;
      AlleleConfig h(K);
      for (int a = 0; a < K; ++a)
        if (c[static_cast<std::size_t>(a)]) h.add(a + 1, c[static_cast<std::size_t>(a)]);
      out.push_back(std::move(h));
      return;
    }
    for (int v = left; v >= 0; --v) {
      c[static_cast<std::size_t>(pos)] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, total);
}

// counts are below `base`
std::uint64_t config_key(const AlleleConfig& h, std::uint64_t base) {
  std::uint64_t k = 0;
  for (int a = 1; a <= h.K(); ++a) k = k * base + static_cast<std::uint64_t>(h.count(a));
  return k;
}

}  // namespace

double exact_likelihood_dp(const AlleleConfig& h0, double theta, const MutationModel& mutation) {
  const int K = mutation.K();
  const int n = h0.size();
  // the top level of K = 8, |h0| = 5 has 792 states
  double states = 1.0;
  for (int i = 1; i < K; ++i) states = states * (n + i) / i;
  if (K > 8 || states > 792.5)
    throw Error("exact likelihood is limited to K <= 8 alleles and at most 792 configurations per level");
  if (n < 1) throw Error("exact likelihood of an empty sample");
  if (h0.K() != K) throw Error("sample and mutation model use different allele ranges");
  const Model model{Demography::constant(theta), mutation};
  const auto base = static_cast<std::uint64_t>(n) + 1;
  auto key_of = [base](const AlleleConfig& h) { return config_key(h, base); };

  std::unordered_map<std::uint64_t, double> prev;
  for (int a = 1; a <= K; ++a) prev[key_of(AlleleConfig(K, {{a, 1}}))] = mutation.stationary(a);
  if (n == 1) return prev.at(key_of(h0));

  for (int level = 2; level <= n; ++level) {
    std::vector<AlleleConfig> states;
    enumerate_level(K, level, states);
    std::unordered_map<std::uint64_t, Eigen::Index> index;
    for (std::size_t i = 0; i < states.size(); ++i) index[key_of(states[i])] = static_cast<Eigen::Index>(i);
    const auto m = static_cast<Eigen::Index>(states.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const AlleleConfig& h = states[static_cast<std::size_t>(i)];
      A(i, i) = total_rate(h, 0.0, model);
      for (const auto& e : backward_support(h, mutation)) {
        const double lam = forward_intensity(h, e, 0.0, model);
        const AlleleConfig anc = apply_backward(h, e);
        if (e.is_coalescence())
          b(i) += lam * prev.at(key_of(anc));
        else
          A(i, index.at(key_of(anc))) -= lam;
      }
    }
    const Eigen::VectorXd F = A.partialPivLu().solve(b);
    prev.clear();
    for (Eigen::Index i = 0; i < m; ++i) prev[key_of(states[static_cast<std::size_t>(i)])] = F(i);
  }
  return prev.at(key_of(h0));
}

double pim_likelihood(const AlleleConfig& h, double theta, const MutationModel& mutation) {
  if (mutation.kind() != MutationModel::Kind::PIM) throw Error("pim_likelihood needs parent-independent mutation");
  if (!(theta > 0.0)) throw Error("pim_likelihood needs theta > 0");
  const double n = h.size();
  double lp = std::lgamma(n + 1.0) + std::lgamma(theta) - std::lgamma(theta + n);
  for (int a : h.occupied()) {
    const double c = h.count(a), tp = theta * mutation.stationary(a);
    lp += std::lgamma(tp + c) - std::lgamma(tp) - std::lgamma(c + 1.0);
  }
  return std::exp(lp);
}

BiasRmse bias_rmse(const std::vector<double>& estimates, double truth) {
  if (estimates.empty()) throw Error("bias_rmse of no estimates");
  if (!(truth > 0.0)) throw Error("bias_rmse needs a positive truth");
  double s = 0.0, ss = 0.0;
  for (double e : estimates) {
    s += e - truth;
    ss += (e - truth) * (e - truth);
  }
  const double n = static_cast<double>(estimates.size());
  return {s / n / truth, std::sqrt(ss / n) / truth};
}

std::vector<EcdfPoint> ecdf(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<EcdfPoint> out;
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    out.push_back({values[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

std::string SisrVariant::label() const {
  std::ostringstream os;
  os << to_string(policy.mode) << "_k" << policy.k << "_a" << rp.alpha << "_b" << rp.beta;
  if (rp.ess_divisor != 10.0) os << "_div" << rp.ess_divisor;
  return os.str();
}

std::vector<SisrVariant> default_variant_grid() {
  std::vector<SisrVariant> out;
  for (double a : {0.5, 0.7, 1.0})
    for (double b : {0.0, 0.01})
      for (int k : {1, 6}) {
        SisrVariant v;
        v.policy = {CheckpointPolicy::Mode::ByCoalescences, k};
        v.rp.alpha = a;
        v.rp.beta = b;
        out.push_back(v);
      }
  return out;
}

bool MseExperimentResult::references_ok() const {
  return std::all_of(references.begin(), references.end(), [](const DatasetReference& r) { return r.reference_ok; });
}

MseExperimentResult mse_ratio_experiment(const MseExperimentSpec& spec, const ExperimentProgress& progress) {
  if (spec.datasets < 1 || spec.replicates < 1) throw Error("experiment needs at least one dataset and replicate");
  const MutationModel mut = MutationModel::smm(spec.K);
  const Model model{Demography::contraction(spec.scenario), mut};
  const HistorySampler sampler(model, spec.sampler);
  const std::size_t n_cfg = spec.variants.size() + 1;
  const auto D = static_cast<std::size_t>(spec.datasets), R = static_cast<std::size_t>(spec.replicates);

  MseExperimentResult res;
  res.rows.resize(n_cfg);
  res.rows[0].label = "sis";
  res.rows[0].is_sis = true;
  for (std::size_t c = 1; c < n_cfg; ++c) {
    res.rows[c].variant = spec.variants[c - 1];
    res.rows[c].label = spec.variants[c - 1].label();
  }

  for (std::size_t d = 0; d < D; ++d) {
    RandomStream sim(spec.seed, {stream_tag::dataset, d});
    const AlleleConfig h0 = simulate_locus(spec.genes, model, sim);

    if (progress) progress("reference", d, D);
    const auto ref = estimate_sis(h0, sampler, {spec.reference_nH, derive_seed(spec.seed, {stream_tag::dataset, d, 0xfeed}), spec.threads});
    const double L = ref.log_lik;

    // log-likelihood estimates [replicate][cfg]
    std::vector<std::vector<double>> est(R, std::vector<double>(n_cfg));
    parallel_for(R, spec.threads, [&](std::size_t begin, std::size_t end, unsigned) {
      for (std::size_t r = begin; r < end; ++r) {
        const std::uint64_t seed = derive_seed(spec.seed, {stream_tag::dataset, d, stream_tag::replicate, r});
        est[r][0] = estimate_sis(h0, sampler, {spec.nH, seed, 1}).log_lik;
        for (std::size_t c = 1; c < n_cfg; ++c) {
          SisrOptions opt;
          opt.nH = spec.nH;
          opt.seed = seed;
          opt.policy = spec.variants[c - 1].policy;
          opt.rp = spec.variants[c - 1].rp;
          est[r][c] = estimate_sisr(h0, sampler, opt).log_lik;
        }
      }
    });

    for (std::size_t c = 0; c < n_cfg; ++c) {
      double mse = 0.0;
      for (std::size_t r = 0; r < R; ++r) {
        const double rel = std::expm1(est[r][c] - L);
        mse += rel * rel;
        res.samples.push_back({res.rows[c].label, static_cast<int>(d), static_cast<int>(r), est[r][c]});
      }
      res.rows[c].per_dataset.push_back(mse / static_cast<double>(R));
    }
    DatasetReference dr;
    dr.log_lik = L;
    dr.rel_se = ref.rel_se;
    dr.sis_rel_sd = std::sqrt(res.rows[0].per_dataset.back());
    dr.reference_ok = ref.se_defined && dr.rel_se < dr.sis_rel_sd / 10.0;
    res.references.push_back(dr);
  }
  if (progress) progress("done", D, D);

  for (auto& row : res.rows) row.mse = mean(row.per_dataset);
  for (auto& row : res.rows) row.ratio = row.mse / res.rows[0].mse;
  return res;
}

CalibrationResult pvalue_ecdf_experiment(const CalibrationSpec& spec, const ExperimentProgress& progress) {
  if (spec.datasets < 1) throw Error("calibration needs at least one dataset");
  const MutationModel mut = MutationModel::smm(spec.K);
  const auto D = static_cast<std::size_t>(spec.datasets);
  CalibrationResult res;
  res.records.resize(D);
  std::size_t done = 0;
  parallel_for(D, spec.threads, [&](std::size_t begin, std::size_t end, unsigned worker) {
    for (std::size_t d = begin; d < end; ++d) {
      const Dataset data =
          simulate_dataset(spec.loci, spec.genes, spec.truth, mut, derive_seed(spec.seed, {stream_tag::dataset, d}));
      InferenceConfig ic = spec.inference;
      ic.seed = derive_seed(spec.seed, {stream_tag::replicate, d});
      ic.threads = 1;
      const InferenceResult inf = infer(data, mut, ic);
      CalibrationRecord rec;
      rec.dataset = static_cast<int>(d);
      rec.mle = inf.mle.phi;
      rec.ci = inf.ci;
      for (Axis a : kAxes)
        rec.pvalue[static_cast<std::size_t>(a)] = lrt_pvalue(inf.surface, a, coordinate(spec.truth, a), inf.mle);
      res.records[d] = rec;
      if (progress && worker == 0) progress("calibration", ++done * std::max(spec.threads, 1u), D);
    }
  });
  for (Axis a : kAxes) {
    const auto i = static_cast<std::size_t>(a);
    std::vector<double> p, est;
    for (const auto& r : res.records) {
      p.push_back(r.pvalue[i]);
      est.push_back(coordinate(r.mle, a));
    }
    res.ks[i] = ks_uniform(p);
    res.ecdf[i] = ecdf(p);
    res.error[i] = bias_rmse(est, coordinate(spec.truth, a));
  }
  return res;
}

}  // namespace coalsisr
