#include "cli/commands.hpp"

#include <cmath>
#include <iomanip>

#include "cli/io.hpp"
#include "coalsisr/error.hpp"
#include "coalsisr/evalharness.hpp"

namespace coalsisr::cli {

namespace {

std::string flag(bool b) { return b ? "1" : "0"; }

Manifest manifest_for(const std::string& command, const RunConfig& cfg) {
  return Manifest(cfg.out, command, config_to_json(cfg), config_hash(cfg), cfg.seed);
}

Dataset load_data(const RunConfig& cfg) {
  if (!cfg.data) throw Error("this command needs a dataset: set \"data\" in the config or pass --data");
  return read_dataset(*cfg.data, cfg.mutation.K);
}

Model model_of(const RunConfig& cfg) { return {cfg.demography.build(), cfg.mutation.build()}; }

void require_contraction_smm(const RunConfig& cfg, const char* what) {
  if (cfg.demography.constant) throw Error(std::string(what) + " needs a contraction demography");
  if (cfg.mutation.kind != MutationModel::Kind::SMM) throw Error(std::string(what) + " needs the stepwise mutation model");
}

int simulate(const RunConfig& cfg, std::ostream& out) {
  const Dataset d = simulate_dataset(cfg.simulate.loci, cfg.simulate.genes, model_of(cfg), cfg.seed);
  auto m = manifest_for("simulate", cfg);
  m.write_table("dataset.csv", dataset_table(d));
  m.close();
  out << "simulated " << d.loci.size() << " loci x " << d.genes_per_locus() << " genes -> "
      << (std::filesystem::path(cfg.out) / "dataset.csv").string() << "\n";
  return 0;
}

int estimate(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const Dataset d = load_data(cfg);
  const Model model = model_of(cfg);
  CsvTable loci({"locus", "loglik", "rel_se", "se_defined", "ess_final", "n_resamples"});
  CsvTable diag({"locus", "checkpoint", "ess_plus", "ess_minus", "resampled"});
  CsvTable traj({"locus", "replicate", "coal_index", "u", "norm_log_weight"});
  double total = 0.0, rel2 = 0.0, ess_min = INFINITY;
  bool defined = true;
  int resamples = 0;
  EstimatorConfig est = cfg.estimator;
  est.threads = cfg.threads;
  for (std::size_t l = 0; l < d.loci.size(); ++l) {
    const std::uint64_t seed = derive_seed(cfg.seed, {stream_tag::locus, l});
    const auto r = estimate_locus(d.loci[l], model, est, seed);
    total += r.log_lik;
    rel2 += r.rel_se * r.rel_se;
    defined = defined && r.se_defined;
    ess_min = std::min(ess_min, r.ess_final);
    resamples += r.n_resamples;
    const auto id = std::to_string(l + 1);
    loci.row({id, num(r.log_lik), num(r.rel_se), flag(r.se_defined), num(r.ess_final), std::to_string(r.n_resamples)});
    for (const auto& c : r.diagnostics)
      diag.row({id, std::to_string(c.index), num(c.ess_plus), num(c.ess_minus), flag(c.resampled)});
    if (opt.trajectory) {
      const HistorySampler sampler(model, est.sampler);
      for (const auto& row : weight_trajectory(d.loci[l], sampler, {std::max<std::size_t>(est.nH, 2), seed, cfg.threads}))
        traj.row({id, std::to_string(row.replicate), std::to_string(row.coal_index), num(row.u), num(row.norm_log_weight)});
    }
  }
  // delta-method standard deviation of the summed log-likelihood
  const double lik_rmse = std::sqrt(rel2);
  CsvTable summary({"mode", "proposal", "nH", "loci", "genes", "loglik", "lik_rmse", "se_defined", "ess_min", "n_resamples"});
  summary.row({to_string(est.mode), to_string(est.sampler.proposal), std::to_string(est.nH), std::to_string(d.loci.size()),
               std::to_string(d.genes_per_locus()), num(total), num(lik_rmse), flag(defined), num(ess_min),
               std::to_string(resamples)});
  auto m = manifest_for("estimate", cfg);
  m.write_table("estimate.csv", summary);
  m.write_table("loci.csv", loci);
  if (est.mode == EstimatorConfig::Mode::SISR) m.write_table("diagnostics.csv", diag);
  if (opt.trajectory) m.write_table("trajectory.csv", traj);
  m.close();
  out << std::setprecision(10) << "logLik " << total << " +- " << (defined ? num(lik_rmse) : std::string("undefined"))
      << " (" << to_string(est.mode) << ", nH " << est.nH << ", " << d.loci.size() << " loci)\n";
  return 0;
}

CsvTable surface_table(const LikelihoodSurface& s) {
  CsvTable t({"theta", "D", "theta_anc", "loglik", "loglik_dup", "round"});
  for (const auto& p : s.points())
    t.row({num(p.phi.theta), num(p.phi.D), num(p.phi.theta_anc), num(p.loglik), p.loglik_dup ? num(*p.loglik_dup) : "",
           std::to_string(p.round)});
  return t;
}

int infer_cmd(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  const Dataset d = load_data(cfg);
  const auto mut = cfg.mutation.build();
  const auto res = infer(d, mut, cfg.inference_config(), [&](int round, std::size_t done, std::size_t total) {
    if (!opt.quiet) err << "round " << round << ": " << std::min(done, total) << "/" << total << " points\r" << std::flush;
  });
  if (!opt.quiet) err << "\n";
  CsvTable est({"param", "estimate", "lower", "upper", "level", "lower_open", "upper_open", "uninformative"});
  CsvTable prof({"param", "value", "log_ratio", "theta", "D", "theta_anc"});
  for (Axis a : kAxes) {
    const auto i = static_cast<std::size_t>(a);
    const auto& ci = res.ci[i];
    est.row({to_string(a), num(ci.estimate), num(ci.lower), num(ci.upper), num(ci.level), flag(ci.lower_open),
             flag(ci.upper_open), flag(ci.uninformative())});
    const auto& pc = res.profiles[i];
    for (std::size_t g = 0; g < pc.grid.size(); ++g)
      prof.row({to_string(a), num(pc.grid[g]), num(pc.log_ratio[g]), num(pc.argmax[g].theta), num(pc.argmax[g].D),
                num(pc.argmax[g].theta_anc)});
  }
  CsvTable summary({"loglik_max", "lik_rmse", "points"});
  summary.row({num(res.mle.loglik), res.lik_rmse ? num(*res.lik_rmse) : "", std::to_string(res.surface.points().size())});
  auto m = manifest_for("infer", cfg);
  m.write_table("estimates.csv", est);
  m.write_table("profile.csv", prof);
  m.write_table("surface.csv", surface_table(res.surface));
  m.write_table("summary.csv", summary);
  m.close();
  out << std::setprecision(5) << "max smoothed logLik " << res.mle.loglik;
  if (res.lik_rmse) out << " (lik-RMSE " << *res.lik_rmse << ")";
  out << "\n";
  for (Axis a : kAxes) {
    const auto& ci = res.ci[static_cast<std::size_t>(a)];
    out << "  " << std::left << std::setw(10) << to_string(a) << std::right << ci.estimate << "  " << ci.level * 100
        << "% CI [" << ci.lower << ", " << ci.upper << "]";
    if (ci.uninformative()) out << "  warning: profile does not drop below the threshold inside the search range";
    out << "\n";
  }
  return 0;
}

int mse_experiment(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  require_contraction_smm(cfg, "the mse experiment");
  MseExperimentSpec spec;
  spec.scenario = cfg.demography.params;
  spec.K = cfg.mutation.K;
  spec.datasets = cfg.experiment.datasets;
  spec.replicates = cfg.experiment.replicates;
  spec.genes = cfg.experiment.genes;
  spec.nH = cfg.estimator.nH;
  spec.reference_nH = cfg.experiment.reference_nH;
  spec.sampler = cfg.estimator.sampler;
  spec.variants = default_variant_grid();
  if (cfg.experiment.event_variants)
    for (int k : {1, 6}) {
      SisrVariant v;
      v.policy = {CheckpointPolicy::Mode::ByEvents, k};
      spec.variants.push_back(v);
    }
  spec.seed = cfg.seed;
  spec.threads = cfg.threads;
  const auto res = mse_ratio_experiment(spec, [&](const std::string& stage, std::size_t done, std::size_t total) {
    if (!opt.quiet) err << stage << " " << done << "/" << total << "\n";
  });
  CsvTable ratio({"cfg", "checkpoint", "k", "alpha", "beta", "mse", "ratio"});
  for (const auto& row : res.rows) {
    if (row.is_sis)
      ratio.row({row.label, "", "", "", "", num(row.mse), num(row.ratio)});
    else
      ratio.row({row.label, to_string(row.variant.policy.mode), std::to_string(row.variant.policy.k),
                 num(row.variant.rp.alpha), num(row.variant.rp.beta), num(row.mse), num(row.ratio)});
  }
  CsvTable refs({"dataset", "loglik", "rel_se", "sis_rel_sd", "reference_ok"});
  for (std::size_t d = 0; d < res.references.size(); ++d) {
    const auto& r = res.references[d];
    refs.row({std::to_string(d), num(r.log_lik), num(r.rel_se), num(r.sis_rel_sd), flag(r.reference_ok)});
  }
  CsvTable box({"cfg", "dataset", "replicate", "loglik"});
  for (const auto& s : res.samples) box.row({s.cfg, std::to_string(s.dataset), std::to_string(s.replicate), num(s.loglik)});
  auto m = manifest_for("experiment", cfg);
  m.write_table("mse_ratio.csv", ratio);
  m.write_table("references.csv", refs);
  m.write_table("boxplot_samples.csv", box);
  m.close();
  out << std::setprecision(4);
  for (const auto& row : res.rows) out << std::left << std::setw(24) << row.label << std::right << " ratio " << row.ratio << "\n";
  if (!res.references_ok()) out << "warning: some reference estimates are not 10x tighter than a single SIS run\n";
  return 0;
}

int calibration_experiment(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  require_contraction_smm(cfg, "the calibration experiment");
  CalibrationSpec spec;
  spec.truth = cfg.demography.params;
  spec.K = cfg.mutation.K;
  spec.datasets = cfg.experiment.datasets;
  spec.loci = cfg.experiment.loci;
  spec.genes = cfg.experiment.genes;
  spec.inference = cfg.inference_config();
  spec.seed = cfg.seed;
  spec.threads = cfg.threads;
  const auto res = pvalue_ecdf_experiment(spec, [&](const std::string&, std::size_t done, std::size_t total) {
    if (!opt.quiet) err << "dataset " << std::min(done, total) << "/" << total << "\n";
  });
  CsvTable pv({"dataset", "param", "estimate", "pvalue", "lower", "upper", "uninformative"});
  for (const auto& r : res.records)
    for (Axis a : kAxes) {
      const auto i = static_cast<std::size_t>(a);
      pv.row({std::to_string(r.dataset), to_string(a), num(coordinate(r.mle, a)), num(r.pvalue[i]), num(r.ci[i].lower),
              num(r.ci[i].upper), flag(r.ci[i].uninformative())});
    }
  CsvTable ec({"param", "p", "ecdf"});
  CsvTable br({"param", "bias", "rmse"});
  CsvTable ks({"param", "statistic", "p_value", "small_sample"});
  for (Axis a : kAxes) {
    const auto i = static_cast<std::size_t>(a);
    for (const auto& e : res.ecdf[i]) ec.row({to_string(a), num(e.p), num(e.ecdf)});
    br.row({to_string(a), num(res.error[i].bias), num(res.error[i].rmse)});
    ks.row({to_string(a), num(res.ks[i].statistic), num(res.ks[i].p_value), flag(res.ks[i].small_sample)});
  }
  auto m = manifest_for("experiment", cfg);
  m.write_table("pvalues.csv", pv);
  m.write_table("ecdf.csv", ec);
  m.write_table("bias_rmse.csv", br);
  m.write_table("ks.csv", ks);
  m.close();
  out << std::setprecision(4);
  for (Axis a : kAxes) {
    const auto i = static_cast<std::size_t>(a);
    out << std::left << std::setw(10) << to_string(a) << std::right << " KS p " << res.ks[i].p_value << "  rel. bias "
        << res.error[i].bias << "  rel. RMSE " << res.error[i].rmse << "\n";
  }
  return 0;
}

}  // namespace

int run_command(const std::string& command, const RunConfig& cfg, const CommandOptions& opt, std::ostream& out,
                std::ostream& err) {
  cfg.validate();
  if (command == "simulate") return simulate(cfg, out);
  if (command == "estimate") return estimate(cfg, opt, out);
  if (command == "infer") return infer_cmd(cfg, opt, out, err);
  if (command == "experiment")
    return cfg.experiment.kind == ExperimentSpec::Kind::Mse ? mse_experiment(cfg, opt, out, err)
                                                            : calibration_experiment(cfg, opt, out, err);
  throw Error("unknown command '" + command + "'");
}

}  // namespace coalsisr::cli
