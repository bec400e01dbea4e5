#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "cli/commands.hpp"
#include "coalsisr/error.hpp"

using namespace coalsisr;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out, data, checkpoint, proposal, mode;
  std::optional<std::size_t> nH;
  std::optional<double> alpha, beta;
  std::optional<int> k;
  bool trajectory = false;
  bool quiet = false;
  bool dump_config = false;
};

cli::RunConfig resolve(const Overrides& o) {
  cli::RunConfig c = o.config.empty() ? cli::RunConfig{} : cli::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (o.out) c.out = *o.out;
  if (o.data) c.data = *o.data;
  if (o.nH) c.estimator.nH = *o.nH;
  if (o.alpha) c.estimator.rp.alpha = *o.alpha;
  if (o.beta) c.estimator.rp.beta = *o.beta;
  if (o.k) c.estimator.policy.k = *o.k;
  if (o.checkpoint) c.estimator.policy.mode = parse_checkpoint_mode(*o.checkpoint);
  if (o.proposal) c.estimator.sampler.proposal = parse_proposal_kind(*o.proposal);
  if (o.mode) c.estimator.mode = parse_mode(*o.mode);
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coalescent likelihoods under a changing population size by sequential importance sampling "
               "with resampling, and likelihood-based demographic inference."};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "root random seed");
  app.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "output directory");
  app.add_flag("--quiet", o.quiet, "no progress output");
  app.add_flag("--dump-config", o.dump_config, "print the resolved configuration as JSON and exit");

  auto add_estimator_flags = [&](CLI::App* s) {
    s->add_option("--data", o.data, "dataset CSV (locus,allele,count)");
    s->add_option("--nH", o.nH, "histories (particles) per likelihood estimate");
    s->add_option("--alpha", o.alpha, "resampling weight exponent");
    s->add_option("--beta", o.beta, "composite-likelihood exponent in resampling");
    s->add_option("--k", o.k, "checkpoint interval");
    s->add_option("--checkpoint", o.checkpoint, "checkpoint rule")->check(CLI::IsMember({"coal", "event"}));
    s->add_option("--proposal", o.proposal, "proposal")->check(CLI::IsMember({"gt", "pcl", "pim-optimal", "sd"}));
    s->add_option("--mode", o.mode, "estimator")->check(CLI::IsMember({"sis", "sisr"}));
  };
  app.add_subcommand("simulate", "simulate a dataset under the configured model");
  auto* est = app.add_subcommand("estimate", "estimate the likelihood of a dataset at the configured parameters");
  add_estimator_flags(est);
  est->add_flag("--trajectory", o.trajectory, "also write per-coalescence weight trajectories");
  add_estimator_flags(app.add_subcommand("infer", "maximum likelihood estimate and profile-likelihood intervals"));
  add_estimator_flags(app.add_subcommand("experiment", "MSE-ratio or calibration experiment"));

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const auto cfg = resolve(o);
    if (o.dump_config) {
      std::cout << cli::config_to_json(cfg).dump(2) << "\n";
      return 0;
    }
    cli::CommandOptions opt;
    opt.trajectory = o.trajectory;
    opt.quiet = o.quiet;
    return cli::run_command(command, cfg, opt, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
