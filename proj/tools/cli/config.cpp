#include "cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "coalsisr/error.hpp"

namespace coalsisr::cli {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw Error(where + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw Error("unknown key '" + k + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string holding_name(HoldingStrategy h) { return h == HoldingStrategy::Thinning ? "thinning" : "inverse"; }

HoldingStrategy parse_holding(const std::string& s) {
  if (s == "inverse") return HoldingStrategy::InverseCDF;
  if (s == "thinning") return HoldingStrategy::Thinning;
  throw Error("unknown holding-time sampler '" + s + "' (expected inverse or thinning)");
}

std::string experiment_name(ExperimentSpec::Kind k) { return k == ExperimentSpec::Kind::Mse ? "mse" : "calibration"; }

ExperimentSpec::Kind parse_experiment(const std::string& s) {
  if (s == "mse") return ExperimentSpec::Kind::Mse;
  if (s == "calibration") return ExperimentSpec::Kind::Calibration;
  throw Error("unknown experiment '" + s + "' (expected mse or calibration)");
}

void positive(double v, const std::string& name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(name + " must be positive");
}

}  // namespace

Demography DemographySpec::build() const {
  if (constant) return Demography::constant(params.theta);
  return Demography::contraction(params);
}

MutationModel MutationSpec::build() const {
  if (kind == MutationModel::Kind::PIM) return MutationModel::pim(psi);
  return MutationModel::smm(K);
}

void RunConfig::validate() const {
  if (demography.constant) {
    if (!(demography.params.theta >= 0.0) || !std::isfinite(demography.params.theta))
      throw Error("demography.theta must be nonnegative");
  } else {
    demography.params.validate();
  }
  if (mutation.kind == MutationModel::Kind::SMM && (mutation.K < 1 || mutation.K > 100000))
    throw Error("mutation.K must lie in 1..100000");
  if (mutation.kind == MutationModel::Kind::PIM) mutation.build();
  if (estimator.nH < 1) throw Error("algorithm.nH must be at least 1");
  if (estimator.policy.k < 1) throw Error("algorithm.k must be at least 1");
  estimator.rp.validate();
  positive(estimator.sampler.pcl_beta, "algorithm.pcl_beta");
  inference.ranges.validate();
  if (inference.points_per_round < 20) throw Error("inference.points_per_round must be at least 20");
  if (inference.rounds < 1) throw Error("inference.rounds must be at least 1");
  if (!(inference.ci_level > 0.0 && inference.ci_level < 1.0)) throw Error("inference.ci_level must lie in (0, 1)");
  if (!(inference.duplicate_fraction >= 0.0 && inference.duplicate_fraction <= 1.0))
    throw Error("inference.duplicate_fraction must lie in [0, 1]");
  if (inference.profile_points < 2) throw Error("inference.profile_points must be at least 2");
  if (inference.min_neighbors < 10) throw Error("inference.min_neighbors must be at least 10");
  if (!(inference.retain_drop > 0.0)) throw Error("inference.retain_drop must be positive (null keeps every point)");
  if (simulate.loci < 1 || simulate.genes < 1) throw Error("simulate.loci and simulate.genes must be positive");
  if (experiment.datasets < 1 || experiment.replicates < 1 || experiment.loci < 1 || experiment.genes < 1)
    throw Error("experiment counts must be positive");
  if (experiment.reference_nH < 1) throw Error("experiment.reference_nH must be at least 1");
  if (threads < 1) throw Error("threads must be at least 1");
  if (out.empty()) throw Error("out must name a directory");
}

InferenceConfig RunConfig::inference_config() const {
  InferenceConfig ic = inference;
  ic.estimator = estimator;
  ic.seed = seed;
  ic.threads = threads;
  return ic;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  check_keys(j, "config", {"demography", "mutation", "algorithm", "inference", "simulate", "experiment", "data",
                           "seed", "threads", "out"});
  try {
    if (j.contains("demography")) {
      const auto& d = j.at("demography");
      check_keys(d, "demography", {"type", "theta", "D", "theta_anc"});
      std::string type = "contraction";
      read(d, "type", type);
      if (type != "constant" && type != "contraction")
        throw Error("demography.type must be constant or contraction");
      c.demography.constant = type == "constant";
      read(d, "theta", c.demography.params.theta);
      if (c.demography.constant) {
        if (d.contains("D") || d.contains("theta_anc")) throw Error("a constant demography takes only theta");
        c.demography.params.D = 0.0;
        c.demography.params.theta_anc = c.demography.params.theta;
      } else {
        read(d, "D", c.demography.params.D);
        read(d, "theta_anc", c.demography.params.theta_anc);
      }
    }
    if (j.contains("mutation")) {
      const auto& m = j.at("mutation");
      check_keys(m, "mutation", {"type", "K", "psi"});
      std::string type = "smm";
      read(m, "type", type);
      if (type == "smm") {
        if (m.contains("psi")) throw Error("mutation.psi applies only to pim");
        read(m, "K", c.mutation.K);
      } else if (type == "pim") {
        c.mutation.kind = MutationModel::Kind::PIM;
        c.mutation.psi = m.at("psi").get<std::vector<double>>();
        c.mutation.K = static_cast<int>(c.mutation.psi.size());
        if (m.contains("K") && m.at("K").get<int>() != c.mutation.K)
          throw Error("mutation.K disagrees with the length of mutation.psi");
      } else {
        throw Error("mutation.type must be smm or pim");
      }
    }
    if (j.contains("algorithm")) {
      const auto& a = j.at("algorithm");
      check_keys(a, "algorithm", {"mode", "nH", "proposal", "holding", "pcl_beta", "k", "checkpoint", "alpha", "beta",
                                  "ess_divisor"});
      auto& e = c.estimator;
      if (a.contains("mode")) e.mode = parse_mode(a.at("mode").get<std::string>());
      read(a, "nH", e.nH);
      if (a.contains("proposal")) e.sampler.proposal = parse_proposal_kind(a.at("proposal").get<std::string>());
      if (a.contains("holding")) e.sampler.holding = parse_holding(a.at("holding").get<std::string>());
      read(a, "pcl_beta", e.sampler.pcl_beta);
      read(a, "k", e.policy.k);
      if (a.contains("checkpoint")) e.policy.mode = parse_checkpoint_mode(a.at("checkpoint").get<std::string>());
      read(a, "alpha", e.rp.alpha);
      read(a, "beta", e.rp.beta);
      if (a.contains("ess_divisor")) {
        const auto& v = a.at("ess_divisor");
        e.rp.ess_divisor = v.is_null() ? INFINITY : v.get<double>();
      }
    }
    if (j.contains("inference")) {
      const auto& in = j.at("inference");
      check_keys(in, "inference", {"ranges", "points_per_round", "rounds", "duplicate_fraction", "ci_level",
                                   "profile_points", "min_neighbors", "retain_drop"});
      auto& ic = c.inference;
      if (in.contains("ranges")) {
        const auto& r = in.at("ranges");
        check_keys(r, "inference.ranges", {"theta", "D", "theta_anc"});
        for (Axis ax : kAxes) {
          const auto name = to_string(ax);
          if (!r.contains(name)) continue;
          const auto v = r.at(name).get<std::vector<double>>();
          if (v.size() != 2) throw Error("inference.ranges." + name + " must be [lo, hi]");
          ic.ranges.lo[static_cast<std::size_t>(ax)] = v[0];
          ic.ranges.hi[static_cast<std::size_t>(ax)] = v[1];
        }
      }
      read(in, "points_per_round", ic.points_per_round);
      read(in, "rounds", ic.rounds);
      read(in, "duplicate_fraction", ic.duplicate_fraction);
      read(in, "ci_level", ic.ci_level);
      read(in, "profile_points", ic.profile_points);
      read(in, "min_neighbors", ic.min_neighbors);
      if (in.contains("retain_drop")) {
        const auto& v = in.at("retain_drop");
        ic.retain_drop = v.is_null() ? INFINITY : v.get<double>();
      }
    }
    if (j.contains("simulate")) {
      const auto& s = j.at("simulate");
      check_keys(s, "simulate", {"loci", "genes"});
      read(s, "loci", c.simulate.loci);
      read(s, "genes", c.simulate.genes);
    }
    if (j.contains("experiment")) {
      const auto& x = j.at("experiment");
      check_keys(x, "experiment", {"kind", "datasets", "replicates", "loci", "genes", "reference_nH", "event_variants"});
      if (x.contains("kind")) c.experiment.kind = parse_experiment(x.at("kind").get<std::string>());
      read(x, "datasets", c.experiment.datasets);
      read(x, "replicates", c.experiment.replicates);
      read(x, "loci", c.experiment.loci);
      read(x, "genes", c.experiment.genes);
      read(x, "reference_nH", c.experiment.reference_nH);
      read(x, "event_variants", c.experiment.event_variants);
    }
    if (j.contains("data")) c.data = j.at("data").get<std::string>();
    read(j, "seed", c.seed);
    read(j, "threads", c.threads);
    read(j, "out", c.out);
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const RunConfig& c) {
  json j;
  if (c.demography.constant)
    j["demography"] = {{"type", "constant"}, {"theta", c.demography.params.theta}};
  else
    j["demography"] = {{"type", "contraction"},
                       {"theta", c.demography.params.theta},
                       {"D", c.demography.params.D},
                       {"theta_anc", c.demography.params.theta_anc}};
  if (c.mutation.kind == MutationModel::Kind::PIM)
    j["mutation"] = {{"type", "pim"}, {"K", c.mutation.K}, {"psi", c.mutation.psi}};
  else
    j["mutation"] = {{"type", "smm"}, {"K", c.mutation.K}};
  const auto& e = c.estimator;
  j["algorithm"] = {{"mode", to_string(e.mode)},
                    {"nH", e.nH},
                    {"proposal", to_string(e.sampler.proposal)},
                    {"holding", holding_name(e.sampler.holding)},
                    {"pcl_beta", e.sampler.pcl_beta},
                    {"k", e.policy.k},
                    {"checkpoint", to_string(e.policy.mode)},
                    {"alpha", e.rp.alpha},
                    {"beta", e.rp.beta},
                    {"ess_divisor", std::isfinite(e.rp.ess_divisor) ? json(e.rp.ess_divisor) : json(nullptr)}};
  const auto& ic = c.inference;
  json ranges;
  for (Axis ax : kAxes) {
    const auto i = static_cast<std::size_t>(ax);
    ranges[to_string(ax)] = {ic.ranges.lo[i], ic.ranges.hi[i]};
  }
  j["inference"] = {{"ranges", ranges},
                    {"points_per_round", ic.points_per_round},
                    {"rounds", ic.rounds},
                    {"duplicate_fraction", ic.duplicate_fraction},
                    {"ci_level", ic.ci_level},
                    {"profile_points", ic.profile_points},
                    {"min_neighbors", ic.min_neighbors},
                    {"retain_drop", std::isfinite(ic.retain_drop) ? json(ic.retain_drop) : json(nullptr)}};
  j["simulate"] = {{"loci", c.simulate.loci}, {"genes", c.simulate.genes}};
  const auto& x = c.experiment;
  j["experiment"] = {{"kind", experiment_name(x.kind)}, {"datasets", x.datasets},         {"replicates", x.replicates},
                     {"loci", x.loci},                  {"genes", x.genes},               {"reference_nH", x.reference_nH},
                     {"event_variants", x.event_variants}};
  if (c.data) j["data"] = *c.data;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out"] = c.out;
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const RunConfig& c) {
  const std::string s = config_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace coalsisr::cli
