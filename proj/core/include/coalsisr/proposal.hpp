#pragma once

// Backward proposal distributions over the events that could have produced
// the current configuration.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coalsisr/model.hpp"
#include "coalsisr/pcl.hpp"
#include "coalsisr/random.hpp"

namespace coalsisr {

enum class ProposalKind { GriffithsTavare, PclGuided, PimOptimal, StephensDonnelly };

std::string to_string(ProposalKind k);
/// "gt" | "pcl" | "pim-optimal" | "sd"
ProposalKind parse_proposal_kind(std::string_view name);

struct Candidate {
  BackwardEvent event;
  double intensity = 0.0;  // forward intensity into h
  double log_tilt = 0.0;   // log(weight / intensity), for tilted kinds
  double weight = 0.0;     // unnormalized proposal weight
};

struct ProposalStep {
  BackwardEvent event;
  double log_q = 0.0;
  /// log(intensity / total_rate) - log_q, the factor the history weight picks up.
  double log_increment = 0.0;
};

class Proposal {
 public:
  Proposal(const Model& model, ProposalKind kind, double pcl_beta = 1.0);

  ProposalKind kind() const noexcept { return kind_; }
  const Model& model() const noexcept { return model_; }

  /// Fills `out` with the support in canonical order and returns the total
  /// proposal weight.
  double candidates(const AlleleConfig& h, double u, std::vector<Candidate>& out) const;

  ProposalStep propose(const AlleleConfig& h, double u, RandomStream& rng, std::vector<Candidate>& scratch) const;
  ProposalStep propose(const AlleleConfig& h, double u, RandomStream& rng) const;
  /// As above with the total backward rate at (h, u) already known.
  ProposalStep propose(const AlleleConfig& h, double u, double nu, RandomStream& rng,
                       std::vector<Candidate>& scratch) const;

  /// Normalized probabilities of every supported event.
  std::vector<std::pair<BackwardEvent, double>> distribution(const AlleleConfig& h, double u) const;

  double log_q(const AlleleConfig& h, const BackwardEvent& e, double u) const;

  /// Throws InvalidEvent for events outside the support.
  double log_weight_increment(const AlleleConfig& h, const BackwardEvent& e, double u) const;

 private:
  struct Kernel {
    double weight = 0.0;
    double theta = 0.0;
    double lambda = 0.0;
    double r = 0.0;
    double kappa = 0.0;
  };
  std::array<Kernel, 2> kernels(const AlleleConfig& h, double u, int& count) const;

  void tilt(const AlleleConfig& h, double u, std::vector<Candidate>& out) const;
  double conditional_sampling_weights(const AlleleConfig& h, double u, std::vector<Candidate>& out) const;
  double conditional_sampling_weights_log(const AlleleConfig& h, double u, std::vector<Candidate>& out) const;

  Model model_;
  ProposalKind kind_;
  double pcl_beta_;
};

}  // namespace coalsisr
