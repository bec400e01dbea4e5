#pragma once

// State space, mutation and demographic models, and the intensities of the
// configuration-valued jump process. All times are scaled, u = t / 2N where N
// is the present population size in genes, so every rate is a function of
// (theta, D, theta_anc) only.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace coalsisr {

/// Multiset of gene counts over allele classes 1..K.
///
/// Occupied alleles are kept sorted so that enumeration order (and therefore
/// every random draw keyed on it) depends only on the counts.
class AlleleConfig {
 public:
  AlleleConfig() = default;
  explicit AlleleConfig(int K);
  AlleleConfig(int K, std::initializer_list<std::pair<int, int>> counts);
  static AlleleConfig from_counts(int K, std::span<const std::pair<int, int>> counts);

  int K() const noexcept { return K_; }
  /// Total number of genes |h|.
  int size() const noexcept { return total_; }
  bool empty() const noexcept { return total_ == 0; }

  /// Count for allele a; zero outside 1..K.
  int count(int a) const noexcept { return counts_[static_cast<std::size_t>(a)]; }
  std::span<const int> occupied() const noexcept { return occupied_; }
  int distinct() const noexcept { return static_cast<int>(occupied_.size()); }

  void add(int a, int n = 1);
  void remove(int a, int n = 1);

  bool operator==(const AlleleConfig& other) const noexcept;

  /// "{5:1, 6:1}"
  std::string to_string() const;

 private:
  int K_ = 0;
  int total_ = 0;
  // indices 0 and K+1 are permanent zero sentinels
  std::vector<int> counts_;
  std::vector<int> occupied_;
};

/// Scaled parameter point (theta, D, theta_anc).
struct ScaledParams {
  double theta = 0.4;
  double D = 0.25;
  double theta_anc = 400.0;

  double n_ratio() const noexcept { return theta / theta_anc; }
  void validate() const;
  bool operator==(const ScaledParams&) const = default;
};

/// Scaled population size history theta(u) = 2 mu N(t).
class Demography {
 public:
  enum class Kind { Constant, ExponentialContraction };

  static Demography constant(double theta);
  static Demography contraction(const ScaledParams& p);

  Kind kind() const noexcept { return kind_; }
  double theta() const noexcept { return theta_; }
  double D() const noexcept { return D_; }
  double theta_anc() const noexcept { return theta_anc_; }
  /// Size the pairwise composite likelihood is evaluated at.
  double ancestral_theta() const noexcept { return theta_anc_; }

  double theta_at(double u) const noexcept;

  /// Relative coalescence speed theta / theta(u) = N / N(t).
  double coal_scale(double u) const noexcept;

  /// Integral of coal_scale over [u, u + delta].
  double integrated_coal_scale(double u, double delta) const noexcept;

  /// Exponent b with coal_scale(u) = exp(-b u) on [0, D].
  double decay() const noexcept { return decay_; }

 private:
  Demography() = default;
  Kind kind_ = Kind::Constant;
  double theta_ = 1.0;
  double D_ = 0.0;
  double theta_anc_ = 1.0;
  double decay_ = 0.0;
  double anc_scale_ = 1.0;
};

/// Mutation kernel p over alleles 1..K.
///
/// SMM moves one step up or down with probability 1/2 each; at the two
/// boundary alleles the outward step is replaced by staying put, which keeps
/// p doubly stochastic so that the stationary law is uniform. PIM draws the
/// new allele from fixed weights psi regardless of the parent.
class MutationModel {
 public:
  enum class Kind { SMM, PIM };

  static MutationModel smm(int K);
  static MutationModel pim(std::vector<double> psi);

  Kind kind() const noexcept { return kind_; }
  int K() const noexcept { return K_; }

  /// p_{B,A}: probability that a mutation of a type-B gene produces type A.
  double p(int B, int A) const noexcept {
    if (A < 1 || A > K_ || B < 1 || B > K_) return 0.0;
    if (kind_ == Kind::PIM) return psi_[static_cast<std::size_t>(A)];
    if (K_ == 1) return 1.0;
    if (A == B) return (B == 1 || B == K_) ? 0.5 : 0.0;
    return (A - B == 1 || B - A == 1) ? 0.5 : 0.0;
  }
  double self_prob(int B) const noexcept { return p(B, B); }
  double stationary(int A) const noexcept;

 private:
  MutationModel() = default;
  Kind kind_ = Kind::SMM;
  int K_ = 1;
  std::vector<double> psi_;  // 1-based; only for PIM
};

inline double stationary_prob(const MutationModel& m, int A) { return m.stationary(A); }

/// One step of a history read backward in time: either two type-A genes merge,
/// or a type-A gene is traced back to its type-B parent before a mutation.
struct BackwardEvent {
  enum class Kind : std::uint8_t { Coalescence, Mutation };
  Kind kind = Kind::Coalescence;
  int allele = 0;  // A
  int parent = 0;  // B, mutation only

  static BackwardEvent coalescence(int A) { return {Kind::Coalescence, A, 0}; }
  static BackwardEvent mutation(int child, int parent) { return {Kind::Mutation, child, parent}; }
  bool is_coalescence() const noexcept { return kind == Kind::Coalescence; }
  bool operator==(const BackwardEvent&) const = default;
  std::string to_string() const;
};

/// Model bundle passed around by the estimators.
struct Model {
  Demography demography;
  MutationModel mutation;
};

/// True when the event may be applied to h.
bool is_valid(const AlleleConfig& h, const BackwardEvent& e, const MutationModel& m) noexcept;

/// The ancestor state reached by undoing one event. Throws InvalidEvent.
AlleleConfig apply_backward(const AlleleConfig& h, const BackwardEvent& e);
void apply_backward_inplace(AlleleConfig& h, const BackwardEvent& e);

/// Sum over genes of the probability that a mutation actually changes type.
double mutation_mass(const AlleleConfig& h, const MutationModel& m) noexcept;

/// Total rate at which events occur, backward in time, while the sample
/// ancestry is in state h at scaled time u:
///   |h|(|h|-1) theta/theta(u) + theta * sum_B h(B)(1 - p_BB).
/// This drives the holding times.
double total_rate(const AlleleConfig& h, double u, const Model& model);

/// Forward intensity Lambda_u(h | h') from the ancestor h' = apply_backward(h, e)
/// into h. Splits contribute (|h'|+1) h'(A) theta/theta(u), mutations
/// theta h'(B) p_{B,A}.
double forward_intensity(const AlleleConfig& h, const BackwardEvent& e, double u,
                         const Model& model);

/// Total forward exit intensity lambda_u(h) = sum over h'' of Lambda_u(h'' | h).
double forward_exit_rate(const AlleleConfig& h, double u, const Model& model);

/// Normalized forward kernel P_u(h_next | h) = Lambda_u(h_next | h) / lambda_u(h).
/// Throws UnreachableTransition when h_next is not one forward event away.
double forward_transition(const AlleleConfig& h_next, const AlleleConfig& h, double u,
                          const Model& model);

/// Every backward event with positive forward intensity into h.
std::vector<BackwardEvent> backward_support(const AlleleConfig& h, const MutationModel& m);

}  // namespace coalsisr
