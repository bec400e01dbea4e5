#include "coalsisr/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "coalsisr/error.hpp"

namespace coalsisr {

AlleleConfig::AlleleConfig(int K) : K_(K), counts_(static_cast<std::size_t>(K) + 2, 0) {
  if (K < 1) throw Error("allele space bound K must be >= 1");
}

AlleleConfig::AlleleConfig(int K, std::initializer_list<std::pair<int, int>> counts)
    : AlleleConfig(from_counts(K, std::span<const std::pair<int, int>>(counts.begin(), counts.size()))) {}

AlleleConfig AlleleConfig::from_counts(int K, std::span<const std::pair<int, int>> counts) {
  AlleleConfig h(K);
  for (auto [a, n] : counts) {
    if (n < 0) throw Error("negative gene count for allele " + std::to_string(a));
    if (n > 0) h.add(a, n);
  }
  return h;
}

void AlleleConfig::add(int a, int n) {
  if (a < 1 || a > K_) throw Error("allele " + std::to_string(a) + " outside 1.." + std::to_string(K_));
  if (n <= 0) return;
  auto& c = counts_[static_cast<std::size_t>(a)];
  if (c == 0) occupied_.insert(std::lower_bound(occupied_.begin(), occupied_.end(), a), a);
  c += n;
  total_ += n;
}

void AlleleConfig::remove(int a, int n) {
  if (a < 1 || a > K_ || counts_[static_cast<std::size_t>(a)] < n)
    throw InvalidEvent("cannot remove " + std::to_string(n) + " gene(s) of allele " + std::to_string(a) +
                       " from " + to_string());
  if (n <= 0) return;
  auto& c = counts_[static_cast<std::size_t>(a)];
  c -= n;
  total_ -= n;
  if (c == 0) occupied_.erase(std::lower_bound(occupied_.begin(), occupied_.end(), a));
}

bool AlleleConfig::operator==(const AlleleConfig& other) const noexcept {
  if (K_ != other.K_ || total_ != other.total_ || occupied_ != other.occupied_) return false;
  return std::all_of(occupied_.begin(), occupied_.end(),
                     [&](int a) { return count(a) == other.count(a); });
}

std::string AlleleConfig::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < occupied_.size(); ++i) {
    if (i) os << ", ";
    os << occupied_[i] << ':' << count(occupied_[i]);
  }
  os << '}';
  return os.str();
}

void ScaledParams::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw Error("theta must be positive");
  if (!(theta_anc > 0.0) || !std::isfinite(theta_anc)) throw Error("theta_anc must be positive");
  if (!(D >= 0.0) || !std::isfinite(D)) throw Error("D must be nonnegative");
}

Demography Demography::constant(double theta) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw Error("theta must be nonnegative");
  Demography d;
  d.kind_ = Kind::Constant;
  d.theta_ = d.theta_anc_ = theta;
  return d;
}

Demography Demography::contraction(const ScaledParams& p) {
  p.validate();
  Demography d;
  d.kind_ = Kind::ExponentialContraction;
  d.theta_ = p.theta;
  d.D_ = p.D;
  d.theta_anc_ = p.theta_anc;
  d.anc_scale_ = p.theta / p.theta_anc;
  d.decay_ = p.D > 0.0 ? std::log(p.theta_anc / p.theta) / p.D : 0.0;
  return d;
}

double Demography::theta_at(double u) const noexcept {
  if (kind_ == Kind::Constant) return theta_;
  if (u >= D_) return theta_anc_;
  return theta_ * std::exp(decay_ * u);
}

double Demography::coal_scale(double u) const noexcept {
  if (kind_ == Kind::Constant) return 1.0;
  if (u >= D_) return anc_scale_;
  return std::exp(-decay_ * u);
}

double Demography::integrated_coal_scale(double u, double delta) const noexcept {
  if (delta <= 0.0) return 0.0;
  if (kind_ == Kind::Constant) return delta;
  double total = 0.0;
  const double end = u + delta;
  if (u < D_) {
    const double len = std::min(end, D_) - u;
    if (decay_ == 0.0)
      total += len;
    else
      total += std::exp(-decay_ * u) * -std::expm1(-decay_ * len) / decay_;
  }
  const double tail = end - std::max(u, D_);
  if (tail > 0.0) total += tail * anc_scale_;
  return total;
}

MutationModel MutationModel::smm(int K) {
  if (K < 1) throw Error("allele space bound K must be >= 1");
  MutationModel m;
  m.kind_ = Kind::SMM;
  m.K_ = K;
  return m;
}

MutationModel MutationModel::pim(std::vector<double> psi) {
  if (psi.empty()) throw Error("PIM needs at least one allele weight");
  const double sum = std::accumulate(psi.begin(), psi.end(), 0.0);
  for (double w : psi)
    if (!(w > 0.0)) throw Error("PIM weights must be positive");
  MutationModel m;
  m.kind_ = Kind::PIM;
  m.K_ = static_cast<int>(psi.size());
  m.psi_.assign(1, 0.0);
  for (double w : psi) m.psi_.push_back(w / sum);
  return m;
}

double MutationModel::stationary(int A) const noexcept {
  if (A < 1 || A > K_) return 0.0;
  if (kind_ == Kind::PIM) return psi_[static_cast<std::size_t>(A)];
  return 1.0 / K_;
}

std::string BackwardEvent::to_string() const {
  if (is_coalescence()) return "Coalescence(" + std::to_string(allele) + ")";
  return "Mutation(" + std::to_string(allele) + "<-" + std::to_string(parent) + ")";
}

bool is_valid(const AlleleConfig& h, const BackwardEvent& e, const MutationModel& m) noexcept {
  if (e.allele < 1 || e.allele > h.K()) return false;
  if (e.is_coalescence()) return h.count(e.allele) >= 2;
  return e.parent != e.allele && h.count(e.allele) >= 1 && m.p(e.parent, e.allele) > 0.0;
}

void apply_backward_inplace(AlleleConfig& h, const BackwardEvent& e) {
  if (e.is_coalescence()) {
    if (h.count(e.allele) < 2)
      throw InvalidEvent("coalescence of allele " + std::to_string(e.allele) + " needs two genes in " +
                         h.to_string());
    h.remove(e.allele);
    return;
  }
  if (e.parent == e.allele || e.parent < 1 || e.parent > h.K() || h.count(e.allele) < 1)
    throw InvalidEvent("invalid mutation " + e.to_string() + " for " + h.to_string());
  h.remove(e.allele);
  h.add(e.parent);
}

AlleleConfig apply_backward(const AlleleConfig& h, const BackwardEvent& e) {
  AlleleConfig out = h;
  apply_backward_inplace(out, e);
  return out;
}

double mutation_mass(const AlleleConfig& h, const MutationModel& m) noexcept {
  if (m.kind() == MutationModel::Kind::SMM) {
    // only the two boundary alleles can stay put
    if (m.K() == 1) return 0.0;
    return h.size() - 0.5 * (h.count(1) + h.count(m.K()));
  }
  double mass = 0.0;
  for (int b : h.occupied()) mass += h.count(b) * (1.0 - m.self_prob(b));
  return mass;
}

double total_rate(const AlleleConfig& h, double u, const Model& model) {
  if (h.empty()) throw Error("total_rate: empty configuration");
  const double n = h.size();
  const double theta = model.demography.theta();
  return n * (n - 1.0) * model.demography.coal_scale(u) + theta * mutation_mass(h, model.mutation);
}

double forward_intensity(const AlleleConfig& h, const BackwardEvent& e, double u, const Model& model) {
  if (!is_valid(h, e, model.mutation)) throw InvalidEvent("invalid event " + e.to_string() + " for " + h.to_string());
  if (e.is_coalescence()) {
    // ancestor has |h|-1 genes and h(A)-1 of type A
    return static_cast<double>(h.size()) * (h.count(e.allele) - 1) * model.demography.coal_scale(u);
  }
  return model.demography.theta() * (h.count(e.parent) + 1) * model.mutation.p(e.parent, e.allele);
}

double forward_exit_rate(const AlleleConfig& h, double u, const Model& model) {
  if (h.empty()) throw Error("forward_exit_rate: empty configuration");
  const double n = h.size();
  return n * (n + 1.0) * model.demography.coal_scale(u) +
         model.demography.theta() * mutation_mass(h, model.mutation);
}

double forward_transition(const AlleleConfig& h_next, const AlleleConfig& h, double u, const Model& model) {
  if (h_next.K() != h.K()) throw UnreachableTransition("allele spaces differ");
  const double exit = forward_exit_rate(h, u, model);
  // h_next must be exactly one backward event away from h
  for (const auto& e : backward_support(h_next, model.mutation)) {
    if (apply_backward(h_next, e) == h) return forward_intensity(h_next, e, u, model) / exit;
  }
  throw UnreachableTransition(h_next.to_string() + " is not one forward event from " + h.to_string());
}

std::vector<BackwardEvent> backward_support(const AlleleConfig& h, const MutationModel& m) {
  std::vector<BackwardEvent> out;
  for (int a : h.occupied()) {
    if (h.count(a) >= 2) out.push_back(BackwardEvent::coalescence(a));
  }
  for (int a : h.occupied()) {
    if (m.kind() == MutationModel::Kind::SMM) {
      for (int b : {a - 1, a + 1})
        if (m.p(b, a) > 0.0) out.push_back(BackwardEvent::mutation(a, b));
    } else {
      for (int b = 1; b <= m.K(); ++b)
        if (b != a && m.p(b, a) > 0.0) out.push_back(BackwardEvent::mutation(a, b));
    }
  }
  return out;
}

}  // namespace coalsisr
