#include "coalsisr/proposal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "coalsisr/error.hpp"

namespace coalsisr {

std::string to_string(ProposalKind k) {
  switch (k) {
    case ProposalKind::GriffithsTavare: return "gt";
    case ProposalKind::PclGuided: return "pcl";
    case ProposalKind::PimOptimal: return "pim-optimal";
    case ProposalKind::StephensDonnelly: return "sd";
  }
  return "?";
}

ProposalKind parse_proposal_kind(std::string_view name) {
  if (name == "gt") return ProposalKind::GriffithsTavare;
  if (name == "pcl") return ProposalKind::PclGuided;
  if (name == "pim-optimal") return ProposalKind::PimOptimal;
  if (name == "sd") return ProposalKind::StephensDonnelly;
  throw Error("unknown proposal '" + std::string(name) + "' (expected gt, pcl, pim-optimal or sd)");
}

Proposal::Proposal(const Model& model, ProposalKind kind, double pcl_beta)
    : model_(model), kind_(kind), pcl_beta_(pcl_beta) {
  if (kind == ProposalKind::PimOptimal && model.mutation.kind() != MutationModel::Kind::PIM)
    throw Error("the pim-optimal proposal requires parent-independent mutation");
  if (!std::isfinite(pcl_beta)) throw Error("proposal PCL exponent must be finite");
}

double Proposal::candidates(const AlleleConfig& h, double u, std::vector<Candidate>& out) const {
  if (h.size() < 2) throw Error("propose: " + h.to_string() + " is already at the MRCA");
  out.clear();
  const double k = h.size();
  const double c = model_.demography.coal_scale(u);
  const double theta = model_.demography.theta();
  const MutationModel& mut = model_.mutation;
  const int K = h.K();

  if (mut.kind() == MutationModel::Kind::SMM) {
    const auto occ = h.occupied();
    out.resize(3 * occ.size());
    Candidate* w = out.data();
    for (int a : occ)
      if (h.count(a) >= 2) *w++ = {BackwardEvent::coalescence(a), k * (h.count(a) - 1) * c};
    if (K >= 2) {
      for (int a : occ) {
        if (a > 1) *w++ = {BackwardEvent::mutation(a, a - 1), 0.5 * theta * (h.count(a - 1) + 1)};
        if (a < K) *w++ = {BackwardEvent::mutation(a, a + 1), 0.5 * theta * (h.count(a + 1) + 1)};
      }
    }
    out.resize(static_cast<std::size_t>(w - out.data()));
  } else {
    for (int a : h.occupied())
      if (h.count(a) >= 2) out.push_back({BackwardEvent::coalescence(a), k * (h.count(a) - 1) * c});
    for (int a : h.occupied()) {
      const double pa = mut.stationary(a);
      for (int b = 1; b <= K; ++b)
        if (b != a) out.push_back({BackwardEvent::mutation(a, b), theta * (h.count(b) + 1) * pa});
    }
  }

  double total = 0.0;
  if (kind_ == ProposalKind::GriffithsTavare) {
    for (auto& cand : out) total += (cand.weight = cand.intensity);
    return total;
  }
  if (kind_ == ProposalKind::StephensDonnelly) return conditional_sampling_weights(h, u, out);
  tilt(h, u, out);
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& cand : out) top = std::max(top, cand.log_tilt);
  for (auto& cand : out) {
    cand.log_tilt -= top;
    total += (cand.weight = cand.intensity * std::exp(cand.log_tilt));
  }
  return total;
}

void Proposal::tilt(const AlleleConfig& h, double u, std::vector<Candidate>& out) const {
  if (kind_ == ProposalKind::PclGuided) {
    const PclContext ctx(model_.demography.theta_at(u));
    if (ctx.rho == 0.0) {
      for (auto& cand : out) cand.log_tilt = pcl_beta_ * log_pcl_delta(h, cand.event, ctx);
      return;
    }
    const double n = h.size();
    for (auto& cand : out) {
      const int A = cand.event.allele;
      double d;
      if (cand.event.is_coalescence())
        d = -(n - 1.0) * ctx.log_norm - ctx.log_rho * distance_to(h, A);
      else
        d = ctx.log_rho * (distance_to(h, cand.event.parent) - std::abs(A - cand.event.parent) - distance_to(h, A));
      cand.log_tilt = pcl_beta_ * d;
    }
    return;
  }
  // ratio of sampling probabilities under parent-independent mutation at the
  // size currently in force
  const double th = model_.demography.theta_at(u);
  const double n = h.size();
  const MutationModel& mut = model_.mutation;
  for (auto& cand : out) {
    const int A = cand.event.allele;
    const double hA = h.count(A);
    const double denom = th * mut.stationary(A) + hA - 1.0;
    if (cand.event.is_coalescence()) {
      cand.log_tilt = std::log((th + n - 1.0) / denom * hA / n);
    } else {
      const int B = cand.event.parent;
      const double hB = h.count(B);
      cand.log_tilt = std::log((th * mut.stationary(B) + hB) / denom * hA / (hB + 1.0));
    }
  }
}

namespace {

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

}  // namespace

// Pick a gene of type A with probability h(A)/n; it coalesces with weight
// (h(A)-1)/pi(A | h - e_A) or descends from a type-B parent with weight
// theta(u) p_BA pi(B | h - e_A)/pi(A | h - e_A), where pi is the approximate
// conditional law of one more gene given the others. Under the stepwise
// model pi(x | g) is proportional to sum_B g(B) r^|x-B|, the resolvent of
// the walk on the integers; under parent-independent mutation it is exact at
// constant size. Before a contraction the extra gene may well survive into
// the ancestral epoch, so pi mixes the kernel at theta(u) with the kernel at
// theta_anc, weighted by that survival probability.
std::array<Proposal::Kernel, 2> Proposal::kernels(const AlleleConfig& h, double u, int& count) const {
  const Demography& d = model_.demography;
  const double m = h.size() - 1.0;
  auto make = [m](double weight, double theta) {
    Kernel k;
    k.weight = weight;
    k.theta = theta;
    k.lambda = theta / (m + theta);
    k.r = k.lambda / (1.0 + std::sqrt(1.0 - k.lambda * k.lambda));
    k.kappa = std::sqrt((1.0 - k.lambda) / (1.0 + k.lambda)) / m;
    return k;
  };
  const double th = d.theta_at(u);
  std::array<Kernel, 2> out{};
  if (u >= d.D() || d.theta_anc() == th) {
    out[0] = make(1.0, th);
    count = 1;
    return out;
  }
  const double q = std::exp(-m * d.integrated_coal_scale(u, d.D() - u));
  out[0] = make(1.0 - q, th);
  out[1] = make(q, d.theta_anc());
  count = q > 0.0 ? 2 : 1;
  return out;
}

double Proposal::conditional_sampling_weights(const AlleleConfig& h, double u, std::vector<Candidate>& out) const {
  const double th = model_.demography.theta_at(u);
  const double n = h.size();
  const MutationModel& mut = model_.mutation;
  int nk = 0;
  const auto ks = kernels(h, u, nk);
  double total = 0.0;

  if (mut.kind() == MutationModel::Kind::PIM) {
    // pi(x | g) = (g(x) + theta psi(x)) / (|g| + theta), mixed over kernels
    auto pi = [&](int x, double gx) {
      double v = 0.0;
      for (int j = 0; j < nk; ++j) v += ks[j].weight * (gx + ks[j].theta * mut.stationary(x)) / (n - 1.0 + ks[j].theta);
      return v;
    };
    for (auto& cand : out) {
      const int A = cand.event.allele;
      const double hA = h.count(A);
      const double piA = pi(A, hA - 1.0);
      if (cand.event.is_coalescence()) {
        cand.weight = hA * (hA - 1.0) / piA;
      } else {
        const int B = cand.event.parent;
        cand.weight = hA * th * mut.p(B, A) * pi(B, h.count(B)) / piA;
      }
      total += cand.weight;
    }
    return total;
  }

  const auto occ = h.occupied();
  const std::size_t m = occ.size();
  const int span = occ.back() - occ.front();

  // per-kernel strictly-left and strictly-right resolvent sums at each occupied allele
  thread_local std::array<std::vector<double>, 2> left, right, powers;
  thread_local std::array<double, 2> powers_r{-1.0, -1.0};
  for (int j = 0; j < nk; ++j) {
    const double r = ks[j].r;
    auto& pw = powers[j];
    // between coalescences in the ancestral epoch r stays fixed
    if (r != powers_r[j] || pw.size() < static_cast<std::size_t>(span) + 1) {
      pw.resize(std::max<std::size_t>(pw.size(), static_cast<std::size_t>(h.K()) + 1));
      pw[0] = 1.0;
      for (std::size_t g = 1; g < pw.size(); ++g) pw[g] = pw[g - 1] * r;
      powers_r[j] = r;
    }
    auto& L = left[j];
    auto& R = right[j];
    L.assign(m, 0.0);
    R.assign(m, 0.0);
    for (std::size_t i = 1; i < m; ++i)
      L[i] = (L[i - 1] + h.count(occ[i - 1])) * pw[static_cast<std::size_t>(occ[i] - occ[i - 1])];
    for (std::size_t i = m - 1; i-- > 0;)
      R[i] = (R[i + 1] + h.count(occ[i + 1])) * pw[static_cast<std::size_t>(occ[i + 1] - occ[i])];
  }

  std::size_t i = 0;
  for (auto& cand : out) {
    const int A = cand.event.allele;
    while (occ[i] != A) i = (occ[i] < A) ? i + 1 : 0;
    const double hA = h.count(A);
    double self = 0.0;
    for (int j = 0; j < nk; ++j) self += ks[j].weight * ks[j].kappa * (hA - 1.0 + left[j][i] + right[j][i]);
    // far-apart singletons underflow in linear space
    if (!(self > 1e-250)) return conditional_sampling_weights_log(h, u, out);
    if (cand.event.is_coalescence()) {
      cand.weight = hA * (hA - 1.0) / self;
    } else {
      // sums for h - e_A evaluated one step to the right or left of A
      double other = 0.0;
      for (int j = 0; j < nk; ++j) {
        const double r = ks[j].r, L = left[j][i], R = right[j][i];
        other += ks[j].weight * ks[j].kappa *
                 (cand.event.parent > A ? r * (L + hA - 1.0) + R / r : r * (R + hA - 1.0) + L / r);
      }
      cand.weight = 0.5 * hA * th * other / self;
    }
    total += cand.weight;
  }
  return total;
}

double Proposal::conditional_sampling_weights_log(const AlleleConfig& h, double u, std::vector<Candidate>& out) const {
  const double th = model_.demography.theta_at(u);
  const auto occ = h.occupied();
  const std::size_t m = occ.size();
  int nk = 0;
  const auto ks = kernels(h, u, nk);
  const double ninf = -std::numeric_limits<double>::infinity();

  std::array<std::vector<double>, 2> left, right;
  std::array<double, 2> log_r{}, log_c{};
  for (int j = 0; j < nk; ++j) {
    log_r[j] = std::log(ks[j].r);
    log_c[j] = std::log(ks[j].weight) + std::log(ks[j].kappa);
    left[j].assign(m, ninf);
    right[j].assign(m, ninf);
    for (std::size_t i = 1; i < m; ++i)
      left[j][i] = log_add(left[j][i - 1], std::log(static_cast<double>(h.count(occ[i - 1])))) +
                   (occ[i] - occ[i - 1]) * log_r[j];
    for (std::size_t i = m - 1; i-- > 0;)
      right[j][i] = log_add(right[j][i + 1], std::log(static_cast<double>(h.count(occ[i + 1])))) +
                    (occ[i + 1] - occ[i]) * log_r[j];
  }

  std::vector<double> lw(out.size());
  double top = ninf;
  std::size_t i = 0;
  for (std::size_t c = 0; c < out.size(); ++c) {
    const BackwardEvent& e = out[c].event;
    const int A = e.allele;
    while (occ[i] != A) i = (occ[i] < A) ? i + 1 : 0;
    const double hA = h.count(A);
    const double own = hA > 1.0 ? std::log(hA - 1.0) : ninf;
    double log_self = ninf, log_other = ninf;
    for (int j = 0; j < nk; ++j) {
      const double L = left[j][i], R = right[j][i];
      log_self = log_add(log_self, log_c[j] + log_add(own, log_add(L, R)));
      if (!e.is_coalescence()) {
        const double o = e.parent > A ? log_add(log_add(L, own) + log_r[j], R - log_r[j])
                                      : log_add(log_add(R, own) + log_r[j], L - log_r[j]);
        log_other = log_add(log_other, log_c[j] + o);
      }
    }
    if (e.is_coalescence())
      lw[c] = std::log(hA * (hA - 1.0)) - log_self;
    else
      lw[c] = std::log(0.5 * hA * th) + log_other - log_self;
    top = std::max(top, lw[c]);
  }
  double total = 0.0;
  for (std::size_t c = 0; c < out.size(); ++c) total += (out[c].weight = std::exp(lw[c] - top));
  return total;
}

ProposalStep Proposal::propose(const AlleleConfig& h, double u, RandomStream& rng,
                               std::vector<Candidate>& scratch) const {
  return propose(h, u, total_rate(h, u, model_), rng, scratch);
}

ProposalStep Proposal::propose(const AlleleConfig& h, double u, double nu, RandomStream& rng,
                               std::vector<Candidate>& scratch) const {
  const double total = candidates(h, u, scratch);
  double target = rng.uniform() * total;
  std::size_t pick = scratch.size() - 1;
  for (std::size_t i = 0; i < scratch.size(); ++i) {
    target -= scratch[i].weight;
    if (target < 0.0) {
      pick = i;
      break;
    }
  }
  // rounding can leave the tail selected with zero weight
  while (scratch[pick].weight <= 0.0 && pick > 0) --pick;
  const Candidate& c = scratch[pick];
  ProposalStep step;
  step.event = c.event;
  step.log_q = std::log(c.weight / total);
  step.log_increment = kind_ == ProposalKind::GriffithsTavare ? std::log(total / nu)
                                                              : std::log(c.intensity * total / (nu * c.weight));
  return step;
}

ProposalStep Proposal::propose(const AlleleConfig& h, double u, RandomStream& rng) const {
  std::vector<Candidate> scratch;
  return propose(h, u, rng, scratch);
}

std::vector<std::pair<BackwardEvent, double>> Proposal::distribution(const AlleleConfig& h, double u) const {
  std::vector<Candidate> c;
  const double total = candidates(h, u, c);
  std::vector<std::pair<BackwardEvent, double>> out;
  out.reserve(c.size());
  for (const auto& cand : c) out.emplace_back(cand.event, cand.weight / total);
  return out;
}

double Proposal::log_q(const AlleleConfig& h, const BackwardEvent& e, double u) const {
  std::vector<Candidate> c;
  const double total = candidates(h, u, c);
  for (const auto& cand : c)
    if (cand.event == e) return std::log(cand.weight / total);
  return -std::numeric_limits<double>::infinity();
}

double Proposal::log_weight_increment(const AlleleConfig& h, const BackwardEvent& e, double u) const {
  std::vector<Candidate> c;
  const double total = candidates(h, u, c);
  for (const auto& cand : c) {
    if (cand.event != e) continue;
    if (!(cand.weight > 0.0)) throw InvalidEvent("event " + e.to_string() + " has zero proposal probability");
    return std::log(cand.intensity / total_rate(h, u, model_)) - std::log(cand.weight / total);
  }
  throw InvalidEvent("event " + e.to_string() + " is outside the proposal support for " + h.to_string());
}

}  // namespace coalsisr
