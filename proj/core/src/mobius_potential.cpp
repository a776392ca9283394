#include "spinres/mobius_potential.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

namespace spinres {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int popcount(unsigned mask) { return std::popcount(mask); }

}  // namespace

SubsetWeights::SubsetWeights(Interaction chain, const MatX& observable, double beta)
    : chain_(std::move(chain)), mb_(local_measurement(observable)), beta_(beta) {
  if (chain_.num_sites > 8) {
    throw ValidationError("subset weights capped at 8 sites");
  }
  if (mb_.local_dim() != chain_.local_dim) {
    throw ValidationError("observable dimension does not match chain local dimension");
  }
  if (!std::isfinite(beta) || beta < 0.0) {
    throw ValidationError("inverse temperature must be finite and nonnegative");
  }
  blocks_.resize(1u << chain_.num_sites);
  plain_.resize(1u << chain_.num_sites);
}

SubsetWeights SubsetWeights::ground(Interaction chain, const MatX& observable) {
  SubsetWeights sw(std::move(chain), observable, 0.0);
  sw.ground_ = true;
  return sw;
}

std::vector<int> SubsetWeights::sites_of(unsigned mask) const {
  std::vector<int> sites;
  for (int i = 0; i < num_sites(); ++i) {
    if (mask & (1u << i)) sites.push_back(i);
  }
  return sites;
}

const MatX& SubsetWeights::block(unsigned mask) const {
  auto& slot = blocks_[mask];
  if (slot) return *slot;
  if (mask == 0) {
    slot = MatX::Ones(1, 1);
    return *slot;
  }
  auto sites = sites_of(mask);
  Interaction sub = restrict_interaction(chain_, sites);
  MatX ham = build_hamiltonian(sub);
  Eigen::SelfAdjointEigenSolver<MatX> es(ham);
  if (es.info() != Eigen::Success) {
    throw NumericalError("subset Hamiltonian eigendecomposition failed");
  }
  const VecR& ev = es.eigenvalues();
  int n = static_cast<int>(ev.size());
  if (ground_) {
    double norm = std::max({std::abs(ev[0]), std::abs(ev[n - 1]), 1.0});
    double tol = 1e-9 * norm;
    int count = 1;
    while (count < n && ev[count] - ev[0] <= tol) ++count;
    auto vecs = es.eigenvectors().leftCols(count);
    slot = vecs * vecs.adjoint();
  } else {
    VecR boltz = (-(beta_ * (ev.array() - ev[0]))).exp();
    // The e^{-beta E0} prefactor is kept: plain and conditioned traces use
    // the same block, so it cancels in every weight difference, and local
    // Hamiltonians stay small enough not to overflow.
    boltz *= std::exp(-beta_ * ev[0]);
    slot = es.eigenvectors() * boltz.asDiagonal() * es.eigenvectors().adjoint();
  }
  return *slot;
}

MatX SubsetWeights::conditioned_density(unsigned mask, unsigned cond_mask,
                                        const std::vector<int>& labels_by_site) const {
  // Tensor product over the subset's sites of either the normalized outcome
  // projector (conditioned sites) or the normalized identity.
  int m = mb_.local_dim();
  MatX dens = MatX::Ones(1, 1);
  for (int i = 0; i < num_sites(); ++i) {
    unsigned bit = 1u << i;
    if (!(mask & bit)) continue;
    if (cond_mask & bit) {
      int label = labels_by_site.at(i);
      if (label < 0 || label >= mb_.num_outcomes()) {
        throw ValidationError("outcome label out of range at site " + std::to_string(i));
      }
      MatX proj = MatX::Zero(m, m);
      int mult = 0;
      for (int c = 0; c < m; ++c) {
        if (mb_.outcome_of_col[c] == label) {
          proj += mb_.rotation.col(c) * mb_.rotation.col(c).adjoint();
          ++mult;
        }
      }
      dens = kron(dens, proj / mult);
    } else {
      dens = kron(dens, MatX::Identity(m, m) / m);
    }
  }
  return dens;
}

double SubsetWeights::log_block_trace(unsigned mask) const {
  auto& slot = plain_[mask];
  if (!slot) {
    const MatX& b = block(mask);
    double m_pow = std::pow(static_cast<double>(chain_.local_dim), popcount(mask));
    double tr = b.trace().real() / m_pow;
    if (tr < -1e-12) {
      throw NumericalError("negative block trace");
    }
    slot = tr > 0.0 ? std::log(tr) : kNegInf;
  }
  return *slot;
}

double SubsetWeights::log_block_trace(unsigned mask, unsigned cond_mask,
                                      const std::vector<int>& labels_by_site) const {
  cond_mask &= mask;
  if (cond_mask == 0) return log_block_trace(mask);
  const MatX& b = block(mask);
  MatX dens = conditioned_density(mask, cond_mask, labels_by_site);
  double tr = (b * dens).trace().real();
  double scale = b.cwiseAbs().maxCoeff();
  if (tr < -1e-10 * std::max(1.0, scale)) {
    throw NumericalError("negative conditioned block trace");
  }
  return tr > 0.0 ? std::log(tr) : kNegInf;
}

double SubsetWeights::weight(unsigned mask) const {
  double acc = 0.0;
  int n = popcount(mask);
  unsigned sub = mask;
  while (true) {
    double sign = ((n - popcount(sub)) % 2 == 0) ? 1.0 : -1.0;
    acc += sign * log_block_trace(sub);
    if (sub == 0) break;
    sub = (sub - 1) & mask;
  }
  return acc;
}

double SubsetWeights::weight(unsigned mask, unsigned cond_mask,
                             const std::vector<int>& labels_by_site) const {
  double acc = 0.0;
  int n = popcount(mask);
  unsigned sub = mask;
  while (true) {
    double f = log_block_trace(sub, cond_mask, labels_by_site);
    if (f == kNegInf) {
      throw NumericalError("singular conditioning: zero-probability outcome on subset");
    }
    double sign = ((n - popcount(sub)) % 2 == 0) ? 1.0 : -1.0;
    acc += sign * f;
    if (sub == 0) break;
    sub = (sub - 1) & mask;
  }
  return acc;
}

double SubsetWeights::log_outcome_share(int label) const {
  if (label < 0 || label >= mb_.num_outcomes()) {
    throw ValidationError("outcome label out of range");
  }
  int mult = 0;
  for (int c = 0; c < mb_.local_dim(); ++c) {
    if (mb_.outcome_of_col[c] == label) ++mult;
  }
  return std::log(static_cast<double>(mult) / mb_.local_dim());
}

double SubsetWeights::potential(unsigned mask, const std::vector<int>& labels_by_site) const {
  if (mask == 0) {
    throw ValidationError("potential terms are indexed by nonempty subsets");
  }
  if (popcount(mask) == 1) {
    int site = std::countr_zero(mask);
    return weight(mask, mask, labels_by_site) + log_outcome_share(labels_by_site.at(site));
  }
  return weight(mask, mask, labels_by_site);
}

double SubsetWeights::log_marginal(unsigned window_mask,
                                   const std::vector<int>& labels_by_site) const {
  if (window_mask == 0) return 0.0;

  double share = 0.0;
  for (int i = 0; i < num_sites(); ++i) {
    if (window_mask & (1u << i)) share += log_outcome_share(labels_by_site.at(i));
  }

  // Scan for vanishing conditioned traces first; with any present the
  // per-subset weights are undefined but their telescoped sum is not.
  unsigned full = full_mask();
  bool singular = false;
  for (unsigned mask = 0; mask <= full && !singular; ++mask) {
    if (log_block_trace(mask, window_mask, labels_by_site) == kNegInf) singular = true;
  }
  if (singular) {
    double fx = log_block_trace(full, window_mask, labels_by_site);
    return share + fx - log_block_trace(full);
  }
  double acc = 0.0;
  for (unsigned mask = 1; mask <= full; ++mask) {
    if ((mask & window_mask) == 0) continue;  // conditioned equals plain
    acc += weight(mask, window_mask, labels_by_site) - weight(mask);
  }
  return share + acc;
}

double potential_norm(const SubsetWeights& sw, int anchor, double kappa) {
  if (anchor < 0 || anchor >= sw.num_sites()) {
    throw ValidationError("anchor site outside chain");
  }
  unsigned full = sw.full_mask();
  unsigned bit = 1u << anchor;
  int q = sw.measurement().num_outcomes();
  double total = 0.0;
  std::vector<int> labels(sw.num_sites(), 0);
  for (unsigned mask = 1; mask <= full; ++mask) {
    if (!(mask & bit)) continue;
    auto sites = [&] {
      std::vector<int> s;
      for (int i = 0; i < sw.num_sites(); ++i) {
        if (mask & (1u << i)) s.push_back(i);
      }
      return s;
    }();
    std::int64_t combos = 1;
    for (std::size_t i = 0; i < sites.size(); ++i) combos *= q;
    double best = 0.0;
    for (std::int64_t c = 0; c < combos; ++c) {
      std::int64_t rem = c;
      for (std::size_t i = sites.size(); i-- > 0;) {
        labels[sites[i]] = static_cast<int>(rem % q);
        rem /= q;
      }
      double value = 0.0;
      try {
        value = sw.potential(mask, labels);
      } catch (const NumericalError&) {
        continue;  // undefined on zero-probability outcomes (ground case)
      }
      best = std::max(best, std::abs(value));
    }
    total += std::exp(kappa * static_cast<double>(sites.size())) * best;
  }
  return total;
}

double dlr_residual(const SubsetWeights& sw, unsigned inner_mask) {
  unsigned full = sw.full_mask();
  if ((inner_mask & full) != inner_mask || inner_mask == 0) {
    throw ValidationError("inner window must be a nonempty subset of the chain");
  }
  int n = sw.num_sites();
  int q = sw.measurement().num_outcomes();

  // Reference distribution over the full chain from the dense state.
  std::vector<int> window(n);
  for (int i = 0; i < n; ++i) window[i] = i;
  ClassicalDistribution ref;
  if (sw.is_ground()) {
    GroundState gs = ground_state(sw.chain(), GroundMethod::dense);
    ref = classical_restriction(gs.vector, sw.measurement(), window, n);
  } else {
    ThermalState ts = gibbs_state(sw.chain(), sw.beta());
    ref = classical_restriction(ts.rho, sw.measurement(), window, n);
  }

  std::vector<int> inner_sites;
  for (int i = 0; i < n; ++i) {
    if (inner_mask & (1u << i)) inner_sites.push_back(i);
  }
  std::int64_t inner_combos = 1;
  for (std::size_t i = 0; i < inner_sites.size(); ++i) inner_combos *= q;

  double worst = 0.0;
  for (std::int64_t idx = 0; idx < ref.config_count(); ++idx) {
    std::vector<int> labels = ref.labels_of(idx);

    // Conditioning marginal over the outer configuration.
    double z_ref = 0.0;
    double z_kernel = 0.0;
    std::vector<double> kernel(inner_combos);
    std::vector<double> joint(inner_combos);
    for (std::int64_t c = 0; c < inner_combos; ++c) {
      std::vector<int> lab = labels;
      std::int64_t rem = c;
      for (std::size_t i = inner_sites.size(); i-- > 0;) {
        lab[inner_sites[i]] = static_cast<int>(rem % q);
        rem /= q;
      }
      joint[c] = ref.prob_of(lab);
      z_ref += joint[c];
      double e = 0.0;
      bool defined = true;
      for (unsigned mask = 1; mask <= full && defined; ++mask) {
        if ((mask & inner_mask) == 0) continue;
        try {
          e += sw.potential(mask, lab);
        } catch (const NumericalError&) {
          defined = false;  // ground-state zero: the kernel gives it no mass
        }
      }
      kernel[c] = defined ? std::exp(e) : 0.0;
      z_kernel += kernel[c];
    }
    if (z_ref < 1e-300 || z_kernel < 1e-300) continue;  // zero-probability conditioning event

    std::int64_t self = 0;
    for (int s : inner_sites) self = self * q + labels[s];
    double defect = std::abs(joint[self] / z_ref - kernel[self] / z_kernel);
    worst = std::max(worst, defect);
  }
  return worst;
}

BetaMax beta_max(const Interaction& h, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw ValidationError("weight parameter a must be positive and finite");
  }
  // Per-site sums of e^{a|A|}(e^{beta ||Phi_A||} - 1) over terms touching the
  // site; the condition bounds the largest of them by a.
  std::vector<std::vector<std::pair<int, double>>> per_site(h.num_sites);
  for (const auto& term : h.terms) {
    Eigen::SelfAdjointEigenSolver<MatX> es(term.op);
    if (es.info() != Eigen::Success) {
      throw NumericalError("term eigendecomposition failed");
    }
    int n = static_cast<int>(es.eigenvalues().size());
    double norm = std::max(std::abs(es.eigenvalues()[0]), std::abs(es.eigenvalues()[n - 1]));
    for (int s : term.sites) {
      per_site[s].push_back({static_cast<int>(term.sites.size()), norm});
    }
  }
  auto excess = [&](double beta) {
    double worst = -a;
    for (const auto& site_terms : per_site) {
      double acc = 0.0;
      for (auto [size, norm] : site_terms) {
        acc += std::exp(a * size) * std::expm1(beta * norm);
      }
      worst = std::max(worst, acc - a);
    }
    return worst;
  };

  bool any = false;
  for (const auto& site_terms : per_site) {
    for (auto [size, norm] : site_terms) {
      if (norm > 0.0) any = true;
    }
  }
  BetaMax out;
  if (!any) {
    out.unbounded = true;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }

  double lo = 0.0, hi = 10.0;
  while (excess(hi) <= 0.0) {
    hi *= 2.0;
    if (hi > static_cast<double>(1 << 20)) {
      out.unbounded = true;
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (excess(mid) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-12 * std::max(1.0, lo)) break;
  }
  out.value = lo;
  return out;
}

}  // namespace spinres
