#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spinres/gibbs_engine.hpp"
#include "spinres/spin_algebra.hpp"
#include "spinres/types.hpp"

namespace spinres {

// Inclusion-exclusion weights of log-traces over subsets of a finite chain,
// plain and conditioned on measurement outcomes.  Subsets are bitmasks with
// bit i = chain site i; capped at 8 sites.
//
// Thermal blocks are e^{-beta H_A}; ground blocks are the spectral projector
// onto the lowest eigenvalue cluster of H_A (all energy offsets divide out of
// the marginal formula).  Plain traces are normalized per site by 1/m;
// conditioned sites are weighted by the outcome projector normalized to unit
// trace, so a conditioned trace reduces to the plain one on the empty window.
class SubsetWeights {
public:
  SubsetWeights(Interaction chain, const MatX& observable, double beta);
  static SubsetWeights ground(Interaction chain, const MatX& observable);

  int num_sites() const { return chain_.num_sites; }
  unsigned full_mask() const { return (1u << num_sites()) - 1u; }
  const LocalMeasurement& measurement() const { return mb_; }
  const Interaction& chain() const { return chain_; }
  bool is_ground() const { return ground_; }
  double beta() const { return beta_; }

  // log of the normalized block trace on subset `mask`; -inf only in the
  // ground case.  `cond_mask` selects the conditioned sites (intersected
  // with `mask`); labels_by_site[i] is read for sites i in that intersection.
  double log_block_trace(unsigned mask) const;
  double log_block_trace(unsigned mask, unsigned cond_mask,
                         const std::vector<int>& labels_by_site) const;

  // Moebius transform of log_block_trace over sub-subsets.  The conditioned
  // variant throws when a required block trace vanishes.
  double weight(unsigned mask) const;
  double weight(unsigned mask, unsigned cond_mask,
                const std::vector<int>& labels_by_site) const;

  // Interaction potential of the classical restriction.  Singletons absorb
  // the log-share of the outcome projector; larger sets are conditioned
  // weights on their own support.
  double potential(unsigned mask, const std::vector<int>& labels_by_site) const;

  // log mu_Lambda(x_W) reconstructed from the weights.  Falls back to the
  // telescoped form (exact by Moebius inversion) when ground-state zeros
  // make individual conditioned weights undefined.
  double log_marginal(unsigned window_mask, const std::vector<int>& labels_by_site) const;

  // Per-outcome log of the normalized projector trace at one site.
  double log_outcome_share(int label) const;

private:
  MatX conditioned_density(unsigned mask, unsigned cond_mask,
                           const std::vector<int>& labels_by_site) const;
  const MatX& block(unsigned mask) const;
  std::vector<int> sites_of(unsigned mask) const;

  Interaction chain_;
  LocalMeasurement mb_;
  double beta_ = 0.0;
  bool ground_ = false;
  mutable std::vector<std::optional<MatX>> blocks_;
  mutable std::vector<std::optional<double>> plain_;
};

// Sum over subsets A containing `anchor` of e^{kappa |A|} times the largest
// potential magnitude over outcome configurations; configurations on which
// the potential is undefined (zero-probability ground outcomes) are skipped.
double potential_norm(const SubsetWeights& sw, int anchor, double kappa = 0.0);

// Largest defect, over outcome configurations of positive conditioning
// probability, between the conditional marginal on `inner_mask` and the
// normalized exponential of the potential terms touching it.
double dlr_residual(const SubsetWeights& sw, unsigned inner_mask);

// Largest inverse temperature satisfying the summable-weight condition
// sup_i sum_{terms A: i in A} e^{a|A|} (e^{beta ||Phi_A||} - 1) <= a.
struct BetaMax {
  double value = 0.0;
  bool unbounded = false;
};

BetaMax beta_max(const Interaction& h, double a);

}  // namespace spinres
