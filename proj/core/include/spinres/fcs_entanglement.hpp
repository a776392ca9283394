#pragma once

#include <string>
#include <vector>

#include "spinres/gibbs_engine.hpp"
#include "spinres/types.hpp"

namespace spinres {

// Finitely correlated (matrix product) state: one bond-space matrix per
// physical level.  Expectations of on-site operator words are taken through
// the transfer maps E_O(D) = sum_{ab} O(a,b) A_a D A_b^dag, normalized by
// the bond dimension.
struct FcsModel {
  std::vector<MatX> a;  // physical-dim many, each bond_dim x bond_dim

  int physical_dim() const { return static_cast<int>(a.size()); }
  int bond_dim() const { return a.empty() ? 0 : static_cast<int>(a[0].rows()); }
};

// Spin-1 AKLT state: A_alpha = sigma_alpha / sqrt(3).
FcsModel aklt_model();

FcsModel fcs_model_from_json(const std::string& text);
std::string fcs_model_to_json(const FcsModel& model);

// Structural checks used by the correlation bounds: the transfer map of the
// identity is unital, each A^dag A is proportional to the identity, and the
// products A_a A_b^dag span the full bond operator space.
struct FcsConditions {
  double unital_defect = 0.0;       // || sum_a A_a A_a^dag - 1 ||
  double isometry_defect = 0.0;     // || sum_a A_a^dag A_a - 1 ||
  double proportional_defect = 0.0; // max_a || A_a^dag A_a - (tr/D) 1 ||
  int pair_span_rank = 0;           // rank of span{A_a A_b^dag}
  bool full_pair_span = false;
};

FcsConditions fcs_conditions(const FcsModel& model, double tol = 1e-10);

// E_O applied to a bond operator.
MatX fcs_transfer(const FcsModel& model, const MatX& on_site, const MatX& bond);

// (1/D) Tr[E_{O_l}( ... E_{O_1}(1) ... )] for a word of on-site operators.
double fcs_expectation(const FcsModel& model, const std::vector<MatX>& word);

// Joint outcome distribution of the observable measured on `length`
// consecutive sites.
ClassicalDistribution fcs_restriction(const FcsModel& model, const MatX& observable,
                                      int length);

// Connected correlation of single-site probes at separation 2n-1:
// sites -(n-1)..n carry the outcome projectors of `observable` at
// 0 < |i| < n (labels, inner sites first by position), probe_a at 0 and
// probe_b at n.  Returns |<AB> - <A><B>| in the conditioned state; the
// conditioning event must have positive probability.
double conditioned_correlation(const FcsModel& model, const MatX& observable, int n,
                               const MatX& probe_a, const MatX& probe_b,
                               const std::vector<int>& labels);

// Hermitian single-site basis (generalized Gell-Mann matrices plus the
// identity) used to scan for correlation witnesses.
std::vector<MatX> hermitian_basis(int dim);

}  // namespace spinres
