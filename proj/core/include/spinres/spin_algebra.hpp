#pragma once

#include <cstdint>
#include <vector>

#include "spinres/types.hpp"

namespace spinres {

// Basis convention for a chain of N m-level sites: site 0 is the most
// significant digit, so basis index = sum_s digit(s) * m^(N-1-s).  For
// spin-1/2, digit 0 is spin up (+1 eigenvector of sigma^z).
std::int64_t chain_dim(int num_sites, int local_dim);

MatX pauli_x();
MatX pauli_y();
MatX pauli_z();

MatX kron(const MatX& a, const MatX& b);

// One summand of a lattice Hamiltonian: a dense operator acting on an
// ordered list of distinct sites.
struct LocalTerm {
  std::vector<int> sites;
  MatX op;
};

struct Interaction {
  int num_sites = 0;
  int local_dim = 2;
  std::vector<LocalTerm> terms;

  std::int64_t dim() const { return chain_dim(num_sites, local_dim); }
};

// H = -J sum sigma^x_i sigma^x_{i+1} - h sum sigma^z_i, open boundary.
Interaction transverse_ising(double J, double h, int num_sites);

// H0 = sum_i (sigma^z_i + 1): ground state all spins down at energy 0,
// single-flip excitations at energy 2.
Interaction polarized_field(int num_sites);

// coeff * sum sigma^x_i sigma^x_{i+1}, open boundary.
Interaction ising_exchange(double coeff, int num_sites);

// Validates sites (in range, no duplicates) and operator shape against the
// chain geometry.
void validate_term(const LocalTerm& term, int num_sites, int local_dim);

// y += (op on sites) x, chain-embedded.  x and y must have length dim.
void apply_local(const MatX& op, const std::vector<int>& sites, int num_sites,
                 int local_dim, const VecX& x, VecX& y);

// y = H x without forming H.
VecX apply_interaction(const Interaction& h, const VecX& x);

// Dense matrix of op embedded on the given sites of the chain.
MatX embed_local(const MatX& op, const std::vector<int>& sites, int num_sites,
                 int local_dim);

// Dense Hamiltonian; refuses dimensions above kDenseDimCap.
MatX build_hamiltonian(const Interaction& h);

// Restriction of an interaction to the terms fully contained in `sites`,
// re-indexed to the sub-chain [0, |sites|).  `sites` must be sorted.
Interaction restrict_interaction(const Interaction& h, const std::vector<int>& sites);

// Distinct eigenvalues (descending) with orthogonal spectral projectors.
// Eigenvalues closer than cluster_tol * max(1, ||X||) are merged.
struct SpectralDecomposition {
  VecR values;                  // distinct, descending
  std::vector<MatX> projectors; // same order, sum to identity
};

SpectralDecomposition spectral_projections(const MatX& x, double cluster_tol = 1e-9);

// Product of commuting single-site spectral projectors: for each window site
// w[i], the projector of X onto its labels[i]-th distinct eigenvalue
// (descending order), embedded on the chain.
MatX joint_projection(const SpectralDecomposition& sd, const std::vector<int>& window,
                      const std::vector<int>& labels, int num_sites);

}  // namespace spinres
