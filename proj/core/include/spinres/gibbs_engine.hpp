#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "spinres/spin_algebra.hpp"
#include "spinres/types.hpp"

namespace spinres {

// Per-site measurement data for a Hermitian local observable: the rotation
// into its eigenbasis, with columns grouped by distinct eigenvalue in
// descending order.
struct LocalMeasurement {
  MatX rotation;                 // unitary, column j = eigenvector
  std::vector<int> outcome_of_col;
  VecR outcome_values;           // distinct eigenvalues, descending

  int local_dim() const { return static_cast<int>(rotation.rows()); }
  int num_outcomes() const { return static_cast<int>(outcome_values.size()); }
};

LocalMeasurement local_measurement(const MatX& x, double cluster_tol = 1e-9);

// Probabilities of joint outcomes of the same local observable measured on
// each window site.  Configurations are enumerated lexicographically with
// window[0] as the most significant digit.
struct ClassicalDistribution {
  std::vector<int> window;
  VecR outcome_values;
  VecR prob;

  int num_outcomes() const { return static_cast<int>(outcome_values.size()); }
  std::int64_t config_count() const { return prob.size(); }
  std::int64_t index_of(const std::vector<int>& labels) const;
  double prob_of(const std::vector<int>& labels) const;
  std::vector<int> labels_of(std::int64_t index) const;
};

struct ThermalState {
  MatX rho;              // trace one
  double log_partition;  // log Tr e^{-beta H}
};

ThermalState gibbs_state(const Interaction& h, double beta);

enum class GroundMethod { dense, iterative };

struct GroundState {
  VecX vector;
  double energy;
  bool degenerate;  // spectral gap below 1e-8 * ||H||
};

GroundState ground_state(const Interaction& h, GroundMethod method,
                         std::uint64_t seed = 1);

ClassicalDistribution classical_restriction(const MatX& rho, const LocalMeasurement& mb,
                                            const std::vector<int>& window, int num_sites);
ClassicalDistribution classical_restriction(const VecX& psi, const LocalMeasurement& mb,
                                            const std::vector<int>& window, int num_sites);
ClassicalDistribution classical_restriction(const MatX& rho, const MatX& x,
                                            const std::vector<int>& window, int num_sites);
ClassicalDistribution classical_restriction(const VecX& psi, const MatX& x,
                                            const std::vector<int>& window, int num_sites);

// Marginal onto a sub-window (sites must appear in the parent window).
ClassicalDistribution marginal(const ClassicalDistribution& dist,
                               const std::vector<int>& sub_window);

// Distribution of the window average (1/|W|) sum_i f(x_i), as
// (value, probability) pairs sorted by value.  An empty f means the identity.
// Refuses windows with more than 2^20 configurations.
std::vector<std::pair<double, double>> magnetization_distribution(
    const ClassicalDistribution& dist,
    const std::function<double(double)>& f = {});

}  // namespace spinres
