#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinres/gibbs_engine.hpp"
#include "spinres/spin_algebra.hpp"
#include "spinres/types.hpp"

namespace spinres {

// Ground-state conditional-probability probe on the chain -(L^2+b)..(L^2+b)
// with Hamiltonian -eps sum sigma^x sigma^x - field_sign sum sigma^z and
// measurement basis sigma^z.  Conditioning the inner window Gamma_L =
// {-L^2..L^2} on the polarized configuration, the probability of a flip at
// the origin reacts to a single flipped condition at site L, at distance
// L^2 - L from the nearest conditioned-on-flip site.
struct ProbeSpec {
  double epsilon = 0.2;  // coupling, in (0, 1)
  int length = 1;        // L >= 1
  int buffer = 0;        // b >= 0 extra unconditioned sites on each side
  int field_sign = 1;    // +1: polarized up; -1: polarized down
};

void validate_probe(const ProbeSpec& spec);

// Chain size 2(L^2 + b) + 1.
int probe_num_sites(const ProbeSpec& spec);

// Chain index of lattice site s in -(L^2+b)..(L^2+b).
int probe_site_index(const ProbeSpec& spec, int lattice_site);

Interaction probe_chain(const ProbeSpec& spec);

// P(target = target_label | cond sites carry cond labels) from a joint
// distribution covering all involved sites.  Conditioning events of
// probability below 1e-300 are refused.
double conditional_probability(const ClassicalDistribution& dist, int target_site,
                               int target_label,
                               const std::vector<std::pair<int, int>>& conditions);

struct FlipProbabilities {
  int num_sites = 0;
  double p_zero = 0.0;  // origin flip given the fully polarized inner window
  double p_one = 0.0;   // same, with the condition at site L flipped
  double gap = 0.0;     // p_one - p_zero
};

FlipProbabilities flip_probabilities(const ProbeSpec& spec, GroundMethod method,
                                     std::uint64_t seed = 1);

struct ScanRow {
  int length = 0;
  int num_sites = 0;
  double p_zero = 0.0;
  double p_one = 0.0;
  double gap = 0.0;
  std::string error;  // nonempty if this length failed; scan continues
};

std::vector<ScanRow> nonlocality_scan(double epsilon, const std::vector<int>& lengths,
                                      int buffer, int field_sign, GroundMethod method,
                                      std::uint64_t seed = 1);

// Ground-state sigma^z statistics of the N-site chain at coupling eps:
// total weight of odd-flip configurations (conserved parity makes it vanish)
// and the smallest even-flip configuration probability (all are positive).
struct ParityReport {
  double odd_mass = 0.0;
  double min_even_prob = 0.0;
};

ParityReport parity_support(int num_sites, double epsilon, std::uint64_t seed = 1);

}  // namespace spinres
