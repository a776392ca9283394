#include "spinres/locality_probe.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace spinres {

void validate_probe(const ProbeSpec& spec) {
  if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0)) {
    throw ValidationError("probe coupling must lie in (0, 1)");
  }
  if (spec.length < 1) {
    throw ValidationError("probe length must be >= 1");
  }
  if (spec.buffer < 0) {
    throw ValidationError("probe buffer must be >= 0");
  }
  if (spec.field_sign != 1 && spec.field_sign != -1) {
    throw ValidationError("probe field sign must be +1 or -1");
  }
  if (probe_num_sites(spec) > 25) {
    throw CapabilityError("probe chains capped at 25 sites");
  }
}

int probe_num_sites(const ProbeSpec& spec) {
  return 2 * (spec.length * spec.length + spec.buffer) + 1;
}

int probe_site_index(const ProbeSpec& spec, int lattice_site) {
  int radius = spec.length * spec.length + spec.buffer;
  if (lattice_site < -radius || lattice_site > radius) {
    throw ValidationError("lattice site outside probe chain");
  }
  return lattice_site + radius;
}

Interaction probe_chain(const ProbeSpec& spec) {
  validate_probe(spec);
  return transverse_ising(spec.epsilon, static_cast<double>(spec.field_sign),
                          probe_num_sites(spec));
}

double conditional_probability(const ClassicalDistribution& dist, int target_site,
                               int target_label,
                               const std::vector<std::pair<int, int>>& conditions) {
  auto pos_of = [&](int site) {
    for (std::size_t i = 0; i < dist.window.size(); ++i) {
      if (dist.window[i] == site) return static_cast<int>(i);
    }
    throw ValidationError("site " + std::to_string(site) + " not in the distribution window");
  };
  int target_pos = pos_of(target_site);
  if (target_label < 0 || target_label >= dist.num_outcomes()) {
    throw ValidationError("target label out of range");
  }
  std::vector<std::pair<int, int>> cond_pos;
  cond_pos.reserve(conditions.size());
  for (auto [site, label] : conditions) {
    if (label < 0 || label >= dist.num_outcomes()) {
      throw ValidationError("condition label out of range");
    }
    int p = pos_of(site);
    if (p == target_pos) {
      throw ValidationError("target site cannot also be conditioned on");
    }
    cond_pos.push_back({p, label});
  }
  double num = 0.0, den = 0.0;
  for (std::int64_t idx = 0; idx < dist.config_count(); ++idx) {
    double p = dist.prob[idx];
    if (p == 0.0) continue;
    auto labels = dist.labels_of(idx);
    bool match = true;
    for (auto [pos, label] : cond_pos) {
      if (labels[pos] != label) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    den += p;
    if (labels[target_pos] == target_label) num += p;
  }
  if (den < 1e-300) {
    throw NumericalError("conditioning event has vanishing probability");
  }
  return num / den;
}

FlipProbabilities flip_probabilities(const ProbeSpec& spec, GroundMethod method,
                                     std::uint64_t seed) {
  validate_probe(spec);
  Interaction chain = probe_chain(spec);
  GroundState gs = ground_state(chain, method, seed);

  // sigma^z outcomes: index 0 is up.  With field_sign = +1 the ground state
  // is polarized up, so the flipped outcome is down (label 1); reversed for
  // field_sign = -1.
  int ground_label = spec.field_sign > 0 ? 0 : 1;
  int flipped_label = 1 - ground_label;

  int inner_radius = spec.length * spec.length;
  std::vector<int> window;
  for (int s = -inner_radius; s <= inner_radius; ++s) {
    window.push_back(probe_site_index(spec, s));
  }
  ClassicalDistribution dist =
      classical_restriction(gs.vector, pauli_z(), window, chain.num_sites);

  int origin = probe_site_index(spec, 0);
  int lever = probe_site_index(spec, spec.length);

  std::vector<std::pair<int, int>> base;
  for (int s = -inner_radius; s <= inner_radius; ++s) {
    int idx = probe_site_index(spec, s);
    if (idx != origin) base.push_back({idx, ground_label});
  }
  std::vector<std::pair<int, int>> levered;
  for (auto [site, label] : base) {
    levered.push_back({site, site == lever ? flipped_label : label});
  }

  FlipProbabilities out;
  out.num_sites = chain.num_sites;
  out.p_zero = conditional_probability(dist, origin, flipped_label, base);
  out.p_one = conditional_probability(dist, origin, flipped_label, levered);
  out.gap = out.p_one - out.p_zero;
  return out;
}

std::vector<ScanRow> nonlocality_scan(double epsilon, const std::vector<int>& lengths,
                                      int buffer, int field_sign, GroundMethod method,
                                      std::uint64_t seed) {
  std::vector<ScanRow> rows;
  for (int length : lengths) {
    ScanRow row;
    row.length = length;
    ProbeSpec spec{epsilon, length, buffer, field_sign};
    try {
      FlipProbabilities fp = flip_probabilities(spec, method, seed);
      row.num_sites = fp.num_sites;
      row.p_zero = fp.p_zero;
      row.p_one = fp.p_one;
      row.gap = fp.gap;
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

ParityReport parity_support(int num_sites, double epsilon, std::uint64_t seed) {
  if (num_sites < 2 || num_sites > 14 || num_sites % 2 != 0) {
    throw ValidationError("parity check needs an even chain of at most 14 sites");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ValidationError("probe coupling must lie in (0, 1)");
  }
  Interaction chain = transverse_ising(epsilon, 1.0, num_sites);
  GroundMethod method = chain.dim() <= kDenseDimCap ? GroundMethod::dense
                                                    : GroundMethod::iterative;
  GroundState gs = ground_state(chain, method, seed);

  // sigma^z probabilities are squared amplitudes; bit i of the basis index
  // is 1 when site i points down.
  ParityReport out;
  out.min_even_prob = std::numeric_limits<double>::infinity();
  for (std::int64_t idx = 0; idx < gs.vector.size(); ++idx) {
    double p = std::norm(gs.vector[idx]);
    if (std::popcount(static_cast<std::uint64_t>(idx)) % 2 == 1) {
      out.odd_mass += p;
    } else {
      out.min_even_prob = std::min(out.min_even_prob, p);
    }
  }
  return out;
}

}  // namespace spinres
