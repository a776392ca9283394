#include <cmath>
#include <utility>
#include <vector>

#include <doctest.h>

#include "spinres/gibbs_engine.hpp"
#include "spinres/locality_probe.hpp"
#include "spinres/spin_algebra.hpp"
#include "spinres/types.hpp"

using namespace spinres;

namespace {

MatX sigma_z_matrix() {
  MatX m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace

TEST_SUITE("locality_probe") {

TEST_CASE("probe validation") {
  CHECK_THROWS_AS(validate_probe({0.0, 1, 0, 1}), ValidationError);
  CHECK_THROWS_AS(validate_probe({1.0, 1, 0, 1}), ValidationError);
  CHECK_THROWS_AS(validate_probe({-0.2, 1, 0, 1}), ValidationError);
  CHECK_THROWS_AS(validate_probe({0.2, 0, 0, 1}), ValidationError);
  CHECK_THROWS_AS(validate_probe({0.2, 1, -1, 1}), ValidationError);
  CHECK_THROWS_AS(validate_probe({0.2, 1, 0, 0}), ValidationError);
  CHECK_THROWS_AS(validate_probe({0.2, 5, 3, 1}), CapabilityError);
  CHECK_NOTHROW(validate_probe({0.2, 1, 3, -1}));
}

TEST_CASE("probe geometry") {
  ProbeSpec spec{0.2, 2, 3, 1};
  CHECK(probe_num_sites(spec) == 15);
  CHECK(probe_site_index(spec, -7) == 0);
  CHECK(probe_site_index(spec, 0) == 7);
  CHECK(probe_site_index(spec, 7) == 14);
}

TEST_CASE("probe chain is the transverse-field exchange chain") {
  ProbeSpec spec{0.3, 1, 1, 1};
  MatX lhs = build_hamiltonian(probe_chain(spec));
  MatX rhs = build_hamiltonian(transverse_ising(0.3, 1.0, probe_num_sites(spec)));
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);

  ProbeSpec down{0.3, 1, 1, -1};
  MatX lhs_d = build_hamiltonian(probe_chain(down));
  MatX rhs_d = build_hamiltonian(transverse_ising(0.3, -1.0, probe_num_sites(down)));
  CHECK((lhs_d - rhs_d).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("conditional probability on an independent chain ignores conditions") {
  // zero coupling: the Gibbs distribution factorizes over sites
  Interaction chain = transverse_ising(0.0, 1.0, 4);
  ThermalState state = gibbs_state(chain, 0.7);
  LocalMeasurement mb = local_measurement(sigma_z_matrix());
  std::vector<int> window = {0, 1, 2, 3};
  ClassicalDistribution dist = classical_restriction(state.rho, mb, window, 4);

  double site_up = std::exp(0.7) / (2.0 * std::cosh(0.7));
  double bare = conditional_probability(dist, 1, 0, {});
  CHECK(bare == doctest::Approx(site_up).epsilon(1e-12));
  double conditioned = conditional_probability(dist, 1, 0, {{0, 1}, {3, 0}});
  CHECK(conditioned == doctest::Approx(site_up).epsilon(1e-12));
}

TEST_CASE("conditional probabilities of complementary labels sum to one") {
  Interaction chain = transverse_ising(0.2, 1.0, 4);
  GroundState gs = ground_state(chain, GroundMethod::dense);
  LocalMeasurement mb = local_measurement(sigma_z_matrix());
  std::vector<int> window = {0, 1, 2, 3};
  ClassicalDistribution dist = classical_restriction(gs.vector, mb, window, 4);

  std::vector<std::pair<int, int>> conds = {{0, 0}, {2, 0}};
  double p0 = conditional_probability(dist, 1, 0, conds);
  double p1 = conditional_probability(dist, 1, 1, conds);
  CHECK(p0 + p1 == doctest::Approx(1.0).epsilon(1e-12));

  // direct ratio of joint masses over the 4-site distribution
  double num =
      dist.prob[dist.index_of({0, 0, 0, 0})] + dist.prob[dist.index_of({0, 0, 0, 1})];
  double den = num + dist.prob[dist.index_of({0, 1, 0, 0})] +
               dist.prob[dist.index_of({0, 1, 0, 1})];
  CHECK(p0 == doctest::Approx(num / den).epsilon(1e-12));
}

TEST_CASE("conditional probability argument checks") {
  Interaction chain = transverse_ising(0.0, 1.0, 2);
  GroundState gs = ground_state(chain, GroundMethod::dense);
  LocalMeasurement mb = local_measurement(sigma_z_matrix());
  ClassicalDistribution dist = classical_restriction(gs.vector, mb, {0, 1}, 2);

  CHECK_THROWS_AS(conditional_probability(dist, 0, 0, {{0, 0}}), ValidationError);
  // the ground state of the pure field chain is a sigma-z point mass
  CHECK_THROWS_AS(conditional_probability(dist, 1, 0, {{0, 1}}), NumericalError);
}

TEST_CASE("single flip probabilities at unit length") {
  ProbeSpec spec{0.2, 1, 3, 1};
  FlipProbabilities dense = flip_probabilities(spec, GroundMethod::dense);
  CHECK(dense.num_sites == 9);
  CHECK(dense.p_zero == doctest::Approx(5.1182134541468826e-05).epsilon(1e-9));
  CHECK(dense.p_one == doctest::Approx(0.49806709940492294).epsilon(1e-9));
  CHECK(dense.gap == doctest::Approx(dense.p_one - dense.p_zero).epsilon(1e-14));

  FlipProbabilities iter = flip_probabilities(spec, GroundMethod::iterative, 7);
  CHECK(iter.p_zero == doctest::Approx(dense.p_zero).epsilon(1e-8));
  CHECK(iter.p_one == doctest::Approx(dense.p_one).epsilon(1e-8));
}

TEST_CASE("flipping the field direction flips nothing observable") {
  ProbeSpec up{0.2, 1, 3, 1};
  ProbeSpec down{0.2, 1, 3, -1};
  FlipProbabilities a = flip_probabilities(up, GroundMethod::dense);
  FlipProbabilities b = flip_probabilities(down, GroundMethod::dense);
  CHECK(std::abs(a.p_zero - b.p_zero) < 1e-12);
  CHECK(std::abs(a.p_one - b.p_one) < 1e-12);
}

TEST_CASE("scan rows survive per-length failures") {
  std::vector<ScanRow> rows =
      nonlocality_scan(0.2, {1, 5}, 3, 1, GroundMethod::iterative, 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].length == 1);
  CHECK(rows[0].error.empty());
  CHECK(rows[0].p_zero == doctest::Approx(5.1182134541468826e-05).epsilon(1e-7));
  CHECK(rows[0].gap > 0.0);
  CHECK(rows[1].length == 5);
  CHECK_FALSE(rows[1].error.empty());  // 57-site chain exceeds the probe cap
  CHECK(rows[1].num_sites == 0);
}

TEST_CASE("parity sectors of the even chain") {
  for (int n : {4, 6}) {
    ParityReport rep = parity_support(n, 0.2);
    CHECK(rep.odd_mass <= 1e-12);
    CHECK(rep.min_even_prob > 0.0);
  }
  ParityReport big = parity_support(10, 0.2);
  CHECK(big.odd_mass <= 1e-12);
  CHECK(big.min_even_prob > 0.0);
}

TEST_CASE("two-site parity weights in closed form") {
  // ground of -eps XX - Z0 - Z1 in the even sector {up up, down down}
  double eps = 0.2;
  double ratio = (std::sqrt(4.0 + eps * eps) - 2.0) / eps;
  double expect = ratio * ratio / (1.0 + ratio * ratio);
  ParityReport rep = parity_support(2, eps);
  CHECK(rep.odd_mass <= 1e-14);
  CHECK(rep.min_even_prob == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("parity probe argument checks") {
  CHECK_THROWS_AS(parity_support(5, 0.2), ValidationError);
  CHECK_THROWS_AS(parity_support(16, 0.2), ValidationError);
  CHECK_THROWS_AS(parity_support(4, 1.0), ValidationError);
  CHECK_THROWS_AS(parity_support(4, 0.0), ValidationError);
}

}  // TEST_SUITE locality_probe
