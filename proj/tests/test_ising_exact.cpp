#include <cmath>
#include <complex>

#include <doctest.h>

#include "spinres/ising_exact.hpp"
#include "spinres/quadrature.hpp"
#include "spinres/types.hpp"

using namespace spinres;

namespace {

const double kPi = std::acos(-1.0);

QuadratureRule default_quad() { return periodic_trapezoid(4096); }

}  // namespace

TEST_SUITE("ising_exact") {

TEST_CASE("rotation angle fixed points") {
  CHECK(bogoliubov_angle(2.0, 0.0) == doctest::Approx(kPi).epsilon(1e-14));
  CHECK(bogoliubov_angle(2.0, kPi) == doctest::Approx(kPi).epsilon(1e-14));
  CHECK(bogoliubov_angle(2.0, kPi / 2.0) ==
        doctest::Approx(kPi - std::atan(0.5)).epsilon(1e-13));
  CHECK(bogoliubov_angle(-2.0, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("critical field strength is rejected") {
  CHECK_THROWS_AS(bogoliubov_angle(1.0, 0.3), ValidationError);
  CHECK_THROWS_AS(symbol(-1.0, 0.5, 0.3), ValidationError);
  CHECK_THROWS_AS(magnetization_mean(1.0, default_quad()), ValidationError);
}

TEST_CASE("angle varies continuously across the zone") {
  QuadratureRule quad = default_quad();
  double limit = 2.0 * kPi / quad.count() * 10.0;
  for (int i = 1; i < quad.count(); ++i) {
    double jump = std::abs(bogoliubov_angle(2.0, quad.nodes[i]) -
                           bogoliubov_angle(2.0, quad.nodes[i - 1]));
    if (jump > kPi) continue;  // branch seam of atan2 at +-pi
    CHECK(jump < limit);
  }
}

TEST_CASE("symbol special values") {
  CHECK(std::abs(symbol(2.0, 0.0, 1.234) - cplx(1.0, 0.0)) < 1e-14);
  CHECK(std::abs(symbol(2.0, 0.3, 0.0) - cplx(std::exp(0.3), 0.0)) < 1e-13);
  CHECK(std::abs(symbol(100.0, 0.5, 1.0) - cplx(std::exp(0.5), 0.0)) < 2e-2);
}

TEST_CASE("symbol is hermitian in momentum and right-half-plane") {
  for (double t : {-2.0, -0.5, 0.7, 2.0}) {
    for (double k : {0.1, 0.9, 2.2, 3.0}) {
      cplx plus = symbol(2.0, t, k);
      cplx minus = symbol(2.0, t, -k);
      CHECK(std::abs(plus - std::conj(minus)) < 1e-14);
      CHECK(plus.real() > 0.0);
    }
  }
}

TEST_CASE("fourier coefficients of the flat symbol collapse to a delta") {
  QuadratureRule quad = default_quad();
  CHECK(std::abs(pair_correlation(2.0, 0.0, 0, quad) - cplx(1.0, 0.0)) < 1e-13);
  for (int d = 1; d <= 4; ++d) {
    CHECK(std::abs(pair_correlation(2.0, 0.0, d, quad)) < 1e-13);
  }
}

TEST_CASE("fourier coefficients are real, asymmetric, and decay geometrically") {
  QuadratureRule quad = default_quad();
  double prev = std::abs(pair_correlation(2.0, 0.3, 1, quad));
  for (int d = 1; d <= 6; ++d) {
    cplx fwd = pair_correlation(2.0, 0.3, d, quad);
    cplx bwd = pair_correlation(2.0, 0.3, -d, quad);
    CHECK(std::abs(fwd.imag()) < 1e-14);
    CHECK(std::abs(bwd.imag()) < 1e-14);
    if (d > 1) {
      double cur = std::abs(fwd);
      CHECK(cur < prev);
      prev = cur;
    }
  }
  // The odd imaginary part of the symbol skews the kernel: +d and -d differ.
  CHECK(std::abs(pair_correlation(2.0, 0.3, 1, quad) -
                 pair_correlation(2.0, 0.3, -1, quad)) > 1e-3);
}

TEST_CASE("trivial determinants") {
  QuadratureRule quad = default_quad();
  CHECK(std::abs(toeplitz_log_determinant(2.0, 0.0, 5, quad)) < 1e-12);
}

TEST_CASE("one-by-one determinant matches the mean magnetization form") {
  QuadratureRule quad = default_quad();
  double mz = magnetization_mean(2.0, quad);
  double expect = std::log(std::cosh(0.5) + std::sinh(0.5) * mz);
  CHECK(toeplitz_log_determinant(2.0, 0.5, 1, quad) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("two-by-two determinant matches direct complex arithmetic") {
  QuadratureRule quad = default_quad();
  cplx c0 = symbol_fourier(2.0, 0.5, 0, quad);
  cplx c1 = symbol_fourier(2.0, 0.5, 1, quad);
  cplx cm1 = symbol_fourier(2.0, 0.5, -1, quad);
  cplx det = c0 * c0 - c1 * cm1;
  CHECK(std::abs(det.imag()) < 1e-12);
  CHECK(toeplitz_log_determinant(2.0, 0.5, 2, quad) ==
        doctest::Approx(std::log(det.real())).epsilon(1e-12));
}

TEST_CASE("determinant sizes and quadrature floors are enforced") {
  QuadratureRule tiny = periodic_trapezoid(16);
  CHECK_THROWS_AS(toeplitz_log_determinant(2.0, 0.5, 4, tiny), ValidationError);
  CHECK_THROWS_AS(toeplitz_log_determinant(2.0, 0.5, 0, default_quad()),
                  ValidationError);
  CHECK_THROWS_AS(toeplitz_log_determinant(2.0, 0.5, 513, default_quad()),
                  CapabilityError);
}

TEST_CASE("free energy density vanishes at zero tilt") {
  CHECK(std::abs(szego_free_energy(2.0, 0.0, default_quad())) <= 1e-15);
}

TEST_CASE("strong fields linearize the free energy") {
  CHECK(std::abs(szego_free_energy(100.0, 0.5, default_quad()) - 0.5) < 1e-3);
}

TEST_CASE("free energy is convex on the tilt grid") {
  QuadratureRule quad = default_quad();
  std::vector<double> f;
  for (int i = -20; i <= 20; ++i) f.push_back(szego_free_energy(2.0, 0.1 * i, quad));
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    CHECK(f[i + 1] - 2.0 * f[i] + f[i - 1] >= -1e-9);
  }
}

TEST_CASE("mean magnetization is pinned and matches the slope at zero") {
  QuadratureRule quad = default_quad();
  double mz = magnetization_mean(2.0, quad);
  CHECK(mz == doctest::Approx(0.9342154576676933).epsilon(1e-12));
  CHECK(mz > 0.0);
  double h = 1e-4;
  double slope = (szego_free_energy(2.0, h, quad) - szego_free_energy(2.0, -h, quad)) /
                 (2.0 * h);
  CHECK(std::abs(slope - mz) < 1e-7);
}

TEST_CASE("scaled log determinants approach the free energy from volume") {
  QuadratureRule quad = default_quad();
  double f = szego_free_energy(2.0, 0.5, quad);
  double prev = 1e300;
  for (int n : {8, 16, 32}) {
    double gap = std::abs(toeplitz_log_determinant(2.0, 0.5, n, quad) / n - f);
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("rate function vanishes at the mean and is convex") {
  QuadratureRule quad = default_quad();
  double mz = magnetization_mean(2.0, quad);
  RateValue at_mean = rate_function(2.0, mz, quad);
  CHECK(at_mean.value >= 0.0);
  CHECK(at_mean.value <= 1e-8);
  CHECK_FALSE(at_mean.boundary);

  std::vector<double> grid = {-0.5, 0.0, 0.5};
  std::vector<double> vals;
  for (double m : grid) {
    RateValue rv = rate_function(2.0, m, quad);
    CHECK(rv.value >= 0.0);
    vals.push_back(rv.value);
  }
  CHECK(vals[2] - 2.0 * vals[1] + vals[0] >= -1e-8);
  CHECK(rate_function(2.0, 0.9, quad).value > 0.0);
}

TEST_CASE("rate function flags the spectrum edge") {
  QuadratureRule quad = default_quad();
  CHECK(rate_function(2.0, 1.0, quad).boundary);
  CHECK(rate_function(2.0, -1.0, quad).boundary);
  CHECK_FALSE(rate_function(2.0, 0.5, quad).boundary);
  CHECK_THROWS_AS(rate_function(2.0, 1.5, quad), ValidationError);
}

TEST_CASE("strong fields push the mean to the edge") {
  QuadratureRule quad = default_quad();
  double mz = magnetization_mean(100.0, quad);
  CHECK(mz > 0.999);
  CHECK(std::abs(mz - 1.0) < 1e-3);
  CHECK(rate_function(100.0, mz, quad).value <= 1e-8);
}

}  // TEST_SUITE ising_exact
