#pragma once

#include "spinres/quadrature.hpp"
#include "spinres/types.hpp"

namespace spinres {

// Exact transverse-field Ising statistics for the field-basis magnetization,
// valid off criticality (|g| != 1).  The generating data is a scalar symbol
// on the Brillouin zone whose Toeplitz determinants give the finite-window
// moment generating functions, with Szego asymptotics for the thermodynamic
// limit.

// Quasiparticle rotation angle at momentum k; smooth except for the 2 pi
// branch jump of atan2.
double bogoliubov_angle(double g, double k);

// phi_t(k) = cosh t - sinh t e^{-i theta_k}, evaluated in a form whose real
// part ((1+c)e^t + (1-c)e^{-t})/2 with c = (g+cos k)/R is manifestly positive
// for |g| > 1; the naive difference cancels catastrophically for large |t|.
cplx symbol(double g, double t, double k);

// hat phi_t(d) = (2 pi)^{-1} integral of phi_t(k) e^{-i k d}.
cplx symbol_fourier(double g, double t, int d, const QuadratureRule& quad);

// Entry <sigma-pair correlation at separation d> of the Toeplitz kernel.
// The symbol is conjugate-symmetric in k, so every coefficient is real, but
// its imaginary part is odd and nonzero: the kernel is real non-symmetric.
cplx pair_correlation(double g, double t, int d, const QuadratureRule& quad);

// log det of the n x n Toeplitz matrix [hat phi_t(j - k)].  Requires
// quad.count >= 8 n; the determinant must come out real and positive.
double toeplitz_log_determinant(double g, double t, int n, const QuadratureRule& quad);

// F(t) = (2 pi)^{-1} integral of log phi_t(k); the n -> infinity limit of
// log det / n.  Fails if the symbol's real part is not positive everywhere.
double szego_free_energy(double g, double t, const QuadratureRule& quad);

// F'(0): the mean field-basis magnetization per site.
double magnetization_mean(double g, const QuadratureRule& quad);

// Legendre transform I(m) = sup_t (t m - F(t)) over t in [-40, 40].
// `boundary` reports |m| = 1, where the supremum is only attained in the
// infinite-t limit.
struct RateValue {
  double value = 0.0;
  bool boundary = false;
};

RateValue rate_function(double g, double m, const QuadratureRule& quad);

}  // namespace spinres
