#pragma once

#include <cstdint>
#include <vector>

#include "spinres/gibbs_engine.hpp"
#include "spinres/spin_algebra.hpp"
#include "spinres/types.hpp"

namespace spinres {

// Gapped product part plus perturbation, with a rank-one site projector onto
// the preferred local state (the unperturbed ground state is its product).
struct PerturbationModel {
  Interaction h0;
  Interaction upsilon;
  MatX site_projector;
};

void validate_model(const PerturbationModel& model);

// The field chain sum (sigma^z + 1) with exchange -e^{-2 kappa} sum
// sigma^x sigma^x and projector onto spin down.
PerturbationModel weak_exchange_model(double kappa, int num_sites);

// Time-ordered imaginary-time diagram: n perturbation events B_k at times
// t_1 < ... < t_n in (0, beta), with excited-site sets S_0..S_n between
// them (S_0 spans both boundary arcs).
struct DiagramSpec {
  double beta = 1.0;
  std::vector<double> times;
  std::vector<std::vector<int>> s_sets;
  std::vector<std::vector<int>> b_sets;

  int order() const { return static_cast<int>(b_sets.size()); }
};

void validate_diagram(const PerturbationModel& model, const DiagramSpec& spec);

// Contribution of one diagram to the measurement-conditioned expansion,
//   Tr(P(S_0) Q_x [P(S_n) e^{-(beta-t_n)H_0} Ups(B_n)] ...
//      [P(S_1) e^{-(t_2-t_1)H_0} Ups(B_1)] e^{-t_1 H_0} P(S_0)) / Tr(P(0) Q_x),
// where P(S) projects sites in S onto the orthogonal complement of the
// preferred state and the rest onto it.  Diagrams violating the step rule
// S_k \ B_k = S_{k-1} \ B_k contribute zero, as does the empty order-zero
// diagram (its weight is split off the expansion).  Requires a positive
// overlap Tr(Q(x_i) P) at every site.
double diagram_density(const PerturbationModel& model, const LocalMeasurement& mb,
                       const DiagramSpec& spec, const std::vector<int>& labels);

// e^{-beta(H0+V)} approximated by the order-N alternating Duhamel series
//   sum_k (-1)^k int_{0<t_1<...<t_k<beta} e^{-(beta-t_k)H0} V ... V e^{-t_1 H0},
// integrated with nested 24-node Gauss-Legendre rules, together with the a
// priori remainder bound (beta ||V||)^{N+1}/(N+1)! e^{beta(||H0|| + ||V||)}.
struct TruncatedSeries {
  MatX value;
  double remainder_bound = 0.0;
};

TruncatedSeries truncated_dyson(const Interaction& h0, const Interaction& v, double beta,
                                int order);

// Decomposition of a diagram into its connected components.  Constituents
// are horizontal segments (one excited site over one time slice) and
// vertical events (B_k, t_k); two constituents are adjacent when their
// closed time intervals intersect and their site sets come within 2(r-1)
// of each other, r being the fattening range.
struct Constituent {
  bool vertical = false;
  std::vector<int> sites;
  double t0 = 0.0, t1 = 0.0;  // vertical events have t0 == t1
  int slot = 0;               // S-index for horizontal, B-index for vertical
};

struct PolymerDecomposition {
  std::vector<Constituent> constituents;
  std::vector<std::vector<int>> components;  // constituent indices
};

PolymerDecomposition polymer_decomposition(const DiagramSpec& spec, int range = 1);

// Sub-diagram carried by one component: its own vertical events in time
// order, with excited sets read off the component's horizontal segments
// (constant between consecutive events of the component).
DiagramSpec component_diagram(const DiagramSpec& spec, const PolymerDecomposition& dec,
                              int component);

// Largest relative defect between a diagram density and the product over
// its components.
struct FactorizationReport {
  double whole = 0.0;
  double product = 0.0;
  double relative_defect = 0.0;
  int num_components = 0;
};

FactorizationReport diagram_factorization(const PerturbationModel& model,
                                          const LocalMeasurement& mb,
                                          const DiagramSpec& spec,
                                          const std::vector<int>& labels, int range = 1);

// Convergence certificate for the cluster expansion: for every constituent
// class the integrated weight of its neighbors, inflated by e^d, must stay
// below its own d.  Closed forms over a finite chain:
//   vertical weight  w(B) = 4^{|B|} e^{(alpha2+gamma)|B|} ||Ups(B)||
//   horizontal weight w(i) = e^{-(g-alpha1) beta + gamma}
//   d(horizontal) = delta1 (g-alpha1) beta,  d(vertical) = delta2 |B|
// with vertical-vertical couplings e^{-(g-alpha1)|t-t'|} integrated at the
// worst pivot time.
struct KPParams {
  double beta = 1.0;
  double gap = 2.0;        // g
  double alpha1 = 0.5;     // must stay below gap
  double alpha2 = 0.5;
  double delta1 = 0.5;     // in (0, 1)
  double delta2 = 0.5;     // in (0, 1)
  double gamma = 0.0;      // observable overlap penalty, see observable_gamma
  int range = 1;
};

// max over outcomes x of log(m / Tr(Q(x) P)).
double observable_gamma(const LocalMeasurement& mb, const MatX& site_projector);

struct KPRow {
  bool vertical = false;
  std::vector<int> sites;
  double lhs = 0.0;
  double bound = 0.0;  // d of the pivot
};

struct KPCertificate {
  std::vector<KPRow> rows;
  bool satisfied = false;
  double margin = 0.0;  // max lhs / bound
};

KPCertificate kp_certificate(const KPParams& params, const Interaction& upsilon,
                             int num_sites);

}  // namespace spinres
