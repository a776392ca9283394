#include "spinres/dyson_polymer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iterator>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "spinres/quadrature.hpp"

namespace spinres {

namespace {

double spectral_norm(const MatX& h) {
  Eigen::SelfAdjointEigenSolver<MatX> es(h);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed");
  }
  int n = static_cast<int>(es.eigenvalues().size());
  return std::max(std::abs(es.eigenvalues()[0]), std::abs(es.eigenvalues()[n - 1]));
}

std::vector<int> sorted_distinct(const std::vector<int>& sites, int num_sites,
                                 const char* what) {
  std::vector<int> out = sites;
  std::sort(out.begin(), out.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0 || out[i] >= num_sites) {
      throw ValidationError(std::string(what) + " site outside chain");
    }
    if (i > 0 && out[i] == out[i - 1]) {
      throw ValidationError(std::string(what) + " repeats a site");
    }
  }
  return out;
}

// Hermitian exponential helper bound to one eigendecomposition.
struct Propagator {
  MatX vectors;
  VecR values;

  explicit Propagator(const MatX& h) {
    Eigen::SelfAdjointEigenSolver<MatX> es(h);
    if (es.info() != Eigen::Success) {
      throw NumericalError("Hamiltonian eigendecomposition failed");
    }
    vectors = es.eigenvectors();
    values = es.eigenvalues();
  }

  MatX at(double tau) const {
    VecR boltz = (-(tau * values.array())).exp();
    return vectors * boltz.asDiagonal() * vectors.adjoint();
  }

  double norm() const {
    int n = static_cast<int>(values.size());
    return std::max(std::abs(values[0]), std::abs(values[n - 1]));
  }
};

}  // namespace

void validate_model(const PerturbationModel& model) {
  if (model.h0.num_sites != model.upsilon.num_sites ||
      model.h0.local_dim != model.upsilon.local_dim) {
    throw ValidationError("unperturbed and perturbing parts live on different chains");
  }
  const MatX& p = model.site_projector;
  int m = model.h0.local_dim;
  if (p.rows() != m || p.cols() != m) {
    throw ValidationError("site projector dimension does not match local dimension");
  }
  if ((p - p.adjoint()).cwiseAbs().maxCoeff() > 1e-12 ||
      (p * p - p).cwiseAbs().maxCoeff() > 1e-12 ||
      std::abs(p.trace().real() - 1.0) > 1e-12) {
    throw ValidationError("site projector must be a rank-one orthogonal projection");
  }
  for (const auto& term : model.h0.terms) {
    validate_term(term, model.h0.num_sites, model.h0.local_dim);
  }
  for (const auto& term : model.upsilon.terms) {
    validate_term(term, model.upsilon.num_sites, model.upsilon.local_dim);
  }
}

PerturbationModel weak_exchange_model(double kappa, int num_sites) {
  PerturbationModel model;
  model.h0 = polarized_field(num_sites);
  model.upsilon = ising_exchange(-std::exp(-2.0 * kappa), num_sites);
  model.site_projector = 0.5 * (MatX::Identity(2, 2) - pauli_z());
  return model;
}

void validate_diagram(const PerturbationModel& model, const DiagramSpec& spec) {
  validate_model(model);
  int n = spec.order();
  int num_sites = model.h0.num_sites;
  if (num_sites > 8) {
    throw ValidationError("diagram densities capped at 8 sites");
  }
  if (n > 4) {
    throw ValidationError("diagram order capped at 4");
  }
  if (!(spec.beta > 0.0) || !std::isfinite(spec.beta)) {
    throw ValidationError("diagram needs a positive finite beta");
  }
  if (static_cast<int>(spec.times.size()) != n) {
    throw ValidationError("diagram times do not match the number of events");
  }
  if (static_cast<int>(spec.s_sets.size()) != n + 1) {
    throw ValidationError("diagram needs one more excited set than events");
  }
  double prev = 0.0;
  for (double t : spec.times) {
    if (!(t > prev) || !(t < spec.beta)) {
      throw ValidationError("diagram times must be strictly increasing inside (0, beta)");
    }
    prev = t;
  }
  for (const auto& s : spec.s_sets) {
    sorted_distinct(s, num_sites, "excited-set");
  }
  for (const auto& b : spec.b_sets) {
    auto sorted = sorted_distinct(b, num_sites, "event");
    bool found = false;
    for (const auto& term : model.upsilon.terms) {
      auto ts = term.sites;
      std::sort(ts.begin(), ts.end());
      if (ts == sorted) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw ValidationError("perturbation has no term on the requested event support");
    }
  }
}

double diagram_density(const PerturbationModel& model, const LocalMeasurement& mb,
                       const DiagramSpec& spec, const std::vector<int>& labels) {
  validate_diagram(model, spec);
  int num_sites = model.h0.num_sites;
  int m = model.h0.local_dim;
  if (mb.local_dim() != m) {
    throw ValidationError("measurement dimension does not match local dimension");
  }
  if (static_cast<int>(labels.size()) != num_sites) {
    throw ValidationError("diagram needs one outcome label per site");
  }

  // Per-outcome projectors and the per-site overlap with the preferred state.
  std::vector<MatX> outcome_proj(mb.num_outcomes(), MatX::Zero(m, m));
  for (int c = 0; c < m; ++c) {
    outcome_proj[mb.outcome_of_col[c]] +=
        mb.rotation.col(c) * mb.rotation.col(c).adjoint();
  }
  double denom = 1.0;
  for (int i = 0; i < num_sites; ++i) {
    int lab = labels[i];
    if (lab < 0 || lab >= mb.num_outcomes()) {
      throw ValidationError("outcome label out of range");
    }
    double overlap = (outcome_proj[lab] * model.site_projector).trace().real();
    if (overlap <= 1e-14) {
      throw NumericalError("outcome at site " + std::to_string(i) +
                           " has vanishing overlap with the preferred state");
    }
    denom *= overlap;
  }

  int n = spec.order();
  std::vector<std::vector<int>> s_sorted;
  for (const auto& s : spec.s_sets) s_sorted.push_back(sorted_distinct(s, num_sites, "excited-set"));

  // Step rule: sites outside B_k may not change their excitation.
  for (int k = 1; k <= n; ++k) {
    auto b = sorted_distinct(spec.b_sets[k - 1], num_sites, "event");
    std::vector<int> lhs, rhs;
    std::set_difference(s_sorted[k].begin(), s_sorted[k].end(), b.begin(), b.end(),
                        std::back_inserter(lhs));
    std::set_difference(s_sorted[k - 1].begin(), s_sorted[k - 1].end(), b.begin(), b.end(),
                        std::back_inserter(rhs));
    if (lhs != rhs) return 0.0;
  }
  if (n == 0 && s_sorted[0].empty()) return 0.0;  // split off the expansion

  MatX complement = MatX::Identity(m, m) - model.site_projector;
  auto excitation_proj = [&](const std::vector<int>& s) {
    MatX out = MatX::Ones(1, 1);
    for (int i = 0; i < num_sites; ++i) {
      bool excited = std::binary_search(s.begin(), s.end(), i);
      out = kron(out, excited ? complement : model.site_projector);
    }
    return out;
  };

  MatX qx = MatX::Ones(1, 1);
  for (int i = 0; i < num_sites; ++i) qx = kron(qx, outcome_proj[labels[i]]);

  Propagator prop(build_hamiltonian(model.h0));

  MatX p0 = excitation_proj(s_sorted[0]);
  MatX cur = prop.at(n == 0 ? spec.beta : spec.times[0]) * p0;
  for (int k = 1; k <= n; ++k) {
    auto b = sorted_distinct(spec.b_sets[k - 1], num_sites, "event");
    const LocalTerm* term = nullptr;
    for (const auto& t : model.upsilon.terms) {
      auto ts = t.sites;
      std::sort(ts.begin(), ts.end());
      if (ts == b) {
        term = &t;
        break;
      }
    }
    MatX vk = embed_local(term->op, term->sites, num_sites, m);
    double upper = (k == n) ? spec.beta : spec.times[k];
    cur = excitation_proj(s_sorted[k]) * (prop.at(upper - spec.times[k - 1]) * (vk * cur));
  }
  cplx num = (p0 * qx * cur).trace();
  if (std::abs(num.imag()) > 1e-9 * std::max(1.0, std::abs(num.real()))) {
    throw NumericalError("diagram density came out non-real");
  }
  return num.real() / denom;
}

TruncatedSeries truncated_dyson(const Interaction& h0, const Interaction& v, double beta,
                                int order) {
  if (h0.num_sites != v.num_sites || h0.local_dim != v.local_dim) {
    throw ValidationError("series parts live on different chains");
  }
  if (order < 0 || order > 4) {
    throw ValidationError("series order must lie in 0..4");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ValidationError("series needs a positive finite beta");
  }
  double dim = static_cast<double>(h0.dim());
  if (std::pow(24.0, order) * dim * dim * dim > 6e10) {
    throw CapabilityError("truncated series too expensive at this size and order");
  }

  Propagator prop(build_hamiltonian(h0));
  MatX vd = build_hamiltonian(v);
  QuadratureRule unit = gauss_legendre(24, 0.0, 1.0);

  // J_k(u) = int_0^u e^{-(u-t)H0} V J_{k-1}(t) dt with J_0 = e^{-u H0}.
  std::function<MatX(int, double)> nested = [&](int k, double upper) -> MatX {
    MatX acc = MatX::Zero(vd.rows(), vd.cols());
    for (int i = 0; i < unit.count(); ++i) {
      double t = upper * unit.nodes[i];
      double w = upper * unit.weights[i];
      MatX inner = (k == 1) ? prop.at(t) : nested(k - 1, t);
      acc += w * (prop.at(upper - t) * (vd * inner));
    }
    return acc;
  };

  TruncatedSeries out;
  out.value = prop.at(beta);
  double sign = -1.0;
  for (int k = 1; k <= order; ++k) {
    out.value += sign * nested(k, beta);
    sign = -sign;
  }
  double nv = spectral_norm(vd);
  double nh = prop.norm();
  double log_bound = (order + 1) * std::log(std::max(beta * nv, 1e-300)) +
                     beta * (nh + nv);
  for (int k = 2; k <= order + 1; ++k) log_bound -= std::log(static_cast<double>(k));
  out.remainder_bound = std::exp(log_bound);
  return out;
}

namespace {

int set_distance(const std::vector<int>& a, const std::vector<int>& b) {
  int best = std::numeric_limits<int>::max();
  for (int x : a) {
    for (int y : b) best = std::min(best, std::abs(x - y));
  }
  return best;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

PolymerDecomposition polymer_decomposition(const DiagramSpec& spec, int range) {
  if (range < 1) {
    throw ValidationError("fattening range must be >= 1");
  }
  int n = spec.order();
  PolymerDecomposition dec;
  for (int k = 0; k <= n; ++k) {
    double t0 = (k == 0) ? 0.0 : spec.times[k - 1];
    double t1 = (k == n) ? spec.beta : spec.times[k];
    for (int i : spec.s_sets[k]) {
      dec.constituents.push_back({false, {i}, t0, t1, k});
    }
  }
  for (int k = 1; k <= n; ++k) {
    double t = spec.times[k - 1];
    dec.constituents.push_back({true, spec.b_sets[k - 1], t, t, k - 1});
  }

  int count = static_cast<int>(dec.constituents.size());
  UnionFind uf(count);
  int reach = 2 * (range - 1);
  for (int a = 0; a < count; ++a) {
    for (int b = a + 1; b < count; ++b) {
      const auto& ca = dec.constituents[a];
      const auto& cb = dec.constituents[b];
      bool time_touch = ca.t0 <= cb.t1 && cb.t0 <= ca.t1;
      // Horizontal segments wrap through the trace boundary.
      if (!ca.vertical && !cb.vertical) {
        if ((ca.t0 == 0.0 && cb.t1 == spec.beta) || (cb.t0 == 0.0 && ca.t1 == spec.beta)) {
          time_touch = true;
        }
      }
      if (time_touch && set_distance(ca.sites, cb.sites) <= reach) {
        uf.unite(a, b);
      }
    }
  }
  std::vector<int> root_of(count);
  std::vector<int> order;
  for (int i = 0; i < count; ++i) root_of[i] = uf.find(i);
  for (int i = 0; i < count; ++i) {
    if (std::find(order.begin(), order.end(), root_of[i]) == order.end()) {
      order.push_back(root_of[i]);
    }
  }
  for (int root : order) {
    std::vector<int> members;
    for (int i = 0; i < count; ++i) {
      if (root_of[i] == root) members.push_back(i);
    }
    dec.components.push_back(std::move(members));
  }
  return dec;
}

DiagramSpec component_diagram(const DiagramSpec& spec, const PolymerDecomposition& dec,
                              int component) {
  if (component < 0 || component >= static_cast<int>(dec.components.size())) {
    throw ValidationError("component index out of range");
  }
  const auto& members = dec.components[component];

  std::vector<std::pair<double, int>> events;  // (time, b-index)
  std::vector<int> horizontals;
  for (int idx : members) {
    const auto& c = dec.constituents[idx];
    if (c.vertical) {
      events.push_back({c.t0, c.slot});
    } else {
      horizontals.push_back(idx);
    }
  }
  std::sort(events.begin(), events.end());

  DiagramSpec out;
  out.beta = spec.beta;
  for (auto& [t, slot] : events) {
    out.times.push_back(t);
    out.b_sets.push_back(spec.b_sets[slot]);
  }
  int j_count = static_cast<int>(events.size());
  for (int j = 0; j <= j_count; ++j) {
    double lo = (j == 0) ? 0.0 : events[j - 1].first;
    double hi = (j == j_count) ? spec.beta : events[j].first;
    std::vector<int> sites;
    for (int idx : horizontals) {
      const auto& c = dec.constituents[idx];
      if (std::max(c.t0, lo) < std::min(c.t1, hi)) {
        sites.push_back(c.sites[0]);
      }
    }
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    out.s_sets.push_back(std::move(sites));
  }
  return out;
}

FactorizationReport diagram_factorization(const PerturbationModel& model,
                                          const LocalMeasurement& mb,
                                          const DiagramSpec& spec,
                                          const std::vector<int>& labels, int range) {
  FactorizationReport report;
  report.whole = diagram_density(model, mb, spec, labels);
  PolymerDecomposition dec = polymer_decomposition(spec, range);
  report.num_components = static_cast<int>(dec.components.size());
  report.product = 1.0;
  for (int c = 0; c < report.num_components; ++c) {
    DiagramSpec sub = component_diagram(spec, dec, c);
    report.product *= diagram_density(model, mb, sub, labels);
  }
  report.relative_defect = std::abs(report.whole - report.product) /
                           std::max(std::abs(report.whole), 1e-300);
  return report;
}

double observable_gamma(const LocalMeasurement& mb, const MatX& site_projector) {
  int m = mb.local_dim();
  if (site_projector.rows() != m || site_projector.cols() != m) {
    throw ValidationError("site projector dimension does not match measurement");
  }
  std::vector<MatX> outcome_proj(mb.num_outcomes(), MatX::Zero(m, m));
  for (int c = 0; c < m; ++c) {
    outcome_proj[mb.outcome_of_col[c]] +=
        mb.rotation.col(c) * mb.rotation.col(c).adjoint();
  }
  double gamma = 0.0;
  for (const auto& q : outcome_proj) {
    double tr = (q * site_projector).trace().real();
    if (tr <= 1e-14) {
      throw NumericalError("an outcome is orthogonal to the preferred state");
    }
    gamma = std::max(gamma, std::log(m / tr));
  }
  return gamma;
}

KPCertificate kp_certificate(const KPParams& params, const Interaction& upsilon,
                             int num_sites) {
  if (upsilon.num_sites != num_sites) {
    throw ValidationError("perturbation chain size mismatch");
  }
  if (!(params.alpha1 > 0.0) || !(params.alpha2 > 0.0)) {
    throw ValidationError("certificate needs positive alpha parameters");
  }
  if (params.alpha1 >= params.gap) {
    throw ValidationError("alpha1 must stay below the gap");
  }
  if (!(params.delta1 > 0.0 && params.delta1 < 1.0) ||
      !(params.delta2 > 0.0 && params.delta2 < 1.0)) {
    throw ValidationError("certificate needs delta parameters in (0, 1)");
  }
  if (!(params.beta > 0.0) || !std::isfinite(params.beta)) {
    throw ValidationError("certificate needs a positive finite beta");
  }
  if (params.range < 1) {
    throw ValidationError("fattening range must be >= 1");
  }

  double ga = params.gap - params.alpha1;
  double wh = std::exp(-ga * params.beta + params.gamma);
  double d_h = params.delta1 * ga * params.beta;
  double e_dh = std::exp(d_h);
  // Worst-case pivot time for the vertical-vertical coupling is beta/2.
  double tint = 2.0 * (1.0 - std::exp(-ga * params.beta / 2.0)) / ga;
  int reach = 2 * (params.range - 1);

  struct VerticalClass {
    std::vector<int> sites;
    double weight;
    double d;
  };
  std::vector<VerticalClass> verticals;
  for (const auto& term : upsilon.terms) {
    double norm = spectral_norm(term.op);
    int sz = static_cast<int>(term.sites.size());
    double w = std::pow(4.0, sz) * std::exp((params.alpha2 + params.gamma) * sz) * norm;
    verticals.push_back({term.sites, w, params.delta2 * sz});
  }

  KPCertificate cert;
  for (int i = 0; i < num_sites; ++i) {
    double lhs = 0.0;
    for (const auto& v : verticals) {
      if (set_distance({i}, v.sites) <= reach) {
        lhs += params.beta * v.weight * std::exp(v.d);
      }
    }
    for (int j = 0; j < num_sites; ++j) {
      if (std::abs(i - j) <= reach) lhs += wh * e_dh;
    }
    cert.rows.push_back({false, {i}, lhs, d_h});
  }
  for (const auto& pivot : verticals) {
    double lhs = 0.0;
    for (const auto& v : verticals) {
      if (set_distance(pivot.sites, v.sites) < 2 * params.range) {
        lhs += tint * v.weight * std::exp(v.d);
      }
    }
    for (int j = 0; j < num_sites; ++j) {
      if (set_distance(pivot.sites, {j}) <= reach) lhs += wh * e_dh;
    }
    cert.rows.push_back({true, pivot.sites, lhs, pivot.d});
  }
  cert.satisfied = true;
  cert.margin = 0.0;
  for (const auto& row : cert.rows) {
    if (row.lhs > row.bound) cert.satisfied = false;
    cert.margin = std::max(cert.margin, row.lhs / row.bound);
  }
  return cert;
}

}  // namespace spinres
