#include "spinres/gibbs_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

namespace spinres {

namespace {

void check_window(const std::vector<int>& window, int num_sites) {
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (window[i] < 0 || window[i] >= num_sites) {
      throw ValidationError("window site outside chain");
    }
    if (i > 0 && window[i] <= window[i - 1]) {
      throw ValidationError("window must be strictly increasing");
    }
  }
}

// Negative probabilities beyond rounding noise indicate a broken state.
void finalize_probs(VecR& p) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] < -1e-10) {
      throw NumericalError("probability " + std::to_string(p[i]) +
                           " below the rounding floor");
    }
    if (p[i] < 0.0) p[i] = 0.0;
  }
}

std::vector<std::int64_t> window_strides(const std::vector<int>& window, int num_sites,
                                         int local_dim) {
  std::vector<std::int64_t> strides(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) {
    std::int64_t s = 1;
    for (int p = window[i] + 1; p < num_sites; ++p) s *= local_dim;
    strides[i] = s;
  }
  return strides;
}

}  // namespace

LocalMeasurement local_measurement(const MatX& x, double cluster_tol) {
  if (x.rows() != x.cols()) {
    throw ValidationError("local observable must be square");
  }
  double scale = x.cwiseAbs().maxCoeff();
  if ((x - x.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale)) {
    throw ValidationError("local observable must be Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<MatX> es(x);
  if (es.info() != Eigen::Success) {
    throw NumericalError("local observable eigendecomposition failed");
  }
  const VecR& ev = es.eigenvalues();
  int n = static_cast<int>(ev.size());
  double norm = std::max(std::abs(ev[0]), std::abs(ev[n - 1]));
  double gap_tol = cluster_tol * std::max(1.0, norm);

  std::vector<std::pair<int, int>> clusters;
  int begin = 0;
  for (int i = 1; i <= n; ++i) {
    if (i == n || ev[i] - ev[i - 1] > gap_tol) {
      clusters.push_back({begin, i});
      begin = i;
    }
  }
  LocalMeasurement mb;
  mb.rotation.resize(n, n);
  mb.outcome_of_col.resize(n);
  mb.outcome_values.resize(static_cast<int>(clusters.size()));
  int col = 0;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    auto [b, e] = clusters[clusters.size() - 1 - c];
    double mean = 0.0;
    for (int i = b; i < e; ++i) mean += ev[i];
    mb.outcome_values[static_cast<int>(c)] = mean / (e - b);
    for (int i = b; i < e; ++i) {
      mb.rotation.col(col) = es.eigenvectors().col(i);
      mb.outcome_of_col[col] = static_cast<int>(c);
      ++col;
    }
  }
  return mb;
}

std::int64_t ClassicalDistribution::index_of(const std::vector<int>& labels) const {
  if (labels.size() != window.size()) {
    throw ValidationError("label count does not match window size");
  }
  std::int64_t idx = 0;
  for (int lab : labels) {
    if (lab < 0 || lab >= num_outcomes()) {
      throw ValidationError("outcome label out of range");
    }
    idx = idx * num_outcomes() + lab;
  }
  return idx;
}

double ClassicalDistribution::prob_of(const std::vector<int>& labels) const {
  return prob[index_of(labels)];
}

std::vector<int> ClassicalDistribution::labels_of(std::int64_t index) const {
  std::vector<int> labels(window.size());
  for (std::size_t i = window.size(); i-- > 0;) {
    labels[i] = static_cast<int>(index % num_outcomes());
    index /= num_outcomes();
  }
  return labels;
}

ThermalState gibbs_state(const Interaction& h, double beta) {
  if (!std::isfinite(beta) || beta < 0.0) {
    throw ValidationError("inverse temperature must be finite and nonnegative");
  }
  MatX ham = build_hamiltonian(h);
  Eigen::SelfAdjointEigenSolver<MatX> es(ham);
  if (es.info() != Eigen::Success) {
    throw NumericalError("Hamiltonian eigendecomposition failed");
  }
  const VecR& ev = es.eigenvalues();
  double e0 = ev[0];
  VecR boltz = (-(beta * (ev.array() - e0))).exp();
  double z_shifted = boltz.sum();
  ThermalState out;
  out.rho = es.eigenvectors() * (boltz / z_shifted).asDiagonal() *
            es.eigenvectors().adjoint();
  out.log_partition = std::log(z_shifted) - beta * e0;
  return out;
}

namespace {

GroundState ground_dense(const Interaction& h) {
  MatX ham = build_hamiltonian(h);
  Eigen::SelfAdjointEigenSolver<MatX> es(ham);
  if (es.info() != Eigen::Success) {
    throw NumericalError("Hamiltonian eigendecomposition failed");
  }
  const VecR& ev = es.eigenvalues();
  int n = static_cast<int>(ev.size());
  double norm = std::max({std::abs(ev[0]), std::abs(ev[n - 1]), 1.0});
  GroundState out;
  out.vector = es.eigenvectors().col(0);
  out.energy = ev[0];
  out.degenerate = n > 1 && (ev[1] - ev[0]) < 1e-8 * norm;
  return out;
}

struct LanczosResult {
  VecX vector;
  double value;
  double norm_est;
  bool converged;
};

// Lanczos with full reorthogonalization, restarted from the current Ritz
// vector every max_basis steps.  `deflate` vectors are projected out of the
// Krylov space (used to estimate the second eigenvalue).
LanczosResult lanczos_lowest(const Interaction& h, VecX start,
                             const std::vector<VecX>& deflate) {
  const int max_basis = 40;
  const int max_restarts = 400;
  const double tol = 1e-10;

  auto project_out = [&](VecX& v) {
    for (const auto& d : deflate) v -= d.dot(v) * d;
  };

  project_out(start);
  double nrm = start.norm();
  if (nrm == 0.0) {
    throw NumericalError("Lanczos start vector vanished after deflation");
  }
  start /= nrm;

  LanczosResult res;
  res.vector = start;
  res.value = 0.0;
  res.norm_est = 1.0;
  res.converged = false;

  for (int restart = 0; restart < max_restarts && !res.converged; ++restart) {
    std::vector<VecX> basis{res.vector};
    std::vector<double> alpha, beta;
    for (int j = 0; j < max_basis; ++j) {
      VecX w = apply_interaction(h, basis[j]);
      project_out(w);
      alpha.push_back(basis[j].dot(w).real());
      // Two reorthogonalization passes keep the basis orthonormal to
      // machine precision.
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) w -= b.dot(w) * b;
      }
      double bnorm = w.norm();
      if (bnorm <= 1e-13 * std::max(1.0, res.norm_est)) {
        break;  // invariant subspace reached
      }
      if (j + 1 < max_basis) {
        beta.push_back(bnorm);
        basis.push_back(w / bnorm);
      } else {
        beta.push_back(bnorm);
      }
    }
    int m = static_cast<int>(alpha.size());
    MatR tri = MatR::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      tri(i, i) = alpha[i];
      if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<MatR> es(tri);
    const VecR& theta = es.eigenvalues();
    res.norm_est = std::max({res.norm_est, std::abs(theta[0]), std::abs(theta[m - 1])});
    VecX ritz = VecX::Zero(res.vector.size());
    for (int i = 0; i < m; ++i) ritz += es.eigenvectors()(i, 0) * basis[i];
    project_out(ritz);
    ritz.normalize();
    res.vector = ritz;
    res.value = theta[0];
    double resid = (m <= static_cast<int>(beta.size()))
                       ? std::abs(beta[m - 1] * es.eigenvectors()(m - 1, 0))
                       : 0.0;
    if (m < max_basis || resid <= tol * std::max(1.0, res.norm_est)) {
      res.converged = true;
    }
  }
  if (!res.converged) {
    throw NumericalError("Lanczos failed to converge");
  }
  return res;
}

GroundState ground_iterative(const Interaction& h, std::uint64_t seed) {
  std::int64_t dim = h.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  VecX start(dim);
  for (std::int64_t i = 0; i < dim; ++i) start[i] = cplx(gauss(rng), gauss(rng));

  LanczosResult lowest = lanczos_lowest(h, start, {});

  // Second eigenvalue from the deflated operator, for the degeneracy flag.
  VecX start2(dim);
  for (std::int64_t i = 0; i < dim; ++i) start2[i] = cplx(gauss(rng), gauss(rng));
  double gap;
  if (dim == 1) {
    gap = std::numeric_limits<double>::infinity();
  } else {
    LanczosResult second = lanczos_lowest(h, start2, {lowest.vector});
    gap = second.value - lowest.value;
  }
  double norm = std::max(lowest.norm_est, 1.0);
  GroundState out;
  out.vector = lowest.vector;
  out.energy = lowest.value;
  out.degenerate = gap < 1e-8 * norm;
  return out;
}

}  // namespace

GroundState ground_state(const Interaction& h, GroundMethod method, std::uint64_t seed) {
  if (method == GroundMethod::dense) {
    return ground_dense(h);
  }
  return ground_iterative(h, seed);
}

namespace {

// In-place per-site rotation of every column: mat <- (tensor of op on the
// window sites) * mat.
void rotate_columns(const MatX& op, const std::vector<int>& window, int num_sites,
                    int local_dim, MatX& mat) {
  VecX in(mat.rows()), out(mat.rows());
  for (Eigen::Index c = 0; c < mat.cols(); ++c) {
    in = mat.col(c);
    for (int s : window) {
      out.setZero();
      apply_local(op, {s}, num_sites, local_dim, in, out);
      in.swap(out);
    }
    mat.col(c) = in;
  }
}

ClassicalDistribution accumulate_distribution(const std::vector<int>& window,
                                              const LocalMeasurement& mb, int num_sites,
                                              const VecR& weights) {
  int m = mb.local_dim();
  int q = mb.num_outcomes();
  auto strides = window_strides(window, num_sites, m);
  ClassicalDistribution dist;
  dist.window = window;
  dist.outcome_values = mb.outcome_values;
  std::int64_t configs = 1;
  for (std::size_t i = 0; i < window.size(); ++i) configs *= q;
  dist.prob = VecR::Zero(configs);
  for (std::int64_t idx = 0; idx < weights.size(); ++idx) {
    double w = weights[idx];
    if (w == 0.0) continue;
    std::int64_t cfg = 0;
    for (std::size_t i = 0; i < window.size(); ++i) {
      int digit = static_cast<int>((idx / strides[i]) % m);
      cfg = cfg * q + mb.outcome_of_col[digit];
    }
    dist.prob[cfg] += w;
  }
  finalize_probs(dist.prob);
  return dist;
}

}  // namespace

ClassicalDistribution classical_restriction(const MatX& rho, const LocalMeasurement& mb,
                                            const std::vector<int>& window, int num_sites) {
  check_window(window, num_sites);
  std::int64_t dim = chain_dim(num_sites, mb.local_dim());
  if (rho.rows() != dim || rho.cols() != dim) {
    throw ValidationError("density matrix does not match chain dimension");
  }
  // diag(A rho A^dag) for A = tensor of rotation^dag over the window,
  // computed as two column-wise rotations.
  MatX adj = mb.rotation.adjoint();
  MatX c = rho;
  rotate_columns(adj, window, num_sites, mb.local_dim(), c);  // c = A rho
  MatX d = c.adjoint();                                       // rho A^dag, rho Hermitian
  rotate_columns(adj, window, num_sites, mb.local_dim(), d);  // d = A rho A^dag
  VecR weights(dim);
  for (std::int64_t i = 0; i < dim; ++i) weights[i] = d(i, i).real();
  return accumulate_distribution(window, mb, num_sites, weights);
}

ClassicalDistribution classical_restriction(const VecX& psi, const LocalMeasurement& mb,
                                            const std::vector<int>& window, int num_sites) {
  check_window(window, num_sites);
  std::int64_t dim = chain_dim(num_sites, mb.local_dim());
  if (psi.size() != dim) {
    throw ValidationError("state vector does not match chain dimension");
  }
  double norm = psi.norm();
  if (norm == 0.0) {
    throw ValidationError("state vector must be nonzero");
  }
  MatX adj = mb.rotation.adjoint();
  VecX cur = psi / norm, next(dim);
  for (int s : window) {
    next.setZero();
    apply_local(adj, {s}, num_sites, mb.local_dim(), cur, next);
    cur.swap(next);
  }
  VecR weights = cur.cwiseAbs2();
  return accumulate_distribution(window, mb, num_sites, weights);
}

ClassicalDistribution classical_restriction(const MatX& rho, const MatX& x,
                                            const std::vector<int>& window, int num_sites) {
  return classical_restriction(rho, local_measurement(x), window, num_sites);
}

ClassicalDistribution classical_restriction(const VecX& psi, const MatX& x,
                                            const std::vector<int>& window, int num_sites) {
  return classical_restriction(psi, local_measurement(x), window, num_sites);
}

ClassicalDistribution marginal(const ClassicalDistribution& dist,
                               const std::vector<int>& sub_window) {
  std::vector<int> pos;
  for (int s : sub_window) {
    auto it = std::find(dist.window.begin(), dist.window.end(), s);
    if (it == dist.window.end()) {
      throw ValidationError("marginal site not in parent window");
    }
    pos.push_back(static_cast<int>(it - dist.window.begin()));
  }
  ClassicalDistribution out;
  out.window = sub_window;
  out.outcome_values = dist.outcome_values;
  std::int64_t configs = 1;
  for (std::size_t i = 0; i < sub_window.size(); ++i) configs *= dist.num_outcomes();
  out.prob = VecR::Zero(configs);
  for (std::int64_t idx = 0; idx < dist.config_count(); ++idx) {
    auto labels = dist.labels_of(idx);
    std::int64_t cfg = 0;
    for (int p : pos) cfg = cfg * dist.num_outcomes() + labels[p];
    out.prob[cfg] += dist.prob[idx];
  }
  return out;
}

std::vector<std::pair<double, double>> magnetization_distribution(
    const ClassicalDistribution& dist, const std::function<double(double)>& f) {
  if (dist.config_count() > (std::int64_t{1} << 20)) {
    throw CapabilityError("magnetization distribution capped at 2^20 configurations");
  }
  if (dist.window.empty()) {
    throw ValidationError("magnetization distribution needs a nonempty window");
  }
  VecR mapped(dist.num_outcomes());
  for (int a = 0; a < dist.num_outcomes(); ++a) {
    mapped[a] = f ? f(dist.outcome_values[a]) : dist.outcome_values[a];
  }
  const double scale = 1.0 / static_cast<double>(dist.window.size());
  std::map<std::int64_t, double> acc;
  // Keys quantize the average to avoid drift across permutations of one multiset.
  const double quantum = 1e-12;
  std::vector<std::pair<double, double>> out;
  std::map<std::int64_t, double> value_of;
  for (std::int64_t idx = 0; idx < dist.config_count(); ++idx) {
    auto labels = dist.labels_of(idx);
    double sum = 0.0;
    for (int lab : labels) sum += mapped[lab];
    double avg = sum * scale;
    std::int64_t key = llround(avg / quantum);
    acc[key] += dist.prob[idx];
    value_of[key] = avg;
  }
  out.reserve(acc.size());
  // Values the state gives exactly zero mass are not part of the support.
  for (const auto& [key, p] : acc) {
    if (p != 0.0) out.push_back({value_of[key], p});
  }
  return out;
}

}  // namespace spinres
