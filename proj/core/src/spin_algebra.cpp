#include "spinres/spin_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <Eigen/Eigenvalues>

namespace spinres {

std::int64_t chain_dim(int num_sites, int local_dim) {
  if (num_sites < 0 || local_dim < 1) {
    throw ValidationError("chain needs num_sites >= 0 and local_dim >= 1");
  }
  std::int64_t d = 1;
  for (int i = 0; i < num_sites; ++i) {
    if (d > (std::int64_t{1} << 56) / local_dim) {
      throw CapabilityError("chain dimension overflows 2^56");
    }
    d *= local_dim;
  }
  return d;
}

MatX pauli_x() {
  MatX m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

MatX pauli_y() {
  MatX m(2, 2);
  m << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0);
  return m;
}

MatX pauli_z() {
  MatX m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

MatX kron(const MatX& a, const MatX& b) {
  MatX out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Interaction transverse_ising(double J, double h, int num_sites) {
  if (num_sites < 1) {
    throw ValidationError("transverse_ising needs at least one site");
  }
  Interaction out;
  out.num_sites = num_sites;
  out.local_dim = 2;
  MatX xx = kron(pauli_x(), pauli_x());
  for (int i = 0; i + 1 < num_sites; ++i) {
    out.terms.push_back({{i, i + 1}, -J * xx});
  }
  for (int i = 0; i < num_sites; ++i) {
    out.terms.push_back({{i}, -h * pauli_z()});
  }
  return out;
}

Interaction polarized_field(int num_sites) {
  if (num_sites < 1) {
    throw ValidationError("polarized_field needs at least one site");
  }
  Interaction out;
  out.num_sites = num_sites;
  out.local_dim = 2;
  MatX term = pauli_z() + MatX::Identity(2, 2);
  for (int i = 0; i < num_sites; ++i) {
    out.terms.push_back({{i}, term});
  }
  return out;
}

Interaction ising_exchange(double coeff, int num_sites) {
  if (num_sites < 1) {
    throw ValidationError("ising_exchange needs at least one site");
  }
  Interaction out;
  out.num_sites = num_sites;
  out.local_dim = 2;
  MatX xx = kron(pauli_x(), pauli_x());
  for (int i = 0; i + 1 < num_sites; ++i) {
    out.terms.push_back({{i, i + 1}, coeff * xx});
  }
  return out;
}

void validate_term(const LocalTerm& term, int num_sites, int local_dim) {
  std::set<int> seen;
  for (int s : term.sites) {
    if (s < 0 || s >= num_sites) {
      throw ValidationError("term site " + std::to_string(s) + " outside chain of " +
                            std::to_string(num_sites) + " sites");
    }
    if (!seen.insert(s).second) {
      throw ValidationError("term repeats site " + std::to_string(s));
    }
  }
  std::int64_t want = chain_dim(static_cast<int>(term.sites.size()), local_dim);
  if (term.op.rows() != want || term.op.cols() != want) {
    throw ValidationError("term operator dimension " + std::to_string(term.op.rows()) +
                          " does not match support size " + std::to_string(want));
  }
}

namespace {

// Strides of the support sites in the full-chain index.
std::vector<std::int64_t> support_strides(const std::vector<int>& sites, int num_sites,
                                          int local_dim) {
  std::vector<std::int64_t> strides(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    std::int64_t s = 1;
    for (int p = sites[i] + 1; p < num_sites; ++p) s *= local_dim;
    strides[i] = s;
  }
  return strides;
}

}  // namespace

void apply_local(const MatX& op, const std::vector<int>& sites, int num_sites,
                 int local_dim, const VecX& x, VecX& y) {
  LocalTerm term{sites, op};
  validate_term(term, num_sites, local_dim);
  std::int64_t dim = chain_dim(num_sites, local_dim);
  if (x.size() != dim) {
    throw ValidationError("state length does not match chain dimension");
  }
  if (y.size() != dim) {
    throw ValidationError("output length does not match chain dimension");
  }
  int k = static_cast<int>(sites.size());
  std::int64_t block = chain_dim(k, local_dim);
  auto strides = support_strides(sites, num_sites, local_dim);

  std::vector<int> digits(k);
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    // Column tuple of this basis state on the support.
    std::int64_t col = 0;
    std::int64_t base = idx;
    for (int i = 0; i < k; ++i) {
      digits[i] = static_cast<int>((idx / strides[i]) % local_dim);
      col = col * local_dim + digits[i];
      base -= digits[i] * strides[i];
    }
    cplx amp = x[idx];
    if (amp == cplx(0.0, 0.0)) continue;
    for (std::int64_t row = 0; row < block; ++row) {
      cplx v = op(row, col);
      if (v == cplx(0.0, 0.0)) continue;
      std::int64_t target = base;
      std::int64_t r = row;
      for (int i = k - 1; i >= 0; --i) {
        target += (r % local_dim) * strides[i];
        r /= local_dim;
      }
      y[target] += v * amp;
    }
  }
}

VecX apply_interaction(const Interaction& h, const VecX& x) {
  VecX y = VecX::Zero(x.size());
  for (const auto& term : h.terms) {
    apply_local(term.op, term.sites, h.num_sites, h.local_dim, x, y);
  }
  return y;
}

MatX embed_local(const MatX& op, const std::vector<int>& sites, int num_sites,
                 int local_dim) {
  LocalTerm term{sites, op};
  validate_term(term, num_sites, local_dim);
  std::int64_t dim = chain_dim(num_sites, local_dim);
  if (dim > kDenseDimCap) {
    throw CapabilityError("dense embedding refused above dimension " +
                          std::to_string(kDenseDimCap));
  }
  int k = static_cast<int>(sites.size());
  std::int64_t block = chain_dim(k, local_dim);
  auto strides = support_strides(sites, num_sites, local_dim);

  MatX out = MatX::Zero(dim, dim);
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    std::int64_t col = 0;
    std::int64_t base = idx;
    for (int i = 0; i < k; ++i) {
      int digit = static_cast<int>((idx / strides[i]) % local_dim);
      col = col * local_dim + digit;
      base -= digit * strides[i];
    }
    for (std::int64_t row = 0; row < block; ++row) {
      cplx v = op(row, col);
      if (v == cplx(0.0, 0.0)) continue;
      std::int64_t target = base;
      std::int64_t r = row;
      for (int i = k - 1; i >= 0; --i) {
        target += (r % local_dim) * strides[i];
        r /= local_dim;
      }
      out(target, idx) += v;
    }
  }
  return out;
}

MatX build_hamiltonian(const Interaction& h) {
  std::int64_t dim = h.dim();
  if (dim > kDenseDimCap) {
    throw CapabilityError("dense Hamiltonian refused above dimension " +
                          std::to_string(kDenseDimCap));
  }
  MatX out = MatX::Zero(dim, dim);
  for (const auto& term : h.terms) {
    out += embed_local(term.op, term.sites, h.num_sites, h.local_dim);
  }
  return out;
}

Interaction restrict_interaction(const Interaction& h, const std::vector<int>& sites) {
  if (!std::is_sorted(sites.begin(), sites.end())) {
    throw ValidationError("restriction site list must be sorted");
  }
  std::vector<int> pos(h.num_sites, -1);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    int s = sites[i];
    if (s < 0 || s >= h.num_sites) {
      throw ValidationError("restriction site outside chain");
    }
    if (pos[s] != -1) {
      throw ValidationError("restriction repeats a site");
    }
    pos[s] = static_cast<int>(i);
  }
  Interaction out;
  out.num_sites = static_cast<int>(sites.size());
  out.local_dim = h.local_dim;
  for (const auto& term : h.terms) {
    bool inside = true;
    std::vector<int> mapped;
    mapped.reserve(term.sites.size());
    for (int s : term.sites) {
      if (pos[s] < 0) {
        inside = false;
        break;
      }
      mapped.push_back(pos[s]);
    }
    if (inside) out.terms.push_back({std::move(mapped), term.op});
  }
  return out;
}

SpectralDecomposition spectral_projections(const MatX& x, double cluster_tol) {
  if (x.rows() != x.cols()) {
    throw ValidationError("spectral decomposition needs a square matrix");
  }
  double scale = x.cwiseAbs().maxCoeff();
  if ((x - x.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale)) {
    throw ValidationError("spectral decomposition needs a Hermitian matrix");
  }
  Eigen::SelfAdjointEigenSolver<MatX> es(x);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed to converge");
  }
  const VecR& ev = es.eigenvalues();
  double norm = std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
  double gap_tol = cluster_tol * std::max(1.0, norm);

  // Cluster ascending eigenvalues, then report clusters in descending order.
  int n = static_cast<int>(ev.size());
  std::vector<std::pair<int, int>> clusters;  // [begin, end)
  int begin = 0;
  for (int i = 1; i <= n; ++i) {
    if (i == n || ev[i] - ev[i - 1] > gap_tol) {
      clusters.push_back({begin, i});
      begin = i;
    }
  }
  SpectralDecomposition out;
  out.values.resize(static_cast<int>(clusters.size()));
  out.projectors.reserve(clusters.size());
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    auto [b, e] = clusters[clusters.size() - 1 - c];
    double mean = 0.0;
    for (int i = b; i < e; ++i) mean += ev[i];
    mean /= (e - b);
    out.values[static_cast<int>(c)] = mean;
    auto vecs = es.eigenvectors().middleCols(b, e - b);
    out.projectors.push_back(vecs * vecs.adjoint());
  }
  return out;
}

MatX joint_projection(const SpectralDecomposition& sd, const std::vector<int>& window,
                      const std::vector<int>& labels, int num_sites) {
  if (window.size() != labels.size()) {
    throw ValidationError("window and label lists must have equal length");
  }
  int local_dim = static_cast<int>(sd.projectors.empty() ? 0 : sd.projectors[0].rows());
  if (local_dim == 0) {
    throw ValidationError("joint projection needs a nonempty decomposition");
  }
  std::int64_t dim = chain_dim(num_sites, local_dim);
  if (dim > kDenseDimCap) {
    throw CapabilityError("dense joint projection refused above dimension " +
                          std::to_string(kDenseDimCap));
  }
  MatX out = MatX::Identity(dim, dim);
  for (std::size_t i = 0; i < window.size(); ++i) {
    int lab = labels[i];
    if (lab < 0 || lab >= static_cast<int>(sd.projectors.size())) {
      throw ValidationError("outcome label " + std::to_string(lab) + " out of range");
    }
    out = out * embed_local(sd.projectors[lab], {window[i]}, num_sites, local_dim);
  }
  return out;
}

}  // namespace spinres
