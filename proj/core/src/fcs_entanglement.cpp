#include "spinres/fcs_entanglement.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "spinres/spin_algebra.hpp"

namespace spinres {

namespace {

void validate_fcs(const FcsModel& model) {
  if (model.a.empty()) {
    throw ValidationError("model needs at least one matrix");
  }
  int d = static_cast<int>(model.a[0].rows());
  for (const auto& m : model.a) {
    if (m.rows() != d || m.cols() != d || d < 1) {
      throw ValidationError("model matrices must be square and equal-sized");
    }
  }
}

void check_site_op(const MatX& op, int m) {
  if (op.rows() != m || op.cols() != m) {
    throw ValidationError("word operator dimension does not match physical dimension");
  }
  double scale = op.cwiseAbs().maxCoeff();
  if ((op - op.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale)) {
    throw ValidationError("word operators must be Hermitian");
  }
}

}  // namespace

FcsModel aklt_model() {
  FcsModel model;
  double s = 1.0 / std::sqrt(3.0);
  model.a = {s * pauli_x(), s * pauli_y(), s * pauli_z()};
  return model;
}

FcsModel fcs_model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model JSON parse failure: ") + e.what());
  }
  if (!j.is_object() || !j.contains("m") || !j.contains("a")) {
    throw ValidationError("model JSON must be {\"m\", \"a\"}");
  }
  int m = j["m"].get<int>();
  if (m < 1 || !j["a"].is_array() || static_cast<int>(j["a"].size()) != m) {
    throw ValidationError("model JSON needs one matrix per physical level");
  }
  FcsModel model;
  for (const auto& mat : j["a"]) {
    int entries = static_cast<int>(mat.size());
    int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(entries))));
    if (d * d != entries || d < 1) {
      throw ValidationError("model matrix entry count is not a perfect square");
    }
    MatX a(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        const auto& pair = mat[r * d + c];
        if (!pair.is_array() || pair.size() != 2) {
          throw ValidationError("model matrix entries must be [re, im] pairs");
        }
        a(r, c) = cplx(pair[0].get<double>(), pair[1].get<double>());
      }
    }
    model.a.push_back(std::move(a));
  }
  validate_fcs(model);
  return model;
}

std::string fcs_model_to_json(const FcsModel& model) {
  validate_fcs(model);
  nlohmann::json mats = nlohmann::json::array();
  for (const auto& a : model.a) {
    nlohmann::json flat = nlohmann::json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        flat.push_back({a(r, c).real(), a(r, c).imag()});
      }
    }
    mats.push_back(std::move(flat));
  }
  nlohmann::json j{{"m", model.physical_dim()}, {"a", std::move(mats)}};
  return j.dump();
}

FcsConditions fcs_conditions(const FcsModel& model, double tol) {
  validate_fcs(model);
  int d = model.bond_dim();
  MatX unital = MatX::Zero(d, d);
  MatX isometry = MatX::Zero(d, d);
  FcsConditions cond;
  for (const auto& a : model.a) {
    unital += a * a.adjoint();
    MatX ada = a.adjoint() * a;
    isometry += ada;
    MatX dev = ada - (ada.trace() / static_cast<double>(d)) * MatX::Identity(d, d);
    cond.proportional_defect = std::max(cond.proportional_defect,
                                        dev.cwiseAbs().maxCoeff());
  }
  cond.unital_defect = (unital - MatX::Identity(d, d)).cwiseAbs().maxCoeff();
  cond.isometry_defect = (isometry - MatX::Identity(d, d)).cwiseAbs().maxCoeff();

  int m = model.physical_dim();
  MatX span(m * m, d * d);
  for (int a_i = 0; a_i < m; ++a_i) {
    for (int b_i = 0; b_i < m; ++b_i) {
      MatX prod = model.a[a_i] * model.a[b_i].adjoint();
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
          span(a_i * m + b_i, r * d + c) = prod(r, c);
        }
      }
    }
  }
  Eigen::JacobiSVD<MatX> svd(span);
  double top = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()[i] > tol * std::max(top, 1.0)) ++cond.pair_span_rank;
  }
  cond.full_pair_span = cond.pair_span_rank == d * d;
  return cond;
}

MatX fcs_transfer(const FcsModel& model, const MatX& on_site, const MatX& bond) {
  validate_fcs(model);
  int m = model.physical_dim();
  int d = model.bond_dim();
  if (on_site.rows() != m || on_site.cols() != m) {
    throw ValidationError("transfer operator dimension does not match physical dimension");
  }
  if (bond.rows() != d || bond.cols() != d) {
    throw ValidationError("bond operator dimension mismatch");
  }
  MatX out = MatX::Zero(d, d);
  for (int a_i = 0; a_i < m; ++a_i) {
    for (int b_i = 0; b_i < m; ++b_i) {
      cplx o = on_site(a_i, b_i);
      if (o != cplx(0.0, 0.0)) {
        out += o * (model.a[a_i] * bond * model.a[b_i].adjoint());
      }
    }
  }
  return out;
}

double fcs_expectation(const FcsModel& model, const std::vector<MatX>& word) {
  validate_fcs(model);
  int d = model.bond_dim();
  MatX bond = MatX::Identity(d, d);
  for (const auto& op : word) {
    check_site_op(op, model.physical_dim());
    bond = fcs_transfer(model, op, bond);
  }
  cplx val = bond.trace() / static_cast<double>(d);
  if (std::abs(val.imag()) > 1e-9 * std::max(1.0, std::abs(val.real()))) {
    throw NumericalError("word expectation came out non-real");
  }
  return val.real();
}

ClassicalDistribution fcs_restriction(const FcsModel& model, const MatX& observable,
                                      int length) {
  validate_fcs(model);
  if (length < 1 || length > 20) {
    throw ValidationError("restriction length must lie in 1..20");
  }
  LocalMeasurement mb = local_measurement(observable);
  if (mb.local_dim() != model.physical_dim()) {
    throw ValidationError("observable dimension does not match physical dimension");
  }
  int q = mb.num_outcomes();
  std::vector<MatX> outcome_proj(q, MatX::Zero(mb.local_dim(), mb.local_dim()));
  for (int c = 0; c < mb.local_dim(); ++c) {
    outcome_proj[mb.outcome_of_col[c]] +=
        mb.rotation.col(c) * mb.rotation.col(c).adjoint();
  }
  ClassicalDistribution dist;
  for (int i = 0; i < length; ++i) dist.window.push_back(i);
  dist.outcome_values = mb.outcome_values;
  std::int64_t configs = 1;
  for (int i = 0; i < length; ++i) configs *= q;
  dist.prob.resize(configs);
  std::vector<MatX> word(length);
  for (std::int64_t idx = 0; idx < configs; ++idx) {
    std::int64_t rem = idx;
    for (int i = length - 1; i >= 0; --i) {
      word[i] = outcome_proj[rem % q];
      rem /= q;
    }
    dist.prob[idx] = fcs_expectation(model, word);
  }
  for (Eigen::Index i = 0; i < dist.prob.size(); ++i) {
    if (dist.prob[i] < -1e-10) {
      throw NumericalError("restriction probability below the rounding floor");
    }
    if (dist.prob[i] < 0.0) dist.prob[i] = 0.0;
  }
  return dist;
}

double conditioned_correlation(const FcsModel& model, const MatX& observable, int n,
                               const MatX& probe_a, const MatX& probe_b,
                               const std::vector<int>& labels) {
  validate_fcs(model);
  if (n < 1) {
    throw ValidationError("probe separation index must be >= 1");
  }
  int m = model.physical_dim();
  check_site_op(probe_a, m);
  check_site_op(probe_b, m);
  LocalMeasurement mb = local_measurement(observable);
  if (mb.local_dim() != m) {
    throw ValidationError("observable dimension does not match physical dimension");
  }
  if (static_cast<int>(labels.size()) != 2 * (n - 1)) {
    throw ValidationError("conditioning needs one label per site with 0 < |i| < n");
  }
  std::vector<MatX> outcome_proj(mb.num_outcomes(), MatX::Zero(m, m));
  for (int c = 0; c < m; ++c) {
    outcome_proj[mb.outcome_of_col[c]] +=
        mb.rotation.col(c) * mb.rotation.col(c).adjoint();
  }
  MatX eye = MatX::Identity(m, m);

  // Word over sites -(n-1)..n; labels are ordered by site position.
  auto build_word = [&](const MatX& at_origin, const MatX& at_n) {
    std::vector<MatX> word;
    int label_pos = 0;
    for (int site = -(n - 1); site <= n; ++site) {
      if (site == 0) {
        word.push_back(at_origin);
      } else if (site == n) {
        word.push_back(at_n);
      } else {
        int lab = labels[label_pos++];
        if (lab < 0 || lab >= mb.num_outcomes()) {
          throw ValidationError("conditioning label out of range");
        }
        word.push_back(outcome_proj[lab]);
      }
    }
    return word;
  };

  double w0 = fcs_expectation(model, build_word(eye, eye));
  if (w0 < 1e-300) {
    throw NumericalError("conditioning event has vanishing probability");
  }
  double wab = fcs_expectation(model, build_word(probe_a, probe_b));
  double wa = fcs_expectation(model, build_word(probe_a, eye));
  double wb = fcs_expectation(model, build_word(eye, probe_b));
  return std::abs(wab / w0 - (wa / w0) * (wb / w0));
}

std::vector<MatX> hermitian_basis(int dim) {
  if (dim < 1) {
    throw ValidationError("basis dimension must be >= 1");
  }
  std::vector<MatX> basis;
  basis.push_back(MatX::Identity(dim, dim));
  for (int j = 0; j < dim; ++j) {
    for (int k = j + 1; k < dim; ++k) {
      MatX sym = MatX::Zero(dim, dim);
      sym(j, k) = sym(k, j) = 1.0;
      basis.push_back(sym);
      MatX asym = MatX::Zero(dim, dim);
      asym(j, k) = cplx(0.0, -1.0);
      asym(k, j) = cplx(0.0, 1.0);
      basis.push_back(asym);
    }
  }
  for (int l = 1; l < dim; ++l) {
    MatX diag = MatX::Zero(dim, dim);
    double scale = std::sqrt(2.0 / (l * (l + 1.0)));
    for (int j = 0; j < l; ++j) diag(j, j) = scale;
    diag(l, l) = -l * scale;
    basis.push_back(diag);
  }
  return basis;
}

}  // namespace spinres
