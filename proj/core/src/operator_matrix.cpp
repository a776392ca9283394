#include "spinres/operator_matrix.hpp"

#include <nlohmann/json.hpp>

namespace spinres {

OperatorMatrix::OperatorMatrix(MatX dense) : mat_(std::move(dense)) {
  if (mat_.rows() != mat_.cols()) {
    throw ValidationError("operator matrix must be square, got " +
                          std::to_string(mat_.rows()) + "x" +
                          std::to_string(mat_.cols()));
  }
}

OperatorMatrix OperatorMatrix::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("operator JSON parse failure: ") + e.what());
  }
  if (!j.is_object() || !j.contains("dim") || !j.contains("triplets")) {
    throw ValidationError("operator JSON must be {\"dim\", \"triplets\"}");
  }
  int dim = j["dim"].get<int>();
  if (dim <= 0) {
    throw ValidationError("operator dim must be positive");
  }
  MatX m = MatX::Zero(dim, dim);
  for (const auto& t : j["triplets"]) {
    if (!t.is_array() || t.size() != 4) {
      throw ValidationError("operator triplet must be [row, col, re, im]");
    }
    int r = t[0].get<int>();
    int c = t[1].get<int>();
    if (r < 0 || r >= dim || c < 0 || c >= dim) {
      throw ValidationError("operator triplet index out of range");
    }
    m(r, c) += cplx(t[2].get<double>(), t[3].get<double>());
  }
  return OperatorMatrix(std::move(m));
}

std::string OperatorMatrix::to_json() const {
  nlohmann::json trip = nlohmann::json::array();
  for (int r = 0; r < dim(); ++r) {
    for (int c = 0; c < dim(); ++c) {
      cplx v = mat_(r, c);
      if (v != cplx(0.0, 0.0)) {
        trip.push_back({r, c, v.real(), v.imag()});
      }
    }
  }
  nlohmann::json j{{"dim", dim()}, {"triplets", std::move(trip)}};
  return j.dump();
}

bool OperatorMatrix::is_hermitian(double tol) const {
  return (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace spinres
