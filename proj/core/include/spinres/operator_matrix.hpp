#pragma once

#include <string>

#include "spinres/types.hpp"

namespace spinres {

// Interchange format for operators: a square complex matrix serialized as
// {"dim": d, "triplets": [[row, col, re, im], ...]} with zero entries omitted.
class OperatorMatrix {
public:
  OperatorMatrix() = default;
  explicit OperatorMatrix(MatX dense);

  static OperatorMatrix from_json(const std::string& text);
  std::string to_json() const;

  const MatX& dense() const { return mat_; }
  int dim() const { return static_cast<int>(mat_.rows()); }

  bool is_hermitian(double tol = 1e-12) const;

private:
  MatX mat_;
};

}  // namespace spinres
