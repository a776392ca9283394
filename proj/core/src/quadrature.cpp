#include "spinres/quadrature.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace spinres {

QuadratureRule gauss_legendre(int count, double a, double b) {
  if (count < 1) {
    throw ValidationError("quadrature count must be >= 1");
  }
  if (!(a < b)) {
    throw ValidationError("quadrature interval must have a < b");
  }
  // Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights come
  // from the first component of each eigenvector.
  MatR jacobi = MatR::Zero(count, count);
  for (int i = 1; i < count; ++i) {
    double off = i / std::sqrt(4.0 * i * i - 1.0);
    jacobi(i, i - 1) = off;
    jacobi(i - 1, i) = off;
  }
  Eigen::SelfAdjointEigenSolver<MatR> es(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  double mid = 0.5 * (a + b);
  double half = 0.5 * (b - a);
  for (int i = 0; i < count; ++i) {
    rule.nodes[i] = mid + half * es.eigenvalues()[i];
    double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = 2.0 * v0 * v0 * half;
  }
  return rule;
}

QuadratureRule periodic_trapezoid(int count) {
  if (count < 1) {
    throw ValidationError("quadrature count must be >= 1");
  }
  QuadratureRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  const double pi = std::acos(-1.0);
  for (int j = 0; j < count; ++j) {
    rule.nodes[j] = -pi + 2.0 * pi * (j + 1) / count;
    rule.weights[j] = 2.0 * pi / count;
  }
  return rule;
}

}  // namespace spinres
