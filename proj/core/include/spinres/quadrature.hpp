#pragma once

#include "spinres/types.hpp"

namespace spinres {

struct QuadratureRule {
  VecR nodes;
  VecR weights;

  int count() const { return static_cast<int>(nodes.size()); }

  template <class F>
  auto integrate(F&& f) const -> decltype(f(0.0)) {
    decltype(f(0.0)) acc{};
    for (int i = 0; i < count(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

// Gauss-Legendre rule on [a, b]; exact for polynomials of degree < 2*count.
QuadratureRule gauss_legendre(int count, double a, double b);

// Right-anchored uniform rule on (-pi, pi]; exact for trigonometric
// polynomials of degree < count.
QuadratureRule periodic_trapezoid(int count);

}  // namespace spinres
