#pragma once

// Gauss rules computed by Newton iteration on the three-term recurrences.

#include <vector>

namespace kpz {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// n-point Gauss-Hermite for E[g(X)], X ~ N(0, sigma^2): weights sum to 1.
QuadratureRule gauss_hermite_normal(int n, double sigma = 1.0);

}  // namespace kpz
