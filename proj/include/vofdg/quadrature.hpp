#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace vofdg {

using Point = std::array<double, 2>;

/// Gauss-Legendre rule on [-1,1] (1D) or its tensor product on [-1,1]^2.
/// For 1D rules the second coordinate of every node is zero.
struct QuadratureRule {
    int dimension = 1;
    std::vector<Point> nodes;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
};

/// n-point Gauss-Legendre rule; exact for polynomials of degree <= 2n-1.
/// Throws InvalidArgument for n < 1.
QuadratureRule gauss_rule(int n);

/// Tensor product of a 1D rule with itself, x index running fastest.
QuadratureRule tensor_rule(const QuadratureRule& rule1d);

/// Gauss rule with n points per direction in the given dimension.
QuadratureRule gauss_rule(int n, int dimension);

/// Legendre polynomial P_k and its derivative at x, via the three-term recurrence.
struct LegendreValue {
    double value;
    double derivative;
};
LegendreValue legendre(int k, double x);

} // namespace vofdg
