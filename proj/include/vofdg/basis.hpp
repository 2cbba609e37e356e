#pragma once

#include "vofdg/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace vofdg {

struct BasisValue {
    double value;
    std::array<double, 2> gradient;
};

/// Values and reference gradients of every basis function at a set of points.
/// Rows are points, columns are basis functions.
struct BasisTable {
    Eigen::MatrixXd values;
    Eigen::MatrixXd grad_x;
    Eigen::MatrixXd grad_y;
};

/// Orthonormal Legendre modal basis on [-1,1]^d, tensor-product in 2D.
///
/// Mode k maps to per-axis degrees (k % (q+1), k / (q+1)); mode 0 is the
/// constant. Each 1D factor is sqrt((2j+1)/2) P_j, so the Gram matrix on the
/// reference element is the identity.
class BasisSpec {
public:
    BasisSpec(int degree, int dimension);

    int degree() const { return degree_; }
    int dimension() const { return dimension_; }
    int size() const { return size_; }

    std::array<int, 2> axis_degrees(int mode) const;

    /// Value and gradient (with respect to reference coordinates) of all modes.
    std::vector<BasisValue> evaluate(const Point& reference) const;

    BasisTable tabulate(const std::vector<Point>& points) const;

private:
    int degree_;
    int dimension_;
    int size_;
};

/// Free-function form of BasisSpec::evaluate.
std::vector<BasisValue> eval_basis(const BasisSpec& spec, const Point& reference);

/// Orthonormal 1D Legendre mode sqrt((2j+1)/2) P_j and its derivative.
LegendreValue orthonormal_legendre(int j, double x);

} // namespace vofdg
