#include "vofdg/basis.hpp"

#include "vofdg/errors.hpp"

#include <cmath>

namespace vofdg {

LegendreValue orthonormal_legendre(int j, double x) {
    const double scale = std::sqrt((2.0 * j + 1.0) / 2.0);
    const LegendreValue p = legendre(j, x);
    return {scale * p.value, scale * p.derivative};
}

BasisSpec::BasisSpec(int degree, int dimension) : degree_(degree), dimension_(dimension) {
    if (degree < 0) {
        throw InvalidArgument("BasisSpec: degree must be nonnegative");
    }
    if (dimension != 1 && dimension != 2) {
        throw InvalidArgument("BasisSpec: dimension must be 1 or 2");
    }
    size_ = dimension == 1 ? degree + 1 : (degree + 1) * (degree + 1);
}

std::array<int, 2> BasisSpec::axis_degrees(int mode) const {
    if (dimension_ == 1) {
        return {mode, 0};
    }
    return {mode % (degree_ + 1), mode / (degree_ + 1)};
}

std::vector<BasisValue> BasisSpec::evaluate(const Point& reference) const {
    std::vector<LegendreValue> lx(degree_ + 1);
    std::vector<LegendreValue> ly(degree_ + 1);
    for (int j = 0; j <= degree_; ++j) {
        lx[j] = orthonormal_legendre(j, reference[0]);
        if (dimension_ == 2) {
            ly[j] = orthonormal_legendre(j, reference[1]);
        }
    }
    std::vector<BasisValue> out(size_);
    for (int k = 0; k < size_; ++k) {
        const auto [ix, iy] = axis_degrees(k);
        if (dimension_ == 1) {
            out[k] = {lx[ix].value, {lx[ix].derivative, 0.0}};
        } else {
            out[k] = {lx[ix].value * ly[iy].value,
                      {lx[ix].derivative * ly[iy].value, lx[ix].value * ly[iy].derivative}};
        }
    }
    return out;
}

BasisTable BasisSpec::tabulate(const std::vector<Point>& points) const {
    const auto n = static_cast<Eigen::Index>(points.size());
    BasisTable table{Eigen::MatrixXd(n, size_), Eigen::MatrixXd(n, size_), Eigen::MatrixXd(n, size_)};
    for (Eigen::Index p = 0; p < n; ++p) {
        const auto vals = evaluate(points[p]);
        for (int k = 0; k < size_; ++k) {
            table.values(p, k) = vals[k].value;
            table.grad_x(p, k) = vals[k].gradient[0];
            table.grad_y(p, k) = vals[k].gradient[1];
        }
    }
    return table;
}

std::vector<BasisValue> eval_basis(const BasisSpec& spec, const Point& reference) {
    return spec.evaluate(reference);
}

} // namespace vofdg
