#include "vofdg/mesh.hpp"

#include "vofdg/errors.hpp"

#include <string>

namespace vofdg {

PeriodicMesh::PeriodicMesh(int dimension, Point lower, Point upper, int cells_per_axis)
    : dimension_(dimension), cells_(cells_per_axis), lower_(lower), upper_(upper), h_{0.0, 0.0} {
    if (dimension != 1 && dimension != 2) {
        throw InvalidArgument("build_mesh: dimension must be 1 or 2");
    }
    if (cells_per_axis < 1) {
        throw InvalidArgument("build_mesh: cells per axis must be >= 1, got " +
                              std::to_string(cells_per_axis));
    }
    for (int a = 0; a < dimension; ++a) {
        if (!(lower[a] < upper[a])) {
            throw InvalidArgument("build_mesh: lower bound must be below upper bound on every axis");
        }
        h_[a] = (upper[a] - lower[a]) / cells_per_axis;
    }
    if (dimension == 1) {
        lower_[1] = 0.0;
        upper_[1] = 1.0;
        h_[1] = 1.0;
    }
    num_elements_ = dimension == 1 ? cells_ : cells_ * cells_;

    faces_.reserve(static_cast<std::size_t>(dimension) * num_elements_);
    for (int axis = 0; axis < dimension; ++axis) {
        const double measure = dimension == 1 ? 1.0 : h_[1 - axis];
        Point normal{0.0, 0.0};
        normal[axis] = 1.0;
        for (int e = 0; e < num_elements_; ++e) {
            auto idx = cell_index(e);
            idx[axis] = (idx[axis] + 1) % cells_;
            faces_.push_back(Face{e, element_at(idx[0], idx[1]), axis, normal, measure});
        }
    }
}

double PeriodicMesh::element_measure() const {
    return dimension_ == 1 ? h_[0] : h_[0] * h_[1];
}

double PeriodicMesh::domain_measure() const {
    double m = upper_[0] - lower_[0];
    if (dimension_ == 2) {
        m *= upper_[1] - lower_[1];
    }
    return m;
}

std::array<int, 2> PeriodicMesh::cell_index(int e) const {
    if (dimension_ == 1) {
        return {e, 0};
    }
    return {e % cells_, e / cells_};
}

int PeriodicMesh::element_at(int ix, int iy) const {
    return dimension_ == 1 ? ix : ix + cells_ * iy;
}

Point PeriodicMesh::element_lower_corner(int e) const {
    const auto idx = cell_index(e);
    Point p{lower_[0] + idx[0] * h_[0], 0.0};
    if (dimension_ == 2) {
        p[1] = lower_[1] + idx[1] * h_[1];
    }
    return p;
}

Point PeriodicMesh::to_physical(int e, const Point& reference) const {
    const Point corner = element_lower_corner(e);
    Point x{corner[0] + 0.5 * h_[0] * (reference[0] + 1.0), 0.0};
    if (dimension_ == 2) {
        x[1] = corner[1] + 0.5 * h_[1] * (reference[1] + 1.0);
    }
    return x;
}

std::vector<int> PeriodicMesh::neighbors(int e) const {
    std::vector<int> out;
    const auto idx = cell_index(e);
    for (int axis = 0; axis < dimension_; ++axis) {
        auto lo = idx;
        auto hi = idx;
        lo[axis] = (idx[axis] + cells_ - 1) % cells_;
        hi[axis] = (idx[axis] + 1) % cells_;
        out.push_back(element_at(lo[0], lo[1]));
        out.push_back(element_at(hi[0], hi[1]));
    }
    return out;
}

std::vector<int> PeriodicMesh::element_faces(int e) const {
    std::vector<int> out;
    const auto idx = cell_index(e);
    for (int axis = 0; axis < dimension_; ++axis) {
        auto lo = idx;
        lo[axis] = (idx[axis] + cells_ - 1) % cells_;
        out.push_back(axis * num_elements_ + element_at(lo[0], lo[1]));
        out.push_back(axis * num_elements_ + e);
    }
    return out;
}

PeriodicMesh build_mesh(int dimension, Point lower, Point upper, int cells_per_axis) {
    return PeriodicMesh(dimension, lower, upper, cells_per_axis);
}

} // namespace vofdg
