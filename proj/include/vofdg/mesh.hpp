#pragma once

#include "vofdg/quadrature.hpp"

#include <array>
#include <vector>

namespace vofdg {

/// Interface between two elements. The normal points out of `left`; on a
/// periodic mesh every face has two incident elements.
struct Face {
    int left;
    int right;
    int axis;
    Point normal;
    double measure;
};

/// Uniform periodic Cartesian mesh in one or two dimensions.
///
/// Elements are numbered row-major with the x index running fastest. Each
/// element owns the face on its upper side along every axis; the last cell
/// on an axis pairs with the first one.
class PeriodicMesh {
public:
    PeriodicMesh(int dimension, Point lower, Point upper, int cells_per_axis);

    int dimension() const { return dimension_; }
    int cells_per_axis() const { return cells_; }
    int num_elements() const { return num_elements_; }
    const std::vector<Face>& faces() const { return faces_; }

    double lower(int axis) const { return lower_[axis]; }
    double upper(int axis) const { return upper_[axis]; }
    double h(int axis) const { return h_[axis]; }
    double element_measure() const;
    double domain_measure() const;

    /// Per-axis cell indices of element e.
    std::array<int, 2> cell_index(int e) const;
    int element_at(int ix, int iy = 0) const;

    Point element_lower_corner(int e) const;
    Point to_physical(int e, const Point& reference) const;

    /// Face-adjacent elements (periodic), in face order: for each axis the
    /// lower neighbour then the upper neighbour.
    std::vector<int> neighbors(int e) const;

    /// Indices into faces() touching element e.
    std::vector<int> element_faces(int e) const;

    /// True when an axis has a single cell, so some face pairs an element with itself.
    bool self_adjacent() const { return cells_ == 1; }

private:
    int dimension_;
    int cells_;
    int num_elements_;
    Point lower_;
    Point upper_;
    Point h_;
    std::vector<Face> faces_;
};

PeriodicMesh build_mesh(int dimension, Point lower, Point upper, int cells_per_axis);

} // namespace vofdg
