#pragma once

#include "vofdg/basis.hpp"
#include "vofdg/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <span>
#include <utility>

namespace vofdg {

using SparseMatrix = Eigen::SparseMatrix<double>;
using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

/// Numerical-flux constants. On a face between K- (left) and K+ (right):
///   v*      = theta v+ + (1 - theta) v- - zeta [grad u]
///   (grad u)* = (1 - theta) grad u+ + theta grad u- - gamma [v]
struct FluxParams {
    double theta = 0.0;
    double gamma = 0.0;
    double zeta = 0.0;

    /// Throws InvalidArgument unless gamma, zeta >= 0.
    void validate() const;
    /// theta (1 - theta) == gamma zeta, the pairing that admits optimal error estimates.
    bool optimal_pairing(double tol = 1e-12) const;
};

enum class FieldRole { U, V };

/// Modal coefficients, element-major: element e owns [e*n, (e+1)*n).
struct FieldVector {
    FieldRole role = FieldRole::U;
    Eigen::VectorXd coeffs;
};

/// Assembled operator blocks. Rows index test functions, columns trial functions.
///   StiffnessU  (U,U)  sum_K int grad phi . grad w
///   MeanU       (U,U)  constant-mode rows: int_K w
///   MeanV       (U,V)  constant-mode rows: int_K w
///   MassV       (V,V)  int_K psi w
///   GradUV      (U,V)  int_K grad phi . grad w
///   GradVU      (V,U)  int_K grad psi . grad w
///   Flux1U/1V   (U,*)  sum_K oint grad phi . n (v* - v), split by trial field
///   Flux2U/2V   (V,*)  sum_K oint psi (grad u)* . n, split by trial field
enum class Block { StiffnessU, MeanU, MeanV, MassV, GradUV, GradVU, Flux1U, Flux1V, Flux2U, Flux2V };

struct BlockTerm {
    Block block;
    double scale = 1.0;
};

FieldRole test_role(Block block);
FieldRole trial_role(Block block);

/// Broken polynomial spaces U_h^{q_u} x V_h^{q_v} on a periodic mesh with
/// all element and face operators assembled.
class DgSpace {
public:
    DgSpace(PeriodicMesh mesh, int q_u, int q_v, FluxParams flux);

    const PeriodicMesh& mesh() const { return mesh_; }
    int dimension() const { return mesh_.dimension(); }
    int q_u() const { return q_u_; }
    int q_v() const { return q_v_; }
    const FluxParams& flux() const { return flux_; }
    const BasisSpec& basis_u() const { return basis_u_; }
    const BasisSpec& basis_v() const { return basis_v_; }
    const BasisSpec& basis(FieldRole role) const { return role == FieldRole::U ? basis_u_ : basis_v_; }

    int local_size(FieldRole role) const { return basis(role).size(); }
    Eigen::Index dofs(FieldRole role) const {
        return static_cast<Eigen::Index>(mesh_.num_elements()) * local_size(role);
    }
    Eigen::Index dofs_u() const { return dofs(FieldRole::U); }
    Eigen::Index dofs_v() const { return dofs(FieldRole::V); }

    /// |K| / |reference element|.
    double jacobian() const { return jacobian_; }
    /// d(reference)/d(physical) along an axis, i.e. 2/h.
    double inverse_scale(int axis) const { return 2.0 / mesh_.h(axis); }

    const SparseMatrix& block(Block b) const;

    /// Coupled-system operators on x = [U; V]. The discrete system reads
    ///   T (time difference of x) + A (interpolated x) + E (memory term) = [0; load]
    /// with T = diag(StiffnessU + MeanU, MassV), E = diag(0, MassV) and
    ///   A = [ -Flux1U,            -(GradUV + Flux1V) - MeanV ]
    ///       [ GradVU - Flux2U,    -Flux2V                    ].
    const SparseMatrix& time_operator() const { return time_op_; }
    const SparseMatrix& coupling_operator() const { return coupling_op_; }
    const SparseMatrix& memory_operator() const { return memory_op_; }

    FieldVector zero(FieldRole role) const;

    /// Field value and physical gradient at a reference point of element e.
    double evaluate(const FieldVector& field, int e, const Point& reference) const;
    Point evaluate_gradient(const FieldVector& field, int e, const Point& reference) const;

    /// Gauss points per direction used by error norms (q_u + 1).
    int error_points() const { return q_u_ + 1; }
    /// Gauss points per direction for load vectors and projections.
    int integration_points() const;

    /// int_K psi_j g for every V basis function, element-major.
    Eigen::VectorXd load_vector(const ScalarField& g) const;

private:
    void assemble();

    PeriodicMesh mesh_;
    int q_u_;
    int q_v_;
    FluxParams flux_;
    BasisSpec basis_u_;
    BasisSpec basis_v_;
    double jacobian_;

    SparseMatrix stiffness_u_, mean_u_, mean_v_, mass_v_, grad_uv_, grad_vu_;
    SparseMatrix flux1_u_, flux1_v_, flux2_u_, flux2_v_;
    SparseMatrix time_op_, coupling_op_, memory_op_;
};

/// Checks q_u >= 1 and q_u - 2 <= q_v <= q_u; throws InvalidArgument otherwise.
void check_admissible_degrees(int q_u, int q_v);

DgSpace assemble_space(const PeriodicMesh& mesh, int q_u, int q_v, const FluxParams& flux);

/// Elementwise H^1 projection with matching mean for u0 (needs its gradient)
/// and L^2 projection for v0.
std::pair<FieldVector, FieldVector> project_initial(const DgSpace& space, const ScalarField& u0,
                                                    const VectorField& grad_u0, const ScalarField& v0);

/// Matrix-free style application of a linear combination of blocks sharing a
/// test role. Each term picks `u` or `v` by its trial role. Throws
/// InvalidArgument on role or size mismatch.
FieldVector apply_operator(const DgSpace& space, std::span<const BlockTerm> terms, const FieldVector& u,
                           const FieldVector& v);

/// sum_K oint_{dK} [grad u . n (v* - v) + v (grad u)* . n] dS.
double flux_dissipation(const DgSpace& space, const FieldVector& u, const FieldVector& v);

/// sqrt(sum_K sum_j w_j (exact(x_j) - field(x_j))^2) with error_points() per direction.
double error_norm(const DgSpace& space, const FieldVector& field, const ScalarField& exact);
/// Broken H^1-seminorm analogue of error_norm.
double error_norm(const DgSpace& space, const FieldVector& field, const VectorField& exact_gradient);

/// ||w||^2 over the domain (exact for the orthonormal basis).
double l2_norm_squared(const DgSpace& space, const FieldVector& field);
/// ||grad_h u||^2, the broken gradient seminorm.
double broken_gradient_norm_squared(const DgSpace& space, const FieldVector& u);

} // namespace vofdg
