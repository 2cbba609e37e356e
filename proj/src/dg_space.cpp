#include "vofdg/dg_space.hpp"

#include "vofdg/errors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace vofdg {

using Triplets = std::vector<Eigen::Triplet<double>>;

void FluxParams::validate() const {
    if (!(gamma >= 0.0) || !(zeta >= 0.0)) {
        throw InvalidArgument("flux parameters: gamma and zeta must be nonnegative");
    }
    if (!std::isfinite(theta)) {
        throw InvalidArgument("flux parameters: theta must be finite");
    }
}

bool FluxParams::optimal_pairing(double tol) const {
    return std::abs(theta * (1.0 - theta) - gamma * zeta) <= tol;
}

FieldRole test_role(Block block) {
    switch (block) {
    case Block::StiffnessU:
    case Block::MeanU:
    case Block::MeanV:
    case Block::GradUV:
    case Block::Flux1U:
    case Block::Flux1V: return FieldRole::U;
    default: return FieldRole::V;
    }
}

FieldRole trial_role(Block block) {
    switch (block) {
    case Block::StiffnessU:
    case Block::MeanU:
    case Block::GradVU:
    case Block::Flux1U:
    case Block::Flux2U: return FieldRole::U;
    default: return FieldRole::V;
    }
}

void check_admissible_degrees(int q_u, int q_v) {
    if (q_u < 1 || q_v < 0 || q_v > q_u || q_v < q_u - 2) {
        throw InvalidArgument("inadmissible degree pair (q_u=" + std::to_string(q_u) + ", q_v=" +
                              std::to_string(q_v) +
                              "): admissible pairs satisfy q_u >= 1 and q_u - 2 <= q_v <= q_u");
    }
}

namespace {

void scatter(Triplets& out, const Eigen::MatrixXd& local, Eigen::Index row0, Eigen::Index col0,
             double scale = 1.0) {
    for (Eigen::Index i = 0; i < local.rows(); ++i) {
        for (Eigen::Index j = 0; j < local.cols(); ++j) {
            const double v = scale * local(i, j);
            if (v != 0.0) {
                out.emplace_back(row0 + i, col0 + j, v);
            }
        }
    }
}

void scatter(Triplets& out, const SparseMatrix& block, Eigen::Index row0, Eigen::Index col0,
             double scale = 1.0) {
    for (int k = 0; k < block.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(block, k); it; ++it) {
            out.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
        }
    }
}

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets& t) {
    SparseMatrix m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    m.prune(0.0);
    m.makeCompressed();
    return m;
}

// Physical gradient component columns of a table.
struct PhysicalTable {
    Eigen::MatrixXd values;
    Eigen::MatrixXd gx;
    Eigen::MatrixXd gy;
};

PhysicalTable physical_table(const BasisSpec& basis, const std::vector<Point>& points, double sx, double sy) {
    BasisTable t = basis.tabulate(points);
    return {std::move(t.values), t.grad_x * sx, t.grad_y * sy};
}

} // namespace

DgSpace::DgSpace(PeriodicMesh mesh, int q_u, int q_v, FluxParams flux)
    : mesh_(std::move(mesh)),
      q_u_(q_u),
      q_v_(q_v),
      flux_(flux),
      basis_u_((check_admissible_degrees(q_u, q_v), q_u), mesh_.dimension()),
      basis_v_(q_v, mesh_.dimension()) {
    flux_.validate();
    jacobian_ = mesh_.element_measure() / (mesh_.dimension() == 1 ? 2.0 : 4.0);
    assemble();
}

int DgSpace::integration_points() const {
    return std::max(q_u_, q_v_) + 3;
}

void DgSpace::assemble() {
    const int d = mesh_.dimension();
    const int nu = basis_u_.size();
    const int nv = basis_v_.size();
    const int ne = mesh_.num_elements();
    const Eigen::Index Nu = dofs_u();
    const Eigen::Index Nv = dofs_v();
    const double sx = inverse_scale(0);
    const double sy = d == 2 ? inverse_scale(1) : 0.0;

    // Element-local blocks are identical on a uniform mesh.
    const QuadratureRule vol = gauss_rule(std::max(q_u_, q_v_) + 1, d);
    const PhysicalTable tu = physical_table(basis_u_, vol.nodes, sx, sy);
    const PhysicalTable tv = physical_table(basis_v_, vol.nodes, sx, sy);
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(vol.weights.data(), vol.size()) * jacobian_;

    const Eigen::MatrixXd stiff = tu.gx.transpose() * w.asDiagonal() * tu.gx +
                                  tu.gy.transpose() * w.asDiagonal() * tu.gy;
    const Eigen::MatrixXd grad_uv = tu.gx.transpose() * w.asDiagonal() * tv.gx +
                                    tu.gy.transpose() * w.asDiagonal() * tv.gy;
    const Eigen::MatrixXd mass_v = tv.values.transpose() * w.asDiagonal() * tv.values;
    Eigen::MatrixXd mean_u = Eigen::MatrixXd::Zero(nu, nu);
    Eigen::MatrixXd mean_v = Eigen::MatrixXd::Zero(nu, nv);
    mean_u.row(0) = w.transpose() * tu.values;
    mean_v.row(0) = w.transpose() * tv.values;

    Triplets t_stiff, t_mean_u, t_mean_v, t_mass, t_guv, t_gvu;
    for (int e = 0; e < ne; ++e) {
        const Eigen::Index ru = static_cast<Eigen::Index>(e) * nu;
        const Eigen::Index rv = static_cast<Eigen::Index>(e) * nv;
        scatter(t_stiff, stiff, ru, ru);
        scatter(t_mean_u, mean_u, ru, ru);
        scatter(t_mean_v, mean_v, ru, rv);
        scatter(t_mass, mass_v, rv, rv);
        scatter(t_guv, grad_uv, ru, rv);
        scatter(t_gvu, Eigen::MatrixXd(grad_uv.transpose()), rv, ru);
    }
    stiffness_u_ = from_triplets(Nu, Nu, t_stiff);
    mean_u_ = from_triplets(Nu, Nu, t_mean_u);
    mean_v_ = from_triplets(Nu, Nv, t_mean_v);
    mass_v_ = from_triplets(Nv, Nv, t_mass);
    grad_uv_ = from_triplets(Nu, Nv, t_guv);
    grad_vu_ = from_triplets(Nv, Nu, t_gvu);

    // Face blocks, one set per axis. L is the element the normal points out of.
    const double theta = flux_.theta;
    const double gam = flux_.gamma;
    const double zeta = flux_.zeta;
    Triplets t_f1u, t_f1v, t_f2u, t_f2v;
    for (int axis = 0; axis < d; ++axis) {
        std::vector<Point> left_pts, right_pts;
        std::vector<double> fw;
        if (d == 1) {
            left_pts.push_back({1.0, 0.0});
            right_pts.push_back({-1.0, 0.0});
            fw.push_back(1.0);
        } else {
            const int tang = 1 - axis;
            const QuadratureRule face = gauss_rule(std::max(q_u_, q_v_) + 1);
            for (std::size_t q = 0; q < face.size(); ++q) {
                Point l{}, r{};
                l[axis] = 1.0;
                r[axis] = -1.0;
                l[tang] = r[tang] = face.nodes[q][0];
                left_pts.push_back(l);
                right_pts.push_back(r);
                fw.push_back(face.weights[q] * 0.5 * mesh_.h(tang));
            }
        }
        const double sn = inverse_scale(axis);
        const BasisTable ul = basis_u_.tabulate(left_pts);
        const BasisTable ur = basis_u_.tabulate(right_pts);
        const BasisTable vl = basis_v_.tabulate(left_pts);
        const BasisTable vr = basis_v_.tabulate(right_pts);
        // grad phi . n with n = +e_axis, for both sides.
        const Eigen::MatrixXd gl = (axis == 0 ? ul.grad_x : ul.grad_y) * sn;
        const Eigen::MatrixXd gr = (axis == 0 ? ur.grad_x : ur.grad_y) * sn;
        const Eigen::MatrixXd& pl = vl.values;
        const Eigen::MatrixXd& pr = vr.values;
        const auto W = Eigen::Map<const Eigen::VectorXd>(fw.data(), static_cast<Eigen::Index>(fw.size()))
                           .asDiagonal();

        // Equation 1, test grad phi_K . n_K (v* - v_K):
        //   v* - v_L = theta (v_R - v_L) - zeta (grad u_L - grad u_R).n
        //   v* - v_R = (1-theta) (v_L - v_R) - zeta (grad u_L - grad u_R).n
        const Eigen::MatrixXd f1v_ll = -theta * gl.transpose() * W * pl;
        const Eigen::MatrixXd f1v_lr = theta * gl.transpose() * W * pr;
        const Eigen::MatrixXd f1v_rl = -(1.0 - theta) * gr.transpose() * W * pl;
        const Eigen::MatrixXd f1v_rr = (1.0 - theta) * gr.transpose() * W * pr;
        const Eigen::MatrixXd f1u_ll = -zeta * gl.transpose() * W * gl;
        const Eigen::MatrixXd f1u_lr = zeta * gl.transpose() * W * gr;
        const Eigen::MatrixXd f1u_rl = zeta * gr.transpose() * W * gl;
        const Eigen::MatrixXd f1u_rr = -zeta * gr.transpose() * W * gr;
        // Equation 2, test psi_K (grad u)* . n_K:
        //   (grad u)*.n = (1-theta) grad u_R.n + theta grad u_L.n - gamma (v_L - v_R)
        const Eigen::MatrixXd f2u_ll = theta * pl.transpose() * W * gl;
        const Eigen::MatrixXd f2u_lr = (1.0 - theta) * pl.transpose() * W * gr;
        const Eigen::MatrixXd f2u_rl = -theta * pr.transpose() * W * gl;
        const Eigen::MatrixXd f2u_rr = -(1.0 - theta) * pr.transpose() * W * gr;
        const Eigen::MatrixXd f2v_ll = -gam * pl.transpose() * W * pl;
        const Eigen::MatrixXd f2v_lr = gam * pl.transpose() * W * pr;
        const Eigen::MatrixXd f2v_rl = gam * pr.transpose() * W * pl;
        const Eigen::MatrixXd f2v_rr = -gam * pr.transpose() * W * pr;

        for (const Face& f : mesh_.faces()) {
            if (f.axis != axis) continue;
            const Eigen::Index lu = static_cast<Eigen::Index>(f.left) * nu;
            const Eigen::Index ru = static_cast<Eigen::Index>(f.right) * nu;
            const Eigen::Index lv = static_cast<Eigen::Index>(f.left) * nv;
            const Eigen::Index rv = static_cast<Eigen::Index>(f.right) * nv;
            scatter(t_f1v, f1v_ll, lu, lv);
            scatter(t_f1v, f1v_lr, lu, rv);
            scatter(t_f1v, f1v_rl, ru, lv);
            scatter(t_f1v, f1v_rr, ru, rv);
            scatter(t_f1u, f1u_ll, lu, lu);
            scatter(t_f1u, f1u_lr, lu, ru);
            scatter(t_f1u, f1u_rl, ru, lu);
            scatter(t_f1u, f1u_rr, ru, ru);
            scatter(t_f2u, f2u_ll, lv, lu);
            scatter(t_f2u, f2u_lr, lv, ru);
            scatter(t_f2u, f2u_rl, rv, lu);
            scatter(t_f2u, f2u_rr, rv, ru);
            scatter(t_f2v, f2v_ll, lv, lv);
            scatter(t_f2v, f2v_lr, lv, rv);
            scatter(t_f2v, f2v_rl, rv, lv);
            scatter(t_f2v, f2v_rr, rv, rv);
        }
    }
    flux1_u_ = from_triplets(Nu, Nu, t_f1u);
    flux1_v_ = from_triplets(Nu, Nv, t_f1v);
    flux2_u_ = from_triplets(Nv, Nu, t_f2u);
    flux2_v_ = from_triplets(Nv, Nv, t_f2v);

    const Eigen::Index n = Nu + Nv;
    Triplets tt, ta, tm;
    scatter(tt, stiffness_u_, 0, 0);
    scatter(tt, mean_u_, 0, 0);
    scatter(tt, mass_v_, Nu, Nu);
    scatter(ta, flux1_u_, 0, 0, -1.0);
    scatter(ta, grad_uv_, 0, Nu, -1.0);
    scatter(ta, flux1_v_, 0, Nu, -1.0);
    scatter(ta, mean_v_, 0, Nu, -1.0);
    scatter(ta, grad_vu_, Nu, 0);
    scatter(ta, flux2_u_, Nu, 0, -1.0);
    scatter(ta, flux2_v_, Nu, Nu, -1.0);
    scatter(tm, mass_v_, Nu, Nu);
    time_op_ = from_triplets(n, n, tt);
    coupling_op_ = from_triplets(n, n, ta);
    memory_op_ = from_triplets(n, n, tm);
}

const SparseMatrix& DgSpace::block(Block b) const {
    switch (b) {
    case Block::StiffnessU: return stiffness_u_;
    case Block::MeanU: return mean_u_;
    case Block::MeanV: return mean_v_;
    case Block::MassV: return mass_v_;
    case Block::GradUV: return grad_uv_;
    case Block::GradVU: return grad_vu_;
    case Block::Flux1U: return flux1_u_;
    case Block::Flux1V: return flux1_v_;
    case Block::Flux2U: return flux2_u_;
    case Block::Flux2V: return flux2_v_;
    }
    throw InvalidArgument("unknown block");
}

FieldVector DgSpace::zero(FieldRole role) const {
    return FieldVector{role, Eigen::VectorXd::Zero(dofs(role))};
}

double DgSpace::evaluate(const FieldVector& field, int e, const Point& reference) const {
    const BasisSpec& b = basis(field.role);
    const auto vals = b.evaluate(reference);
    const Eigen::Index off = static_cast<Eigen::Index>(e) * b.size();
    double s = 0.0;
    for (int k = 0; k < b.size(); ++k) s += field.coeffs(off + k) * vals[k].value;
    return s;
}

Point DgSpace::evaluate_gradient(const FieldVector& field, int e, const Point& reference) const {
    const BasisSpec& b = basis(field.role);
    const auto vals = b.evaluate(reference);
    const Eigen::Index off = static_cast<Eigen::Index>(e) * b.size();
    Point g{0.0, 0.0};
    for (int k = 0; k < b.size(); ++k) {
        g[0] += field.coeffs(off + k) * vals[k].gradient[0];
        g[1] += field.coeffs(off + k) * vals[k].gradient[1];
    }
    g[0] *= inverse_scale(0);
    g[1] = dimension() == 2 ? g[1] * inverse_scale(1) : 0.0;
    return g;
}

Eigen::VectorXd DgSpace::load_vector(const ScalarField& g) const {
    const int nv = basis_v_.size();
    const QuadratureRule rule = gauss_rule(integration_points(), dimension());
    const BasisTable t = basis_v_.tabulate(rule.nodes);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dofs_v());
    Eigen::VectorXd samples(static_cast<Eigen::Index>(rule.size()));
    for (int e = 0; e < mesh_.num_elements(); ++e) {
        for (std::size_t p = 0; p < rule.size(); ++p) {
            samples(static_cast<Eigen::Index>(p)) =
                jacobian_ * rule.weights[p] * g(mesh_.to_physical(e, rule.nodes[p]));
        }
        out.segment(static_cast<Eigen::Index>(e) * nv, nv) = t.values.transpose() * samples;
    }
    return out;
}

DgSpace assemble_space(const PeriodicMesh& mesh, int q_u, int q_v, const FluxParams& flux) {
    return DgSpace(mesh, q_u, q_v, flux);
}

std::pair<FieldVector, FieldVector> project_initial(const DgSpace& space, const ScalarField& u0,
                                                    const VectorField& grad_u0, const ScalarField& v0) {
    const PeriodicMesh& mesh = space.mesh();
    const int d = space.dimension();
    const int nu = space.basis_u().size();
    const int nv = space.basis_v().size();
    const double J = space.jacobian();
    const QuadratureRule rule = gauss_rule(space.integration_points(), d);
    const BasisTable tu = space.basis_u().tabulate(rule.nodes);
    const BasisTable tv = space.basis_v().tabulate(rule.nodes);
    const double sx = space.inverse_scale(0);
    const double sy = d == 2 ? space.inverse_scale(1) : 0.0;

    // Local H^1 system: stiffness rows with the constant-mode row replaced by the mean.
    Eigen::MatrixXd local(nu, nu);
    {
        const SparseMatrix& S = space.block(Block::StiffnessU);
        const SparseMatrix& C = space.block(Block::MeanU);
        local = Eigen::MatrixXd(S.topLeftCorner(nu, nu)) + Eigen::MatrixXd(C.topLeftCorner(nu, nu));
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(local);
    if (!lu.isInvertible()) {
        throw NumericalFailure("project_initial: singular local H1 projection system");
    }

    FieldVector u = space.zero(FieldRole::U);
    FieldVector v = space.zero(FieldRole::V);
    Eigen::VectorXd rhs(nu);
    Eigen::VectorXd rhs_v(nv);
    for (int e = 0; e < mesh.num_elements(); ++e) {
        rhs.setZero();
        rhs_v.setZero();
        for (std::size_t p = 0; p < rule.size(); ++p) {
            const auto pi = static_cast<Eigen::Index>(p);
            const Point x = mesh.to_physical(e, rule.nodes[p]);
            const double wj = J * rule.weights[p];
            const Point g = grad_u0(x);
            const double u0x = u0(x);
            for (int i = 0; i < nu; ++i) {
                rhs(i) += wj * (tu.grad_x(pi, i) * sx * g[0] + (d == 2 ? tu.grad_y(pi, i) * sy * g[1] : 0.0));
            }
            rhs(0) += wj * u0x; // the mean row integrates against 1
            const double v0x = v0(x);
            for (int i = 0; i < nv; ++i) {
                rhs_v(i) += wj * tv.values(pi, i) * v0x;
            }
        }
        u.coeffs.segment(static_cast<Eigen::Index>(e) * nu, nu) = lu.solve(rhs);
        // Orthonormal modes: the local mass matrix is J * I.
        v.coeffs.segment(static_cast<Eigen::Index>(e) * nv, nv) = rhs_v / J;
    }
    return {std::move(u), std::move(v)};
}

FieldVector apply_operator(const DgSpace& space, std::span<const BlockTerm> terms, const FieldVector& u,
                           const FieldVector& v) {
    if (terms.empty()) {
        throw InvalidArgument("apply_operator: empty block combination");
    }
    if (u.role != FieldRole::U || v.role != FieldRole::V) {
        throw InvalidArgument("apply_operator: expected (u-field, v-field) arguments");
    }
    if (u.coeffs.size() != space.dofs_u() || v.coeffs.size() != space.dofs_v()) {
        throw InvalidArgument("apply_operator: field length does not match the space");
    }
    const FieldRole out_role = test_role(terms.front().block);
    FieldVector out = space.zero(out_role);
    for (const BlockTerm& t : terms) {
        if (test_role(t.block) != out_role) {
            throw InvalidArgument("apply_operator: blocks in one combination must share a test role");
        }
        const FieldVector& in = trial_role(t.block) == FieldRole::U ? u : v;
        out.coeffs += t.scale * (space.block(t.block) * in.coeffs);
    }
    return out;
}

double flux_dissipation(const DgSpace& space, const FieldVector& u, const FieldVector& v) {
    const Eigen::VectorXd& U = u.coeffs;
    const Eigen::VectorXd& V = v.coeffs;
    return U.dot(space.block(Block::Flux1U) * U + space.block(Block::Flux1V) * V) +
           V.dot(space.block(Block::Flux2U) * U + space.block(Block::Flux2V) * V);
}

double error_norm(const DgSpace& space, const FieldVector& field, const ScalarField& exact) {
    const QuadratureRule rule = gauss_rule(space.error_points(), space.dimension());
    const BasisSpec& b = space.basis(field.role);
    const BasisTable t = b.tabulate(rule.nodes);
    const double J = space.jacobian();
    double sum = 0.0;
    for (int e = 0; e < space.mesh().num_elements(); ++e) {
        const Eigen::VectorXd vals = t.values * field.coeffs.segment(static_cast<Eigen::Index>(e) * b.size(), b.size());
        for (std::size_t p = 0; p < rule.size(); ++p) {
            const double diff = exact(space.mesh().to_physical(e, rule.nodes[p])) -
                                vals(static_cast<Eigen::Index>(p));
            sum += J * rule.weights[p] * diff * diff;
        }
    }
    return std::sqrt(sum);
}

double error_norm(const DgSpace& space, const FieldVector& field, const VectorField& exact_gradient) {
    const QuadratureRule rule = gauss_rule(space.error_points(), space.dimension());
    const BasisSpec& b = space.basis(field.role);
    const BasisTable t = b.tabulate(rule.nodes);
    const double J = space.jacobian();
    const double sx = space.inverse_scale(0);
    const double sy = space.dimension() == 2 ? space.inverse_scale(1) : 0.0;
    double sum = 0.0;
    for (int e = 0; e < space.mesh().num_elements(); ++e) {
        const auto c = field.coeffs.segment(static_cast<Eigen::Index>(e) * b.size(), b.size());
        const Eigen::VectorXd gx = t.grad_x * c * sx;
        const Eigen::VectorXd gy = t.grad_y * c * sy;
        for (std::size_t p = 0; p < rule.size(); ++p) {
            const auto pi = static_cast<Eigen::Index>(p);
            const Point g = exact_gradient(space.mesh().to_physical(e, rule.nodes[p]));
            const double dx = g[0] - gx(pi);
            const double dy = space.dimension() == 2 ? g[1] - gy(pi) : 0.0;
            sum += J * rule.weights[p] * (dx * dx + dy * dy);
        }
    }
    return std::sqrt(sum);
}

double l2_norm_squared(const DgSpace& space, const FieldVector& field) {
    return space.jacobian() * field.coeffs.squaredNorm();
}

double broken_gradient_norm_squared(const DgSpace& space, const FieldVector& u) {
    if (u.role != FieldRole::U) {
        throw InvalidArgument("broken_gradient_norm_squared: expects a u-field");
    }
    return u.coeffs.dot(space.block(Block::StiffnessU) * u.coeffs);
}

} // namespace vofdg
