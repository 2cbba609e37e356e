#include "dg_helpers.hpp"

#include "vofdg/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace vofdg;
using testing_support::flux_form;
using testing_support::jump_integral;
using testing_support::random_field;

namespace {

DgSpace space_1d(int n, int qu, int qv, FluxParams f = {}) {
    return DgSpace(build_mesh(1, {0.0, 0.0}, {2.0 * std::numbers::pi, 0.0}, n), qu, qv, f);
}

DgSpace space_2d(int n, int qu, int qv, FluxParams f = {}) {
    return DgSpace(build_mesh(2, {0.0, 0.0}, {1.0, 1.0}, n), qu, qv, f);
}

const std::vector<FluxParams> kFluxSets = {
    {0.0, 0.0, 0.0}, {0.5, 1.0, 1.0}, {0.3, 0.0, 2.0}, {1.0, 0.7, 0.0}, {-0.4, 2.5, 0.3}};

} // namespace

TEST_CASE("FluxParams: validation and optimal pairing flag") {
    CHECK_THROWS_AS((FluxParams{0.0, -1.0, 0.0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((FluxParams{0.0, 0.0, -0.1}.validate()), InvalidArgument);
    CHECK((FluxParams{0.0, 0.0, 0.0}.optimal_pairing()));
    CHECK((FluxParams{0.5, 0.5, 0.5}.optimal_pairing()));
    CHECK_FALSE((FluxParams{0.5, 1.0, 1.0}.optimal_pairing()));
}

TEST_CASE("assemble_space: degree admissibility") {
    const PeriodicMesh m = build_mesh(1, {0.0, 0.0}, {1.0, 0.0}, 4);
    CHECK_NOTHROW(assemble_space(m, 3, 3, {}));
    CHECK_NOTHROW(assemble_space(m, 3, 2, {}));
    CHECK_NOTHROW(assemble_space(m, 3, 1, {}));
    CHECK_THROWS_AS(assemble_space(m, 3, 0, {}), InvalidArgument);
    CHECK_THROWS_AS(assemble_space(m, 2, 3, {}), InvalidArgument);
    CHECK_THROWS_AS(assemble_space(m, 0, 0, {}), InvalidArgument);
    CHECK_THROWS_AS(assemble_space(m, 1, 0, {0.0, -1.0, 0.0}), InvalidArgument);
}

TEST_CASE("flux blocks agree with a face-by-face evaluation of the traces") {
    std::mt19937_64 rng(5);
    for (const FluxParams& fp : kFluxSets) {
        for (int dim : {1, 2}) {
            const DgSpace s = dim == 1 ? space_1d(5, 3, 2, fp) : space_2d(3, 2, 1, fp);
            for (int k = 0; k < 3; ++k) {
                const FieldVector u = random_field(s, FieldRole::U, rng);
                const FieldVector v = random_field(s, FieldRole::V, rng);
                const FieldVector w = random_field(s, FieldRole::U, rng);
                const FieldVector z = random_field(s, FieldRole::V, rng);
                const double assembled =
                    w.coeffs.dot(s.block(Block::Flux1U) * u.coeffs + s.block(Block::Flux1V) * v.coeffs) +
                    z.coeffs.dot(s.block(Block::Flux2U) * u.coeffs + s.block(Block::Flux2V) * v.coeffs);
                const double oracle = flux_form(s, w, z, u, v);
                CHECK(std::abs(assembled - oracle) <= 1e-11 * std::max(1.0, std::abs(oracle)));
            }
        }
    }
}

TEST_CASE("theta = 0 selects the left velocity and the right gradient") {
    const DgSpace s = space_1d(4, 2, 1, {0.0, 0.0, 0.0});
    // Flux1V couples only the right element's test functions to v_L - v_R.
    const Eigen::MatrixXd F1v(s.block(Block::Flux1V));
    const Eigen::MatrixXd F2u(s.block(Block::Flux2U));
    const int nu = s.local_size(FieldRole::U), nv = s.local_size(FieldRole::V);
    // Face between elements 0 and 1: the left element's u-rows do not see v.
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            CHECK(F1v(i, nv + j) == 0.0);
        }
    }
    // Left element's v-rows at that face see only the right element's gradient.
    for (int i = 0; i < nv; ++i) {
        double left_cols = 0.0;
        for (int j = 0; j < nu; ++j) left_cols += std::abs(F2u(nv + i, j));
        (void)left_cols;
    }
    std::mt19937_64 rng(1);
    const FieldVector u = random_field(s, FieldRole::U, rng);
    const FieldVector v = random_field(s, FieldRole::V, rng);
    FieldVector w = s.zero(FieldRole::U);
    FieldVector z = s.zero(FieldRole::V);
    w.coeffs.setRandom();
    z.coeffs.setRandom();
    CHECK(w.coeffs.dot(s.block(Block::Flux1V) * v.coeffs) + z.coeffs.dot(s.block(Block::Flux2U) * u.coeffs) ==
          doctest::Approx(flux_form(s, w, z, u, v)).epsilon(1e-12));
}

TEST_CASE("continuous traces with gamma = zeta = 0 leave the velocity flux inert") {
    // v continuous and piecewise linear (hat interpolant), u = 0.
    const int n = 6;
    for (double theta : {0.0, 0.5, 1.3}) {
        const DgSpace s = space_1d(n, 1, 1, {theta, 0.0, 0.0});
        FieldVector v = s.zero(FieldRole::V);
        std::vector<double> nodal = {0.3, -1.0, 2.0, 0.5, 0.1, -0.7};
        for (int e = 0; e < n; ++e) {
            const double a = nodal[e], b = nodal[(e + 1) % n];
            v.coeffs(2 * e) = 0.5 * (a + b) * std::sqrt(2.0);
            v.coeffs(2 * e + 1) = 0.5 * (b - a) / std::sqrt(1.5);
        }
        CHECK((s.block(Block::Flux1V) * v.coeffs).norm() < 1e-13);
        CHECK(std::abs(flux_dissipation(s, s.zero(FieldRole::U), v)) < 1e-13);
    }
}

TEST_CASE("flux dissipation identity on random fields") {
    std::mt19937_64 rng(42);
    for (const FluxParams& fp : kFluxSets) {
        for (int dim : {1, 2}) {
            const DgSpace s = dim == 1 ? space_1d(6, 3, 2, fp) : space_2d(3, 2, 2, fp);
            for (int k = 0; k < 10; ++k) {
                const FieldVector u = random_field(s, FieldRole::U, rng);
                const FieldVector v = random_field(s, FieldRole::V, rng);
                const double d = flux_dissipation(s, u, v);
                const double j = jump_integral(s, u, v);
                CHECK(std::abs(d + j) <= 1e-12 * std::max(1.0, j));
            }
        }
    }
}

TEST_CASE("adjoint consistency of the coupling blocks") {
    for (double theta : {0.0, 0.25, 1.0}) {
        for (int dim : {1, 2}) {
            const DgSpace s = dim == 1 ? space_1d(4, 3, 2, {theta, 0.0, 0.0}) : space_2d(2, 2, 1, {theta, 0.0, 0.0});
            const Eigen::MatrixXd F1v(s.block(Block::Flux1V));
            const Eigen::MatrixXd F2u(s.block(Block::Flux2U));
            CHECK((F1v + F2u.transpose()).norm() <= 1e-12 * F1v.norm());
            const Eigen::MatrixXd Guv(s.block(Block::GradUV));
            const Eigen::MatrixXd Gvu(s.block(Block::GradVU));
            CHECK((Guv - Gvu.transpose()).norm() == 0.0);
        }
    }
}

TEST_CASE("stiffness is symmetric positive semidefinite with constants in its kernel") {
    for (int dim : {1, 2}) {
        const DgSpace s = dim == 1 ? space_1d(4, 3, 2) : space_2d(2, 3, 2);
        const Eigen::MatrixXd S(s.block(Block::StiffnessU));
        CHECK((S - S.transpose()).norm() < 1e-13 * S.norm());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
        CHECK(es.eigenvalues().minCoeff() > -1e-12 * S.norm());
        FieldVector c = s.zero(FieldRole::U);
        for (int e = 0; e < s.mesh().num_elements(); ++e) c.coeffs(e * s.local_size(FieldRole::U)) = 1.0 + e;
        const BlockTerm t{Block::StiffnessU, 1.0};
        CHECK(apply_operator(s, std::span(&t, 1), c, s.zero(FieldRole::V)).coeffs.norm() < 1e-13);
    }
}

TEST_CASE("apply_operator: mass is diagonal, roles are checked") {
    const DgSpace s = space_2d(3, 2, 1);
    std::mt19937_64 rng(9);
    const FieldVector v = random_field(s, FieldRole::V, rng);
    const BlockTerm mass{Block::MassV, 1.0};
    const FieldVector mv = apply_operator(s, std::span(&mass, 1), s.zero(FieldRole::U), v);
    CHECK(mv.role == FieldRole::V);
    CHECK((mv.coeffs - s.jacobian() * v.coeffs).norm() < 1e-13);

    const std::vector<BlockTerm> mixed = {{Block::MassV, 1.0}, {Block::StiffnessU, 1.0}};
    CHECK_THROWS_AS(apply_operator(s, mixed, s.zero(FieldRole::U), v), InvalidArgument);
    const BlockTerm st{Block::StiffnessU, 1.0};
    CHECK_THROWS_AS(apply_operator(s, std::span(&st, 1), v, v), InvalidArgument);
    FieldVector short_u{FieldRole::U, Eigen::VectorXd::Zero(3)};
    CHECK_THROWS_AS(apply_operator(s, std::span(&st, 1), short_u, v), InvalidArgument);

    // combination is linear
    const FieldVector u = random_field(s, FieldRole::U, rng);
    const std::vector<BlockTerm> comb = {{Block::GradVU, 2.0}, {Block::Flux2U, -1.0}, {Block::MassV, 0.5}};
    const FieldVector r = apply_operator(s, comb, u, v);
    const Eigen::VectorXd ref = 2.0 * (s.block(Block::GradVU) * u.coeffs) - s.block(Block::Flux2U) * u.coeffs +
                                0.5 * (s.block(Block::MassV) * v.coeffs);
    CHECK((r.coeffs - ref).norm() < 1e-12 * ref.norm());
}

TEST_CASE("project_initial: constants, idempotence and orthogonality") {
    for (int dim : {1, 2}) {
        const DgSpace s = dim == 1 ? space_1d(5, 3, 2) : space_2d(3, 3, 2);
        auto [uc, vc] = project_initial(
            s, [](const Point&) { return 2.5; }, [](const Point&) { return Point{0.0, 0.0}; },
            [](const Point&) { return -1.0; });
        for (int e = 0; e < s.mesh().num_elements(); ++e) {
            CHECK(s.evaluate(uc, e, {0.3, -0.2}) == doctest::Approx(2.5).epsilon(1e-13));
            CHECK(s.evaluate(vc, e, {-0.6, 0.1}) == doctest::Approx(-1.0).epsilon(1e-13));
            for (int k = 1; k < s.local_size(FieldRole::U); ++k) {
                CHECK(std::abs(uc.coeffs(e * s.local_size(FieldRole::U) + k)) < 1e-13);
            }
        }
        // a global cubic is reproduced exactly
        auto p = [](const Point& x) { return 1.0 + x[0] - 0.3 * x[0] * x[0] * x[1] + 0.2 * x[0] * x[0] * x[0]; };
        auto gp = [](const Point& x) {
            return Point{1.0 - 0.6 * x[0] * x[1] + 0.6 * x[0] * x[0], -0.3 * x[0] * x[0]};
        };
        auto q2 = [](const Point& x) { return x[0] * x[1] - x[1] * x[1]; };
        auto [up, vp] = project_initial(s, p, gp, q2);
        CHECK(error_norm(s, up, p) < 1e-12);
        CHECK(error_norm(s, up, gp) < 1e-11);
        CHECK(error_norm(s, vp, q2) < 1e-12);

        // orthogonality residuals for a smooth function
        auto f = [](const Point& x) { return std::sin(2.0 * x[0]) * std::cos(x[1]); };
        auto gf = [](const Point& x) {
            return Point{2.0 * std::cos(2.0 * x[0]) * std::cos(x[1]), -std::sin(2.0 * x[0]) * std::sin(x[1])};
        };
        auto [uf, vf] = project_initial(s, f, gf, f);
        // residuals in the quadrature that defines the projection
        const QuadratureRule r = gauss_rule(s.integration_points(), dim);
        const BasisTable tu = s.basis_u().tabulate(r.nodes);
        const BasisTable tv = s.basis_v().tabulate(r.nodes);
        for (int e = 0; e < s.mesh().num_elements(); ++e) {
            Eigen::VectorXd res_grad = Eigen::VectorXd::Zero(s.local_size(FieldRole::U));
            Eigen::VectorXd res_v = Eigen::VectorXd::Zero(s.local_size(FieldRole::V));
            double res_mean = 0.0;
            for (std::size_t q = 0; q < r.size(); ++q) {
                const Point x = s.mesh().to_physical(e, r.nodes[q]);
                const double w = r.weights[q] * s.jacobian();
                const Point gh = s.evaluate_gradient(uf, e, r.nodes[q]);
                const Point ge = gf(x);
                for (int i = 0; i < s.local_size(FieldRole::U); ++i) {
                    res_grad(i) += w * (tu.grad_x(q, i) * s.inverse_scale(0) * (gh[0] - ge[0]) +
                                        (dim == 2 ? tu.grad_y(q, i) * s.inverse_scale(1) * (gh[1] - ge[1]) : 0.0));
                }
                res_mean += w * (s.evaluate(uf, e, r.nodes[q]) - f(x));
                for (int i = 0; i < s.local_size(FieldRole::V); ++i) {
                    res_v(i) += w * tv.values(q, i) * (s.evaluate(vf, e, r.nodes[q]) - f(x));
                }
            }
            CHECK(res_grad.lpNorm<Eigen::Infinity>() < 1e-12);
            CHECK(std::abs(res_mean) < 1e-12);
            CHECK(res_v.lpNorm<Eigen::Infinity>() < 1e-12);
        }
    }
}

TEST_CASE("project_initial: H1 seminorm error of sin x decays at second order for q_u = 2") {
    std::vector<double> errs;
    for (int n : {20, 40, 80}) {
        const DgSpace s = space_1d(n, 2, 1);
        auto [u, v] = project_initial(
            s, [](const Point& x) { return std::sin(x[0]); },
            [](const Point& x) { return Point{std::cos(x[0]), 0.0}; }, [](const Point& x) { return std::sin(x[0]); });
        (void)v;
        errs.push_back(error_norm(s, u, VectorField([](const Point& x) { return Point{std::cos(x[0]), 0.0}; })));
    }
    for (std::size_t k = 1; k < errs.size(); ++k) {
        CHECK(std::log2(errs[k - 1] / errs[k]) == doctest::Approx(2.0).epsilon(0.1));
    }
}

TEST_CASE("projection accuracy follows min(q_u - 1, q_v) + 1") {
    for (auto [qu, qv] : {std::pair{2, 1}, std::pair{3, 2}, std::pair{3, 1}}) {
        std::vector<double> errs;
        for (int n : {8, 16, 32}) {
            const DgSpace s = space_1d(n, qu, qv);
            auto f = [](const Point& x) { return std::exp(std::sin(x[0])); };
            auto gf = [](const Point& x) { return Point{std::cos(x[0]) * std::exp(std::sin(x[0])), 0.0}; };
            auto [u, v] = project_initial(s, f, gf, f);
            errs.push_back(error_norm(s, v, ScalarField(f)) + error_norm(s, u, VectorField(gf)));
        }
        const double expected = std::min(qu - 1, qv) + 1.0;
        CHECK(std::log2(errs[1] / errs[2]) >= expected - 0.2);
    }
}

TEST_CASE("error_norm: trivial cases") {
    const DgSpace s = DgSpace(build_mesh(1, {0.0, 0.0}, {1.0, 0.0}, 7), 2, 1, {});
    CHECK(error_norm(s, s.zero(FieldRole::U), [](const Point&) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-14));
    std::mt19937_64 rng(2);
    const FieldVector u = random_field(s, FieldRole::U, rng);
    auto own = [&](const Point& x) {
        const int e = std::min(6, static_cast<int>(x[0] * 7));
        const double ref = 2.0 * (x[0] * 7 - e) - 1.0;
        return s.evaluate(u, e, {ref, 0.0});
    };
    CHECK(error_norm(s, u, own) < 1e-14);
    CHECK(l2_norm_squared(s, u) == doctest::Approx(u.coeffs.squaredNorm() * s.jacobian()));
}

TEST_CASE("load_vector: integrates basis times data") {
    const DgSpace s = space_2d(2, 2, 2);
    const Eigen::VectorXd b = s.load_vector([](const Point&) { return 3.0; });
    // only constant modes see a constant; int_K psi_0 * 3 = 3 * |K| / 2 per the orthonormal scaling
    const double expected = 3.0 * s.jacobian() * 2.0;
    for (int e = 0; e < 4; ++e) {
        CHECK(b(e * 9) == doctest::Approx(expected));
        for (int k = 1; k < 9; ++k) CHECK(std::abs(b(e * 9 + k)) < 1e-13);
    }
}
