#include "dg_helpers.hpp"

#include "vofdg/errors.hpp"
#include "vofdg/stepper.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace vofdg;
using testing_support::random_field;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

DgSpace line(int n, int qu, int qv, FluxParams f = {}) {
    return DgSpace(build_mesh(1, {0.0, 0.0}, {kTwoPi, 0.0}, n), qu, qv, f);
}

RunSettings settings(int steps, SolverMethod method = SolverMethod::Auto) {
    RunSettings s;
    s.steps = steps;
    s.final_time = 1.0;
    s.solver.method = method;
    return s;
}

const std::vector<std::string> kOrders = {"exp_decay", "quadratic", "sine", "kink", "constant"};

} // namespace

TEST_CASE("solver method names round-trip") {
    for (SolverMethod m : {SolverMethod::Auto, SolverMethod::Direct, SolverMethod::Gmres}) {
        CHECK(solver_method_from_name(to_string(m)) == m);
    }
    CHECK_THROWS_AS(solver_method_from_name("cholesky"), InvalidArgument);
}

TEST_CASE("Stepper rejects steps that violate the Lipschitz constraint") {
    const DgSpace s = line(4, 1, 0);
    const VariableOrder o = VariableOrder::from_name("exp_decay");
    REQUIRE(o.lipschitz() > 0.0);
    CHECK_THROWS_AS(Stepper(s, o, 2.0 / o.lipschitz()), InvalidArgument);
    CHECK_NOTHROW(Stepper(s, o, 0.5 / o.lipschitz()));
}

TEST_CASE("zero data with zero forcing stays exactly zero") {
    for (int dim : {1, 2}) {
        const DgSpace s = dim == 1 ? line(5, 2, 1, {0.5, 1.0, 1.0})
                                   : DgSpace(build_mesh(2, {0.0, 0.0}, {1.0, 1.0}, 3), 2, 1, {0.5, 1.0, 1.0});
        const RunResult r =
            run_from(s, settings(12), VariableOrder::from_name("sine"), s.zero(FieldRole::U), s.zero(FieldRole::V), {});
        CHECK(r.u.coeffs.lpNorm<Eigen::Infinity>() == 0.0);
        CHECK(r.v.coeffs.lpNorm<Eigen::Infinity>() == 0.0);
    }
}

TEST_CASE("zero presets give zero errors") {
    const DgSpace s = line(4, 2, 1);
    const RunResult r = run(s, settings(10), VariableOrder::from_name("exp_decay"), preset_solution("zero_1d"));
    CHECK(r.e_u_max == 0.0);
    CHECK(r.e_v_max == 0.0);
}

TEST_CASE("superposition of data and forcing") {
    std::mt19937_64 rng(17);
    const DgSpace s = line(6, 3, 2, {0.3, 0.5, 0.2});
    const VariableOrder o = VariableOrder::from_name("kink");
    const FieldVector u1 = random_field(s, FieldRole::U, rng), v1 = random_field(s, FieldRole::V, rng);
    const FieldVector u2 = random_field(s, FieldRole::U, rng), v2 = random_field(s, FieldRole::V, rng);
    const Eigen::VectorXd b1 = random_field(s, FieldRole::V, rng).coeffs;
    const Eigen::VectorXd b2 = random_field(s, FieldRole::V, rng).coeffs;
    LoadFunction l1 = [b1](double t) -> Eigen::VectorXd { return (1.0 + t * t) * b1; };
    LoadFunction l2 = [b2](double t) -> Eigen::VectorXd { return std::sin(3.0 * t) * b2; };
    LoadFunction l12 = [l1, l2](double t) -> Eigen::VectorXd { return l1(t) + l2(t); };

    const RunResult r1 = run_from(s, settings(40), o, u1, v1, l1);
    const RunResult r2 = run_from(s, settings(40), o, u2, v2, l2);
    const RunResult r12 = run_from(s, settings(40), o, FieldVector{FieldRole::U, u1.coeffs + u2.coeffs},
                                   FieldVector{FieldRole::V, v1.coeffs + v2.coeffs}, l12);
    const double scale = std::max(1.0, r12.u.coeffs.norm() + r12.v.coeffs.norm());
    CHECK((r1.u.coeffs + r2.u.coeffs - r12.u.coeffs).norm() <= 1e-11 * scale);
    CHECK((r1.v.coeffs + r2.v.coeffs - r12.v.coeffs).norm() <= 1e-11 * scale);

    // scaling
    const RunResult r3 = run_from(s, settings(40), o, FieldVector{FieldRole::U, -2.5 * u1.coeffs},
                                  FieldVector{FieldRole::V, -2.5 * v1.coeffs},
                                  [l1](double t) -> Eigen::VectorXd { return -2.5 * l1(t); });
    CHECK((r3.v.coeffs + 2.5 * r1.v.coeffs).norm() <= 1e-11 * scale);
}

TEST_CASE("energy diagnostics on unforced runs: startup inequality, coercivity, sigma, no blow-up") {
    std::mt19937_64 rng(3);
    const std::vector<FluxParams> fluxes = {{0.0, 0.0, 0.0}, {0.5, 1.0, 1.0}, {0.2, 0.0, 0.5}};
    for (const std::string& name : kOrders) {
        for (const FluxParams& fp : fluxes) {
            const DgSpace s = line(8, 2, 1, fp);
            const FieldVector u0 = random_field(s, FieldRole::U, rng);
            const FieldVector v0 = random_field(s, FieldRole::V, rng);
            const RunResult r = run_from(s, settings(100), VariableOrder::from_name(name), u0, v0, {});
            const RunDiagnostics& d = r.diagnostics;
            REQUIRE(d.startup_margin.has_value());
            CHECK(*d.startup_margin >= -1e-12 * d.initial_energy);
            CHECK(d.coercivity_violations == 0);
            CHECK(d.sigma_min > 0.5);
            CHECK(d.sigma_max < 1.0);
            CHECK(d.max_sigma_residual <= 1e-15);
            // unforced energy never exceeds twice its initial value
            CHECK(d.max_energy <= 2.0 * d.initial_energy);
        }
    }
}

TEST_CASE("unforced energy bound on a long run") {
    std::mt19937_64 rng(8);
    const DgSpace s = line(10, 3, 2, {0.0, 0.0, 0.0});
    const RunResult r = run_from(s, settings(1000), VariableOrder::from_name("sine"), random_field(s, FieldRole::U, rng),
                                 random_field(s, FieldRole::V, rng), {});
    CHECK(std::isfinite(r.diagnostics.max_energy));
    CHECK(r.diagnostics.max_energy <= 2.0 * r.diagnostics.initial_energy);
    CHECK(r.diagnostics.coercivity_violations == 0);
}

TEST_CASE("first-step error shrinks faster than the global second order") {
    const DgSpace s = line(40, 4, 3);
    std::vector<double> eu, ev;
    for (int M : {50, 100, 200, 400}) {
        const RunResult r = run(s, settings(M), VariableOrder::from_name("exp_decay"), preset_solution("smooth_1d"));
        REQUIRE(r.levels.size() == static_cast<std::size_t>(M) + 1);
        CHECK(std::isnan(r.levels[0].sigma));
        CHECK(r.levels[1].sigma > 0.5);
        eu.push_back(r.levels[1].e_u);
        ev.push_back(r.levels[1].e_v);
    }
    for (std::size_t k = 1; k < eu.size(); ++k) {
        CHECK(std::log2(eu[k - 1] / eu[k]) >= 3.0);
        CHECK(std::log2(ev[k - 1] / ev[k]) >= 2.4);
    }
}

TEST_CASE("GMRES and direct solves agree") {
    const DgSpace s(build_mesh(2, {0.0, 0.0}, {1.0, 1.0}, 4), 3, 2, {0.5, 0.5, 0.5});
    const VariableOrder o = VariableOrder::from_name("exp_decay");
    const SolutionBundle b = preset_solution("smooth_2d");
    const RunResult direct = run(s, settings(10, SolverMethod::Direct), o, b);
    const RunResult gmres = run(s, settings(10, SolverMethod::Gmres), o, b);
    CHECK(gmres.solver.total_iterations > 0);
    CHECK(direct.solver.total_iterations == 0);
    CHECK((direct.u.coeffs - gmres.u.coeffs).norm() <= 1e-9 * direct.u.coeffs.norm());
    CHECK((direct.v.coeffs - gmres.v.coeffs).norm() <= 1e-9 * direct.v.coeffs.norm());
    CHECK(gmres.e_u == doctest::Approx(direct.e_u).epsilon(1e-8));
}

TEST_CASE("run rejects dimension mismatch and too few steps") {
    const DgSpace s = line(4, 1, 0);
    CHECK_THROWS_AS(run(s, settings(10), VariableOrder::from_name("sine"), preset_solution("smooth_2d")),
                    InvalidArgument);
    CHECK_THROWS_AS(run(s, settings(1), VariableOrder::from_name("sine"), preset_solution("smooth_1d")),
                    InvalidArgument);
}

TEST_CASE("energy_functional closed form") {
    CHECK(energy_functional(1.0, 4.0, 9.0, 1.0) == doctest::Approx(5.0));
    CHECK(energy_functional(0.5, 4.0, 9.0, 1.0) == doctest::Approx(8.0));
}
