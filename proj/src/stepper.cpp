#include "vofdg/stepper.hpp"

#include "vofdg/errors.hpp"

#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <algorithm>
#include <cmath>
#include <limits>

namespace vofdg {

std::string to_string(SolverMethod method) {
    switch (method) {
    case SolverMethod::Auto: return "auto";
    case SolverMethod::Direct: return "direct";
    case SolverMethod::Gmres: return "gmres";
    }
    return "auto";
}

SolverMethod solver_method_from_name(const std::string& name) {
    if (name == "auto") return SolverMethod::Auto;
    if (name == "direct") return SolverMethod::Direct;
    if (name == "gmres") return SolverMethod::Gmres;
    throw ConfigError("unknown solver '" + name + "' (expected auto, direct or gmres)");
}

double energy_functional(double sigma_prev, double norm_sq, double prev_norm_sq, double diff_norm_sq) {
    const double s = sigma_prev;
    return (2.0 * s + 1.0) * norm_sq - (2.0 * s - 1.0) * prev_norm_sq + (2.0 * s * s + s - 1.0) * diff_norm_sq;
}

namespace {

/// Dense LU of the element-diagonal blocks of the coupled matrix. Each block
/// gathers the u and v coefficients of one element.
class ElementBlockJacobi {
public:
    using StorageIndex = int;

    void set_layout(int elements, int local_u, int local_v, Eigen::Index dofs_u) {
        elements_ = elements;
        local_u_ = local_u;
        local_v_ = local_v;
        dofs_u_ = dofs_u;
    }

    template <typename MatrixType>
    ElementBlockJacobi& analyzePattern(const MatrixType&) {
        return *this;
    }
    template <typename MatrixType>
    ElementBlockJacobi& factorize(const MatrixType& m) {
        return compute(m);
    }
    template <typename MatrixType>
    ElementBlockJacobi& compute(const MatrixType& m) {
        const int n = local_u_ + local_v_;
        std::vector<Eigen::MatrixXd> blocks(static_cast<std::size_t>(elements_), Eigen::MatrixXd::Zero(n, n));
        for (int k = 0; k < m.outerSize(); ++k) {
            for (typename MatrixType::InnerIterator it(m, k); it; ++it) {
                const auto [ei, li] = locate(it.row());
                const auto [ej, lj] = locate(it.col());
                if (ei == ej) {
                    blocks[static_cast<std::size_t>(ei)](li, lj) = it.value();
                }
            }
        }
        lu_.clear();
        lu_.reserve(blocks.size());
        for (const Eigen::MatrixXd& b : blocks) {
            lu_.emplace_back(b);
        }
        return *this;
    }

    template <typename Rhs>
    Eigen::VectorXd solve(const Eigen::MatrixBase<Rhs>& b) const {
        Eigen::VectorXd out(b.rows());
        Eigen::VectorXd local(local_u_ + local_v_);
        for (int e = 0; e < elements_; ++e) {
            const Eigen::Index ou = static_cast<Eigen::Index>(e) * local_u_;
            const Eigen::Index ov = dofs_u_ + static_cast<Eigen::Index>(e) * local_v_;
            local.head(local_u_) = b.segment(ou, local_u_);
            local.tail(local_v_) = b.segment(ov, local_v_);
            local = lu_[static_cast<std::size_t>(e)].solve(local);
            out.segment(ou, local_u_) = local.head(local_u_);
            out.segment(ov, local_v_) = local.tail(local_v_);
        }
        return out;
    }

    Eigen::ComputationInfo info() const { return Eigen::Success; }

private:
    std::pair<int, int> locate(Eigen::Index i) const {
        if (i < dofs_u_) {
            return {static_cast<int>(i / local_u_), static_cast<int>(i % local_u_)};
        }
        const Eigen::Index j = i - dofs_u_;
        return {static_cast<int>(j / local_v_), local_u_ + static_cast<int>(j % local_v_)};
    }

    int elements_ = 0;
    int local_u_ = 1;
    int local_v_ = 1;
    Eigen::Index dofs_u_ = 0;
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
};

Eigen::VectorXd stack(const FieldVector& u, const FieldVector& v) {
    Eigen::VectorXd x(u.coeffs.size() + v.coeffs.size());
    x << u.coeffs, v.coeffs;
    return x;
}

} // namespace

struct Stepper::Factorization {
    double time_scale = std::numeric_limits<double>::quiet_NaN();
    double coupling_scale = std::numeric_limits<double>::quiet_NaN();
    double memory_scale = std::numeric_limits<double>::quiet_NaN();
    bool direct = true;
    SparseMatrix matrix;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    Eigen::GMRES<SparseMatrix, ElementBlockJacobi> gmres;
    bool lu_ready = false;

    bool matches(const StepSystem& s) const {
        return s.time_scale == time_scale && s.coupling_scale == coupling_scale && s.memory_scale == memory_scale;
    }
};

Stepper::Stepper(const DgSpace& space, VariableOrder order, double tau, LoadFunction load, SolverSettings solver)
    : space_(&space), order_(order), tau_(tau), load_(std::move(load)), solver_(solver) {
    if (!(tau > 0.0)) {
        throw InvalidArgument("time step must be positive");
    }
    if (order_.lipschitz() * tau > 1.0) {
        throw InvalidArgument("time step too large: L_alpha * tau = " + std::to_string(order_.lipschitz() * tau) +
                              " exceeds 1, so the intermediate point is not guaranteed unique");
    }
    if (!(solver_.tolerance > 0.0) || solver_.max_iterations < 1 || solver_.restart < 1) {
        throw InvalidArgument("solver settings: tolerance, max_iterations and restart must be positive");
    }
}

Stepper::~Stepper() = default;

State Stepper::initial_state(FieldVector u0, FieldVector v0, int reserve_levels) const {
    if (u0.role != FieldRole::U || v0.role != FieldRole::V || u0.coeffs.size() != space_->dofs_u() ||
        v0.coeffs.size() != space_->dofs_v()) {
        throw InvalidArgument("initial_state: fields do not match the space");
    }
    State s;
    s.u = std::move(u0);
    s.v = std::move(v0);
    s.u_prev = s.u;
    s.v_prev = s.v;
    s.history = VelocityHistory(space_->dofs_v());
    if (reserve_levels > 0) {
        s.history.reserve(reserve_levels);
    }
    s.v_norms_sq.push_back(l2_norm_squared(*space_, s.v));
    return s;
}

StepSystem Stepper::startup_system(const State& state) const {
    if (state.level != 0) {
        throw InvalidArgument("startup_step expects a level-0 state");
    }
    const double s0 = compute_s(order_, 0, tau_, 0.0);
    const SparseMatrix& T = space_->time_operator();
    const SparseMatrix& A = space_->coupling_operator();
    const SparseMatrix& E = space_->memory_operator();
    const Eigen::VectorXd x0 = stack(state.u, state.v);

    StepSystem sys;
    sys.time_scale = 1.0 / tau_;
    sys.coupling_scale = 0.5;
    sys.memory_scale = 1.0 / s0;
    sys.rhs = T * x0 / tau_ - 0.5 * (A * x0) + (E * x0) / s0;
    if (load_) {
        sys.rhs.tail(space_->dofs_v()) += load_(0.5 * tau_);
    }
    return sys;
}

StepSystem Stepper::general_system(const State& state, const FractionalStep& step) const {
    const int m = state.level;
    if (m < 1) {
        throw InvalidArgument("general_step expects a state at level m >= 1");
    }
    if (step.level != m || static_cast<int>(step.a.size()) != m + 1) {
        throw InvalidArgument("general_step: weights are missing or belong to another level");
    }
    const double sigma = step.sigma;
    const double a0 = step.a[0];
    const SparseMatrix& T = space_->time_operator();
    const SparseMatrix& A = space_->coupling_operator();
    const SparseMatrix& E = space_->memory_operator();
    const Eigen::VectorXd xm = stack(state.u, state.v);
    const Eigen::VectorXd xp = stack(state.u_prev, state.v_prev);

    StepSystem sys;
    sys.time_scale = (2.0 * sigma + 1.0) / (2.0 * tau_);
    sys.coupling_scale = sigma;
    sys.memory_scale = a0;
    sys.rhs = T * (4.0 * sigma * xm - (2.0 * sigma - 1.0) * xp) / (2.0 * tau_) - (1.0 - sigma) * (A * xm) +
              a0 * (E * xm);
    auto tail = sys.rhs.tail(space_->dofs_v());
    tail -= space_->block(Block::MassV) * state.history.accumulate(step);
    if (load_) {
        tail += load_(step.t_star);
    }
    return sys;
}

Eigen::VectorXd Stepper::solve(const StepSystem& system) {
    if (!cache_) {
        cache_ = std::make_unique<Factorization>();
    }
    Factorization& f = *cache_;
    const bool direct = solver_.method == SolverMethod::Direct ||
                        (solver_.method == SolverMethod::Auto && space_->dimension() == 1);
    const bool rebuild = !f.matches(system) || f.direct != direct || f.matrix.rows() == 0;
    if (rebuild) {
        f.time_scale = system.time_scale;
        f.coupling_scale = system.coupling_scale;
        f.memory_scale = system.memory_scale;
        f.direct = direct;
        f.lu_ready = false;
        f.matrix = system.time_scale * space_->time_operator() + system.coupling_scale * space_->coupling_operator() +
                   system.memory_scale * space_->memory_operator();
        f.matrix.makeCompressed();
        if (!direct) {
            f.gmres.preconditioner().set_layout(space_->mesh().num_elements(), space_->local_size(FieldRole::U),
                                                space_->local_size(FieldRole::V), space_->dofs_u());
            f.gmres.set_restart(solver_.restart);
            f.gmres.setTolerance(solver_.tolerance);
            f.gmres.setMaxIterations(solver_.max_iterations);
            f.gmres.compute(f.matrix);
        }
        ++stats_.factorizations;
    }

    auto factor_direct = [&]() {
        if (!f.lu_ready) {
            f.lu.compute(f.matrix);
            if (f.lu.info() != Eigen::Success) {
                throw NumericalFailure("sparse LU factorization failed: " + f.lu.lastErrorMessage());
            }
            f.lu_ready = true;
        }
    };

    Eigen::VectorXd x;
    ++stats_.solves;
    if (direct) {
        factor_direct();
        x = f.lu.solve(system.rhs);
    } else {
        x = f.gmres.solve(system.rhs);
        const int iters = static_cast<int>(f.gmres.iterations());
        stats_.total_iterations += iters;
        stats_.max_iterations = std::max(stats_.max_iterations, iters);
        if (f.gmres.info() != Eigen::Success) {
            ++stats_.direct_fallbacks;
            factor_direct();
            x = f.lu.solve(system.rhs);
        }
    }
    const double bnorm = system.rhs.norm();
    const double res = (f.matrix * x - system.rhs).norm() / (bnorm > 0.0 ? bnorm : 1.0);
    stats_.max_relative_residual = std::max(stats_.max_relative_residual, res);
    if (!std::isfinite(res) || res > std::max(1e-8, 1e4 * solver_.tolerance)) {
        throw NumericalFailure("linear solve did not converge: relative residual " + std::to_string(res));
    }
    return x;
}

void Stepper::startup_step(State& state) {
    const StepSystem sys = startup_system(state);
    const Eigen::VectorXd x = solve(sys);
    const Eigen::Index nu = space_->dofs_u();
    const Eigen::Index nv = space_->dofs_v();

    state.u_prev = state.u;
    state.v_prev = state.v;
    state.u.coeffs = x.head(nu);
    state.v.coeffs = x.tail(nv);
    state.history.push(state.v.coeffs - state.v_prev.coeffs);
    state.sigma_prev = solve_sigma(order_, 0, tau_);
    state.last_weights.clear();
    state.level = 1;
    state.time = tau_;
    state.v_norms_sq.push_back(l2_norm_squared(*space_, state.v));
}

void Stepper::general_step(State& state, const FractionalStep& step) {
    const StepSystem sys = general_system(state, step);
    const Eigen::VectorXd x = solve(sys);
    const Eigen::Index nu = space_->dofs_u();
    const Eigen::Index nv = space_->dofs_v();

    state.u_prev.coeffs.swap(state.u.coeffs);
    state.v_prev.coeffs.swap(state.v.coeffs);
    state.u.coeffs = x.head(nu);
    state.v.coeffs = x.tail(nv);
    state.history.push(state.v.coeffs - state.v_prev.coeffs);
    state.sigma_prev = step.sigma;
    state.last_weights = step.a;
    ++state.level;
    state.time = state.level * tau_;
    state.v_norms_sq.push_back(l2_norm_squared(*space_, state.v));
}

EnergyDiagnostics Stepper::energy_diagnostics(const State& state) const {
    if (state.level < 1) {
        throw InvalidArgument("energy_diagnostics needs a state at level >= 1");
    }
    const double s = state.sigma_prev;
    const double v_sq = l2_norm_squared(*space_, state.v);
    const double v_prev_sq = l2_norm_squared(*space_, state.v_prev);
    FieldVector dv{FieldRole::V, state.v.coeffs - state.v_prev.coeffs};
    const double dv_sq = l2_norm_squared(*space_, dv);
    const double g_sq = broken_gradient_norm_squared(*space_, state.u);
    const double g_prev_sq = broken_gradient_norm_squared(*space_, state.u_prev);
    FieldVector du{FieldRole::U, state.u.coeffs - state.u_prev.coeffs};
    const double dg_sq = broken_gradient_norm_squared(*space_, du);

    EnergyDiagnostics d;
    d.a_v = energy_functional(s, v_sq, v_prev_sq, dv_sq);
    d.a_grad_u = energy_functional(s, g_sq, g_prev_sq, dg_sq);
    d.coercivity_v = v_sq / s;
    d.coercivity_grad_u = g_sq / s;
    // Tail 2 tau sum_{i=2}^{m} a_{m-i}^{(m-1)} ||v^i||^2 for the state at level m.
    double tail = 0.0;
    const int m = state.level;
    if (!state.last_weights.empty()) {
        for (int i = 2; i <= m; ++i) {
            tail += state.last_weights[static_cast<std::size_t>(m - i)] *
                    state.v_norms_sq[static_cast<std::size_t>(i)];
        }
    }
    d.q = d.a_v + d.a_grad_u + 2.0 * tau_ * tail;
    return d;
}

namespace {

/// L2 errors against G(t) Phi(x) with Phi and the basis pretabulated at the
/// error quadrature nodes of every element.
class SeparableErrors {
public:
    SeparableErrors(const DgSpace& space, const SolutionBundle& bundle) : space_(space), bundle_(bundle) {
        const QuadratureRule rule = gauss_rule(space.error_points(), space.dimension());
        const int ne = space.mesh().num_elements();
        const auto np = static_cast<Eigen::Index>(rule.size());
        weights_ = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), np) * space.jacobian();
        table_u_ = space.basis_u().tabulate(rule.nodes).values;
        table_v_ = space.basis_v().tabulate(rule.nodes).values;
        phi_.resize(np, ne);
        for (int e = 0; e < ne; ++e) {
            for (Eigen::Index p = 0; p < np; ++p) {
                phi_(p, e) = bundle.spatial.value(space.mesh().to_physical(e, rule.nodes[static_cast<std::size_t>(p)]));
            }
        }
    }

    double u_error(const FieldVector& u, double t) const {
        return error(table_u_, u, bundle_.temporal.value(t));
    }
    double v_error(const FieldVector& v, double t) const {
        return error(table_v_, v, bundle_.temporal.first(t));
    }

private:
    double error(const Eigen::MatrixXd& table, const FieldVector& f, double g) const {
        const Eigen::Index nl = table.cols();
        const Eigen::Index ne = phi_.cols();
        const Eigen::Map<const Eigen::MatrixXd> coeffs(f.coeffs.data(), nl, ne);
        const Eigen::MatrixXd diff = g * phi_ - table * coeffs;
        return std::sqrt((weights_.asDiagonal() * diff.cwiseAbs2()).sum());
    }

    const DgSpace& space_;
    const SolutionBundle& bundle_;
    Eigen::VectorXd weights_;
    Eigen::MatrixXd table_u_;
    Eigen::MatrixXd table_v_;
    Eigen::MatrixXd phi_;
};

RunResult run_impl(const DgSpace& space, const RunSettings& settings, const VariableOrder& order, FieldVector u0,
                   FieldVector v0, LoadFunction load, const SolutionBundle* exact) {
    if (settings.steps < 2) {
        throw InvalidArgument("run: at least two time steps are required");
    }
    if (!(settings.final_time > 0.0)) {
        throw InvalidArgument("run: final time must be positive");
    }
    const int M = settings.steps;
    const double tau = settings.final_time / M;
    Stepper stepper(space, order, tau, settings.zero_source ? LoadFunction{} : std::move(load), settings.solver);

    RunResult result;
    RunDiagnostics& diag = result.diagnostics;
    if (settings.variant) {
        diag.variant = *settings.variant;
        diag.variant_summary = "fixed:" + to_string(*settings.variant);
    } else {
        const VariantSelection sel = select_cdef_variant(order, tau, std::min(M - 1, 200));
        diag.variant = sel.chosen;
        diag.variant_summary = sel.summary();
    }

    std::optional<SeparableErrors> errors;
    if (exact != nullptr) {
        errors.emplace(space, *exact);
    }
    auto measure = [&](const State& s, double& eu, double& ev) {
        if (errors) {
            eu = errors->u_error(s.u, s.time);
            ev = errors->v_error(s.v, s.time);
        } else {
            eu = std::sqrt(l2_norm_squared(space, s.u));
            ev = std::sqrt(l2_norm_squared(space, s.v));
        }
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();

    State state = stepper.initial_state(std::move(u0), std::move(v0), M);
    double grad0 = broken_gradient_norm_squared(space, state.u);
    double v0sq = state.v_norms_sq.front();
    diag.initial_energy = grad0 + v0sq;
    diag.max_energy = diag.initial_energy;
    diag.min_coercivity_margin = std::numeric_limits<double>::infinity();

    auto record = [&](const State& s, std::optional<EnergyDiagnostics> energy) {
        double eu = 0.0, ev = 0.0;
        measure(s, eu, ev);
        result.e_u_max = std::max(result.e_u_max, eu);
        result.e_v_max = std::max(result.e_v_max, ev);
        result.e_u = eu;
        result.e_v = ev;
        const double g = broken_gradient_norm_squared(space, s.u);
        const double vv = s.v_norms_sq.back();
        diag.max_energy = std::max(diag.max_energy, g + vv);
        if (settings.record_levels) {
            LevelRecord r;
            r.m = s.level;
            r.t = s.time;
            r.sigma = s.level == 0 ? nan : s.sigma_prev;
            r.e_u = eu;
            r.e_v = ev;
            r.grad_u_norm = std::sqrt(g);
            r.v_norm = std::sqrt(vv);
            r.q = energy ? energy->q : nan;
            if (s.level == 0) {
                r.backward_diff_norm = nan;
            } else {
                FieldVector dv{FieldRole::V, (s.v.coeffs - s.v_prev.coeffs) / tau};
                r.backward_diff_norm = std::sqrt(l2_norm_squared(space, dv));
            }
            result.levels.push_back(r);
        }
    };
    auto check_energy = [&](const EnergyDiagnostics& e) {
        for (auto [a, bound] : {std::pair{e.a_v, e.coercivity_v}, std::pair{e.a_grad_u, e.coercivity_grad_u}}) {
            const double scale = std::max(bound, std::numeric_limits<double>::min());
            const double margin = (a - bound) / scale;
            if (bound > 0.0) {
                diag.min_coercivity_margin = std::min(diag.min_coercivity_margin, margin);
            }
            if (a < bound - 1e-12 * std::max(1.0, bound)) {
                ++diag.coercivity_violations;
            }
        }
    };
    auto track_sigma = [&](int m, double sigma) {
        diag.sigma_min = std::min(diag.sigma_min, sigma);
        diag.sigma_max = std::max(diag.sigma_max, sigma);
        diag.max_sigma_residual = std::max(diag.max_sigma_residual, std::abs(sigma_residual(order, m, tau, sigma)));
    };

    if (settings.record_levels) {
        result.levels.reserve(static_cast<std::size_t>(M) + 1);
    }
    record(state, std::nullopt);

    stepper.startup_step(state);
    track_sigma(0, state.sigma_prev);
    if (!stepper.has_source()) {
        const double s0 = compute_s(order, 0, tau, 0.0);
        const double lhs = broken_gradient_norm_squared(space, state.u) + state.v_norms_sq.back();
        const double rhs = grad0 + (1.0 + 2.0 * tau / s0) * v0sq;
        diag.startup_margin = rhs - lhs;
    }
    {
        const EnergyDiagnostics e = stepper.energy_diagnostics(state);
        check_energy(e);
        record(state, e);
    }

    for (int m = 1; m < M; ++m) {
        const FractionalStep step = compute_weights(order, m, tau, diag.variant, true);
        track_sigma(m, step.sigma);
        stepper.general_step(state, step);
        const EnergyDiagnostics e = stepper.energy_diagnostics(state);
        check_energy(e);
        record(state, e);
    }
    if (!std::isfinite(diag.min_coercivity_margin)) {
        diag.min_coercivity_margin = 0.0;
    }
    result.solver = stepper.stats();
    result.u = std::move(state.u);
    result.v = std::move(state.v);
    return result;
}

} // namespace

LoadFunction manufactured_load(const DgSpace& space, const SolutionBundle& bundle, const VariableOrder& order) {
    if (bundle.is_zero()) {
        return {};
    }
    const SpatialProfile spatial = bundle.spatial;
    Eigen::VectorXd phi = space.load_vector([spatial](const Point& x) { return spatial.value(x); });
    Eigen::VectorXd lap = space.load_vector([spatial](const Point& x) { return spatial.laplacian(x); });
    return [phi = std::move(phi), lap = std::move(lap), bundle, order](double t) -> Eigen::VectorXd {
        const SourceSlice s = source_slice(bundle, order, t);
        return s.phi_coeff * phi + s.laplacian_coeff * lap;
    };
}

RunResult run(const DgSpace& space, const RunSettings& settings, const VariableOrder& order,
              const SolutionBundle& bundle) {
    if (bundle.dimension != space.dimension()) {
        throw InvalidArgument("run: solution preset dimension does not match the mesh");
    }
    auto [u0, v0] = project_initial(
        space, [&](const Point& x) { return bundle.u(x, 0.0); }, [&](const Point& x) { return bundle.grad_u(x, 0.0); },
        [&](const Point& x) { return bundle.v(x, 0.0); });
    return run_impl(space, settings, order, std::move(u0), std::move(v0), manufactured_load(space, bundle, order),
                    &bundle);
}

RunResult run_from(const DgSpace& space, const RunSettings& settings, const VariableOrder& order, FieldVector u0,
                   FieldVector v0, LoadFunction load) {
    return run_impl(space, settings, order, std::move(u0), std::move(v0), std::move(load), nullptr);
}

} // namespace vofdg
