#include "vofdg/harness.hpp"

#include "vofdg/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <ostream>

namespace vofdg {

namespace {

std::string num(double v) {
    return format_number(v);
}

} // namespace

std::string format_number(std::optional<double> value) {
    if (!value || !std::isfinite(*value)) {
        return "NA";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9e", *value);
    return buf;
}

void RunConfig::validate() const {
    if (dim != 1 && dim != 2) {
        throw ConfigError("dim must be 1 or 2");
    }
    if (N < 1) {
        throw ConfigError("N (cells per axis) must be >= 1");
    }
    if (M < 2) {
        throw ConfigError("M (time steps) must be >= 2");
    }
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw ConfigError("T (final time) must be positive");
    }
    try {
        check_admissible_degrees(q_u, q_v);
        flux.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    const SolutionBundle b = bundle();
    if (b.dimension != dim) {
        throw ConfigError("solution preset '" + solution + "' is " + std::to_string(b.dimension) +
                          "-dimensional but dim = " + std::to_string(dim));
    }
    if (lower && upper) {
        for (int a = 0; a < dim; ++a) {
            if (!((*lower)[a] < (*upper)[a])) {
                throw ConfigError("domain bounds: lower must be below upper on every axis");
            }
        }
    }
    const VariableOrder o = variable_order();
    try {
        o.validate(2000);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (o.lipschitz() * tau() > 1.0) {
        throw ConfigError("time step constraint L_alpha * tau <= 1 violated (L_alpha * tau = " +
                          std::to_string(o.lipschitz() * tau()) + ")");
    }
    (void)fixed_variant();
    if (!(solver.tolerance > 0.0) || solver.max_iterations < 1 || solver.restart < 1) {
        throw ConfigError("solver tolerance, max_iterations and restart must be positive");
    }
}

VariableOrder RunConfig::variable_order() const {
    try {
        return VariableOrder::from_name(order, T, alpha0);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

SolutionBundle RunConfig::bundle() const {
    SolutionBundle b = preset_solution(solution);
    if (lower) b.lower = *lower;
    if (upper) b.upper = *upper;
    return b;
}

std::optional<CdefVariant> RunConfig::fixed_variant() const {
    if (variant == "auto") return std::nullopt;
    if (variant == "as_printed") return CdefVariant::AsPrinted;
    if (variant == "corrected") return CdefVariant::Corrected;
    throw ConfigError("variant must be auto, as_printed or corrected, got '" + variant + "'");
}

ErrorReport run_single(const RunConfig& config) {
    config.validate();
    const SolutionBundle bundle = config.bundle();
    const VariableOrder order = config.variable_order();

    const auto start = std::chrono::steady_clock::now();
    const PeriodicMesh mesh(config.dim, bundle.lower, bundle.upper, config.N);
    const DgSpace space(mesh, config.q_u, config.q_v, config.flux);
    RunSettings settings;
    settings.steps = config.M;
    settings.final_time = config.T;
    settings.variant = config.fixed_variant();
    settings.solver = config.solver;
    settings.record_levels = config.record_levels;
    RunResult r = run(space, settings, order, bundle);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    ErrorReport rep;
    rep.config = config;
    rep.e_u = r.e_u;
    rep.e_v = r.e_v;
    rep.e_u_max = r.e_u_max;
    rep.e_v_max = r.e_v_max;
    if (config.timing) rep.wall_seconds = seconds;
    rep.solver = r.solver;
    rep.diagnostics = std::move(r.diagnostics);
    rep.levels = std::move(r.levels);
    return rep;
}

std::optional<double> observed_order(double e_coarse, double e_fine, double ratio) {
    if (!(e_coarse > 0.0) || !(e_fine > 0.0) || !(ratio > 0.0) || ratio == 1.0) {
        return std::nullopt;
    }
    return std::log(e_coarse / e_fine) / std::log(ratio);
}

std::vector<std::optional<double>> observed_orders(const std::vector<double>& errors,
                                                   const std::vector<double>& sizes) {
    if (errors.size() != sizes.size()) {
        throw InvalidArgument("observed_orders: errors and sizes differ in length");
    }
    std::vector<std::optional<double>> out(errors.size());
    for (std::size_t i = 1; i < errors.size(); ++i) {
        out[i] = observed_order(errors[i - 1], errors[i], sizes[i - 1] / sizes[i]);
    }
    return out;
}

std::string to_string(SweepKind kind) {
    switch (kind) {
    case SweepKind::Spatial: return "spatial";
    case SweepKind::Temporal: return "temporal";
    case SweepKind::Simultaneous: return "both";
    }
    return "spatial";
}

SweepKind sweep_kind_from_name(const std::string& name) {
    if (name == "spatial") return SweepKind::Spatial;
    if (name == "temporal") return SweepKind::Temporal;
    if (name == "both" || name == "simultaneous") return SweepKind::Simultaneous;
    throw ConfigError("sweep kind must be spatial, temporal or both, got '" + name + "'");
}

bool temporal_budget_ok(double tau, double spatial_error) {
    return tau * tau < 0.1 * spatial_error;
}

std::vector<ErrorReport> run_sweep(SweepKind kind, const RunConfig& base, const std::vector<int>& refinements) {
    if (refinements.size() < 2) {
        throw ConfigError("a sweep needs at least two refinement levels");
    }
    std::vector<ErrorReport> rows;
    std::vector<double> errors, sizes;
    for (int r : refinements) {
        RunConfig c = base;
        switch (kind) {
        case SweepKind::Spatial: c.N = r; break;
        case SweepKind::Temporal: c.M = r; break;
        case SweepKind::Simultaneous: c.N = r; c.M = r; break;
        }
        rows.push_back(run_single(c));
        const ErrorReport& rep = rows.back();
        errors.push_back(kind == SweepKind::Simultaneous ? rep.e_v : rep.e_u);
        sizes.push_back(kind == SweepKind::Temporal ? c.tau() : 1.0 / c.N);
        if (kind == SweepKind::Spatial && !temporal_budget_ok(c.tau(), rep.e_u)) {
            std::cerr << "warning: temporal budget violated at N=" << c.N << ": tau^2 = " << c.tau() * c.tau()
                      << " is not below 10% of E_u = " << rep.e_u << "\n";
        }
    }
    const auto orders = observed_orders(errors, sizes);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (kind != SweepKind::Temporal) rows[i].order_h = orders[i];
        if (kind != SweepKind::Spatial) rows[i].order_tau = orders[i];
    }
    return rows;
}

SingularityReport run_weak_singularity(const RunConfig& base, const std::vector<int>& steps) {
    if (steps.size() < 2) {
        throw ConfigError("the singularity study needs at least two step counts");
    }
    SingularityReport rep;
    std::vector<double> eu, ev, sizes;
    for (int M : steps) {
        RunConfig c = base;
        c.M = M;
        c.record_levels = true;
        rep.rows.push_back(run_single(c));
        const ErrorReport& row = rep.rows.back();
        eu.push_back(row.e_u_max);
        ev.push_back(row.e_v_max);
        sizes.push_back(c.tau());

        auto peak = [&](auto field) {
            std::size_t best = 1;
            for (std::size_t i = 1; i < row.levels.size(); ++i) {
                if (field(row.levels[i]) > field(row.levels[best])) best = i;
            }
            return static_cast<double>(row.levels[best].m) / M;
        };
        rep.bdiff_peak_fraction.push_back(peak([](const LevelRecord& l) { return l.backward_diff_norm; }));
        rep.error_v_peak_fraction.push_back(peak([](const LevelRecord& l) { return l.e_v; }));
    }
    rep.order_u = observed_orders(eu, sizes);
    rep.order_v = observed_orders(ev, sizes);
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        rep.rows[i].order_tau = rep.order_u[i];
    }
    return rep;
}

std::vector<WeightDiagnosticRow> run_weight_diagnostics(const VariableOrder& order, const std::vector<int>& steps,
                                                        double T, CdefVariant variant) {
    std::vector<WeightDiagnosticRow> rows;
    for (int M : steps) {
        if (M < 3) {
            throw ConfigError("weight diagnostics need M >= 3");
        }
        rows.push_back({order.name(), M, weight_variation_report(order, T / M, M, variant), to_string(variant)});
    }
    return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<ErrorReport>& rows) {
    out << "preset,alpha,dim,q_u,q_v,N,M,theta,gamma,zeta,E_u,E_v,Eu_max,Ev_max,order_h,order_tau,wall_seconds\n";
    for (const ErrorReport& r : rows) {
        const RunConfig& c = r.config;
        out << c.solution << ',' << c.order << ',' << c.dim << ',' << c.q_u << ',' << c.q_v << ',' << c.N << ','
            << c.M << ',' << num(c.flux.theta) << ',' << num(c.flux.gamma) << ',' << num(c.flux.zeta) << ','
            << num(r.e_u) << ',' << num(r.e_v) << ',' << num(r.e_u_max) << ',' << num(r.e_v_max) << ','
            << format_number(r.order_h) << ',' << format_number(r.order_tau) << ','
            << format_number(r.wall_seconds) << '\n';
    }
}

void write_level_csv(std::ostream& out, const std::vector<LevelRecord>& levels) {
    out << "m,t_m,sigma_m,E_u,E_v,grad_u_norm,v_norm,Q,backward_diff_norm\n";
    for (const LevelRecord& l : levels) {
        out << l.m << ',' << num(l.t) << ',' << num(l.sigma) << ',' << num(l.e_u) << ',' << num(l.e_v) << ','
            << num(l.grad_u_norm) << ',' << num(l.v_norm) << ',' << num(l.q) << ',' << num(l.backward_diff_norm)
            << '\n';
    }
}

void write_time_history_csv(std::ostream& out, const std::vector<LevelRecord>& levels) {
    out << "m,t,sigma,err_v_l2,bdiff_v_l2,energy_Q\n";
    for (const LevelRecord& l : levels) {
        out << l.m << ',' << num(l.t) << ',' << num(l.sigma) << ',' << num(l.e_v) << ','
            << num(l.backward_diff_norm) << ',' << num(l.q) << '\n';
    }
}

void write_weight_csv(std::ostream& out, const std::vector<WeightDiagnosticRow>& rows) {
    out << "alpha,variant,M,tau,ratio_max,cumulative_max,cumulative_over_tau,decrement_sum,tail_sum,monotone,"
           "first_violation_m,first_violation_i,max_linear_residual,sigma_min,sigma_max,max_sigma_residual\n";
    for (const WeightDiagnosticRow& r : rows) {
        const WeightVariationReport& w = r.report;
        out << r.order << ',' << r.variant << ',' << r.M << ',' << num(w.tau) << ',' << num(w.ratio_max) << ','
            << num(w.cumulative_max) << ',' << num(w.cumulative_over_tau) << ',' << num(w.decrement_sum) << ','
            << num(w.tail_sum) << ',' << (w.monotone ? 1 : 0) << ','
            << (w.first_violation ? std::to_string(w.first_violation->first) : "NA") << ','
            << (w.first_violation ? std::to_string(w.first_violation->second) : "NA") << ','
            << num(w.max_linear_residual) << ',' << num(w.sigma_min) << ',' << num(w.sigma_max) << ','
            << num(w.max_sigma_residual) << '\n';
    }
}

} // namespace vofdg
