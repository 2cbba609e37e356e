#pragma once

#include "vofdg/dg_space.hpp"
#include "vofdg/fractional_kernel.hpp"
#include "vofdg/manufactured.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vofdg {

enum class SolverMethod { Auto, Direct, Gmres };

/// Auto picks Direct in 1D and Gmres in 2D.
struct SolverSettings {
    SolverMethod method = SolverMethod::Auto;
    double tolerance = 1e-12;
    int max_iterations = 1000;
    int restart = 60;
};

std::string to_string(SolverMethod method);
SolverMethod solver_method_from_name(const std::string& name);

/// Discrete solution at level m plus everything the next step reads.
struct State {
    int level = 0;
    double time = 0.0;
    FieldVector u;
    FieldVector v;
    FieldVector u_prev; // level m-1, valid once level >= 1
    FieldVector v_prev;
    VelocityHistory history;
    /// sigma_{m-1}, the intermediate point of the step that produced this level.
    double sigma_prev = 0.0;
    /// Memory weights a^{(m-1)} of that step; empty after the startup step.
    std::vector<double> last_weights;
    /// ||v^i||^2 for i = 0 .. m.
    std::vector<double> v_norms_sq;
};

/// Scalar multipliers of (T, A, E) for one step and its right-hand side:
///   (time_scale T + coupling_scale A + memory_scale E) x = rhs.
struct StepSystem {
    double time_scale = 0.0;
    double coupling_scale = 0.0;
    double memory_scale = 0.0;
    Eigen::VectorXd rhs;
};

struct SolveStats {
    int solves = 0;
    int factorizations = 0;
    long total_iterations = 0;
    int max_iterations = 0;
    int direct_fallbacks = 0;
    double max_relative_residual = 0.0;
};

/// V-row load vector int psi f(., t) for a given time.
using LoadFunction = std::function<Eigen::VectorXd(double)>;

struct EnergyDiagnostics {
    double a_v = 0.0;
    double a_grad_u = 0.0;
    double q = 0.0;
    /// ||v^m||^2 / sigma_{m-1} and ||grad u^m||^2 / sigma_{m-1}.
    double coercivity_v = 0.0;
    double coercivity_grad_u = 0.0;
};

/// A(w^m) from ||w^m||^2, ||w^{m-1}||^2 and ||w^m - w^{m-1}||^2.
double energy_functional(double sigma_prev, double norm_sq, double prev_norm_sq, double diff_norm_sq);

/// Drives the startup and general steps for one space, order and step size.
class Stepper {
public:
    /// An empty load function means f = 0. Throws InvalidArgument when
    /// L_alpha * tau > 1.
    Stepper(const DgSpace& space, VariableOrder order, double tau, LoadFunction load = {},
            SolverSettings solver = {});
    ~Stepper();
    Stepper(const Stepper&) = delete;
    Stepper& operator=(const Stepper&) = delete;

    const DgSpace& space() const { return *space_; }
    double tau() const { return tau_; }
    const VariableOrder& order() const { return order_; }
    const SolveStats& stats() const { return stats_; }
    bool has_source() const { return static_cast<bool>(load_); }

    State initial_state(FieldVector u0, FieldVector v0, int reserve_levels = 0) const;

    StepSystem startup_system(const State& state) const;
    StepSystem general_system(const State& state, const FractionalStep& step) const;

    /// Level 0 -> 1 with the source at tau/2 and scaling s_0.
    void startup_step(State& state);
    /// Level m -> m+1 (m >= 1) with the weights of `step`.
    void general_step(State& state, const FractionalStep& step);

    EnergyDiagnostics energy_diagnostics(const State& state) const;

    Eigen::VectorXd solve(const StepSystem& system);

private:
    struct Factorization;

    const DgSpace* space_;
    VariableOrder order_;
    double tau_;
    LoadFunction load_;
    SolverSettings solver_;
    SolveStats stats_;
    std::unique_ptr<Factorization> cache_;
};

struct LevelRecord {
    int m = 0;
    double t = 0.0;
    /// sigma of the step that produced level m (sigma_0 at m = 1); NaN at m = 0.
    double sigma = 0.0;
    double e_u = 0.0;
    double e_v = 0.0;
    double grad_u_norm = 0.0;
    double v_norm = 0.0;
    /// Q^m; NaN at m = 0.
    double q = 0.0;
    /// ||(v^m - v^{m-1}) / tau||; NaN at m = 0.
    double backward_diff_norm = 0.0;
};

struct RunSettings {
    int steps = 10;
    double final_time = 1.0;
    /// Empty: choose between the two weight variants by the executable checks.
    std::optional<CdefVariant> variant;
    SolverSettings solver;
    bool record_levels = true;
    /// Use f = 0 regardless of the bundle (stability runs with nonzero data).
    bool zero_source = false;
};

struct RunDiagnostics {
    std::string variant_summary;
    CdefVariant variant = CdefVariant::Corrected;
    double sigma_min = 1.0;
    double sigma_max = 0.0;
    double max_sigma_residual = 0.0;
    /// min over levels of A(w^m) - ||w^m||^2 / sigma_{m-1}, scaled by ||w^m||^2.
    double min_coercivity_margin = 0.0;
    int coercivity_violations = 0;
    /// Startup inequality with f = 0: right side minus left side (only when f = 0).
    std::optional<double> startup_margin;
    double initial_energy = 0.0;
    double max_energy = 0.0;
};

struct RunResult {
    double e_u = 0.0;
    double e_v = 0.0;
    double e_u_max = 0.0;
    double e_v_max = 0.0;
    std::vector<LevelRecord> levels;
    RunDiagnostics diagnostics;
    SolveStats solver;
    FieldVector u;
    FieldVector v;
};

/// Project the bundle at t = 0, take one startup step and steps - 1 general
/// steps to final_time, measuring errors against the bundle at every level.
RunResult run(const DgSpace& space, const RunSettings& settings, const VariableOrder& order,
              const SolutionBundle& bundle);

/// Same as run() but from given initial fields and an arbitrary load. With no
/// exact solution the reported "errors" are the L2 norms of u_h and v_h.
RunResult run_from(const DgSpace& space, const RunSettings& settings, const VariableOrder& order,
                   FieldVector u0, FieldVector v0, LoadFunction load);

/// Load function for the bundle's manufactured source (separable in x and t).
LoadFunction manufactured_load(const DgSpace& space, const SolutionBundle& bundle, const VariableOrder& order);

} // namespace vofdg
