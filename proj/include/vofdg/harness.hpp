#pragma once

#include "vofdg/stepper.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vofdg {

/// One experiment. Domain bounds default to the solution preset's domain.
struct RunConfig {
    int dim = 1;
    std::optional<Point> lower;
    std::optional<Point> upper;
    int N = 10;
    int M = 100;
    double T = 1.0;
    int q_u = 1;
    int q_v = 0;
    FluxParams flux;
    std::string order = "exp_decay";
    double alpha0 = 0.5;
    std::string solution = "smooth_1d";
    std::string variant = "auto";
    SolverSettings solver;
    bool record_levels = true;
    bool timing = true;
    std::string output;

    /// Throws ConfigError naming the violated constraint.
    void validate() const;
    double tau() const { return T / M; }
    VariableOrder variable_order() const;
    SolutionBundle bundle() const;
    std::optional<CdefVariant> fixed_variant() const;
};

struct ErrorReport {
    RunConfig config;
    double e_u = 0.0;
    double e_v = 0.0;
    double e_u_max = 0.0;
    double e_v_max = 0.0;
    /// Empty when the run was not timed.
    std::optional<double> wall_seconds;
    std::optional<double> order_h;
    std::optional<double> order_tau;
    SolveStats solver;
    RunDiagnostics diagnostics;
    std::vector<LevelRecord> levels;
};

ErrorReport run_single(const RunConfig& config);

/// log(e_coarse / e_fine) / log(ratio). Empty if either error is not positive.
std::optional<double> observed_order(double e_coarse, double e_fine, double ratio);
/// Orders between consecutive entries; sizes are mesh or step sizes (coarse first).
/// The first entry is always empty.
std::vector<std::optional<double>> observed_orders(const std::vector<double>& errors,
                                                   const std::vector<double>& sizes);

enum class SweepKind { Spatial, Temporal, Simultaneous };
std::string to_string(SweepKind kind);
SweepKind sweep_kind_from_name(const std::string& name);

/// Spatial sweeps vary N (orders from E_u), temporal sweeps vary M (orders
/// from E_u), simultaneous sweeps set N = M (orders from E_v).
std::vector<ErrorReport> run_sweep(SweepKind kind, const RunConfig& base, const std::vector<int>& refinements);

/// Temporal-error budget for desk-scale spatial sweeps: tau^2 < 0.1 * spatial error.
bool temporal_budget_ok(double tau, double spatial_error);

struct SingularityReport {
    std::vector<ErrorReport> rows;
    std::vector<std::optional<double>> order_u; // from E_u^max
    std::vector<std::optional<double>> order_v; // from E_v^max
    /// Per row: index of the level where ||(v^m - v^{m-1})/tau|| peaks, as a fraction of M.
    std::vector<double> bdiff_peak_fraction;
    std::vector<double> error_v_peak_fraction;
};

SingularityReport run_weak_singularity(const RunConfig& base, const std::vector<int>& steps);

struct WeightDiagnosticRow {
    std::string order;
    int M = 0;
    WeightVariationReport report;
    std::string variant;
};

std::vector<WeightDiagnosticRow> run_weight_diagnostics(const VariableOrder& order, const std::vector<int>& steps,
                                                        double T, CdefVariant variant);

void write_summary_csv(std::ostream& out, const std::vector<ErrorReport>& rows);
void write_level_csv(std::ostream& out, const std::vector<LevelRecord>& levels);
void write_time_history_csv(std::ostream& out, const std::vector<LevelRecord>& levels);
void write_weight_csv(std::ostream& out, const std::vector<WeightDiagnosticRow>& rows);

/// Fixed-format number used by every CSV writer; "NA" for empty or non-finite values.
std::string format_number(std::optional<double> value);

} // namespace vofdg
