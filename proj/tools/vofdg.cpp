// Command-line driver: solve, converge, singular, weights.

#include "vofdg/errors.hpp"
#include "vofdg/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace vofdg;

struct Options {
    RunConfig config;
    std::vector<double> lower;
    std::vector<double> upper;
    std::string solver = "auto";
    std::string kind = "spatial";
    std::vector<int> refine;
    std::string config_file;
};

/// Splices the entries of a `--config` file into the argument list as flags,
/// skipping keys that are also given on the command line.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (path.empty()) {
        return rest;
    }
    if (rest.size() < 2) {
        throw ConfigError("--config must follow a subcommand");
    }
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_file(path);
    } catch (const CLI::FileError& e) {
        throw ConfigError(std::string("cannot read config file: ") + e.what());
    }
    auto given = [&](const std::string& key) {
        const std::string flag = "--" + key;
        for (const std::string& a : rest) {
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        }
        return false;
    };
    std::vector<std::string> out(rest.begin(), rest.begin() + 2);
    for (const CLI::ConfigItem& item : items) {
        if (!item.parents.empty()) {
            throw ConfigError("config file: sections are not supported (key '" + item.fullname() + "')");
        }
        if (item.name == "++" || item.name == "--" || given(item.name)) {
            continue;
        }
        out.push_back("--" + item.name);
        for (const std::string& v : item.inputs) out.push_back(v);
    }
    out.insert(out.end(), rest.begin() + 2, rest.end());
    return out;
}

void add_run_options(CLI::App* app, Options& o) {
    RunConfig& c = o.config;
    app->add_option("--config", o.config_file, "key = value file; keys mirror the flags, flags override it");
    app->add_option("--dim", c.dim, "spatial dimension (1 or 2)")->capture_default_str();
    app->add_option("--lower", o.lower, "domain lower corner (defaults to the preset domain)")->expected(1, 2);
    app->add_option("--upper", o.upper, "domain upper corner (defaults to the preset domain)")->expected(1, 2);
    app->add_option("--N", c.N, "cells per axis")->capture_default_str();
    app->add_option("--M", c.M, "time steps")->capture_default_str();
    app->add_option("--T", c.T, "final time")->capture_default_str();
    app->add_option("--q_u", c.q_u, "polynomial degree of u")->capture_default_str();
    app->add_option("--q_v", c.q_v, "polynomial degree of v")->capture_default_str();
    app->add_option("--theta", c.flux.theta, "flux parameter theta")->capture_default_str();
    app->add_option("--gamma", c.flux.gamma, "flux parameter gamma >= 0")->capture_default_str();
    app->add_option("--zeta", c.flux.zeta, "flux parameter zeta >= 0")->capture_default_str();
    app->add_option("--order", c.order, "exp_decay, quadratic, sine, kink or constant")->capture_default_str();
    app->add_option("--alpha0", c.alpha0, "order value for the constant preset")->capture_default_str();
    app->add_option("--solution", c.solution, "smooth_1d, weak_singular_1d, smooth_2d, zero_1d or zero_2d")
        ->capture_default_str();
    app->add_option("--variant", c.variant, "weight branch: auto, as_printed or corrected")->capture_default_str();
    app->add_option("--solver", o.solver, "auto, direct or gmres")->capture_default_str();
    app->add_option("--tolerance", c.solver.tolerance, "iterative solver relative tolerance")->capture_default_str();
    app->add_option("--max_iterations", c.solver.max_iterations, "iterative solver iteration cap")
        ->capture_default_str();
    app->add_option("--restart", c.solver.restart, "GMRES restart length")->capture_default_str();
    app->add_option("--timing", c.timing, "record wall-clock time (false writes NA)")->capture_default_str();
    app->add_option("--output", c.output, "output directory for CSV files (empty: stdout only)");
}

void finalize(Options& o) {
    RunConfig& c = o.config;
    auto point = [&](const std::vector<double>& v, const char* what) -> std::optional<Point> {
        if (v.empty()) return std::nullopt;
        if (static_cast<int>(v.size()) != c.dim) {
            throw ConfigError(std::string(what) + " needs exactly dim values");
        }
        Point p{0.0, 0.0};
        for (std::size_t i = 0; i < v.size(); ++i) p[i] = v[i];
        return p;
    };
    c.lower = point(o.lower, "--lower");
    c.upper = point(o.upper, "--upper");
    if (c.lower.has_value() != c.upper.has_value()) {
        throw ConfigError("--lower and --upper must be given together");
    }
    c.solver.method = solver_method_from_name(o.solver);
}

std::ofstream open_output(const RunConfig& c, const std::string& name) {
    std::filesystem::create_directories(c.output);
    const auto path = std::filesystem::path(c.output) / name;
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    return out;
}

void print_rows(const std::vector<ErrorReport>& rows) {
    std::printf("%6s %6s %16s %16s %16s %16s %8s %8s\n", "N", "M", "E_u", "E_v", "Eu_max", "Ev_max", "order_h",
                "order_t");
    for (const ErrorReport& r : rows) {
        std::printf("%6d %6d %16s %16s %16s %16s %8s %8s\n", r.config.N, r.config.M, format_number(r.e_u).c_str(),
                    format_number(r.e_v).c_str(), format_number(r.e_u_max).c_str(),
                    format_number(r.e_v_max).c_str(),
                    r.order_h ? std::to_string(*r.order_h).substr(0, 6).c_str() : "NA",
                    r.order_tau ? std::to_string(*r.order_tau).substr(0, 6).c_str() : "NA");
    }
}

int cmd_solve(Options& o) {
    finalize(o);
    const ErrorReport r = run_single(o.config);
    print_rows({r});
    std::printf("weights: %s\n", r.diagnostics.variant_summary.c_str());
    if (!o.config.output.empty()) {
        auto s = open_output(o.config, "summary.csv");
        write_summary_csv(s, {r});
        auto l = open_output(o.config, "levels.csv");
        write_level_csv(l, r.levels);
    }
    return 0;
}

int cmd_converge(Options& o) {
    finalize(o);
    o.config.record_levels = false;
    const auto rows = run_sweep(sweep_kind_from_name(o.kind), o.config, o.refine);
    print_rows(rows);
    if (!o.config.output.empty()) {
        auto s = open_output(o.config, "summary.csv");
        write_summary_csv(s, rows);
    }
    return 0;
}

int cmd_singular(Options& o) {
    finalize(o);
    const SingularityReport rep = run_weak_singularity(o.config, o.refine);
    print_rows(rep.rows);
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        std::printf("M=%d order_u=%s order_v=%s bdiff_peak_at=%.4f err_v_peak_at=%.4f\n", rep.rows[i].config.M,
                    format_number(rep.order_u[i]).c_str(), format_number(rep.order_v[i]).c_str(),
                    rep.bdiff_peak_fraction[i], rep.error_v_peak_fraction[i]);
    }
    if (!o.config.output.empty()) {
        auto s = open_output(o.config, "summary.csv");
        write_summary_csv(s, rep.rows);
        for (const ErrorReport& r : rep.rows) {
            auto h = open_output(o.config, "time_history_M" + std::to_string(r.config.M) + ".csv");
            write_time_history_csv(h, r.levels);
        }
    }
    return 0;
}

int cmd_weights(Options& o) {
    finalize(o);
    const RunConfig& c = o.config;
    const VariableOrder order = c.variable_order();
    const std::optional<CdefVariant> fixed = c.fixed_variant();
    std::vector<int> steps = o.refine.empty() ? std::vector<int>{c.M} : o.refine;
    CdefVariant variant = CdefVariant::Corrected;
    if (fixed) {
        variant = *fixed;
    } else {
        const VariantSelection sel = select_cdef_variant(order, c.T / steps.front(), steps.front() - 1);
        variant = sel.chosen;
        std::printf("weights: %s\n", sel.summary().c_str());
    }
    const auto rows = run_weight_diagnostics(order, steps, c.T, variant);
    write_weight_csv(std::cout, rows);
    if (!c.output.empty()) {
        auto w = open_output(c, "weights.csv");
        write_weight_csv(w, rows);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-based DG solver for variable-order time-fractional wave equations"};
    app.require_subcommand(1);

    Options solve_opts, converge_opts, singular_opts, weight_opts;
    singular_opts.config.solution = "weak_singular_1d";
    singular_opts.refine = {100, 200, 400, 800};

    CLI::App* solve = app.add_subcommand("solve", "single run");
    add_run_options(solve, solve_opts);

    CLI::App* converge = app.add_subcommand("converge", "convergence sweep");
    add_run_options(converge, converge_opts);
    converge->add_option("--kind", converge_opts.kind, "spatial, temporal or both")->capture_default_str();
    converge->add_option("--refine", converge_opts.refine, "N values (spatial), M values (temporal) or N = M (both)")
        ->required()
        ->delimiter(',');

    CLI::App* singular = app.add_subcommand("singular", "weak initial singularity study");
    add_run_options(singular, singular_opts);
    singular->add_option("--refine", singular_opts.refine, "M values")->delimiter(',')->capture_default_str();

    CLI::App* weights = app.add_subcommand("weights", "memory-weight diagnostics");
    add_run_options(weights, weight_opts);
    weights->add_option("--refine", weight_opts.refine, "M values")->delimiter(',');

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const InvalidArgument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    }
    std::vector<const char*> cargs;
    for (const std::string& a : args) cargs.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (solve->parsed()) return cmd_solve(solve_opts);
        if (converge->parsed()) return cmd_converge(converge_opts);
        if (singular->parsed()) return cmd_singular(singular_opts);
        if (weights->parsed()) return cmd_weights(weight_opts);
    } catch (const InvalidArgument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const DiagnosticFailure& e) {
        std::cerr << "diagnostic failure: " << e.what() << "\n";
        return 3;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
