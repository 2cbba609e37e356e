#include "vofdg/errors.hpp"
#include "vofdg/harness.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace vofdg;

namespace {

RunConfig config_from(const py::kwargs& kw) {
    RunConfig c;
    for (auto item : kw) {
        const auto key = item.first.cast<std::string>();
        const py::handle v = item.second;
        if (key == "dim") c.dim = v.cast<int>();
        else if (key == "N") c.N = v.cast<int>();
        else if (key == "M") c.M = v.cast<int>();
        else if (key == "T") c.T = v.cast<double>();
        else if (key == "q_u") c.q_u = v.cast<int>();
        else if (key == "q_v") c.q_v = v.cast<int>();
        else if (key == "theta") c.flux.theta = v.cast<double>();
        else if (key == "gamma") c.flux.gamma = v.cast<double>();
        else if (key == "zeta") c.flux.zeta = v.cast<double>();
        else if (key == "order") c.order = v.cast<std::string>();
        else if (key == "alpha0") c.alpha0 = v.cast<double>();
        else if (key == "solution") c.solution = v.cast<std::string>();
        else if (key == "variant") c.variant = v.cast<std::string>();
        else if (key == "solver") c.solver.method = solver_method_from_name(v.cast<std::string>());
        else if (key == "tolerance") c.solver.tolerance = v.cast<double>();
        else if (key == "record_levels") c.record_levels = v.cast<bool>();
        else throw ConfigError("unknown configuration key '" + key + "'");
    }
    c.timing = false;
    return c;
}

py::dict to_dict(const ErrorReport& r) {
    py::dict d;
    d["N"] = r.config.N;
    d["M"] = r.config.M;
    d["E_u"] = r.e_u;
    d["E_v"] = r.e_v;
    d["Eu_max"] = r.e_u_max;
    d["Ev_max"] = r.e_v_max;
    d["order_h"] = r.order_h;
    d["order_tau"] = r.order_tau;
    d["weights"] = r.diagnostics.variant_summary;
    py::list levels;
    for (const LevelRecord& l : r.levels) {
        py::dict x;
        x["m"] = l.m;
        x["t"] = l.t;
        x["sigma"] = l.sigma;
        x["E_u"] = l.e_u;
        x["E_v"] = l.e_v;
        x["Q"] = l.q;
        levels.append(x);
    }
    d["levels"] = levels;
    return d;
}

} // namespace

PYBIND11_MODULE(_vofdg, m) {
    m.doc() = "Energy-based DG solver for wave equations with a variable-order Caputo term";
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<DiagnosticFailure>(m, "DiagnosticFailure", PyExc_RuntimeError);
    py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_RuntimeError);

    m.def("solve", [](const py::kwargs& kw) { return to_dict(run_single(config_from(kw))); },
          "Run one configuration; keyword arguments mirror the CLI flags.");
    m.def(
        "sweep",
        [](const std::string& kind, const std::vector<int>& refine, const py::kwargs& kw) {
            py::list out;
            for (const ErrorReport& r : run_sweep(sweep_kind_from_name(kind), config_from(kw), refine)) {
                out.append(to_dict(r));
            }
            return out;
        },
        py::arg("kind"), py::arg("refine"));
    m.def(
        "weights",
        [](const std::string& order, int level, double tau, const std::string& variant) {
            const FractionalStep s = compute_weights(VariableOrder::from_name(order), level, tau,
                                                     variant == "as_printed" ? CdefVariant::AsPrinted
                                                                             : CdefVariant::Corrected,
                                                     false);
            py::dict d;
            d["sigma"] = s.sigma;
            d["t_star"] = s.t_star;
            d["alpha_star"] = s.alpha_star;
            d["s"] = s.s;
            d["a"] = s.a;
            return d;
        },
        py::arg("order"), py::arg("level"), py::arg("tau"), py::arg("variant") = "corrected");
    m.def("gamma", &vofdg::gamma, py::arg("x"));
    m.def(
        "gauss_rule",
        [](int n) {
            const QuadratureRule r = gauss_rule(n);
            std::vector<double> x;
            for (const Point& p : r.nodes) x.push_back(p[0]);
            return py::make_tuple(x, r.weights);
        },
        py::arg("n"));
    m.def("observed_order", &observed_order, py::arg("e_coarse"), py::arg("e_fine"), py::arg("ratio"));
}
