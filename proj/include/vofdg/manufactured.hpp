#pragma once

#include "vofdg/fractional_kernel.hpp"
#include "vofdg/quadrature.hpp"

#include <functional>
#include <string>
#include <vector>

namespace vofdg {

/// Gamma(p+1)/Gamma(p+1-beta) t^(p-beta): the Caputo derivative of order
/// beta in (1,2) of t^p. Returns 0 at t = 0. Throws InvalidArgument for p <= 1,
/// beta outside (1,2) or t < 0.
double caputo_power(double p, double beta, double t);

struct PowerTerm {
    double coeff;
    double power;
};

/// G(t) = sum_k c_k t^{p_k}.
class TemporalProfile {
public:
    TemporalProfile() = default;
    explicit TemporalProfile(std::vector<PowerTerm> terms);

    const std::vector<PowerTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    double value(double t) const;
    double first(double t) const;
    double second(double t) const;
    /// Caputo derivative of order beta in (1,2), term by term.
    double caputo(double beta, double t) const;

private:
    std::vector<PowerTerm> terms_;
};

enum class SpatialKind { Zero, Trig1D, Trig2D };

/// Periodic spatial factor with analytic gradient and Laplacian.
///   Trig1D  (1 + cos x / 4 + sin 2x / 5) sin x                         on (0, 2 pi)
///   Trig2D  (1 + cos 2 pi x / 4 + sin 2 pi y / 5) sin 2 pi x sin 2 pi y on (0, 1)^2
class SpatialProfile {
public:
    explicit SpatialProfile(SpatialKind kind = SpatialKind::Zero, int dimension = 1);

    SpatialKind kind() const { return kind_; }
    int dimension() const { return dimension_; }

    double value(const Point& x) const;
    Point gradient(const Point& x) const;
    double laplacian(const Point& x) const;

private:
    SpatialKind kind_;
    int dimension_;
};

/// u = G(t) Phi(x) with everything the solver and the error norms need.
struct SolutionBundle {
    std::string name;
    int dimension = 1;
    Point lower{0.0, 0.0};
    Point upper{1.0, 1.0};
    TemporalProfile temporal;
    SpatialProfile spatial;

    double u(const Point& x, double t) const { return temporal.value(t) * spatial.value(x); }
    double v(const Point& x, double t) const { return temporal.first(t) * spatial.value(x); }
    double u_tt(const Point& x, double t) const { return temporal.second(t) * spatial.value(x); }
    Point grad_u(const Point& x, double t) const;
    double laplacian_u(const Point& x, double t) const { return temporal.value(t) * spatial.laplacian(x); }
    bool is_zero() const { return temporal.empty() || spatial.kind() == SpatialKind::Zero; }
};

/// f = u_tt + D^{1+alpha(t)} u - Laplacian u, with the order frozen at t.
double source_term(const SolutionBundle& bundle, const VariableOrder& order, const Point& x, double t);

/// Separable form of the source at a fixed time: f(., t) = a(t) Phi + b(t) Laplacian Phi.
struct SourceSlice {
    double phi_coeff = 0.0;
    double laplacian_coeff = 0.0;
};
SourceSlice source_slice(const SolutionBundle& bundle, const VariableOrder& order, double t);

/// Presets: smooth_1d, weak_singular_1d, smooth_2d, zero_1d, zero_2d.
std::vector<SolutionBundle> preset_solutions();
/// Throws ConfigError for an unknown name.
SolutionBundle preset_solution(const std::string& name);

} // namespace vofdg
