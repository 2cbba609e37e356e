#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vofdg {

/// Gamma function for x in (0, 30] by the Lanczos approximation (g = 7, nine
/// terms), relative error below 1e-13 on that range. Throws InvalidArgument for x <= 0.
double gamma(double x);

enum class OrderKind { ExpDecay, Quadratic, Sine, Kink, Constant };

/// Fractional order alpha(t) in (0,1) of the velocity equation, defined on [0, horizon].
///
/// Presets:
///   exp_decay  0.1 + 0.8 exp(-t)
///   quadratic  0.9 - 0.5 t^2
///   sine       (2 + sin t) / 4
///   kink       0.3 + 0.4 |t - 1/2|     (Lipschitz, not C^1)
///   constant   alpha0
class VariableOrder {
public:
    VariableOrder(OrderKind kind, double horizon = 1.0, double alpha0 = 0.5);

    static VariableOrder constant(double alpha0, double horizon = 1.0) {
        return VariableOrder(OrderKind::Constant, horizon, alpha0);
    }
    /// Accepts exp_decay, quadratic, sine, kink, constant.
    static VariableOrder from_name(const std::string& name, double horizon = 1.0, double alpha0 = 0.5);

    double operator()(double t) const;
    /// alpha'(t) where it exists; empty at the kink of the kink preset.
    std::optional<double> derivative(double t) const;

    OrderKind kind() const { return kind_; }
    std::string name() const;
    double horizon() const { return horizon_; }
    double alpha0() const { return alpha0_; }
    bool is_constant() const { return kind_ == OrderKind::Constant; }

    /// Lipschitz constant on [0, horizon].
    double lipschitz() const;
    double alpha_max() const;
    double alpha_min() const;

    /// Sampled check that alpha maps [0, horizon] into (0,1) and respects the
    /// Lipschitz bound. Throws InvalidArgument on violation.
    void validate(int samples = 10000) const;

private:
    OrderKind kind_;
    double horizon_;
    double alpha0_;
};

/// Root in (1/2, 1) of F(sigma) = sigma - (1 - alpha(t_m + sigma tau)/2).
///
/// Newton from sigma = 3/4 with analytic F', stopping once |F| <= 1e-15;
/// falls back to bisection if Newton stalls (the kink preset). Throws
/// InvalidArgument when L_alpha * tau >= 2, NumericalFailure if no root is found.
double solve_sigma(const VariableOrder& order, int m, double tau);

/// F(sigma) for level m, exposed for residual checks.
double sigma_residual(const VariableOrder& order, int m, double tau, double sigma);

/// Scaling s_m. Level 0 uses alpha(tau/2); level m >= 1 uses alpha(t_m + sigma tau).
double compute_s(const VariableOrder& order, int m, double tau, double sigma);

/// Which denominator the last (i = m) branch of the weight formula uses.
/// AsPrinted divides by 2*alpha*, Corrected by (2 - alpha*), which is the
/// form that makes the weights reproduce derivatives of linear data exactly.
enum class CdefVariant { AsPrinted, Corrected };

std::string to_string(CdefVariant variant);

/// Memory-term data for time level m.
struct FractionalStep {
    int level = 0;
    double sigma = 0.0;
    double t_star = 0.0;     // t_m + sigma tau
    double alpha_star = 0.0; // alpha(t_star)
    double s = 0.0;
    std::vector<double> c; // c_0 .. c_m
    std::vector<double> a; // a_i = c_i / s
};

/// Weights for level m >= 1. With `check` set, verifies
/// c_m < c_{m-1} < ... < c_0 and c_m > (1 - alpha*) / (2 (m + sigma)^alpha*)
/// and throws DiagnosticFailure(level, index) on the first violation.
FractionalStep compute_weights(const VariableOrder& order, int m, double tau,
                               CdefVariant variant = CdefVariant::Corrected, bool check = true);

/// Index of the first violated ordering (or lower bound, reported as index m);
/// empty when the weights pass.
std::optional<int> find_monotonicity_violation(const FractionalStep& step);

/// Relative residual of tau * sum_i a_i against t_star^{1-alpha*} / Gamma(2 - alpha*).
double linear_exactness_residual(const FractionalStep& step, double tau);

/// sum_{i=0}^{m-1} a_{m-i} (v^{i+1} - v^i) for velocities v^0 .. v^m. The
/// a_0 (v^{m+1} - v^m) term holds the unknown and is left to the stepper.
Eigen::VectorXd history_sum(const FractionalStep& step, std::span<const Eigen::VectorXd> velocities);

/// Velocity history kept as increments dv^i = v^{i+1} - v^i, one column each.
class VelocityHistory {
public:
    explicit VelocityHistory(Eigen::Index dofs = 0);

    Eigen::Index dofs() const { return dofs_; }
    int length() const { return length_; }

    void reserve(int levels);
    void push(const Eigen::Ref<const Eigen::VectorXd>& increment);
    Eigen::VectorXd increment(int i) const { return increments_.col(i); }

    /// sum_{i=0}^{m-1} a_{m-i} dv^i for the step at level m == length().
    Eigen::VectorXd accumulate(const FractionalStep& step) const;

private:
    Eigen::Index dofs_;
    int length_ = 0;
    Eigen::MatrixXd increments_;
};

struct WeightVariationReport {
    double tau = 0.0;
    int levels = 0;
    /// max over 0 <= i <= m-2 of |a_i^(m) - a_i^(m-1)| / [tau (1 + |log((i+1)tau)|) ((i+1)tau)^(-alpha_max)]
    double ratio_max = 0.0;
    /// max over 2 <= k <= n <= M-1 of tau * sum_{m=k}^{n} (a_{m-k}^(m) - a_{m-k}^(m-1))_+
    double cumulative_max = 0.0;
    double cumulative_over_tau = 0.0;
    /// tau * sum_{i=1}^{m} (a_{i-1}^(i) - a_i^(i)) and tau * sum_{i=1}^{m} a_i^(i), maxima over m.
    double decrement_sum = 0.0;
    double tail_sum = 0.0;
    bool monotone = true;
    std::optional<std::pair<int, int>> first_violation;
    double max_linear_residual = 0.0;
    double sigma_min = 1.0;
    double sigma_max = 0.0;
    double max_sigma_residual = 0.0;
};

/// Executable form of the weight-variation and weight-ordering estimates over
/// levels 1 .. M-1 with step tau. Requires M >= 3.
WeightVariationReport weight_variation_report(const VariableOrder& order, double tau, int M,
                                              CdefVariant variant = CdefVariant::Corrected);

struct VariantCheck {
    bool monotone = false;
    bool linear_exact = false;
    double max_linear_residual = 0.0;
    std::optional<std::pair<int, int>> first_violation;
};

struct VariantSelection {
    CdefVariant chosen = CdefVariant::Corrected;
    VariantCheck as_printed;
    VariantCheck corrected;
    std::string summary() const;
};

/// Runs the ordering check and the linear-exactness identity (1e-10) for both
/// variants over levels 1 .. probe_levels and returns the one passing both.
/// Throws DiagnosticFailure if neither does.
VariantSelection select_cdef_variant(const VariableOrder& order, double tau, int probe_levels);

} // namespace vofdg
