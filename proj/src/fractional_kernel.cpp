#include "vofdg/fractional_kernel.hpp"

#include "vofdg/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace vofdg {

namespace {

constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
constexpr double kLanczosG = 7.0;

// (x+1)^p - x^p without cancellation for large x.
double forward_difference(double x, double p) {
    return std::pow(x, p) * std::expm1(p * std::log1p(1.0 / x));
}

} // namespace

double gamma(double x) {
    if (!(x > 0.0)) {
        throw InvalidArgument("gamma: argument must be positive");
    }
    if (x < 0.5) {
        return gamma(x + 1.0) / x;
    }
    const double z = x - 1.0;
    double sum = kLanczos[0];
    for (std::size_t i = 1; i < kLanczos.size(); ++i) {
        sum += kLanczos[i] / (z + static_cast<double>(i));
    }
    const double t = z + kLanczosG + 0.5;
    return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, z + 0.5) * std::exp(-t) * sum;
}

// ---------------------------------------------------------------------------
// VariableOrder

VariableOrder::VariableOrder(OrderKind kind, double horizon, double alpha0)
    : kind_(kind), horizon_(horizon), alpha0_(alpha0) {
    if (!(horizon > 0.0)) {
        throw InvalidArgument("VariableOrder: horizon must be positive");
    }
    if (kind == OrderKind::Constant && !(alpha0 > 0.0 && alpha0 < 1.0)) {
        throw InvalidArgument("VariableOrder: constant order must lie in (0,1)");
    }
}

VariableOrder VariableOrder::from_name(const std::string& name, double horizon, double alpha0) {
    if (name == "exp_decay") return VariableOrder(OrderKind::ExpDecay, horizon);
    if (name == "quadratic") return VariableOrder(OrderKind::Quadratic, horizon);
    if (name == "sine") return VariableOrder(OrderKind::Sine, horizon);
    if (name == "kink") return VariableOrder(OrderKind::Kink, horizon);
    if (name == "constant") return VariableOrder(OrderKind::Constant, horizon, alpha0);
    throw InvalidArgument("unknown order preset '" + name +
                          "' (expected exp_decay, quadratic, sine, kink, constant)");
}

std::string VariableOrder::name() const {
    switch (kind_) {
    case OrderKind::ExpDecay: return "exp_decay";
    case OrderKind::Quadratic: return "quadratic";
    case OrderKind::Sine: return "sine";
    case OrderKind::Kink: return "kink";
    case OrderKind::Constant: return "constant";
    }
    return "unknown";
}

double VariableOrder::operator()(double t) const {
    switch (kind_) {
    case OrderKind::ExpDecay: return 0.1 + 0.8 * std::exp(-t);
    case OrderKind::Quadratic: return 0.9 - 0.5 * t * t;
    case OrderKind::Sine: return (2.0 + std::sin(t)) / 4.0;
    case OrderKind::Kink: return 0.3 + 0.4 * std::abs(t - 0.5);
    case OrderKind::Constant: return alpha0_;
    }
    return alpha0_;
}

std::optional<double> VariableOrder::derivative(double t) const {
    switch (kind_) {
    case OrderKind::ExpDecay: return -0.8 * std::exp(-t);
    case OrderKind::Quadratic: return -t;
    case OrderKind::Sine: return std::cos(t) / 4.0;
    case OrderKind::Kink:
        if (t == 0.5) return std::nullopt;
        return t > 0.5 ? 0.4 : -0.4;
    case OrderKind::Constant: return 0.0;
    }
    return std::nullopt;
}

double VariableOrder::lipschitz() const {
    switch (kind_) {
    case OrderKind::ExpDecay: return 0.8;
    case OrderKind::Quadratic: return horizon_;
    case OrderKind::Sine: return 0.25;
    case OrderKind::Kink: return 0.4;
    case OrderKind::Constant: return 0.0;
    }
    return 0.0;
}

namespace {

// Candidate extremal points of alpha on [0, T]: endpoints plus interior critical points.
std::vector<double> extremal_candidates(OrderKind kind, double horizon) {
    std::vector<double> ts = {0.0, horizon};
    if (kind == OrderKind::Sine) {
        for (double t = std::numbers::pi / 2; t < horizon; t += std::numbers::pi) {
            ts.push_back(t);
        }
    }
    if (kind == OrderKind::Kink && horizon > 0.5) {
        ts.push_back(0.5);
    }
    return ts;
}

} // namespace

double VariableOrder::alpha_max() const {
    double best = -1.0;
    for (double t : extremal_candidates(kind_, horizon_)) best = std::max(best, (*this)(t));
    return best;
}

double VariableOrder::alpha_min() const {
    double best = 2.0;
    for (double t : extremal_candidates(kind_, horizon_)) best = std::min(best, (*this)(t));
    return best;
}

void VariableOrder::validate(int samples) const {
    const double L = lipschitz();
    double prev_t = 0.0;
    double prev_a = (*this)(0.0);
    for (int k = 0; k <= samples; ++k) {
        const double t = horizon_ * k / samples;
        const double a = (*this)(t);
        if (!(a > 0.0 && a < 1.0)) {
            std::ostringstream msg;
            msg << "order '" << name() << "' leaves (0,1) at t=" << t << " (alpha=" << a << ")";
            throw InvalidArgument(msg.str());
        }
        if (k > 0 && std::abs(a - prev_a) > L * (t - prev_t) * (1.0 + 1e-10) + 1e-15) {
            throw InvalidArgument("order '" + name() + "' violates its Lipschitz bound");
        }
        prev_t = t;
        prev_a = a;
    }
}

// ---------------------------------------------------------------------------
// sigma, s

double sigma_residual(const VariableOrder& order, int m, double tau, double sigma) {
    return sigma - (1.0 - 0.5 * order(m * tau + sigma * tau));
}

double solve_sigma(const VariableOrder& order, int m, double tau) {
    if (m < 0 || !(tau > 0.0)) {
        throw InvalidArgument("solve_sigma: need m >= 0 and tau > 0");
    }
    if (order.lipschitz() * tau >= 2.0) {
        throw InvalidArgument("solve_sigma: L_alpha * tau must be < 2 for a unique root");
    }
    constexpr double tol = 1e-15;
    constexpr int max_iter = 100;
    const double t_m = m * tau;

    double sigma = 0.75;
    for (int it = 0; it < max_iter; ++it) {
        const double f = sigma_residual(order, m, tau, sigma);
        if (std::abs(f) <= tol && sigma > 0.5 && sigma < 1.0) {
            return sigma;
        }
        const auto d = order.derivative(t_m + sigma * tau);
        if (!d) {
            break;
        }
        const double fp = 1.0 + 0.5 * tau * *d;
        const double next = sigma - f / fp;
        if (!(next > 0.5 && next < 1.0) || next == sigma) {
            break;
        }
        sigma = next;
    }

    // Bisection: F(1/2) < 0 < F(1) for any order in (0,1).
    double lo = 0.5;
    double hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = sigma_residual(order, m, tau, mid);
        if (std::abs(f) <= tol) {
            return mid;
        }
        if (f < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 0.0 || mid == lo || mid == hi) {
            break;
        }
    }
    throw NumericalFailure("solve_sigma: no root with |F| <= 1e-15 at level " + std::to_string(m));
}

double compute_s(const VariableOrder& order, int m, double tau, double sigma) {
    if (m == 0) {
        const double a = order(0.5 * tau);
        return std::pow(2.0, 1.0 - a) * std::pow(tau, a) * gamma(2.0 - a);
    }
    const double a = order(m * tau + sigma * tau);
    return std::pow(tau, a) * gamma(2.0 - a);
}

std::string to_string(CdefVariant variant) {
    return variant == CdefVariant::AsPrinted ? "as_printed" : "corrected";
}

// ---------------------------------------------------------------------------
// weights

FractionalStep compute_weights(const VariableOrder& order, int m, double tau, CdefVariant variant,
                               bool check) {
    if (m < 1) {
        throw InvalidArgument("compute_weights: level must be >= 1 (level 0 uses 1/s_0)");
    }
    FractionalStep step;
    step.level = m;
    step.sigma = solve_sigma(order, m, tau);
    step.t_star = m * tau + step.sigma * tau;
    step.alpha_star = order(step.t_star);
    step.s = compute_s(order, m, tau, step.sigma);

    const double alpha = step.alpha_star;
    const double sigma = step.sigma;
    const double p2 = 2.0 - alpha;
    const double p1 = 1.0 - alpha;

    // d2[j] = (j+sigma)^{p2} - (j+sigma-1)^{p2}, d1 likewise, for j = 1..m.
    std::vector<double> d2(m + 1);
    std::vector<double> d1(m + 1);
    for (int j = 1; j <= m; ++j) {
        const double x = j + sigma - 1.0;
        d2[j] = forward_difference(x, p2);
        d1[j] = forward_difference(x, p1);
    }

    step.c.assign(m + 1, 0.0);
    step.c[0] = d2[1] / p2 - 0.5 * d1[1];
    for (int i = 1; i <= m - 1; ++i) {
        step.c[i] = (d2[i + 1] - d2[i]) / p2 - 0.5 * (d1[i + 1] - d1[i]);
    }
    const double last_den = variant == CdefVariant::Corrected ? p2 : 2.0 * alpha;
    step.c[m] = 0.5 * (3.0 * std::pow(m + sigma, p1) - std::pow(m + sigma - 1.0, p1)) -
                d2[m] / last_den;

    step.a.resize(m + 1);
    for (int i = 0; i <= m; ++i) {
        step.a[i] = step.c[i] / step.s;
    }

    if (check) {
        if (const auto bad = find_monotonicity_violation(step)) {
            std::ostringstream msg;
            msg << "memory weights at level " << m << " fail the ordering check at index " << *bad
                << " (variant " << to_string(variant) << ")";
            throw DiagnosticFailure(msg.str(), m, *bad);
        }
    }
    return step;
}

std::optional<int> find_monotonicity_violation(const FractionalStep& step) {
    const int m = step.level;
    for (int i = 0; i < m; ++i) {
        if (!(step.c[i + 1] < step.c[i])) {
            return i + 1;
        }
    }
    const double bound = (1.0 - step.alpha_star) /
                         (2.0 * std::pow(m + step.sigma, step.alpha_star));
    if (!(step.c[m] > bound) || !(bound > 0.0)) {
        return m;
    }
    return std::nullopt;
}

double linear_exactness_residual(const FractionalStep& step, double tau) {
    double sum = 0.0;
    for (double a : step.a) sum += a;
    const double exact = std::pow(step.t_star, 1.0 - step.alpha_star) / gamma(2.0 - step.alpha_star);
    return std::abs(tau * sum - exact) / std::abs(exact);
}

// ---------------------------------------------------------------------------
// history

Eigen::VectorXd history_sum(const FractionalStep& step, std::span<const Eigen::VectorXd> velocities) {
    const int m = step.level;
    if (static_cast<int>(velocities.size()) != m + 1 || static_cast<int>(step.a.size()) != m + 1) {
        throw InvalidArgument("history_sum: need velocities v^0..v^m matching the weight level");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(velocities.front().size());
    for (int i = 0; i < m; ++i) {
        if (velocities[i + 1].size() != out.size()) {
            throw InvalidArgument("history_sum: velocity vectors differ in length");
        }
        out += step.a[m - i] * (velocities[i + 1] - velocities[i]);
    }
    return out;
}

VelocityHistory::VelocityHistory(Eigen::Index dofs) : dofs_(dofs), increments_(dofs, 0) {}

void VelocityHistory::reserve(int levels) {
    if (levels > increments_.cols()) {
        increments_.conservativeResize(dofs_, levels);
    }
}

void VelocityHistory::push(const Eigen::Ref<const Eigen::VectorXd>& increment) {
    if (increment.size() != dofs_) {
        throw InvalidArgument("VelocityHistory::push: increment has wrong length");
    }
    if (length_ == increments_.cols()) {
        reserve(std::max<int>(16, 2 * length_));
    }
    increments_.col(length_) = increment;
    ++length_;
}

Eigen::VectorXd VelocityHistory::accumulate(const FractionalStep& step) const {
    const int m = step.level;
    if (m != length_ || static_cast<int>(step.a.size()) != m + 1) {
        throw InvalidArgument("VelocityHistory::accumulate: weight level does not match history length");
    }
    Eigen::VectorXd w(m);
    for (int i = 0; i < m; ++i) {
        w(i) = step.a[m - i];
    }
    return increments_.leftCols(m) * w;
}

// ---------------------------------------------------------------------------
// diagnostics

WeightVariationReport weight_variation_report(const VariableOrder& order, double tau, int M,
                                              CdefVariant variant) {
    if (M < 3) {
        throw InvalidArgument("weight_variation_report: need M >= 3");
    }
    WeightVariationReport rep;
    rep.tau = tau;
    rep.levels = M;
    const double alpha_max = order.alpha_max();

    // acc[k] = sum_{m=k}^{current} (a_{m-k}^(m) - a_{m-k}^(m-1))_+
    std::vector<double> acc(M, 0.0);
    std::vector<double> prev;
    double decrement = 0.0;
    double tail = 0.0;

    {
        const double s0 = solve_sigma(order, 0, tau);
        rep.sigma_min = std::min(rep.sigma_min, s0);
        rep.sigma_max = std::max(rep.sigma_max, s0);
        rep.max_sigma_residual = std::abs(sigma_residual(order, 0, tau, s0));
    }

    for (int m = 1; m <= M - 1; ++m) {
        FractionalStep step = compute_weights(order, m, tau, variant, false);
        rep.sigma_min = std::min(rep.sigma_min, step.sigma);
        rep.sigma_max = std::max(rep.sigma_max, step.sigma);
        rep.max_sigma_residual = std::max(rep.max_sigma_residual,
                                          std::abs(sigma_residual(order, m, tau, step.sigma)));
        if (const auto bad = find_monotonicity_violation(step); bad && rep.monotone) {
            rep.monotone = false;
            rep.first_violation = std::make_pair(m, *bad);
        }
        rep.max_linear_residual = std::max(rep.max_linear_residual, linear_exactness_residual(step, tau));

        decrement += tau * (step.a[m - 1] - step.a[m]);
        tail += tau * step.a[m];
        rep.decrement_sum = std::max(rep.decrement_sum, decrement);
        rep.tail_sum = std::max(rep.tail_sum, tail);

        if (m >= 2) {
            // i = m-1 is the end-point weight at level m-1 but an interior one at
            // level m; only indices interior to both levels are compared.
            for (int i = 0; i <= m - 2; ++i) {
                const double diff = step.a[i] - prev[i];
                const double x = (i + 1) * tau;
                const double scale = tau * (1.0 + std::abs(std::log(x))) * std::pow(x, -alpha_max);
                rep.ratio_max = std::max(rep.ratio_max, std::abs(diff) / scale);
            }
            for (int k = 2; k <= m; ++k) {
                acc[k] += std::max(0.0, step.a[m - k] - prev[m - k]);
            }
        }
        prev = std::move(step.a);
    }
    double best = 0.0;
    for (double v : acc) best = std::max(best, v);
    rep.cumulative_over_tau = best;
    rep.cumulative_max = tau * best;
    return rep;
}

std::string VariantSelection::summary() const {
    std::ostringstream out;
    auto describe = [&](const char* name, const VariantCheck& c) {
        out << name << ": ordering " << (c.monotone ? "pass" : "fail");
        if (c.first_violation) {
            out << " (m=" << c.first_violation->first << ", i=" << c.first_violation->second << ")";
        }
        out << ", linear exactness " << (c.linear_exact ? "pass" : "fail") << " (max rel. residual "
            << c.max_linear_residual << ")";
    };
    out << "weight branch selection -> " << to_string(chosen) << "; ";
    describe("as_printed", as_printed);
    out << "; ";
    describe("corrected", corrected);
    return out.str();
}

VariantSelection select_cdef_variant(const VariableOrder& order, double tau, int probe_levels) {
    auto probe = [&](CdefVariant v) {
        VariantCheck check;
        check.monotone = true;
        for (int m = 1; m <= std::max(1, probe_levels); ++m) {
            const FractionalStep step = compute_weights(order, m, tau, v, false);
            if (const auto bad = find_monotonicity_violation(step); bad && check.monotone) {
                check.monotone = false;
                check.first_violation = std::make_pair(m, *bad);
            }
            check.max_linear_residual = std::max(check.max_linear_residual,
                                                 linear_exactness_residual(step, tau));
        }
        check.linear_exact = check.max_linear_residual <= 1e-10;
        return check;
    };
    VariantSelection sel;
    sel.as_printed = probe(CdefVariant::AsPrinted);
    sel.corrected = probe(CdefVariant::Corrected);
    const bool printed_ok = sel.as_printed.monotone && sel.as_printed.linear_exact;
    const bool corrected_ok = sel.corrected.monotone && sel.corrected.linear_exact;
    if (printed_ok) {
        sel.chosen = CdefVariant::AsPrinted;
    } else if (corrected_ok) {
        sel.chosen = CdefVariant::Corrected;
    } else {
        throw DiagnosticFailure("no weight branch variant passes both the ordering and the "
                                "linear-exactness checks",
                                0, 0);
    }
    return sel;
}

} // namespace vofdg
