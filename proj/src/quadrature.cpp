#include "vofdg/quadrature.hpp"

#include "vofdg/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace vofdg {

LegendreValue legendre(int k, double x) {
    if (k < 0) {
        throw InvalidArgument("legendre: degree must be nonnegative");
    }
    double p_prev = 1.0;
    double dp_prev = 0.0;
    if (k == 0) {
        return {p_prev, dp_prev};
    }
    double p = x;
    double dp = 1.0;
    for (int j = 1; j < k; ++j) {
        const double p_next = ((2 * j + 1) * x * p - j * p_prev) / (j + 1);
        // P'_{j+1} = P'_{j-1} + (2j+1) P_j holds at the endpoints too.
        const double dp_next = dp_prev + (2 * j + 1) * p;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
    }
    return {p, dp};
}

QuadratureRule gauss_rule(int n) {
    if (n < 1) {
        throw InvalidArgument("gauss_rule: number of points must be >= 1, got " + std::to_string(n));
    }
    QuadratureRule rule;
    rule.dimension = 1;
    rule.nodes.assign(n, Point{0.0, 0.0});
    rule.weights.assign(n, 0.0);

    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi asymptotic guess for the i-th largest root.
        const double theta = std::numbers::pi * (i + 0.75) / (n + 0.5);
        double x = std::cos(theta) * (1.0 - (n - 1.0) / (8.0 * n * n * n));
        LegendreValue pv{};
        for (int it = 0; it < 100; ++it) {
            pv = legendre(n, x);
            const double dx = pv.value / pv.derivative;
            x -= dx;
            if (std::abs(dx) <= 1e-15) {
                break;
            }
        }
        pv = legendre(n, x);
        const double w = 2.0 / ((1.0 - x * x) * pv.derivative * pv.derivative);
        // Store in increasing order; mirror pair (x, -x).
        rule.nodes[n - 1 - i][0] = x;
        rule.weights[n - 1 - i] = w;
        rule.nodes[i][0] = -x;
        rule.weights[i] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[n / 2][0] = 0.0;
    }
    return rule;
}

QuadratureRule tensor_rule(const QuadratureRule& rule1d) {
    if (rule1d.dimension != 1) {
        throw InvalidArgument("tensor_rule: expects a 1D rule");
    }
    QuadratureRule rule;
    rule.dimension = 2;
    const std::size_t n = rule1d.size();
    rule.nodes.reserve(n * n);
    rule.weights.reserve(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            rule.nodes.push_back({rule1d.nodes[i][0], rule1d.nodes[j][0]});
            rule.weights.push_back(rule1d.weights[i] * rule1d.weights[j]);
        }
    }
    return rule;
}

QuadratureRule gauss_rule(int n, int dimension) {
    if (dimension == 1) {
        return gauss_rule(n);
    }
    if (dimension == 2) {
        return tensor_rule(gauss_rule(n));
    }
    throw InvalidArgument("gauss_rule: dimension must be 1 or 2");
}

} // namespace vofdg
