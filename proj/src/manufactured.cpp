#include "vofdg/manufactured.hpp"

#include "vofdg/errors.hpp"

#include <cmath>
#include <numbers>

namespace vofdg {

double caputo_power(double p, double beta, double t) {
    if (!(p > 1.0)) {
        throw InvalidArgument("caputo_power: exponent must exceed 1");
    }
    if (!(beta > 1.0 && beta < 2.0)) {
        throw InvalidArgument("caputo_power: order must lie in (1,2)");
    }
    if (t < 0.0) {
        throw InvalidArgument("caputo_power: time must be nonnegative");
    }
    if (t == 0.0) {
        return 0.0;
    }
    // Gamma(p+1) overflows the Lanczos range for large p; use the log form.
    return std::exp(std::lgamma(p + 1.0) - std::lgamma(p + 1.0 - beta) + (p - beta) * std::log(t));
}

TemporalProfile::TemporalProfile(std::vector<PowerTerm> terms) : terms_(std::move(terms)) {
    for (const PowerTerm& term : terms_) {
        if (!(term.power > 1.0)) {
            throw InvalidArgument("TemporalProfile: powers must exceed 1");
        }
    }
}

double TemporalProfile::value(double t) const {
    double s = 0.0;
    for (const PowerTerm& k : terms_) s += k.coeff * std::pow(t, k.power);
    return s;
}

double TemporalProfile::first(double t) const {
    double s = 0.0;
    for (const PowerTerm& k : terms_) s += k.coeff * k.power * std::pow(t, k.power - 1.0);
    return s;
}

double TemporalProfile::second(double t) const {
    double s = 0.0;
    for (const PowerTerm& k : terms_) {
        const double e = k.power - 2.0;
        if (e == 0.0) {
            s += k.coeff * k.power * (k.power - 1.0);
        } else {
            s += k.coeff * k.power * (k.power - 1.0) * std::pow(t, e);
        }
    }
    return s;
}

double TemporalProfile::caputo(double beta, double t) const {
    double s = 0.0;
    for (const PowerTerm& k : terms_) s += k.coeff * caputo_power(k.power, beta, t);
    return s;
}

SpatialProfile::SpatialProfile(SpatialKind kind, int dimension) : kind_(kind), dimension_(dimension) {
    if (dimension != 1 && dimension != 2) {
        throw InvalidArgument("SpatialProfile: dimension must be 1 or 2");
    }
    if ((kind == SpatialKind::Trig1D && dimension != 1) || (kind == SpatialKind::Trig2D && dimension != 2)) {
        throw InvalidArgument("SpatialProfile: kind does not match dimension");
    }
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// P(x) = 1 + cos x / 4 + sin 2x / 5 and its derivatives; Phi = P sin x.
struct Trig1 {
    double p, dp, ddp, s, c;
    explicit Trig1(double x)
        : p(1.0 + std::cos(x) / 4.0 + std::sin(2.0 * x) / 5.0),
          dp(-std::sin(x) / 4.0 + 2.0 * std::cos(2.0 * x) / 5.0),
          ddp(-std::cos(x) / 4.0 - 4.0 * std::sin(2.0 * x) / 5.0),
          s(std::sin(x)),
          c(std::cos(x)) {}
};

// P = 1 + cos kx / 4 + sin ky / 5 with k = 2 pi; Phi = P sin kx sin ky.
struct Trig2 {
    double p, px, pxx, py, pyy, sx, cx, sy, cy;
    explicit Trig2(const Point& x)
        : p(1.0 + std::cos(kTwoPi * x[0]) / 4.0 + std::sin(kTwoPi * x[1]) / 5.0),
          px(-kTwoPi * std::sin(kTwoPi * x[0]) / 4.0),
          pxx(-kTwoPi * kTwoPi * std::cos(kTwoPi * x[0]) / 4.0),
          py(kTwoPi * std::cos(kTwoPi * x[1]) / 5.0),
          pyy(-kTwoPi * kTwoPi * std::sin(kTwoPi * x[1]) / 5.0),
          sx(std::sin(kTwoPi * x[0])),
          cx(std::cos(kTwoPi * x[0])),
          sy(std::sin(kTwoPi * x[1])),
          cy(std::cos(kTwoPi * x[1])) {}
};

} // namespace

double SpatialProfile::value(const Point& x) const {
    switch (kind_) {
    case SpatialKind::Zero: return 0.0;
    case SpatialKind::Trig1D: {
        const Trig1 f(x[0]);
        return f.p * f.s;
    }
    case SpatialKind::Trig2D: {
        const Trig2 f(x);
        return f.p * f.sx * f.sy;
    }
    }
    return 0.0;
}

Point SpatialProfile::gradient(const Point& x) const {
    switch (kind_) {
    case SpatialKind::Zero: return {0.0, 0.0};
    case SpatialKind::Trig1D: {
        const Trig1 f(x[0]);
        return {f.dp * f.s + f.p * f.c, 0.0};
    }
    case SpatialKind::Trig2D: {
        const Trig2 f(x);
        return {(f.px * f.sx + f.p * kTwoPi * f.cx) * f.sy, (f.py * f.sy + f.p * kTwoPi * f.cy) * f.sx};
    }
    }
    return {0.0, 0.0};
}

double SpatialProfile::laplacian(const Point& x) const {
    switch (kind_) {
    case SpatialKind::Zero: return 0.0;
    case SpatialKind::Trig1D: {
        const Trig1 f(x[0]);
        return f.ddp * f.s + 2.0 * f.dp * f.c - f.p * f.s;
    }
    case SpatialKind::Trig2D: {
        const Trig2 f(x);
        const double k = kTwoPi;
        const double dxx = (f.pxx * f.sx + 2.0 * f.px * k * f.cx - f.p * k * k * f.sx) * f.sy;
        const double dyy = (f.pyy * f.sy + 2.0 * f.py * k * f.cy - f.p * k * k * f.sy) * f.sx;
        return dxx + dyy;
    }
    }
    return 0.0;
}

Point SolutionBundle::grad_u(const Point& x, double t) const {
    const double g = temporal.value(t);
    const Point d = spatial.gradient(x);
    return {g * d[0], g * d[1]};
}

SourceSlice source_slice(const SolutionBundle& bundle, const VariableOrder& order, double t) {
    if (bundle.is_zero()) {
        return {};
    }
    const double beta = 1.0 + order(t);
    return {bundle.temporal.second(t) + bundle.temporal.caputo(beta, t), -bundle.temporal.value(t)};
}

double source_term(const SolutionBundle& bundle, const VariableOrder& order, const Point& x, double t) {
    const SourceSlice s = source_slice(bundle, order, t);
    if (s.phi_coeff == 0.0 && s.laplacian_coeff == 0.0) {
        return 0.0;
    }
    return s.phi_coeff * bundle.spatial.value(x) + s.laplacian_coeff * bundle.spatial.laplacian(x);
}

std::vector<SolutionBundle> preset_solutions() {
    const double two_pi = 2.0 * std::numbers::pi;
    const TemporalProfile smooth({{1.0, 2.0}, {1.0, 3.5}, {0.5, 4.0}});
    std::vector<SolutionBundle> out;
    out.push_back({"smooth_1d", 1, {0.0, 0.0}, {two_pi, 1.0}, smooth, SpatialProfile(SpatialKind::Trig1D, 1)});
    out.push_back({"weak_singular_1d", 1, {0.0, 0.0}, {two_pi, 1.0}, TemporalProfile({{1.0, 1.5}}),
                   SpatialProfile(SpatialKind::Trig1D, 1)});
    out.push_back({"smooth_2d", 2, {0.0, 0.0}, {1.0, 1.0}, smooth, SpatialProfile(SpatialKind::Trig2D, 2)});
    out.push_back({"zero_1d", 1, {0.0, 0.0}, {two_pi, 1.0}, TemporalProfile(), SpatialProfile(SpatialKind::Zero, 1)});
    out.push_back({"zero_2d", 2, {0.0, 0.0}, {1.0, 1.0}, TemporalProfile(), SpatialProfile(SpatialKind::Zero, 2)});
    return out;
}

SolutionBundle preset_solution(const std::string& name) {
    for (SolutionBundle& b : preset_solutions()) {
        if (b.name == name) {
            return b;
        }
    }
    throw ConfigError("unknown solution preset '" + name +
                      "' (expected smooth_1d, weak_singular_1d, smooth_2d, zero_1d or zero_2d)");
}

} // namespace vofdg
