#pragma once

// Dense reference solver for the 1D periodic problem with a constant
// fractional order. It shares no code with the library beyond the
// manufactured-solution data (power-law coefficients and the spatial profile):
// monomial basis, Golub-Welsch quadrature, trace-by-trace assembly of the weak
// form, classical L2-1sigma weights and dense LU solves.

#include "vofdg/manufactured.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace reference {

struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

/// Gauss-Legendre nodes as eigenvalues of the symmetric Jacobi matrix.
inline GaussRule golub_welsch(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussRule r;
    for (int i = 0; i < n; ++i) {
        r.x.push_back(es.eigenvalues()(i));
        const double v0 = es.eigenvectors()(0, i);
        r.w.push_back(2.0 * v0 * v0);
    }
    return r;
}

struct Problem {
    int elements = 4;
    double lower = 0.0;
    double upper = 2.0 * M_PI;
    int q_u = 2;
    int q_v = 1;
    double theta = 0.0;
    double gamma = 0.0;
    double zeta = 0.0;
    double alpha = 0.5;
    int steps = 50;
    double final_time = 1.0;
    /// Points per element for projections and load vectors.
    int integration_points = 5;
};

class ReferenceDg1d {
public:
    ReferenceDg1d(Problem p, vofdg::SolutionBundle exact) : p_(p), exact_(std::move(exact)) {
        h_ = (p_.upper - p_.lower) / p_.elements;
        nu_ = p_.q_u + 1;
        nv_ = p_.q_v + 1;
        Nu_ = p_.elements * nu_;
        n_ = Nu_ + p_.elements * nv_;
        assemble();
    }

    int u_index(int e, int k) const { return e * nu_ + k; }
    int v_index(int e, int k) const { return Nu_ + e * nv_ + k; }

    /// Value of the field (u if is_u, else v) at physical point x inside element e.
    double evaluate(const Eigen::VectorXd& X, bool is_u, int e, double x) const {
        const double xi = 2.0 * (x - (p_.lower + e * h_)) / h_ - 1.0;
        double s = 0.0, pw = 1.0;
        const int n = is_u ? nu_ : nv_;
        for (int k = 0; k < n; ++k, pw *= xi) s += X(is_u ? u_index(e, k) : v_index(e, k)) * pw;
        return s;
    }

    Eigen::VectorXd solve() const {
        const double tau = p_.final_time / p_.steps;
        const double a = p_.alpha;
        const double sigma = 1.0 - 0.5 * a;
        const double g2 = std::tgamma(2.0 - a);

        std::vector<Eigen::VectorXd> X = {project()};
        // startup
        {
            const double s0 = std::pow(2.0, 1.0 - a) * std::pow(tau, a) * g2;
            const Eigen::MatrixXd L = T_ / tau + 0.5 * A_ + E_ / s0;
            const Eigen::VectorXd r = (T_ / tau - 0.5 * A_ + E_ / s0) * X[0] + load(0.5 * tau);
            X.push_back(L.fullPivLu().solve(r));
        }
        for (int m = 1; m < p_.steps; ++m) {
            const std::vector<double> c = alikhanov(m, a, sigma);
            const double scale = 1.0 / (std::pow(tau, a) * g2);
            const Eigen::MatrixXd L = (sigma + 0.5) / tau * T_ + sigma * A_ + c[0] * scale * E_;
            Eigen::VectorXd r = T_ * (2.0 * sigma * X[m] - (sigma - 0.5) * X[m - 1]) / tau -
                                (1.0 - sigma) * (A_ * X[m]) + c[0] * scale * (E_ * X[m]);
            for (int i = 1; i <= m; ++i) {
                r -= c[i] * scale * (E_ * (X[m + 1 - i] - X[m - i]));
            }
            r += load((m + sigma) * tau);
            X.push_back(L.fullPivLu().solve(r));
        }
        return X.back();
    }

private:
    // Classical L2-1sigma coefficients for a constant order; c[i] multiplies
    // the i-th most recent velocity increment.
    static std::vector<double> alikhanov(int m, double a, double s) {
        auto aa = [&](int l) {
            return l == 0 ? std::pow(s, 1.0 - a) : std::pow(l + s, 1.0 - a) - std::pow(l - 1 + s, 1.0 - a);
        };
        auto bb = [&](int l) {
            return (std::pow(l + s, 2.0 - a) - std::pow(l - 1 + s, 2.0 - a)) / (2.0 - a) -
                   0.5 * (std::pow(l + s, 1.0 - a) + std::pow(l - 1 + s, 1.0 - a));
        };
        std::vector<double> c(m + 1);
        c[0] = aa(0) + bb(1);
        for (int j = 1; j < m; ++j) c[j] = aa(j) + bb(j + 1) - bb(j);
        c[m] = aa(m) - bb(m);
        return c;
    }

    // Row vectors over the global unknowns for traces at an element end (xi = +-1).
    Eigen::RowVectorXd value_trace(bool is_u, int e, double xi) const {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n_);
        const int n = is_u ? nu_ : nv_;
        for (int k = 0; k < n; ++k) r(is_u ? u_index(e, k) : v_index(e, k)) = std::pow(xi, k);
        return r;
    }
    Eigen::RowVectorXd slope_trace(int e, double xi) const {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n_);
        for (int k = 1; k < nu_; ++k) r(u_index(e, k)) = k * std::pow(xi, k - 1) * 2.0 / h_;
        return r;
    }

    void assemble() {
        T_ = Eigen::MatrixXd::Zero(n_, n_);
        A_ = Eigen::MatrixXd::Zero(n_, n_);
        E_ = Eigen::MatrixXd::Zero(n_, n_);
        const GaussRule g = golub_welsch(p_.q_u + p_.q_v + 2);
        const double J = 0.5 * h_;
        const double ds = 2.0 / h_;
        auto mono = [](int k, double x) { return k == 0 ? 1.0 : std::pow(x, k); };
        auto dmono = [&](int k, double x) { return k == 0 ? 0.0 : k * std::pow(x, k - 1) * ds; };

        for (int e = 0; e < p_.elements; ++e) {
            for (std::size_t q = 0; q < g.x.size(); ++q) {
                const double x = g.x[q], w = g.w[q] * J;
                // first equation: gradient-tested rows k >= 1, mean row k = 0
                for (int k = 1; k < nu_; ++k) {
                    for (int j = 0; j < nu_; ++j) T_(u_index(e, k), u_index(e, j)) += w * dmono(k, x) * dmono(j, x);
                    for (int j = 0; j < nv_; ++j) A_(u_index(e, k), v_index(e, j)) -= w * dmono(k, x) * dmono(j, x);
                }
                for (int j = 0; j < nu_; ++j) T_(u_index(e, 0), u_index(e, j)) += w * mono(j, x);
                for (int j = 0; j < nv_; ++j) A_(u_index(e, 0), v_index(e, j)) -= w * mono(j, x);
                // second equation
                for (int k = 0; k < nv_; ++k) {
                    for (int j = 0; j < nv_; ++j) {
                        T_(v_index(e, k), v_index(e, j)) += w * mono(k, x) * mono(j, x);
                        E_(v_index(e, k), v_index(e, j)) += w * mono(k, x) * mono(j, x);
                    }
                    for (int j = 0; j < nu_; ++j) A_(v_index(e, k), u_index(e, j)) += w * dmono(k, x) * dmono(j, x);
                }
            }
        }
        // faces: face f sits between element f (left) and f+1 (right, periodic)
        for (int f = 0; f < p_.elements; ++f) {
            const int L = f, R = (f + 1) % p_.elements;
            const Eigen::RowVectorXd vL = value_trace(false, L, 1.0), vR = value_trace(false, R, -1.0);
            const Eigen::RowVectorXd gL = slope_trace(L, 1.0), gR = slope_trace(R, -1.0);
            const Eigen::RowVectorXd vstar = p_.theta * vR + (1.0 - p_.theta) * vL - p_.zeta * (gL - gR);
            const Eigen::RowVectorXd gstar = (1.0 - p_.theta) * gR + p_.theta * gL - p_.gamma * (vL - vR);
            for (auto [e, xi, n, vown] : {std::tuple{L, 1.0, 1.0, vL}, std::tuple{R, -1.0, -1.0, vR}}) {
                for (int k = 1; k < nu_; ++k) {
                    const double dw = k * std::pow(xi, k - 1) * ds;
                    A_.row(u_index(e, k)) -= dw * n * (vstar - vown);
                }
                for (int k = 0; k < nv_; ++k) {
                    A_.row(v_index(e, k)) -= std::pow(xi, k) * n * gstar;
                }
            }
        }
    }

    double caputo_of_temporal(double beta, double t) const {
        double s = 0.0;
        for (const vofdg::PowerTerm& term : exact_.temporal.terms()) {
            const double p = term.power;
            s += term.coeff * std::tgamma(p + 1.0) / std::tgamma(p + 1.0 - beta) * std::pow(t, p - beta);
        }
        return s;
    }
    double temporal_second(double t) const {
        double s = 0.0;
        for (const vofdg::PowerTerm& term : exact_.temporal.terms()) {
            s += term.coeff * term.power * (term.power - 1.0) * std::pow(t, term.power - 2.0);
        }
        return s;
    }
    double temporal_value(double t) const {
        double s = 0.0;
        for (const vofdg::PowerTerm& term : exact_.temporal.terms()) s += term.coeff * std::pow(t, term.power);
        return s;
    }
    double temporal_first(double t) const {
        double s = 0.0;
        for (const vofdg::PowerTerm& term : exact_.temporal.terms()) {
            s += term.coeff * term.power * std::pow(t, term.power - 1.0);
        }
        return s;
    }

    Eigen::VectorXd load(double t) const {
        const double beta = 1.0 + p_.alpha;
        const double phi_c = temporal_second(t) + caputo_of_temporal(beta, t);
        const double lap_c = -temporal_value(t);
        const GaussRule g = golub_welsch(p_.integration_points);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n_);
        for (int e = 0; e < p_.elements; ++e) {
            for (std::size_t q = 0; q < g.x.size(); ++q) {
                const vofdg::Point x{p_.lower + e * h_ + 0.5 * h_ * (g.x[q] + 1.0), 0.0};
                const double f = phi_c * exact_.spatial.value(x) + lap_c * exact_.spatial.laplacian(x);
                for (int k = 0; k < nv_; ++k) b(v_index(e, k)) += 0.5 * h_ * g.w[q] * std::pow(g.x[q], k) * f;
            }
        }
        return b;
    }

    Eigen::VectorXd project() const {
        const GaussRule g = golub_welsch(p_.integration_points);
        const double G0 = temporal_value(0.0), G1 = temporal_first(0.0);
        const double ds = 2.0 / h_;
        Eigen::VectorXd X = Eigen::VectorXd::Zero(n_);
        for (int e = 0; e < p_.elements; ++e) {
            Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nu_, nu_), Mv = Eigen::MatrixXd::Zero(nv_, nv_);
            Eigen::VectorXd ru = Eigen::VectorXd::Zero(nu_), rv = Eigen::VectorXd::Zero(nv_);
            for (std::size_t q = 0; q < g.x.size(); ++q) {
                const double xi = g.x[q], w = 0.5 * h_ * g.w[q];
                const vofdg::Point x{p_.lower + e * h_ + 0.5 * h_ * (xi + 1.0), 0.0};
                const double u0 = G0 * exact_.spatial.value(x);
                const double du0 = G0 * exact_.spatial.gradient(x)[0];
                const double v0 = G1 * exact_.spatial.value(x);
                for (int k = 0; k < nu_; ++k) {
                    const double dk = k == 0 ? 0.0 : k * std::pow(xi, k - 1) * ds;
                    for (int j = 0; j < nu_; ++j) {
                        const double dj = j == 0 ? 0.0 : j * std::pow(xi, j - 1) * ds;
                        K(k, j) += k == 0 ? w * std::pow(xi, j) : w * dk * dj;
                    }
                    ru(k) += k == 0 ? w * u0 : w * dk * du0;
                }
                for (int k = 0; k < nv_; ++k) {
                    for (int j = 0; j < nv_; ++j) Mv(k, j) += w * std::pow(xi, k + j);
                    rv(k) += w * std::pow(xi, k) * v0;
                }
            }
            X.segment(u_index(e, 0), nu_) = K.fullPivLu().solve(ru);
            X.segment(v_index(e, 0), nv_) = Mv.fullPivLu().solve(rv);
        }
        return X;
    }

    Problem p_;
    vofdg::SolutionBundle exact_;
    double h_ = 0.0;
    int nu_ = 0, nv_ = 0, Nu_ = 0, n_ = 0;
    Eigen::MatrixXd T_, A_, E_;
};

} // namespace reference
