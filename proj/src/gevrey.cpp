#include "stefan/gevrey.hpp"

#include <cmath>
#include <string>

#include "stefan/errors.hpp"

namespace stefan {

namespace {

// exp() underflows double range near 745; beyond this cutoff on the inner
// exponent the bump and every derivative chain through it are below 1e-300,
// so they are returned as exact zeros. This also caps the growth of the
// per-order recurrence factors (omega+j-1)/(tau*T) inside the live band.
constexpr double kUnderflowCut = 700.0;

// 5-point Gauss-Legendre nodes/weights on [0,1]
constexpr double kGlx[5] = {0.04691007703066800, 0.23076534494715845, 0.5,
                            0.76923465505284155, 0.95308992296933200};
constexpr double kGlw[5] = {0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
                            0.23931433524968324, 0.11846344252809454};

} // namespace

GevreyTransition::GevreyTransition(double t0, double T, double omega, int max_order)
    : t0_(t0), T_(T), omega_(omega), max_order_(max_order) {
    if (!(T > 0.0)) throw validation_error("transition duration must be positive");
    if (!(omega > 0.0)) throw validation_error("transition exponent omega must be positive");
    if (max_order < 1) throw validation_error("transition max_order must be at least 1");
    if (max_order + 2 > binom_max_order())
        throw capability_error("transition max_order " + std::to_string(max_order) +
                               " exceeds the supported stack depth " +
                               std::to_string(binom_max_order() - 2));

    // Cumulative integral of the bump on a fixed grid; evaluation later adds a
    // Gauss segment from the nearest node, so the table granularity does not
    // limit accuracy. The integrand is symmetric about 1/2 by construction.
    table_n_ = 2048;
    cdf_.assign(static_cast<std::size_t>(table_n_) + 1, 0.0);
    const double h = 1.0 / table_n_;
    for (int i = 0; i < table_n_; ++i) {
        double s = 0.0;
        for (int q = 0; q < 5; ++q) s += kGlw[q] * bump((i + kGlx[q]) * h);
        cdf_[static_cast<std::size_t>(i) + 1] = cdf_[static_cast<std::size_t>(i)] + s * h;
    }
    norm_ = cdf_.back();
}

double GevreyTransition::bump(double tau) const {
    if (tau <= 0.0 || tau >= 1.0) return 0.0;
    const double p = std::pow(tau * (1.0 - tau), -omega_);
    return p > kUnderflowCut ? 0.0 : std::exp(-p);
}

double GevreyTransition::cdf(double tau) const {
    if (tau <= 0.0) return 0.0;
    if (tau >= 1.0) return norm_;
    const double h = 1.0 / table_n_;
    int i = static_cast<int>(tau * table_n_);
    if (i >= table_n_) i = table_n_ - 1;
    const double a = i * h;
    const double w = tau - a;
    double s = 0.0;
    for (int q = 0; q < 5; ++q) s += kGlw[q] * bump(a + kGlx[q] * w);
    return cdf_[static_cast<std::size_t>(i)] + s * w;
}

double GevreyTransition::value(double t) const {
    return cdf((t - t0_) / T_) / norm_;
}

void GevreyTransition::u_stack(double tau, int order, std::vector<double>& u) const {
    // u(t) = -(tau(1-tau))^(-omega) in physical time. With the rising-factorial
    // ladders A_j = (omega)_j / (tau T)^j and B_m = (omega)_m / ((1-tau) T)^m,
    //   u^(k) = -(tau(1-tau))^(-omega) * sum_j C(k,j) (-1)^j A_j B_{k-j}.
    u.assign(static_cast<std::size_t>(order) + 1, 0.0);
    const double p = std::pow(tau * (1.0 - tau), -omega_);
    std::vector<double> A(static_cast<std::size_t>(order) + 1, 1.0);
    std::vector<double> B(static_cast<std::size_t>(order) + 1, 1.0);
    for (int j = 1; j <= order; ++j) {
        A[static_cast<std::size_t>(j)] = A[static_cast<std::size_t>(j) - 1] * (omega_ + j - 1) / (tau * T_);
        B[static_cast<std::size_t>(j)] = B[static_cast<std::size_t>(j) - 1] * (omega_ + j - 1) / ((1.0 - tau) * T_);
    }
    for (int k = 0; k <= order; ++k) {
        double s = 0.0;
        double sign = 1.0;
        for (int j = 0; j <= k; ++j) {
            s += sign * binom(k, j) * A[static_cast<std::size_t>(j)] * B[static_cast<std::size_t>(k - j)];
            sign = -sign;
        }
        u[static_cast<std::size_t>(k)] = -p * s;
    }
}

Jet GevreyTransition::jets(double t, int order) const {
    if (order > max_order_)
        throw capability_error("transition derivative order " + std::to_string(order) +
                               " requested, configured maximum is " + std::to_string(max_order_));
    Jet out(order);
    const double tau = (t - t0_) / T_;
    if (tau <= 0.0) return out;                       // identically 0 before the window
    if (tau >= 1.0) { out[0] = 1.0; return out; }     // identically 1 after it
    const double p = std::pow(tau * (1.0 - tau), -omega_);
    if (p > kUnderflowCut) {
        // underflow guard band: the bump and all its derivative chains are
        // below double range, so the stack is flat here too
        out[0] = (tau < 0.5) ? 0.0 : 1.0;
        return out;
    }
    out[0] = cdf(tau) / norm_;
    if (order == 0) return out;

    std::vector<double> u;
    u_stack(tau, order, u);

    // derivative ladder for g = exp(u): g^(n) = sum C(n-1,k) u^(k+1) g^(n-1-k)
    std::vector<double> g(static_cast<std::size_t>(order), 0.0);  // g^(0..order-1)
    g[0] = std::exp(-p);
    for (int n = 1; n < order; ++n) {
        double s = 0.0;
        for (int k = 0; k < n; ++k)
            s += binom(n - 1, k) * u[static_cast<std::size_t>(k) + 1] * g[static_cast<std::size_t>(n - 1 - k)];
        g[static_cast<std::size_t>(n)] = s;
    }
    const double zt = norm_ * T_;
    for (int n = 1; n <= order; ++n) out[n] = g[static_cast<std::size_t>(n) - 1] / zt;
    if (!jet_finite(out))
        throw capability_error("transition stack overflowed at order " + std::to_string(order) +
                               " (transition too steep for this depth; lower the order or "
                               "stretch the duration)");
    return out;
}

} // namespace stefan
