#pragma once

#include <vector>

#include "stefan/jet.hpp"

namespace stefan {

// Smooth 0 -> 1 transition on [t0, t0+T] built from the compactly supported
// bump g(tau) = exp(-(tau(1-tau))^(-omega)), tau = (t-t0)/T:
//   Phi(t) = int_0^tau g / int_0^1 g.
// All derivatives vanish identically at both ends, and the derivative bounds
// grow like a Gevrey class of order 1 + 1/omega, which is what makes the
// downstream power series in space converge.
//
// Derivative stacks are produced directly in physical time units; carrying the
// 1/T factor inside the recurrences keeps high orders (n ~ 100) inside double
// range where the normalized-variable form would overflow.
class GevreyTransition {
public:
    GevreyTransition(double t0, double T, double omega, int max_order);

    double value(double t) const;

    // Stack {Phi, Phi', ..., Phi^(order)} at t; exact zeros outside the
    // transition window and inside the underflow guard band at its ends.
    Jet jets(double t, int order) const;

    int max_order() const { return max_order_; }
    double t0() const { return t0_; }
    double duration() const { return T_; }
    double omega() const { return omega_; }

private:
    double t0_, T_, omega_;
    int max_order_;
    double norm_;                 // int_0^1 g(tau) dtau
    std::vector<double> cdf_;     // cumulative integral at table nodes
    int table_n_;                 // number of intervals in cdf_

    double bump(double tau) const;
    double cdf(double tau) const;
    // derivative stack of u(tau(t)) = -(tau(1-tau))^(-omega) w.r.t. t
    void u_stack(double tau, int order, std::vector<double>& u) const;
};

} // namespace stefan
