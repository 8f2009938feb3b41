#pragma once

#include <vector>

namespace stefan {

// Truncated stack of time derivatives of a scalar quantity:
// d[m] holds the m-th derivative at the evaluation instant, m = 0..order.
// Everything downstream (series coefficients, kernel coefficient tables)
// manipulates these stacks, so the arithmetic lives here in one place.
struct Jet {
    std::vector<double> d;

    Jet() = default;
    explicit Jet(int order) : d(static_cast<std::size_t>(order) + 1, 0.0) {}

    int order() const { return static_cast<int>(d.size()) - 1; }
    double& operator[](int m) { return d[static_cast<std::size_t>(m)]; }
    double operator[](int m) const { return d[static_cast<std::size_t>(m)]; }
    double value() const { return d[0]; }
};

// Binomial coefficient from a cached Pascal triangle. Caps at a generous
// static limit; orders beyond raise capability_error naming the limit.
double binom(int n, int k);
int binom_max_order();

Jet jet_const(double v, int order);

// Result order = min of operand orders unless stated otherwise.
Jet jet_add(const Jet& a, const Jet& b);
Jet jet_sub(const Jet& a, const Jet& b);
Jet jet_scale(const Jet& a, double s);

// Leibniz product, truncated to `order` (defaults to min of operands).
Jet jet_mul(const Jet& a, const Jet& b, int order = -1);

// Time differentiation: drops the leading entry, order decreases by one.
Jet jet_dot(const Jet& a);

// exp(a) as a stack of the same order, via the standard recurrence
// E^(n) = sum_{k<n} C(n-1,k) a^(k+1) E^(n-1-k).
Jet jet_exp(const Jet& a);

bool jet_finite(const Jet& a);

} // namespace stefan
