#include "stefan/jet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stefan/errors.hpp"

namespace stefan {

namespace {

// Pascal triangle, built once. 400 rows cover every order the planner or the
// kernel bookkeeping can legitimately request (stacks top out near 100).
constexpr int kBinomRows = 400;

const std::vector<double>& binom_table() {
    static std::vector<double> tab = [] {
        std::vector<double> t(static_cast<std::size_t>(kBinomRows) * kBinomRows, 0.0);
        for (int n = 0; n < kBinomRows; ++n) {
            t[static_cast<std::size_t>(n) * kBinomRows] = 1.0;
            for (int k = 1; k <= n; ++k) {
                const std::size_t row = static_cast<std::size_t>(n) * kBinomRows;
                const std::size_t prev = static_cast<std::size_t>(n - 1) * kBinomRows;
                t[row + k] = t[prev + k - 1] + (k < n ? t[prev + k] : 0.0);
            }
        }
        return t;
    }();
    return tab;
}

} // namespace

double binom(int n, int k) {
    if (n < 0 || k < 0 || k > n) return 0.0;
    if (n >= kBinomRows)
        throw capability_error("binomial order " + std::to_string(n) +
                               " exceeds supported maximum " + std::to_string(kBinomRows - 1));
    return binom_table()[static_cast<std::size_t>(n) * kBinomRows + k];
}

int binom_max_order() { return kBinomRows - 1; }

Jet jet_const(double v, int order) {
    Jet j(order);
    j.d[0] = v;
    return j;
}

Jet jet_add(const Jet& a, const Jet& b) {
    const int n = std::min(a.order(), b.order());
    Jet r(n);
    for (int m = 0; m <= n; ++m) r[m] = a[m] + b[m];
    return r;
}

Jet jet_sub(const Jet& a, const Jet& b) {
    const int n = std::min(a.order(), b.order());
    Jet r(n);
    for (int m = 0; m <= n; ++m) r[m] = a[m] - b[m];
    return r;
}

Jet jet_scale(const Jet& a, double s) {
    Jet r = a;
    for (double& v : r.d) v *= s;
    return r;
}

Jet jet_mul(const Jet& a, const Jet& b, int order) {
    const int avail = std::min(a.order(), b.order());
    const int n = (order < 0) ? avail : order;
    if (n > avail)
        throw capability_error("jet product to order " + std::to_string(n) +
                               " needs both factors at that order (have " +
                               std::to_string(a.order()) + " and " + std::to_string(b.order()) + ")");
    Jet r(n);
    for (int m = 0; m <= n; ++m) {
        double s = 0.0;
        for (int k = 0; k <= m; ++k) s += binom(m, k) * a[k] * b[m - k];
        r[m] = s;
    }
    return r;
}

Jet jet_dot(const Jet& a) {
    if (a.order() < 1)
        throw capability_error("time derivative of an order-0 stack requested; "
                               "carry at least order 1");
    Jet r(a.order() - 1);
    for (int m = 0; m <= r.order(); ++m) r[m] = a[m + 1];
    return r;
}

Jet jet_exp(const Jet& a) {
    const int n = a.order();
    Jet r(n);
    r[0] = std::exp(a[0]);
    for (int m = 1; m <= n; ++m) {
        double s = 0.0;
        for (int k = 0; k < m; ++k) s += binom(m - 1, k) * a[k + 1] * r[m - 1 - k];
        r[m] = s;
    }
    return r;
}

bool jet_finite(const Jet& a) {
    return std::all_of(a.d.begin(), a.d.end(), [](double v) { return std::isfinite(v); });
}

} // namespace stefan
