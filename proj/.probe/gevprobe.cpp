#include <cmath>
#include <cstdio>
#include <algorithm>
#include "stefan/gevrey.hpp"
using namespace stefan;
int main() {
    double T = 90000.0, om = 1.1;
    GevreyTransition phi(0.0, T, om, 12);
    // fitted D: smallest D with sup|phi^(n)| <= D^(n+1) (n!)^(1+1/om) for n<=8,
    // derivatives taken in normalized time (multiply by T^n)
    double D = 0.0;
    for (int n = 1; n <= 8; ++n) {
        double sup = 0.0;
        for (int i = 1; i < 4000; ++i) {
            double t = T * i / 4000.0;
            sup = std::max(sup, std::abs(phi.jets(t, n)[n]) * std::pow(T, n));
        }
        double fact = std::tgamma(n + 1.0);
        double dn = std::pow(sup / std::pow(fact, 1.0 + 1.0 / om), 1.0 / (n + 1));
        printf("n=%d sup=%.6e D_n=%.6f\n", n, sup, dn);
        D = std::max(D, dn);
    }
    printf("fitted D = %.6f\n", D);
    // symmetry residual
    double symw = 0.0;
    for (int i = 1; i < 200; ++i) {
        double s = T * i / 200.0;
        symw = std::max(symw, std::abs(phi.value(T - s) - (1.0 - phi.value(s))));
    }
    printf("symmetry worst = %.3e\n", symw);
    // derivative vs central FD
    double fdw = 0.0;
    for (double tau : {0.2, 0.35, 0.5, 0.65, 0.8}) {
        double t = tau * T, h = 50.0;
        double fd = (phi.value(t + h) - phi.value(t - h)) / (2.0 * h);
        double an = phi.jets(t, 1)[1];
        fdw = std::max(fdw, std::abs(fd - an) / std::abs(an));
    }
    printf("fd rel worst = %.3e\n", fdw);
    return 0;
}
