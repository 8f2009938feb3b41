// scratch: omega sweep for the truncation-shift bound; not part of the build
#include <cmath>
#include <cstdio>
#include <vector>

#include "stefan/config.hpp"
#include "stefan/gevrey.hpp"
#include "stefan/kernel.hpp"
#include "stefan/material.hpp"
#include "stefan/reference.hpp"

using namespace stefan;

int main() {
    Scenario sc;
    const StefanMaterial& mat = sc.material;

    for (double omega : {1.1, 1.5, 2.0, 2.5, 3.0}) {
        FlatTrajectory traj(sc.gamma_start, sc.gamma_end, sc.y1_start, sc.y1_end, sc.duration,
                            omega, 40 / 2 + 4);
        auto make_field = [&](int M) { return ReferenceField(mat, traj, M, (M + 1) / 2 + 2); };
        ReferenceField f10 = make_field(10), f16 = make_field(16), f20 = make_field(20),
                       f24 = make_field(24), f40 = make_field(40);
        double s1020 = 0, s1624 = 0, s2040 = 0, res8a = 0, mg = 0, gdmax = 0;
        for (int it = 0; it <= 16; ++it) {
            const double t = sc.duration * it / 16.0;
            gdmax = std::max(gdmax, std::abs(traj.gamma_dot(t)));
            for (Phase p : {Phase::solid, Phase::liquid}) {
                const double zb = f20.boundary_offset(p, t);
                ReferenceSlice a10 = f10.slice(p, t), a16 = f16.slice(p, t),
                               a20 = f20.slice(p, t), a24 = f24.slice(p, t),
                               a40 = f40.slice(p, t);
                for (int iz = 0; iz <= 10; ++iz) {
                    const double z = zb * iz / 10.0;
                    s1020 = std::max(s1020, std::abs(a10.value(z) - a20.value(z)));
                    s1624 = std::max(s1624, std::abs(a16.value(z) - a24.value(z)));
                    s2040 = std::max(s2040, std::abs(a20.value(z) - a40.value(z)));
                    res8a = std::max(res8a, std::abs(a20.time_jet(z, 1)[1] -
                                                     a20.alpha * a20.dz(z, 2) -
                                                     traj.gamma_dot(t) * a20.dz(z, 1)));
                }
                if (p == Phase::liquid) mg = std::max(mg, std::abs(a20.dz(0.0, 1)));
            }
        }
        // Gevrey fit over n<=8 on the raw transition: aleph from successive ratios
        GevreyTransition phi(0.0, sc.duration, omega, 12);
        double supn[9] = {0};
        for (int k = 1; k < 400; ++k) {
            const double t = sc.duration * k / 400.0;
            Jet j = phi.jets(t, 8);
            for (int n = 0; n <= 8; ++n) supn[n] = std::max(supn[n], std::abs(j[n]));
        }
        // fit log sup|phi^(n)| ~ log D * (n+1) + aleph * log(n!)
        double sx2 = 0, sxy = 0, sx = 0, sy = 0, sxz = 0, sz = 0, sz2 = 0, syz = 0;
        int cnt = 0;
        for (int n = 2; n <= 8; ++n) {
            const double x = n + 1, z = std::lgamma(n + 1.0), y = std::log(supn[n]);
            sx += x; sy += y; sz += z; sx2 += x * x; sz2 += z * z; sxy += x * y; sxz += x * z;
            syz += z * y; ++cnt;
        }
        const double det = (sx2 * sz2 - sxz * sxz) - (sx * (sx * sz2 - sz * sxz)) / cnt +
                           (sz * (sx * sxz - sz * sx2)) / cnt;
        (void)det;
        // simpler: two-parameter fit on centered data
        const double mx = sx / cnt, my = sy / cnt, mz = sz / cnt;
        double a11 = sx2 / cnt - mx * mx, a12 = sxz / cnt - mx * mz, a22 = sz2 / cnt - mz * mz;
        double b1 = sxy / cnt - mx * my, b2 = syz / cnt - mz * my;
        const double dd = a11 * a22 - a12 * a12;
        const double aleph = (a11 * b2 - a12 * b1) / dd;
        std::printf("omega=%.1f: s1020=%.2e s1624=%.2e s2040=%.2e res8a=%.2e meltgrad=%.0f "
                    "gdmax=%.2e aleph_fit=%.3f (bound %.3f)\n",
                    omega, s1020, s1624, s2040, res8a, mg, gdmax, aleph, 1 + 1 / omega + 0.1);
    }

    // kernel order check at omega = 2 with mu = -1e-4 and -3e-4
    for (double omega : {2.0}) {
        FlatTrajectory traj(sc.gamma_start, sc.gamma_end, sc.y1_start, sc.y1_end, sc.duration,
                            omega, 140);
        const double t = 0.5 * sc.duration;
        for (double mu : {-1e-4, -3e-4}) {
            double dev[2] = {0, 0};
            for (int gi = 0; gi < 2; ++gi) {
                const int nsig = gi == 0 ? 8 : 16;
                ReferenceField ref(mat, traj, sc.series_terms,
                                   (nsig - 1) + (sc.series_terms + 1) / 2);
                KernelGridGeom geom = KernelGridGeom::from_points(mat.domain_extent(), nsig);
                CoefficientField cf = assemble_coefficients(ref, Phase::solid, t, mu, 0.0, geom);
                KernelGrid g = solve_kernel_midpoint(cf);
                const int nf = (nsig - 1) * 8 + 1;
                ReferenceField reff(mat, traj, sc.series_terms,
                                    (nf - 1) + (sc.series_terms + 1) / 2);
                KernelGridGeom geomf = KernelGridGeom::from_points(mat.domain_extent(), nf);
                CoefficientField cff = assemble_coefficients(reff, Phase::solid, t, mu, 0, geomf);
                std::vector<std::pair<double, double>> pts;
                double kmax = 0;
                for (int j = 0; j < nsig; ++j)
                    for (int i = j; i <= geom.n_eta - j; ++i) {
                        pts.push_back({i * geom.delta, j * geom.delta});
                        kmax = std::max(kmax, std::abs(g.at(i, j)));
                    }
                SuccessiveInfo info;
                std::vector<double> orc = solve_kernel_successive(cff, pts, 1e-9 * kmax, 200, &info);
                std::size_t q = 0;
                double d = 0;
                for (int j = 0; j < nsig; ++j)
                    for (int i = j; i <= geom.n_eta - j; ++i) d = std::max(d, std::abs(g.at(i, j) - orc[q++]));
                dev[gi] = d;
                std::printf("omega=2 mu=%g Nsig=%d kmax=%.3e dev=%.3e it=%d\n", mu, nsig, kmax, d,
                            info.iterations);
            }
            std::printf("omega=2 mu=%g order=%.3f devC=%.3e\n", mu, std::log2(dev[0] / dev[1]),
                        dev[0] / (mat.domain_extent() / 7));
        }
    }
    return 0;
}
