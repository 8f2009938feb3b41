// scratch numerical probes; not part of the build
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "stefan/config.hpp"
#include "stefan/kernel.hpp"
#include "stefan/material.hpp"
#include "stefan/reference.hpp"

using namespace stefan;

static double now_s() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

int main() {
    Scenario sc;  // defaults
    const StefanMaterial& mat = sc.material;
    const double ext = mat.domain_extent();
    std::printf("extent=%g alpha_s=%.6e alpha_l=%.6e kappa_s=%.6e kappa_l=%.6e\n", ext,
                mat.solid.diffusivity(), mat.liquid.diffusivity(), mat.kappa(Phase::solid),
                mat.kappa(Phase::liquid));

    // ---- probe A: reference field, truncation convergence and residuals ----
    {
        const int order81 = sc.resolved_planner_order();
        std::printf("resolved planner order (Nsig=81, M=20): %d\n", order81);
        // small depth for evaluation-only fields
        auto make_field = [&](int M, const FlatTrajectory& traj) {
            const int dep = (M + 1) / 2 + 2;
            return ReferenceField(mat, traj, M, dep);
        };
        FlatTrajectory traj(sc.gamma_start, sc.gamma_end, sc.y1_start, sc.y1_end, sc.duration,
                            sc.omega, 40 / 2 + 4);
        ReferenceField f10 = make_field(10, traj);
        ReferenceField f16 = make_field(16, traj);
        ReferenceField f20 = make_field(20, traj);
        ReferenceField f24 = make_field(24, traj);
        ReferenceField f40 = make_field(40, traj);

        double shift_10_20 = 0.0, shift_20_40 = 0.0, shift_16_24 = 0.0;
        double res8a = 0.0, res8d = 0.0;
        double max_melt_grad = 0.0;
        for (int it = 0; it <= 12; ++it) {
            const double t = sc.duration * it / 12.0;
            for (Phase p : {Phase::solid, Phase::liquid}) {
                const double zb = f20.boundary_offset(p, t);
                ReferenceSlice s10 = f10.slice(p, t);
                ReferenceSlice s16 = f16.slice(p, t);
                ReferenceSlice s20 = f20.slice(p, t);
                ReferenceSlice s24 = f24.slice(p, t);
                ReferenceSlice s40 = f40.slice(p, t);
                for (int iz = 0; iz <= 10; ++iz) {
                    const double z = zb * iz / 10.0;
                    shift_10_20 = std::max(shift_10_20, std::abs(s10.value(z) - s20.value(z)));
                    shift_20_40 = std::max(shift_20_40, std::abs(s20.value(z) - s40.value(z)));
                    shift_16_24 = std::max(shift_16_24, std::abs(s16.value(z) - s24.value(z)));
                    const double r = s20.time_jet(z, 1)[1] - s20.alpha * s20.dz(z, 2) -
                                     f20.trajectory().gamma_dot(t) * s20.dz(z, 1);
                    res8a = std::max(res8a, std::abs(r));
                }
                if (p == Phase::liquid)
                    max_melt_grad = std::max(max_melt_grad, std::abs(s20.dz(0.0, 1)));
            }
            const double gd = f20.trajectory().gamma_dot(t);
            const double sres = mat.kappa(Phase::solid) * f20.slice(Phase::solid, t).dz(0.0, 1) +
                                mat.kappa(Phase::liquid) * f20.slice(Phase::liquid, t).dz(0.0, 1) -
                                gd;
            res8d = std::max(res8d, std::abs(sres));
        }
        std::printf("A: shift10-20=%.3e shift20-40=%.3e shift16-24=%.3e res8a=%.3e res8d=%.3e "
                    "max_melt_grad=%.3f\n",
                    shift_10_20, shift_20_40, shift_16_24, res8a, res8d, max_melt_grad);
    }

    // ---- probe B: kernel midpoint vs successive oracle ----
    {
        FlatTrajectory traj(sc.gamma_start, sc.gamma_end, sc.y1_start, sc.y1_end, sc.duration,
                            sc.omega, 140);
        const double t = 0.5 * sc.duration;
        for (double mu : {-1e-2, -1e-3, -1e-4}) {
            double dev[2] = {0, 0};
            for (int gi = 0; gi < 2; ++gi) {
                const int nsig = gi == 0 ? 8 : 16;
                ReferenceField ref(mat, traj, sc.series_terms,
                                   (nsig - 1) + (sc.series_terms + 1) / 2);
                KernelGridGeom geom = KernelGridGeom::from_points(ext, nsig);
                CoefficientField cf = assemble_coefficients(ref, Phase::solid, t, mu, 0.0, geom);
                KernelGrid g = solve_kernel_midpoint(cf);

                const int refine = 8;
                const int nf = (nsig - 1) * refine + 1;
                ReferenceField reff(mat, traj, sc.series_terms,
                                    std::min(120, (nf - 1)) + (sc.series_terms + 1) / 2);
                KernelGridGeom geomf = KernelGridGeom::from_points(ext, nf);
                CoefficientField cff = assemble_coefficients(reff, Phase::solid, t, mu, 0.0, geomf);
                std::vector<std::pair<double, double>> pts;
                double kmax = 0.0;
                for (int j = 0; j < nsig; ++j)
                    for (int i = j; i <= geom.n_eta - j; ++i) {
                        pts.push_back({i * geom.delta, j * geom.delta});
                        kmax = std::max(kmax, std::abs(g.at(i, j)));
                    }
                SuccessiveInfo info;
                const double t0 = now_s();
                std::vector<double> orc = solve_kernel_successive(cff, pts, 1e-9 * kmax, 200, &info);
                const double t1 = now_s();
                std::size_t q = 0;
                double d = 0.0, omax = 0.0;
                for (int j = 0; j < nsig; ++j)
                    for (int i = j; i <= geom.n_eta - j; ++i) {
                        d = std::max(d, std::abs(g.at(i, j) - orc[q]));
                        omax = std::max(omax, std::abs(orc[q]));
                        ++q;
                    }
                dev[gi] = d;
                std::printf("B: mu=%g Nsig=%d kmax=%.4e oracle_max=%.4e it=%d incr=%.2e dev=%.4e "
                            "(oracle %.2f s)\n",
                            mu, nsig, kmax, omax, info.iterations, info.last_increment, d, t1 - t0);
            }
            std::printf("B: mu=%g empirical order = %.3f  (dev/Delta C: %.3e)\n", mu,
                        std::log2(dev[0] / dev[1]), dev[0] / (ext / 7));
        }
    }

    // ---- probe C: timing of the production solve ----
    {
        FlatTrajectory traj(sc.gamma_start, sc.gamma_end, sc.y1_start, sc.y1_end, sc.duration,
                            sc.omega, sc.resolved_planner_order());
        ReferenceField ref(mat, traj, sc.series_terms,
                           (sc.kernel_points - 1) + (sc.series_terms + 1) / 2);
        KernelGridGeom geom = KernelGridGeom::from_points(ext, sc.kernel_points);
        const double t0 = now_s();
        CoefficientField cf =
            assemble_coefficients(ref, Phase::solid, 0.5 * sc.duration, sc.mu, 0.0, geom);
        const double t1 = now_s();
        KernelGrid g = solve_kernel_midpoint(cf);
        const double t2 = now_s();
        std::printf("C: Nsig=81 assemble %.3f s, solve %.3f s, kmax=%.4e, k(ext,ext? apex)=%.4e\n",
                    t1 - t0, t2 - t1, [&] {
                        double m = 0;
                        for (double v : g.v) m = std::max(m, std::abs(v));
                        return m;
                    }(),
                    g.at(geom.n_eta / 2, geom.n_sigma - 1));
    }
    return 0;
}
