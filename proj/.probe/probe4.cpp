// Full-horizon closed-loop probes: production law (lab-anchored reference)
// vs interface-anchored error sampling, 25 h scenario.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "stefan/config.hpp"
#include "stefan/controller.hpp"
#include "stefan/kernel.hpp"
#include "stefan/material.hpp"
#include "stefan/reference.hpp"
#include "stefan/simulator.hpp"

using namespace stefan;
using clk = std::chrono::steady_clock;

static double secs(clk::time_point a, clk::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

struct Tracker {
    double peak_l2s = 0.0, peak_l2l = 0.0, min_adg = 1e300, max_adg = 0.0;
    double last_print = -1e300;
    void row(const RunRow& r, double print_every) {
        peak_l2s = std::max(peak_l2s, r.l2_solid);
        peak_l2l = std::max(peak_l2l, r.l2_liquid);
        min_adg = std::min(min_adg, std::abs(r.dgamma));
        max_adg = std::max(max_adg, std::abs(r.dgamma));
        if (r.t - last_print >= print_every - 1e-9) {
            std::printf("  t=%8.0f  dg=%+.5e  dgdot=%+.3e  l2s=%.4e  l2l=%.4e  qs=%+.4e ql=%+.4e\n",
                        r.t, r.dgamma, r.dgamma_dot, r.l2_solid, r.l2_liquid, r.qs, r.ql);
            last_print = r.t;
        }
    }
    void summary(const RunLog& log) {
        std::printf("  completed=%d steps=%lld%s%s\n", log.completed ? 1 : 0, log.steps,
                    log.abort_reason.empty() ? "" : " abort: ", log.abort_reason.c_str());
        if (!log.rows.empty()) {
            const RunRow& r = log.rows.back();
            std::printf("  final: t=%.0f dg=%+.5e l2s=%.4e l2l=%.4e\n", r.t, r.dgamma,
                        r.l2_solid, r.l2_liquid);
            std::printf("  peaks: l2s=%.4e l2l=%.4e  |dg| in [%.4e, %.4e]\n", peak_l2s, peak_l2l,
                        min_adg, max_adg);
            std::printf("  ratios: l2s %.3f%%  l2l %.3f%%  |dg|final/initial %.4f\n",
                        100.0 * r.l2_solid / peak_l2s, 100.0 * r.l2_liquid / peak_l2l,
                        std::abs(r.dgamma) / std::abs(log.rows.front().dgamma));
        }
    }
};

int main() {
    Scenario sc;
    sc.kernel_points = 41;

    auto t0 = clk::now();
    FlatTrajectory traj(sc.gamma_start, sc.gamma_end, sc.y1_start, sc.y1_end, sc.duration,
                        sc.omega, sc.resolved_planner_order());
    ReferenceField ref(sc.material, traj, sc.series_terms, sc.coefficient_depth());
    KernelGridGeom geom = KernelGridGeom::from_points(sc.material.domain_extent(), sc.kernel_points);
    KernelTimeSeries ts = build_kernel_time_series(ref, sc.mu, sc.nu, geom, 0.0, sc.duration, 33, 1);
    auto t1 = clk::now();
    std::printf("setup (33 kernel samples, Ns=41): %.2f s\n", secs(t0, t1));

    ControllerConfig cc;
    cc.mu = sc.mu;
    cc.nu = sc.nu;
    Controller ctrl(ref, ts, cc);

    SimConfig simc;
    simc.cells = sc.cells_per_phase;
    simc.t_end = sc.t_end;
    simc.output_interval = 300.0;
    simc.dgamma0 = sc.dgamma0;
    simc.dgamma_dot0 = sc.dgamma_dot0;

    // Run 1: production law, lab-anchored reference comparison.
    {
        std::printf("\n== run B: production control law ==\n");
        Tracker tr;
        RunInput in;
        in.controller = &ctrl;
        auto ta = clk::now();
        RunLog log = run_closed_loop(ref, simc, in, [&](const RunRow& r) { tr.row(r, 3600.0); });
        auto tb = clk::now();
        tr.summary(log);
        std::printf("  wall: %.1f s\n", secs(ta, tb));
    }

    // Run 2: same gains, error sampled against the reference shape anchored at
    // the measured front (and feedforward at the measured boundary offset).
    {
        std::printf("\n== run A: interface-anchored error sampling ==\n");
        Tracker tr;
        RunInput in;
        in.custom = [&](Phase p, double t, const SimState& st) {
            PlantMeasurement m = sample_measurement(st, sc.material);
            const PhaseParams& pp = sc.material.phase(p);
            double beta = phase_beta(p);
            double alpha = pp.diffusivity();
            auto gr = ref.trajectory().gamma_jet(t, 2);
            ReferenceSlice s = ref.slice(p, t);
            const auto& grids = ts.of(p);
            // bracket t in the kernel tabulation
            std::size_t hi = 1;
            while (hi + 1 < ts.times.size() && ts.times[hi] < t) ++hi;
            const KernelGrid& g0 = grids[hi - 1];
            const KernelGrid& g1 = grids[hi];
            double theta = (t - g0.t) / (g1.t - g0.t);
            theta = std::clamp(theta, 0.0, 1.0);

            double v = beta * gr[1];
            double xb = beta * (pp.boundary - m.gamma);
            auto ehat = [&](double xi) {
                double z = m.gamma + beta * xi;
                return measurement_value(m, z) - s.value(beta * xi);
            };
            auto kval = [&](double xi) {
                double eta = xb + xi, sig = xb - xi;
                return (1.0 - theta) * g0.eval(eta, sig) + theta * g1.eval(eta, sig);
            };
            auto kd1 = [&](double xi) {
                double eta = xb + xi, sig = xb - xi;
                return (1.0 - theta) * g0.eval_d1(eta, sig) + theta * g1.eval_d1(eta, sig);
            };
            double u = (kval(xb) + cc.nu - v / (2.0 * alpha)) * ehat(xb);
            double h = g0.geom.delta;
            auto f = [&](double xi) {
                return (kd1(xi) - cc.nu * kval(xi)) * std::exp(v * (xi - xb) / (2.0 * alpha)) *
                       ehat(xi);
            };
            int nfull = static_cast<int>(std::floor(xb / h * (1.0 - 1e-14)));
            for (int q = 0; q < nfull; ++q) u += f((q + 0.5) * h) * h;
            double rem = xb - nfull * h;
            if (rem > 1e-14 * xb) u += f(nfull * h + 0.5 * rem) * rem;
            return pp.conductivity * (u + beta * s.dz(pp.boundary - m.gamma, 1));
        };
        auto ta = clk::now();
        RunLog log = run_closed_loop(ref, simc, in, [&](const RunRow& r) { tr.row(r, 3600.0); });
        auto tb = clk::now();
        tr.summary(log);
        std::printf("  wall: %.1f s\n", secs(ta, tb));
    }
    return 0;
}
