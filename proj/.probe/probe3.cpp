#include <cmath>
#include <chrono>
#include <cstdio>

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

int main() {
    Scenario sc;  // defaults
    sc.kernel_points = 41;
    std::printf("planner order %d, coeff depth %d\n", sc.resolved_planner_order(),
                sc.coefficient_depth());

    auto t0 = clk::now();
    FlatTrajectory traj(sc.gamma_start, sc.gamma_end, sc.y1_start, sc.y1_end, sc.duration,
                        sc.omega, sc.resolved_planner_order());
    ReferenceField ref(sc.material, traj, sc.series_terms, sc.coefficient_depth());
    auto t1 = clk::now();
    std::printf("planner+field: %.2f s\n", secs(t0, t1));

    KernelGridGeom geom = KernelGridGeom::from_points(sc.material.domain_extent(), sc.kernel_points);
    KernelTimeSeries ts = build_kernel_time_series(ref, sc.mu, sc.nu, geom, 0.0, sc.duration, 9, 1);
    auto t2 = clk::now();
    std::printf("kernels (9 samples, Ns=41): %.2f s\n", secs(t1, t2));

    ControllerConfig cc;
    cc.mu = sc.mu;
    cc.nu = sc.nu;
    Controller ctrl(ref, ts, cc);

    // conservation ledger over a few manual steps
    {
        SimConfig scfg;
        scfg.cells = 41;
        SimState st = make_initial_state(ref, scfg);
        double H = relative_enthalpy(st, sc.material);
        double B = H - sc.material.melt_density * sc.material.latent_heat * st.gamma;
        FeedforwardTable tab = build_feedforward_table(ref, 0.0, 600.0, 11);
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            double qs = tab.at(Phase::solid, st.t), ql = tab.at(Phase::liquid, st.t);
            if (!step(st, sc.material, scfg, qs, ql, 0.2)) { std::printf("rejected!\n"); break; }
            double H2 = relative_enthalpy(st, sc.material);
            double B2 = H2 - sc.material.melt_density * sc.material.latent_heat * st.gamma;
            double resid = (B2 - B) / 0.2 - (qs + ql);
            double rel = std::abs(resid) / (std::abs(qs) + std::abs(ql) + 1.0);
            if (rel > worst) worst = rel;
            B = B2;
        }
        std::printf("ledger worst rel resid: %.3e\n", worst);
    }

    // feedforward-only, zero perturbation, 2 h
    {
        SimConfig scfg;
        scfg.cells = 41;
        scfg.t_end = 7200;
        scfg.output_interval = 600;
        scfg.dgamma0 = 0.0;
        scfg.dgamma_dot0 = 0.0;
        FeedforwardTable tab = build_feedforward_table(ref, 0.0, sc.duration, 301);
        RunInput in;
        in.feedforward = &tab;
        RunLog log = run_closed_loop(ref, scfg, in);
        std::printf("ff-only: completed=%d steps=%lld rows=%zu\n", log.completed ? 1 : 0,
                    log.steps, log.rows.size());
        double mx = 0.0;
        for (auto& r : log.rows) mx = std::max(mx, std::abs(r.dgamma));
        std::printf("ff-only max |dgamma| over 2h: %.3e m\n", mx);
        auto& rl = log.rows.back();
        std::printf("ff-only last: t=%g dg=%.3e l2s=%.3e l2l=%.3e\n", rl.t, rl.dgamma, rl.l2_solid,
                    rl.l2_liquid);
    }

    // pure field perturbation, dgamma = 0: target decay exp(mu t)
    {
        SimConfig scfg;
        scfg.cells = 41;
        scfg.t_end = 1200;
        scfg.output_interval = 100;
        scfg.dgamma0 = 0.0;
        scfg.dgamma_dot0.reset();
        scfg.perturbation = [](Phase, double zt) {
            double l = 0.2;
            double a = std::abs(zt);
            if (a >= l) return 0.0;
            double sp = std::sin(3.14159265358979 * a / l);
            return 1.0 * sp * sp;
        };
        RunInput in;
        in.controller = &ctrl;
        RunLog log = run_closed_loop(ref, scfg, in);
        std::printf("field-pert run: completed=%d\n", log.completed ? 1 : 0);
        for (auto& r : log.rows)
            std::printf("  t=%5.0f dg=%+.3e l2s=%.4e l2l=%.4e qs=%+.3e ql=%+.3e\n", r.t,
                        r.dgamma, r.l2_solid, r.l2_liquid, r.qs, r.ql);
    }

    // closed loop with the full perturbation, 2 h
    auto t3 = clk::now();
    {
        SimConfig scfg;
        scfg.cells = 41;
        scfg.t_end = 7200;
        scfg.output_interval = 600;
        scfg.dgamma0 = 0.010;
        scfg.dgamma_dot0 = -3e-3 / 3600.0;
        RunInput in;
        in.controller = &ctrl;
        RunLog log = run_closed_loop(ref, scfg, in);
        std::printf("closed: completed=%d steps=%lld\n", log.completed ? 1 : 0, log.steps);
        for (auto& r : log.rows)
            std::printf("  t=%6.0f dg=%+.4e dgdot=%+.3e qs=%+.4e ql=%+.4e l2s=%.3e l2l=%.3e\n",
                        r.t, r.dgamma, r.dgamma_dot, r.qs, r.ql, r.l2_solid, r.l2_liquid);
    }
    auto t4 = clk::now();
    std::printf("closed-loop 2h sim: %.2f s\n", secs(t3, t4));
    return 0;
}
