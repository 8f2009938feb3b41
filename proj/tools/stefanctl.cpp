// stefanctl: command-line driver around the stefan library.
//
//   plan     reference trajectory + temperature profiles from the flat outputs
//   kernels  backstepping gain tables for both phases
//   run      closed-loop (or feedforward-only) tracking simulation
//   verify   built-in cross-check suite
//
// Artifacts are deterministic: the same configuration reproduces the same
// bytes. Exit codes: 0 ok, 1 failed check/verification, 2 invalid input or
// unsupported request, 3 numerical divergence, 64 command-line usage.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stefan/config.hpp"
#include "stefan/controller.hpp"
#include "stefan/csv.hpp"
#include "stefan/errors.hpp"
#include "stefan/kernel.hpp"
#include "stefan/material.hpp"
#include "stefan/reference.hpp"
#include "stefan/simulator.hpp"
#include "stefan/verify.hpp"

using nlohmann::ordered_json;

namespace stefan {
namespace {

std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty()) return name;
    return dir.back() == '/' ? dir + name : dir + "/" + name;
}

void write_json_file(const std::string& path, const ordered_json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

std::string fmt_sci(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

ordered_json material_json(const StefanMaterial& m) {
    auto phase = [](const PhaseParams& p) {
        return ordered_json{{"conductivity", p.conductivity},
                            {"density", p.density},
                            {"specific_heat", p.specific_heat},
                            {"boundary", p.boundary},
                            {"diffusivity", p.diffusivity()}};
    };
    return ordered_json{{"solid", phase(m.solid)},
                        {"liquid", phase(m.liquid)},
                        {"melting_temperature", m.melting_temperature},
                        {"latent_heat", m.latent_heat},
                        {"melt_density", m.melt_density}};
}

ordered_json scenario_json(const Scenario& sc) {
    return ordered_json{
        {"material", material_json(sc.material)},
        {"plan",
         {{"gamma_start", sc.gamma_start},
          {"gamma_end", sc.gamma_end},
          {"duration", sc.duration},
          {"y1_start", sc.y1_start},
          {"y1_end", sc.y1_end},
          {"omega", sc.omega},
          {"planner_order", sc.resolved_planner_order()},
          {"series_terms", sc.series_terms}}},
        {"kernels",
         {{"kernel_points", sc.kernel_points},
          {"kernel_time_samples", sc.kernel_time_samples},
          {"kernel_trapezoid", sc.kernel_trapezoid}}},
        {"control", {{"mu", sc.mu}, {"nu", sc.nu}, {"quadrature_step", sc.quadrature_step}}},
        {"plant",
         {{"cells_per_phase", sc.cells_per_phase},
          {"t_end", sc.t_end},
          {"output_interval", sc.output_interval},
          {"dgamma0", sc.dgamma0},
          {"dgamma_dot0", sc.dgamma_dot0},
          {"dt_safety", sc.dt_safety},
          {"guard_band", sc.guard_band}}}};
}

ordered_json checks_json(const std::vector<VerifyCheck>& checks) {
    ordered_json arr = ordered_json::array();
    for (const auto& c : checks)
        arr.push_back(ordered_json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return arr;
}

bool print_checks(const std::vector<VerifyCheck>& checks) {
    bool ok = true;
    for (const auto& c : checks) {
        std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
        ok = ok && c.passed;
    }
    return ok;
}

const char* const kPlotPlanPy = R"PY(#!/usr/bin/env python3
"""Render plan_trajectory.csv and plan_profiles.csv from this directory."""
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def rows(name):
    with open(os.path.join(HERE, name)) as f:
        rdr = csv.reader(line for line in f if not line.startswith("#"))
        header = next(rdr)
        return {h: i for i, h in enumerate(header)}, list(rdr)


def main():
    col, tr = rows("plan_trajectory.csv")
    t = [float(r[col["t"]]) / 3600.0 for r in tr]
    fig, ax = plt.subplots(3, 1, figsize=(7, 9), sharex=True)
    ax[0].plot(t, [1e3 * float(r[col["gamma_r"]]) for r in tr])
    ax[0].set_ylabel("interface position [mm]")
    ax[1].plot(t, [3.6e6 * float(r[col["gamma_dot_r"]]) for r in tr])
    ax[1].set_ylabel("growth rate [mm/h]")
    ax[2].plot(t, [float(r[col["q_solid"]]) for r in tr], label="solid")
    ax[2].plot(t, [float(r[col["q_liquid"]]) for r in tr], label="liquid")
    ax[2].set_ylabel("boundary heat flux [W/m$^2$]")
    ax[2].set_xlabel("t [h]")
    ax[2].legend()
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, "plan_trajectory.png"), dpi=160)

    col, pr = rows("plan_profiles.csv")
    fig2, ax2 = plt.subplots(figsize=(7, 5))
    by_t = {}
    for r in pr:
        key = float(r[col["t"]])
        by_t.setdefault(key, []).append((float(r[col["z"]]), float(r[col["temperature"]])))
    for ti in sorted(by_t):
        pts = sorted(by_t[ti])
        ax2.plot([1e3 * z for z, _ in pts], [T for _, T in pts],
                 label="t = %.1f h" % (ti / 3600.0))
    ax2.set_xlabel("z [mm]")
    ax2.set_ylabel("temperature [K]")
    ax2.legend(fontsize=8)
    fig2.tight_layout()
    fig2.savefig(os.path.join(HERE, "plan_profiles.png"), dpi=160)


if __name__ == "__main__":
    main()
)PY";

const char* const kPlotRunPy = R"PY(#!/usr/bin/env python3
"""Render run_log.csv and run_profiles.csv from this directory."""
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def rows(name):
    with open(os.path.join(HERE, name)) as f:
        rdr = csv.reader(line for line in f if not line.startswith("#"))
        header = next(rdr)
        return {h: i for i, h in enumerate(header)}, list(rdr)


def main():
    col, lg = rows("run_log.csv")
    t = [float(r[col["t"]]) / 3600.0 for r in lg]
    fig, ax = plt.subplots(3, 1, figsize=(7, 9), sharex=True)
    ax[0].plot(t, [1e3 * float(r[col["dgamma"]]) for r in lg])
    ax[0].set_ylabel("front error [mm]")
    ax[1].semilogy(t, [max(float(r[col["l2_solid"]]), 1e-300) for r in lg], label="solid")
    ax[1].semilogy(t, [max(float(r[col["l2_liquid"]]), 1e-300) for r in lg], label="liquid")
    ax[1].set_ylabel("field error L2 [K m$^{1/2}$]")
    ax[1].legend()
    ax[2].plot(t, [float(r[col["q_solid"]]) for r in lg], label="solid")
    ax[2].plot(t, [float(r[col["q_liquid"]]) for r in lg], label="liquid")
    ax[2].set_ylabel("boundary heat flux [W/m$^2$]")
    ax[2].set_xlabel("t [h]")
    ax[2].legend()
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, "run_log.png"), dpi=160)

    col, pr = rows("run_profiles.csv")
    fig2, ax2 = plt.subplots(figsize=(7, 5))
    by_t = {}
    for r in pr:
        key = float(r[col["t"]])
        by_t.setdefault(key, []).append(
            (float(r[col["z"]]), float(r[col["temperature"]]), float(r[col["reference"]])))
    for ti in sorted(by_t):
        pts = sorted(by_t[ti])
        zs = [1e3 * z for z, _, _ in pts]
        line, = ax2.plot(zs, [T for _, T, _ in pts], label="t = %.1f h" % (ti / 3600.0))
        ax2.plot(zs, [Tr for _, _, Tr in pts], "--", color=line.get_color(), linewidth=0.8)
    ax2.set_xlabel("z [mm]")
    ax2.set_ylabel("temperature [K] (dashed: reference)")
    ax2.legend(fontsize=8)
    fig2.tight_layout()
    fig2.savefig(os.path.join(HERE, "run_profiles.png"), dpi=160)


if __name__ == "__main__":
    main()
)PY";

// ---------------------------------------------------------------------------
// plan

// Stack depth for plan artifacts: values, one time derivative for the
// residual check, and headroom for the doubled-truncation rebuild. The kernel
// pipeline dimensions its own (much deeper) field.
int plan_depth(int terms) { return (terms + 1) / 2 + 3; }

std::vector<VerifyCheck> plan_checks(const Scenario& sc, const FlatTrajectory& traj,
                                     const ReferenceField& ref) {
    const StefanMaterial& mat = sc.material;
    const double taus[] = {0.15, 0.35, 0.50, 0.65, 0.85};
    const double xis[] = {0.1, 0.3, 0.5, 0.7, 0.9};

    // interior residual of the moving-frame heat equation,
    // alpha T'' + gdot_r T' - dT/dt, on a spread of instants and depths
    double res_max = 0.0;
    for (double tau : taus) {
        double t = tau * sc.duration;
        Jet g = traj.gamma_jet(t, 1);
        for (Phase p : {Phase::solid, Phase::liquid}) {
            ReferenceSlice s = ref.slice(p, t);
            double alpha = mat.phase(p).diffusivity();
            double ext = phase_beta(p) * (mat.phase(p).boundary - g[0]);
            for (double xi : xis) {
                double z = phase_beta(p) * xi * ext;
                double res = alpha * s.dz(z, 2) + g[1] * s.dz(z, 1) - s.time_jet(z, 1)[1];
                res_max = std::max(res_max, std::abs(res));
            }
        }
    }
    const double res_tol = 1e-3;

    // doubling the series truncation must not move the sampled values
    ReferenceField wide(mat, traj, 2 * sc.series_terms, plan_depth(2 * sc.series_terms));
    double shift_max = 0.0;
    for (double tau : taus) {
        double t = tau * sc.duration;
        double gr = traj.gamma(t);
        for (Phase p : {Phase::solid, Phase::liquid}) {
            ReferenceSlice s1 = ref.slice(p, t);
            ReferenceSlice s2 = wide.slice(p, t);
            double ext = phase_beta(p) * (mat.phase(p).boundary - gr);
            for (double xi : xis) {
                double z = phase_beta(p) * xi * ext;
                shift_max = std::max(shift_max, std::abs(s1.value(z) - s2.value(z)));
            }
        }
    }
    const double shift_tol = 1e-9;

    return {
        {"reference pde residual", res_max <= res_tol,
         "max " + fmt_sci(res_max) + " K/s (tol " + fmt_sci(res_tol) + ")"},
        {"series truncation", shift_max <= shift_tol,
         "doubling M = " + std::to_string(sc.series_terms) + " shifts values by " +
             fmt_sci(shift_max) + " K (tol " + fmt_sci(shift_tol) + ")"},
    };
}

int cmd_plan(const Scenario& sc, const std::string& out, bool check) {
    const StefanMaterial& mat = sc.material;
    int depth = plan_depth(2 * sc.series_terms);  // deep enough for the doubled rebuild
    FlatTrajectory traj(sc.gamma_start, sc.gamma_end, sc.y1_start, sc.y1_end, sc.duration,
                        sc.omega, depth + 2);
    ReferenceField ref(mat, traj, sc.series_terms, plan_depth(sc.series_terms));

    {
        CsvWriter w(join_path(out, "plan_trajectory.csv"), "plan_trajectory v1",
                    {"t", "gamma_r", "gamma_dot_r", "y1", "melt_gradient", "q_solid", "q_liquid"});
        int n = static_cast<int>(std::ceil(sc.duration / sc.output_interval - 1e-12));
        for (int k = 0; k <= n; ++k) {
            double t = std::min(k * sc.output_interval, sc.duration);
            Jet g = traj.gamma_jet(t, 1);
            double y1 = traj.y1_jet(t, 0)[0];
            w.row({t, g[0], g[1], y1, melt_gradient(y1, g[1], mat),
                   ref.feedforward_flux(Phase::solid, t), ref.feedforward_flux(Phase::liquid, t)});
        }
    }

    {
        CsvWriter w(join_path(out, "plan_profiles.csv"), "plan_profiles v1",
                    {"t", "phase", "z", "temperature"});
        const int ninst = 5, nz = 60;
        for (int k = 0; k <= ninst; ++k) {
            double t = sc.duration * k / ninst;
            double gr = traj.gamma(t);
            for (Phase p : {Phase::solid, Phase::liquid}) {
                ReferenceSlice s = ref.slice(p, t);
                double z0 = p == Phase::solid ? mat.solid.boundary : gr;
                double z1 = p == Phase::solid ? gr : mat.liquid.boundary;
                for (int j = 0; j <= nz; ++j) {
                    double z = z0 + (z1 - z0) * j / nz;
                    w.raw_row(fmt_full(t) + "," + phase_name(p) + "," + fmt_full(z) + "," +
                              fmt_full(s.value(z - gr)));
                }
            }
        }
    }

    std::vector<VerifyCheck> checks;
    if (check) checks = plan_checks(sc, traj, ref);

    ordered_json meta{{"schema", "plan_meta v1"},
                      {"series_depth", plan_depth(sc.series_terms)},
                      {"profile_instants", 6},
                      {"check", check ? checks_json(checks) : ordered_json(nullptr)},
                      {"scenario", scenario_json(sc)}};
    write_json_file(join_path(out, "plan_meta.json"), meta);
    write_text_file(join_path(out, "plot_plan.py"), kPlotPlanPy);

    bool ok = print_checks(checks);
    std::cout << "plan artifacts written to " << out << "\n";
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// kernels

std::vector<VerifyCheck> kernel_checks(const Scenario& sc) {
    const StefanMaterial& mat = sc.material;
    // Scheme validation against the integral oracle at a deliberately tame
    // decay rate. The continuum kernel scales like I1(sqrt(|mu|/alpha) x), so
    // at production rates it reaches e^20 and no affordable grid tracks it;
    // the loop then runs on the grid-smoothed kernel by construction. At the
    // diagnostic rate the kernel is O(10) and the comparison is meaningful.
    // The reduced grid pair keeps the oracle depth (one coefficient time
    // derivative per series term) affordable; this validates the scheme, not
    // one particular resolution.
    const double mu_chk = -1e-4;
    int n1 = std::min(sc.kernel_points, 17);
    int n2 = 2 * (n1 - 1) + 1;
    int no = 65;
    int depth = (no - 1) + (sc.series_terms + 1) / 2;
    FlatTrajectory traj(sc.gamma_start, sc.gamma_end, sc.y1_start, sc.y1_end, sc.duration,
                        sc.omega, depth + 2);
    ReferenceField ref(mat, traj, sc.series_terms, depth);
    double t = 0.5 * sc.duration;
    double ext = mat.domain_extent();

    std::vector<VerifyCheck> checks;
    for (Phase p : {Phase::solid, Phase::liquid}) {
        KernelGrid g1 = solve_kernel_midpoint(
            assemble_coefficients(ref, p, t, mu_chk, sc.nu, KernelGridGeom::from_points(ext, n1)),
            sc.kernel_trapezoid);
        KernelGrid g2 = solve_kernel_midpoint(
            assemble_coefficients(ref, p, t, mu_chk, sc.nu, KernelGridGeom::from_points(ext, n2)),
            sc.kernel_trapezoid);

        std::vector<std::pair<double, double>> pts;
        for (int j = 0; j < g1.geom.n_sigma; ++j)
            for (int i = j; i <= g1.geom.n_eta - j; ++i)
                pts.emplace_back(i * g1.geom.delta, j * g1.geom.delta);

        SuccessiveInfo info;
        CoefficientField cfo =
            assemble_coefficients(ref, p, t, mu_chk, sc.nu, KernelGridGeom::from_points(ext, no));
        std::vector<double> oracle;
        try {
            oracle = solve_kernel_successive(cfo, pts, 1e-9, 200, &info);
        } catch (const divergence_error& e) {
            checks.push_back({std::string("kernel scheme vs integral oracle (") + phase_name(p) +
                                  ")",
                              false, e.what()});
            continue;
        }

        double dev1 = 0.0, dev2 = 0.0, kmax = 0.0;
        std::size_t q = 0;
        for (int j = 0; j < g1.geom.n_sigma; ++j)
            for (int i = j; i <= g1.geom.n_eta - j; ++i, ++q) {
                kmax = std::max(kmax, std::abs(oracle[q]));
                dev1 = std::max(dev1, std::abs(g1.at(i, j) - oracle[q]));
                dev2 = std::max(dev2, std::abs(g2.at(2 * i, 2 * j) - oracle[q]));
            }
        double tol = std::max(0.05 * kmax, 4.0 * g1.geom.delta);
        double order = std::log2(dev1 / dev2);
        std::string tag = std::string(" (") + phase_name(p) + ")";
        checks.push_back({"kernel scheme vs integral oracle" + tag, dev1 <= tol,
                          "diagnostic rate " + fmt_sci(mu_chk) + ": max dev " + fmt_sci(dev1) +
                              " at delta " + fmt_sci(g1.geom.delta) + ", oracle max " +
                              fmt_sci(kmax) + ", tol " + fmt_sci(tol) + ", " +
                              std::to_string(info.iterations) + " iterations"});
        checks.push_back({"kernel refinement order" + tag, order >= 0.75 && order <= 1.60,
                          "dev " + fmt_sci(dev1) + " -> " + fmt_sci(dev2) +
                              " under delta/2, order " + fmt_sci(order) + " (window 0.75..1.60)"});
    }
    return checks;
}

int cmd_kernels(const Scenario& sc, const std::string& out, bool check) {
    const StefanMaterial& mat = sc.material;
    FlatTrajectory traj(sc.gamma_start, sc.gamma_end, sc.y1_start, sc.y1_end, sc.duration,
                        sc.omega, sc.resolved_planner_order());
    ReferenceField ref(mat, traj, sc.series_terms, sc.coefficient_depth());
    KernelGridGeom geom = KernelGridGeom::from_points(mat.domain_extent(), sc.kernel_points);

    int ninst = std::min(5, sc.kernel_time_samples);
    KernelTimeSeries ts = build_kernel_time_series(ref, sc.mu, sc.nu, geom, 0.0, sc.duration,
                                                   ninst, sc.threads, sc.kernel_trapezoid);

    ordered_json stats = ordered_json::array();
    for (Phase p : {Phase::solid, Phase::liquid}) {
        CsvWriter w(join_path(out, p == Phase::solid ? "kernels_solid.csv" : "kernels_liquid.csv"),
                    "kernel_grid v1", {"t", "eta", "sigma", "z", "zeta", "k", "dk_dz"});
        for (std::size_t s = 0; s < ts.times.size(); ++s) {
            const KernelGrid& g = ts.of(p)[s];
            double kmax = 0.0;
            for (int j = 0; j < geom.n_sigma; ++j)
                for (int i = j; i <= geom.n_eta - j; ++i) {
                    double eta = i * geom.delta, sig = j * geom.delta;
                    w.row({ts.times[s], eta, sig, 0.5 * (eta + sig), 0.5 * (eta - sig), g.at(i, j),
                           g.d1_at(i, j)});
                    kmax = std::max(kmax, std::abs(g.at(i, j)));
                }
            stats.push_back(ordered_json{
                {"phase", phase_name(p)}, {"t", ts.times[s]}, {"max_abs_k", kmax}});
        }
    }

    std::vector<VerifyCheck> checks;
    if (check) checks = kernel_checks(sc);

    ordered_json meta{{"schema", "kernels_meta v1"},
                      {"extent", geom.extent},
                      {"n_sigma", geom.n_sigma},
                      {"delta", geom.delta},
                      {"instants", ninst},
                      {"grids", stats},
                      {"check", check ? checks_json(checks) : ordered_json(nullptr)},
                      {"scenario", scenario_json(sc)}};
    write_json_file(join_path(out, "kernels_meta.json"), meta);

    bool ok = print_checks(checks);
    std::cout << "kernel tables written to " << out << "\n";
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// run

int cmd_run(const Scenario& sc, const std::string& out, bool ff_only) {
    const StefanMaterial& mat = sc.material;
    // feedforward-only runs never query kernel-depth stacks
    int depth = ff_only ? (sc.series_terms + 1) / 2 + 2 : sc.coefficient_depth();
    int order = ff_only ? depth + 2 : sc.resolved_planner_order();
    FlatTrajectory traj(sc.gamma_start, sc.gamma_end, sc.y1_start, sc.y1_end, sc.duration,
                        sc.omega, order);
    ReferenceField ref(mat, traj, sc.series_terms, depth);

    std::optional<KernelTimeSeries> ts;
    std::optional<Controller> ctl;
    std::optional<FeedforwardTable> ff;
    RunInput input;
    if (ff_only) {
        ff.emplace(build_feedforward_table(ref, 0.0, sc.t_end, std::max(2, sc.kernel_time_samples)));
        input.feedforward = &*ff;
    } else {
        KernelGridGeom geom = KernelGridGeom::from_points(mat.domain_extent(), sc.kernel_points);
        ts.emplace(build_kernel_time_series(ref, sc.mu, sc.nu, geom, 0.0, sc.t_end,
                                            sc.kernel_time_samples, sc.threads,
                                            sc.kernel_trapezoid));
        ControllerConfig cc;
        cc.mu = sc.mu;
        cc.nu = sc.nu;
        cc.quadrature_step = sc.quadrature_step;
        ctl.emplace(ref, *ts, cc);
        input.controller = &*ctl;
    }

    SimConfig sim;
    sim.cells = sc.cells_per_phase;
    sim.t_end = sc.t_end;
    sim.output_interval = sc.output_interval;
    sim.dgamma0 = sc.dgamma0;
    sim.dgamma_dot0 = sc.dgamma_dot0;
    sim.dt_safety = sc.dt_safety;
    sim.guard_band = sc.guard_band;

    CsvWriter log_w(join_path(out, "run_log.csv"), "run_log v1",
                    {"t", "gamma", "gamma_ref", "dgamma", "dgamma_dot", "q_solid", "q_liquid",
                     "l2_solid", "l2_liquid"});
    CsvWriter prof_w(join_path(out, "run_profiles.csv"), "run_profiles v1",
                     {"t", "phase", "z", "temperature", "reference"});

    std::vector<double> targets;
    for (int k = 0; k <= 5; ++k) targets.push_back(sc.t_end * k / 5.0);
    std::size_t next_target = 0;
    double ttol = 1e-9 * std::max(1.0, sc.t_end);
    double peak_dg = 0.0, peak_s = 0.0, peak_l = 0.0;

    auto emit_profiles = [&](const RunRow& r, const SimState& st) {
        double gr = traj.gamma(r.t);
        int N = st.cells();
        for (Phase p : {Phase::solid, Phase::liquid}) {
            ReferenceSlice s = ref.slice(p, r.t);
            double a = p == Phase::solid ? mat.solid.boundary : st.gamma;
            double b = p == Phase::solid ? st.gamma : mat.liquid.boundary;
            const std::vector<double>& u = p == Phase::solid ? st.us : st.ul;
            for (int j = 0; j < N; ++j) {
                // cell centers; both vectors ascend from a towards b
                double xi = (j + 0.5) / N;
                double z = a + xi * (b - a);
                double T = mat.melting_temperature + u[static_cast<std::size_t>(j)];
                prof_w.raw_row(fmt_full(r.t) + "," + phase_name(p) + "," + fmt_full(z) + "," +
                               fmt_full(T) + "," + fmt_full(s.value(z - gr)));
            }
        }
    };

    auto on_row = [&](const RunRow& r, const SimState& st) {
        log_w.row({r.t, r.gamma, r.gamma_r, r.dgamma, r.dgamma_dot, r.qs, r.ql, r.l2_solid,
                   r.l2_liquid});
        peak_dg = std::max(peak_dg, std::abs(r.dgamma));
        peak_s = std::max(peak_s, r.l2_solid);
        peak_l = std::max(peak_l, r.l2_liquid);
        bool want = false;
        while (next_target < targets.size() && r.t >= targets[next_target] - ttol) {
            want = true;
            ++next_target;
        }
        if (want) emit_profiles(r, st);
    };

    RunLog log = run_closed_loop(ref, sim, input, on_row);

    ordered_json final_row(nullptr);
    if (!log.rows.empty()) {
        const RunRow& r = log.rows.back();
        final_row = ordered_json{{"t", r.t},
                                 {"dgamma", r.dgamma},
                                 {"dgamma_dot", r.dgamma_dot},
                                 {"l2_solid", r.l2_solid},
                                 {"l2_liquid", r.l2_liquid}};
    }
    ordered_json meta{{"schema", "run_meta v1"},
                      {"mode", ff_only ? "feedforward-only" : "closed-loop"},
                      {"completed", log.completed},
                      {"abort_reason", log.abort_reason},
                      {"steps", log.steps},
                      {"rows", log.rows.size()},
                      {"final", final_row},
                      {"peaks",
                       {{"abs_dgamma", peak_dg}, {"l2_solid", peak_s}, {"l2_liquid", peak_l}}},
                      {"scenario", scenario_json(sc)}};
    write_json_file(join_path(out, "run_meta.json"), meta);
    write_text_file(join_path(out, "plot_run.py"), kPlotRunPy);

    if (!log.completed) {
        std::cerr << "run aborted: " << log.abort_reason << "\n";
        return 3;
    }
    std::cout << "run complete: " << log.steps << " steps, " << log.rows.size()
              << " rows written to " << out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const Scenario& sc, const std::string& out, bool inject) {
    VerifyOptions opt;
    opt.inject_kappa_flip = inject;
    opt.threads = sc.threads;
    VerifyReport rep = run_verification(opt);
    bool ok = print_checks(rep.checks);
    write_json_file(join_path(out, "verify_report.json"),
                    ordered_json{{"schema", "verify_report v1"},
                                 {"inject_kappa_flip", inject},
                                 {"all_passed", rep.all_passed()},
                                 {"checks", checks_json(rep.checks)}});
    std::cout << (ok ? "verification passed (" : "verification FAILED (") << rep.checks.size()
              << " checks)\n";
    return ok ? 0 : 1;
}

} // namespace
} // namespace stefan

int main(int argc, char** argv) {
    CLI::App app{"planning, gain synthesis, simulation and self-checks for two-phase\n"
                 "interface tracking control"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "stefanctl 1.0");

    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;
    auto* o_config = app.add_option("-c,--config", config_path, "scenario file (INI)")
                         ->envname("STEFANCTL_CONFIG");
    app.add_option("-o,--out", out_dir, "artifact directory, created if missing")
        ->envname("STEFANCTL_OUT");
    auto* o_threads =
        app.add_option("--threads", threads, "worker threads for kernel table assembly")
            ->envname("STEFANCTL_THREADS");

    double mu = 0, nu = 0, qstep = 0, t_end = 0, out_int = 0, dg0 = 0, dgd0 = 0;
    int kp = 0, ks = 0, cells = 0, terms = 0;
    bool trap = false;
    auto* o_mu = app.add_option("--mu", mu, "target field decay rate [1/s], <= 0");
    auto* o_nu = app.add_option("--nu", nu, "target boundary gain [1/m], <= 0");
    auto* o_qstep =
        app.add_option("--quadrature-step", qstep, "controller integral step [m], 0 = kernel grid");
    auto* o_tend = app.add_option("--t-end", t_end, "simulation end time [s]");
    auto* o_oint = app.add_option("--output-interval", out_int, "log cadence [s]");
    auto* o_dg0 = app.add_option("--dgamma0", dg0, "initial interface offset [m]");
    auto* o_dgd0 = app.add_option("--dgamma-dot0", dgd0, "initial interface rate offset [m/s]");
    auto* o_kp = app.add_option("--kernel-points", kp, "kernel grid points per direction");
    auto* o_ks = app.add_option("--kernel-samples", ks, "kernel table instants");
    auto* o_cells = app.add_option("--cells", cells, "finite-volume cells per phase");
    auto* o_terms = app.add_option("--series-terms", terms, "reference series truncation");
    auto* o_trap =
        app.add_flag("--kernel-trapezoid", trap, "trapezoid weights in the kernel scheme");

    CLI::App* p_plan = app.add_subcommand("plan", "write the reference trajectory and profiles");
    bool plan_check = false;
    p_plan->add_flag("--check", plan_check, "residual and truncation self-checks");
    p_plan->fallthrough();

    CLI::App* p_kern = app.add_subcommand("kernels", "write backstepping gain tables");
    bool kern_check = false;
    p_kern->add_flag("--check", kern_check, "cross-check the scheme against the integral oracle");
    p_kern->fallthrough();

    CLI::App* p_run = app.add_subcommand("run", "closed-loop tracking simulation");
    bool ff_only = false;
    p_run->add_flag("--feedforward-only", ff_only, "open-loop run from the reference flux table");
    p_run->fallthrough();

    CLI::App* p_verify = app.add_subcommand("verify", "run the built-in cross-check suite");
    bool inject = false;
    p_verify->add_flag("--inject-kappa-flip", inject)->group("");
    p_verify->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 64;
    }

    try {
        stefan::Scenario sc;
        if (o_config->count() > 0)
            sc = stefan::load_scenario(stefan::ConfigFile::parse_file(config_path));
        if (o_threads->count()) sc.threads = threads;
        if (o_mu->count()) sc.mu = mu;
        if (o_nu->count()) sc.nu = nu;
        if (o_qstep->count()) sc.quadrature_step = qstep;
        if (o_tend->count()) sc.t_end = t_end;
        if (o_oint->count()) sc.output_interval = out_int;
        if (o_dg0->count()) sc.dgamma0 = dg0;
        if (o_dgd0->count()) sc.dgamma_dot0 = dgd0;
        if (o_kp->count()) sc.kernel_points = kp;
        if (o_ks->count()) sc.kernel_time_samples = ks;
        if (o_cells->count()) sc.cells_per_phase = cells;
        if (o_terms->count()) sc.series_terms = terms;
        if (o_trap->count()) sc.kernel_trapezoid = trap;
        sc.validate();
        stefan::ensure_directory(out_dir);

        if (p_plan->parsed()) return stefan::cmd_plan(sc, out_dir, plan_check);
        if (p_kern->parsed()) return stefan::cmd_kernels(sc, out_dir, kern_check);
        if (p_run->parsed()) return stefan::cmd_run(sc, out_dir, ff_only);
        return stefan::cmd_verify(sc, out_dir, inject);
    } catch (const stefan::divergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
