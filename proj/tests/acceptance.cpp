// Scenario-level acceptance suite for the tracking-control stack. Each
// criterion prints one [PASS]/[FAIL] line; the exit code is nonzero when any
// selected criterion fails. Invoke with criterion numbers (1..8) or with no
// arguments to run all of them.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "stefan/controller.hpp"
#include "stefan/errors.hpp"
#include "stefan/jet.hpp"
#include "stefan/kernel.hpp"
#include "stefan/material.hpp"
#include "stefan/reference.hpp"
#include "stefan/simulator.hpp"

using namespace stefan;

namespace {

constexpr double kDuration = 90000.0;

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

FlatTrajectory ramp(int order) {
    return FlatTrajectory(0.2, 0.3, 17.0, 17.0, kDuration, 1.1, order);
}

// dense synthetic plant measurement: reference shape translated to the
// measured front plus an optional front-relative bump
PlantMeasurement plant_measurement(const ReferenceField& ref, double t, double dg,
                                   const std::function<double(double)>& bump, int segments) {
    const StefanMaterial& mat = ref.material();
    Jet gj = ref.trajectory().gamma_jet(t, 1);
    ReferenceSlice ss = ref.slice(Phase::solid, t);
    ReferenceSlice sl = ref.slice(Phase::liquid, t);
    PlantMeasurement m;
    m.t = t;
    m.gamma = gj[0] + dg;
    m.gamma_dot = gj[1];
    for (int i = 0; i <= segments; ++i) {
        double z = mat.solid.boundary + mat.domain_extent() * i / segments;
        double zt = z - m.gamma;
        double base = zt <= 0.0 ? ss.value(zt) : sl.value(zt);
        m.z.push_back(z);
        m.temperature.push_back(base + (bump ? bump(zt) : 0.0));
    }
    return m;
}

double worst_front_offset(const RunLog& log) {
    double worst = 0.0;
    for (const RunRow& r : log.rows) worst = std::max(worst, std::abs(r.dgamma));
    return worst;
}

// ---------------------------------------------------------------------------
// 1. gain kernels: marching scheme vs the successive-approximation oracle at
//    two resolutions, with first-order deviation bounds and the empirical
//    convergence order between them
Outcome crit1() {
    double t0 = now_s();
    StefanMaterial mat = gaas_material();
    FlatTrajectory traj = ramp(44);
    ReferenceField ref(mat, traj, 20, 42);
    double t = 0.5 * kDuration;
    const double mu = -1e-4;  // diagnostic rate: resolvable on coarse grids

    KernelGridGeom oracle_geom = KernelGridGeom::from_points(mat.domain_extent(), 33);
    int sizes[2] = {8, 16};
    double dev[2] = {0.0, 0.0}, delta[2] = {0.0, 0.0};
    for (int k = 0; k < 2; ++k) {
        KernelGridGeom geom = KernelGridGeom::from_points(mat.domain_extent(), sizes[k]);
        delta[k] = geom.delta;
        for (Phase p : {Phase::solid, Phase::liquid}) {
            CoefficientField cf = assemble_coefficients(ref, p, t, mu, 0.0, geom);
            KernelGrid g = solve_kernel_midpoint(cf);

            std::vector<std::pair<double, double>> pts;
            for (int j = 0; j < geom.n_sigma; ++j)
                for (int i = j; i <= geom.n_eta - j; ++i)
                    pts.emplace_back(i * geom.delta, j * geom.delta);
            CoefficientField ocf = assemble_coefficients(ref, p, t, mu, 0.0, oracle_geom);
            std::vector<double> oracle = solve_kernel_successive(ocf, pts, 1e-12, 60);

            std::size_t n = 0;
            for (int j = 0; j < geom.n_sigma; ++j)
                for (int i = j; i <= geom.n_eta - j; ++i)
                    dev[k] = std::max(dev[k], std::abs(g.at(i, j) - oracle[n++]));
        }
    }
    double order = std::log(dev[0] / dev[1]) / std::log(delta[0] / delta[1]);
    double elapsed = now_s() - t0;
    Outcome o;
    o.pass = dev[0] <= 4.0 * delta[0] && dev[1] <= 4.0 * delta[1] && order >= 0.8 &&
             order <= 1.5 && elapsed < 60.0;
    o.detail = "oracle deviation " + fmt(dev[0]) + " @ step " + fmt(delta[0]) + " and " +
               fmt(dev[1]) + " @ " + fmt(delta[1]) + " (bound 4x step), order " + fmt(order) +
               " in [0.8, 1.5], " + fmt(elapsed) + " s";
    return o;
}

// ---------------------------------------------------------------------------
// 2. homogeneity: zero coefficients give a bitwise-zero kernel grid
Outcome crit2() {
    auto zero = [](double, int order) { return Jet(order); };
    bool ok = true;
    for (int ns : {5, 9, 41, 81}) {
        KernelGridGeom geom = KernelGridGeom::from_points(0.4, ns);
        CoefficientField cf = assemble_coefficients_raw(Phase::solid, 0.0, 3.2e-6, geom,
                                                        kernel_required_depth(ns), zero, zero);
        KernelGrid g = solve_kernel_midpoint(cf);
        for (double v : g.v) ok = ok && v == 0.0;
        for (double v : g.d1) ok = ok && v == 0.0;
    }
    Outcome o;
    o.pass = ok;
    o.detail = ok ? "zero coefficients give bitwise-zero kernels and derivatives at 5/9/41/81"
                  : "nonzero entries on a homogeneous grid";
    return o;
}

// ---------------------------------------------------------------------------
// 3. planned reference: heat-equation and interface-balance residuals at the
//    working series length, plus truncation insensitivity around it
Outcome crit3() {
    double t0 = now_s();
    StefanMaterial mat = gaas_material();
    FlatTrajectory traj = ramp(24);
    ReferenceField r20(mat, traj, 20, 13);

    double worst_pde = 0.0, worst_stefan = 0.0;
    for (int it = 0; it <= 9; ++it) {
        double t = kDuration * (0.05 + 0.9 * it / 9.0);
        Jet gj = traj.gamma_jet(t, 1);
        for (Phase p : {Phase::solid, Phase::liquid}) {
            ReferenceSlice s = r20.slice(p, t);
            double alpha = mat.phase(p).diffusivity();
            double beta = phase_beta(p);
            double ext = std::abs(mat.phase(p).boundary - gj[0]);
            for (int i = 1; i <= 12; ++i) {
                double zt = beta * ext * i / 12.0;
                double res = alpha * s.dz(zt, 2) + gj[1] * s.dz(zt, 1) - s.time_jet(zt, 1)[1];
                worst_pde = std::max(worst_pde, std::abs(res));
            }
        }
        ReferenceSlice ss = r20.slice(Phase::solid, t);
        ReferenceSlice sl = r20.slice(Phase::liquid, t);
        double stefan = mat.solid.conductivity * ss.dz(0.0, 1) -
                        mat.liquid.conductivity * sl.dz(0.0, 1) -
                        mat.melt_density * mat.latent_heat * gj[1];
        worst_stefan = std::max(worst_stefan, std::abs(stefan));
    }

    // series-length insensitivity: the bracket around the working length and
    // a doubling on top of it
    ReferenceField r16(mat, traj, 16, 14);
    ReferenceField r24(mat, traj, 24, 16);
    ReferenceField r40(mat, traj, 40, 22);
    double worst_bracket = 0.0, worst_double = 0.0;
    for (int it = 0; it <= 4; ++it) {
        double t = kDuration * (0.1 + 0.8 * it / 4.0);
        for (Phase p : {Phase::solid, Phase::liquid}) {
            ReferenceSlice a16 = r16.slice(p, t);
            ReferenceSlice a20 = r20.slice(p, t);
            ReferenceSlice a24 = r24.slice(p, t);
            ReferenceSlice a40 = r40.slice(p, t);
            double beta = phase_beta(p);
            for (int i = 0; i <= 6; ++i) {
                double zt = beta * 0.3 * i / 6.0;
                worst_bracket = std::max(worst_bracket, std::abs(a16.value(zt) - a24.value(zt)));
                worst_double = std::max(worst_double, std::abs(a40.value(zt) - a20.value(zt)));
            }
        }
    }
    double elapsed = now_s() - t0;
    Outcome o;
    o.pass = worst_pde <= 1e-3 && worst_stefan <= 1e-3 && worst_bracket < 1e-9 &&
             worst_double < 1e-9 && elapsed < 60.0;
    o.detail = "heat-eq residual " + fmt(worst_pde) + ", interface balance " + fmt(worst_stefan) +
               " (tol 1e-3); series-length shifts " + fmt(worst_bracket) + " / " +
               fmt(worst_double) + " K (tol 1e-9), " + fmt(elapsed) + " s";
    return o;
}

// ---------------------------------------------------------------------------
// 4. perturbed plant responses: linear for small amplitudes, quadratic
//    departure ratio between amplitude decades near the ideal 100
Outcome crit4() {
    double t0 = now_s();
    StefanMaterial mat = gaas_material();
    FlatTrajectory traj = ramp(14);
    ReferenceField ref(mat, traj, 9, 12);
    FeedforwardTable tab = build_feedforward_table(ref, 0.0, 600.0, 5);
    RunInput in;
    in.feedforward = &tab;

    auto run_eps = [&](double eps) {
        SimConfig cfg;
        cfg.cells = 41;
        cfg.t_end = 600.0;
        cfg.output_interval = 600.0;
        cfg.dgamma_dot0 = std::nullopt;
        if (eps != 0.0) {
            cfg.perturbation = [&mat, eps](Phase p, double zt) {
                double xp = p == Phase::solid ? 0.2 - mat.solid.boundary
                                              : mat.liquid.boundary - 0.2;
                double s = std::sin(M_PI * zt / xp);
                return eps * 100.0 * s * s;
            };
        }
        return run_closed_loop(ref, cfg, in).final_state;
    };
    SimState base = run_eps(0.0);
    SimState tiny = run_eps(1e-5);
    SimState mid = run_eps(1e-3);
    SimState big = run_eps(1e-2);

    auto dist = [](const SimState& a, const SimState& b) {
        double ss = 0.0, sl2 = 0.0;
        for (std::size_t j = 0; j < a.us.size(); ++j) {
            ss += (a.us[j] - b.us[j]) * (a.us[j] - b.us[j]);
            sl2 += (a.ul[j] - b.ul[j]) * (a.ul[j] - b.ul[j]);
        }
        double dg = 1e3 * (a.gamma - b.gamma);
        return std::sqrt(ss / a.us.size() + sl2 / a.ul.size() + dg * dg);
    };
    auto residual = [&](const SimState& s, double eps) {
        SimState lin = base;
        double f = eps / 1e-5;
        for (std::size_t j = 0; j < lin.us.size(); ++j) {
            lin.us[j] += f * (tiny.us[j] - base.us[j]);
            lin.ul[j] += f * (tiny.ul[j] - base.ul[j]);
        }
        lin.gamma += f * (tiny.gamma - base.gamma);
        return dist(s, lin);
    };
    double ratio = residual(big, 1e-2) / residual(mid, 1e-3);
    double elapsed = now_s() - t0;
    Outcome o;
    o.pass = ratio >= 70.0 && ratio <= 130.0 && elapsed < 120.0;
    o.detail = "deviation-from-linear ratio " + fmt(ratio) +
               " between amplitude decades (window [70, 130], ideal 100.9), " + fmt(elapsed) +
               " s";
    return o;
}

// ---------------------------------------------------------------------------
// 5. growth-scenario reproduction: 41 cells/phase, design rate mu = -1e-2,
//    front offset 10 mm and front-rate offset -3 mm/h at start of ramp
Outcome crit5() {
    double t0 = now_s();
    StefanMaterial mat = gaas_material();
    FlatTrajectory traj = ramp(52);
    ReferenceField ref(mat, traj, 20, 50);
    KernelGridGeom geom = KernelGridGeom::from_points(mat.domain_extent(), 41);
    KernelTimeSeries ts = build_kernel_time_series(ref, -1e-2, 0.0, geom, 0.0, kDuration, 33, 1);
    ControllerConfig ccfg;
    ccfg.mu = -1e-2;
    ccfg.nu = 0.0;
    Controller ctrl(ref, ts, ccfg);
    RunInput in;
    in.controller = &ctrl;

    SimConfig cfg;
    cfg.cells = 41;
    cfg.t_end = kDuration;
    cfg.output_interval = 900.0;
    cfg.dgamma0 = 0.010;
    cfg.dgamma_dot0 = -3e-3 / 3600.0;
    RunLog log = run_closed_loop(ref, cfg, in);

    double d0 = std::abs(log.rows.front().dgamma);
    double dmin = d0;
    for (const RunRow& r : log.rows) dmin = std::min(dmin, std::abs(r.dgamma));
    bool pass_a = log.completed && dmin <= d0 / 10.0;
    std::printf("  [%s] (a) front offset %.3f -> min %.3f mm by 25 h: contraction %.3gx, "
                "need >= 10x\n",
                pass_a ? "PASS" : "FAIL", 1e3 * d0, 1e3 * dmin, d0 / std::max(dmin, 1e-300));

    double peak_s = 0.0, peak_l = 0.0;
    for (const RunRow& r : log.rows) {
        peak_s = std::max(peak_s, r.l2_solid);
        peak_l = std::max(peak_l, r.l2_liquid);
    }
    double fin_s = log.rows.back().l2_solid, fin_l = log.rows.back().l2_liquid;
    bool pass_b = log.completed && fin_s <= 0.1 * peak_s && fin_l <= 0.1 * peak_l;
    std::printf("  [%s] (b) field-error norms at 25 h: solid %s of peak, liquid %s "
                "(need <= 0.1)\n",
                pass_b ? "PASS" : "FAIL", fmt(fin_s / peak_s).c_str(),
                fmt(fin_l / peak_l).c_str());

    // zero-perturbation closed loop vs the feedforward discretization drift
    SimConfig zcfg = cfg;
    zcfg.dgamma0 = 0.0;
    zcfg.dgamma_dot0 = 0.0;
    RunLog cl0 = run_closed_loop(ref, zcfg, in);
    FeedforwardTable tab = build_feedforward_table(ref, 0.0, kDuration, 301);
    RunInput fin;
    fin.feedforward = &tab;
    RunLog ff = run_closed_loop(ref, zcfg, fin);
    double cl_worst = worst_front_offset(cl0);
    double ff_bound = worst_front_offset(ff);
    bool pass_c = cl0.completed && ff.completed && cl_worst <= ff_bound;
    std::printf("  [%s] (c) zero-perturbation loop max front offset %s m vs feedforward "
                "drift bound %s m\n",
                pass_c ? "PASS" : "FAIL", fmt(cl_worst).c_str(), fmt(ff_bound).c_str());

    double elapsed = now_s() - t0;
    Outcome o;
    o.pass = pass_a && pass_b && pass_c && elapsed < 600.0;
    o.detail = std::string("(a) ") + (pass_a ? "pass" : "FAIL") + ", (b) " +
               (pass_b ? "pass" : "FAIL") + ", (c) " + (pass_c ? "pass" : "FAIL") + ", " +
               fmt(elapsed) + " s";
    return o;
}

// ---------------------------------------------------------------------------
// 6. plant conservation: exact fixed point, sealed-domain enthalpy, and the
//    two-phase flux/latent-heat ledger
Outcome crit6() {
    double t0 = now_s();
    StefanMaterial mat = gaas_material();

    SimConfig cfg;
    cfg.cells = 21;
    SimState s;
    s.gamma = 0.25;
    s.us.assign(21, 0.0);
    s.ul.assign(21, 0.0);
    bool fixed = true;
    for (int k = 0; k < 50; ++k) fixed = fixed && step(s, mat, cfg, 0.0, 0.0, 0.1);
    fixed = fixed && s.gamma == 0.25;
    for (double u : s.us) fixed = fixed && u == 0.0;
    for (double u : s.ul) fixed = fixed && u == 0.0;

    SimConfig icfg;
    icfg.cells = 31;
    icfg.interface_mode = InterfaceMode::insulated;
    SimState si;
    si.gamma = 0.25;
    si.ul.assign(31, 0.0);
    for (int j = 0; j < 31; ++j)
        si.us.push_back(std::exp(-8.0 * (j / 31.0 - 0.4) * (j / 31.0 - 0.4)));
    double h0 = relative_enthalpy(si, mat);
    double drift = 0.0;
    for (int k = 0; k < 200; ++k) {
        double before = relative_enthalpy(si, mat);
        step(si, mat, icfg, 0.0, 0.0, 5.0);
        drift = std::max(drift, std::abs(relative_enthalpy(si, mat) - before) / std::abs(h0));
    }

    FlatTrajectory traj = ramp(14);
    ReferenceField ref(mat, traj, 9, 12);
    SimConfig lcfg;
    lcfg.cells = 31;
    lcfg.dgamma0 = 0.004;
    SimState sl = make_initial_state(ref, lcfg);
    double qs = ref.feedforward_flux(Phase::solid, 0.0);
    double ql = ref.feedforward_flux(Phase::liquid, 0.0);
    double ledger = 0.0;
    for (int k = 0; k < 200; ++k) {
        double before = relative_enthalpy(sl, mat) - mat.melt_density * mat.latent_heat * sl.gamma;
        if (!step(sl, mat, lcfg, qs, ql, 2.0)) break;
        double after = relative_enthalpy(sl, mat) - mat.melt_density * mat.latent_heat * sl.gamma;
        double res = (after - before) / 2.0 - (qs + ql);
        ledger = std::max(ledger, std::abs(res) / (std::abs(qs) + std::abs(ql) + 1.0));
    }
    double elapsed = now_s() - t0;
    Outcome o;
    o.pass = fixed && drift <= 1e-10 && ledger <= 1e-8 && elapsed < 60.0;
    o.detail = std::string("fixed point ") + (fixed ? "bitwise" : "MOVED") + ", sealed drift " +
               fmt(drift) + " rel/step (tol 1e-10), flux ledger " + fmt(ledger) +
               " rel (tol 1e-8), " + fmt(elapsed) + " s";
    return o;
}

// ---------------------------------------------------------------------------
// 7. law degeneracy: zero error collapses to the feedforward flux, and the
//    law is affine over random error profiles
Outcome crit7() {
    StefanMaterial mat = gaas_material();
    FlatTrajectory traj = ramp(32);
    ReferenceField ref(mat, traj, 20, 30);
    KernelGridGeom geom = KernelGridGeom::from_points(mat.domain_extent(), 21);
    double tc = 0.5 * kDuration;
    // diagnostic rate: gains stay O(1) so the collapse residual is set by the
    // quadrature alone, not by magnified interpolation noise
    KernelTimeSeries ts = build_kernel_time_series(ref, -1e-4, 0.0, geom, tc - 1000.0,
                                                   tc + 1000.0, 2, 1);
    ControllerConfig ccfg;
    ccfg.mu = -1e-4;
    Controller ctrl(ref, ts, ccfg);

    double collapse = 0.0;
    PlantMeasurement m0 = plant_measurement(ref, tc, 0.0, nullptr, 2000);
    for (Phase p : {Phase::solid, Phase::liquid}) {
        double q = ctrl.control_input(m0, p);
        double ff = ref.feedforward_flux(p, tc);
        collapse = std::max(collapse, std::abs(q - ff) / std::abs(ff));
    }

    std::mt19937 rng(20260814u);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    auto random_bump = [&]() {
        std::vector<double> amp(6), freq(6), phase(6);
        for (int k = 0; k < 6; ++k) {
            amp[k] = uni(rng);
            freq[k] = 2.0 + 30.0 * std::abs(uni(rng));
            phase[k] = 3.0 * uni(rng);
        }
        return [=](double zt) {
            double acc = 0.0;
            for (int k = 0; k < 6; ++k) acc += amp[k] * std::sin(freq[k] * zt + phase[k]);
            return acc;
        };
    };
    double super = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        auto ba = random_bump();
        auto bb = random_bump();
        auto bab = [&](double zt) { return ba(zt) + bb(zt); };
        double dg = 0.002 * uni(rng);
        PlantMeasurement mr = plant_measurement(ref, tc, dg, nullptr, 900);
        PlantMeasurement ma = plant_measurement(ref, tc, dg, ba, 900);
        PlantMeasurement mb = plant_measurement(ref, tc, dg, bb, 900);
        PlantMeasurement mab = plant_measurement(ref, tc, dg, bab, 900);
        for (Phase p : {Phase::solid, Phase::liquid}) {
            double qr = ctrl.control_input(mr, p);
            double qa = ctrl.control_input(ma, p);
            double qb = ctrl.control_input(mb, p);
            double qab = ctrl.control_input(mab, p);
            double scale = std::abs(qa - qr) + std::abs(qb - qr) + 1e-30;
            super = std::max(super, std::abs(qab - qa - qb + qr) / scale);
        }
    }
    Outcome o;
    o.pass = collapse <= 1e-6 && super <= 1e-9;
    o.detail = "zero-error collapse to feedforward " + fmt(collapse) +
               " rel (tol 1e-6), superposition defect " + fmt(super) + " rel (tol 1e-9)";
    return o;
}

// ---------------------------------------------------------------------------
// 8. discrete-scheme bookkeeping: derivative-order map on the full triangular
//    index set, and instrumented coefficient consumption at interior nodes
Outcome crit8() {
    bool map_ok = true;
    long long checked = 0;
    for (int ns = 2; ns <= 81 && map_ok; ++ns) {
        int n_eta = 2 * (ns - 1);
        for (int j = 0; j < ns && map_ok; ++j)
            for (int i = j; i <= n_eta - j; ++i, ++checked)
                if (required_derivative_order(i, j) != std::min(i, j)) {
                    map_ok = false;
                    break;
                }
    }

    auto probe_field = [](int n_sigma) {
        KernelGridGeom geom = KernelGridGeom::from_points(0.4, n_sigma);
        const double alpha = 3.2e-6, w = 1e-4;
        auto af = [alpha, w](double x, int order) {
            Jet j(order);
            double base = -25.0 * alpha * (1.0 + 0.3 * std::sin(3.0 * x)), pw = 1.0;
            for (int l = 0; l <= order; ++l, pw *= w) j[l] = base * pw;
            return j;
        };
        auto bf = [alpha, w](double x, int order) {
            Jet j(order);
            double base = 2.0 * alpha * x * std::cos(2.0 * x), pw = 1.0;
            for (int l = 0; l <= order; ++l, pw *= w) j[l] = base * pw;
            return j;
        };
        return assemble_coefficients_raw(Phase::solid, 0.0, alpha, geom,
                                         kernel_required_depth(n_sigma), af, bf);
    };

    auto probe_node = [](const CoefficientField& cf, int i, int j) {
        std::map<std::tuple<int, int, int>, double> memo;
        KernelProbe probe;
        probe.init(cf.depth);
        kernel_node_recursive(cf, i, j, 0, memo, &probe);
        bool ok = probe.max_a() == j && probe.max_b() == j;
        for (int l = 0; l <= j; ++l)
            ok = ok && probe.a_touched[static_cast<std::size_t>(l)] &&
                 probe.b_touched[static_cast<std::size_t>(l)];
        return ok;
    };

    bool probe_ok = true;
    long long probed = 0;
    for (int ns = 3; ns <= 12 && probe_ok; ++ns) {
        CoefficientField cf = probe_field(ns);
        int n_eta = cf.geom.n_eta;
        for (int j = 1; j < ns && probe_ok; ++j)
            for (int i = j + 1; i <= n_eta - j; ++i, ++probed)
                if (!probe_node(cf, i, j)) {
                    probe_ok = false;
                    break;
                }
    }
    {
        CoefficientField cf = probe_field(81);
        for (auto [i, j] : {std::pair{3, 1}, {40, 7}, {100, 13}, {158, 2}, {79, 40}}) {
            probe_ok = probe_ok && probe_node(cf, i, j);
            ++probed;
        }
    }
    Outcome o;
    o.pass = map_ok && probe_ok;
    o.detail = "derivative-order map min{i,j} on " + std::to_string(checked) +
               " nodes up to 81 points; instrumented recursion consumed exactly orders 0..j " +
               "at " + std::to_string(probed) + " interior nodes";
    return o;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int k = 1; k < argc; ++k) {
        int c = std::atoi(argv[k]);
        if (c < 1 || c > 8) {
            std::fprintf(stderr, "usage: %s [criterion 1..8]...\n", argv[0]);
            return 64;
        }
        which.push_back(c);
    }
    if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8};

    Outcome (*crits[8])() = {crit1, crit2, crit3, crit4, crit5, crit6, crit7, crit8};
    bool all_ok = true;
    for (int c : which) {
        Outcome o;
        try {
            o = crits[c - 1]();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %d: %s\n", o.pass ? "PASS" : "FAIL", c, o.detail.c_str());
        std::fflush(stdout);
        all_ok = all_ok && o.pass;
    }
    return all_ok ? 0 : 1;
}
