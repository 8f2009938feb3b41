#include "stefan/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

#include "stefan/config.hpp"
#include "stefan/controller.hpp"
#include "stefan/errors.hpp"
#include "stefan/gevrey.hpp"
#include "stefan/kernel.hpp"
#include "stefan/material.hpp"
#include "stefan/reference.hpp"
#include "stefan/simulator.hpp"

namespace stefan {

bool VerifyReport::all_passed() const {
    for (const VerifyCheck& c : checks)
        if (!c.passed) return false;
    return true;
}

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", x);
    return buf;
}

void add(VerifyReport& rep, const std::string& name, bool ok, const std::string& detail) {
    rep.checks.push_back({name, ok, detail});
}

// smooth deterministic error shapes for the superposition check
double shape1(double x, double xb) {
    double s = std::sin(M_PI * x / xb);
    return 0.8 * s * s;
}
double shape2(double x, double xb) {
    double s = std::sin(2.0 * M_PI * x / xb);
    return 0.3 * s + 0.1 * (x / xb) * (x / xb);
}

PlantMeasurement reference_measurement(const ReferenceField& ref, double t, int nodes) {
    const StefanMaterial& mat = ref.material();
    double gr = ref.trajectory().gamma_jet(t, 0)[0];
    ReferenceSlice ss = ref.slice(Phase::solid, t);
    ReferenceSlice sl = ref.slice(Phase::liquid, t);
    PlantMeasurement m;
    m.t = t;
    m.gamma = gr;
    m.gamma_dot = ref.trajectory().gamma_jet(t, 1)[1];
    for (int i = 0; i <= nodes; ++i) {
        double z = mat.solid.boundary + (gr - mat.solid.boundary) * i / nodes;
        m.z.push_back(z);
        m.temperature.push_back(ss.value(z - gr));
    }
    for (int i = 1; i <= nodes; ++i) {
        double z = gr + (mat.liquid.boundary - gr) * i / nodes;
        m.z.push_back(z);
        m.temperature.push_back(sl.value(z - gr));
    }
    return m;
}

} // namespace

VerifyReport run_verification(const VerifyOptions& opt) {
    VerifyReport rep;
    Scenario sc;  // GaAs growth scenario defaults
    const StefanMaterial& mat = sc.material;

    // One trajectory stack deep enough for the reduced kernel grid below.
    const int n_sigma = 9;
    const int depth = (n_sigma - 1) + (sc.series_terms + 1) / 2;
    FlatTrajectory traj(sc.gamma_start, sc.gamma_end, sc.y1_start, sc.y1_end, sc.duration,
                        sc.omega, depth + 2);
    ReferenceField ref(mat, traj, sc.series_terms, depth);

    // transition endpoints: all derivatives vanish, value lands on 0 and 1
    {
        GevreyTransition phi(0.0, sc.duration, sc.omega, 20);
        Jet a = phi.jets(0.0, 20), b = phi.jets(sc.duration, 20);
        double worst = std::abs(a[0]) + std::abs(b[0] - 1.0);
        for (int n = 1; n <= 20; ++n) worst = std::max(worst, std::abs(a[n]) + std::abs(b[n]));
        bool mono = true;
        double prev = 0.0;
        for (int i = 1; i <= 64; ++i) {
            double v = phi.value(sc.duration * i / 64.0);
            if (v < prev - 1e-15) mono = false;
            prev = v;
        }
        add(rep, "transition endpoints flat", worst <= 1e-12 && mono,
            "max endpoint derivative magnitude " + fmt(worst) +
                (mono ? ", monotone" : ", NOT monotone"));
    }

    // front conditions of the reference series, mid-ramp
    {
        double t = 0.5 * sc.duration;
        ReferenceSlice ss = ref.slice(Phase::solid, t);
        ReferenceSlice sl = ref.slice(Phase::liquid, t);
        Jet gj = traj.gamma_jet(t, 1);
        double melt = mat.melting_temperature;
        double r1 = std::abs(ss.value(0.0) - melt) + std::abs(sl.value(0.0) - melt);
        double r2 = std::abs(ss.dz(0.0, 1) - traj.y1_jet(t, 0)[0]);
        double stefan = mat.solid.conductivity * ss.dz(0.0, 1) -
                        mat.liquid.conductivity * sl.dz(0.0, 1) -
                        mat.melt_density * mat.latent_heat * gj[1];
        double scale = mat.melt_density * mat.latent_heat * std::abs(gj[1]) + 1.0;
        bool ok = r1 <= 1e-9 && r2 <= 1e-9 && std::abs(stefan) / scale <= 1e-12;
        add(rep, "reference front conditions", ok,
            "melting-point residual " + fmt(r1) + " K, gradient residual " + fmt(r2) +
                " K/m, latent-heat balance " + fmt(std::abs(stefan) / scale) + " rel");
    }

    // truncated series vs the moving-frame heat equation
    {
        double worst = 0.0;
        for (double tau : {0.2, 0.5, 0.8}) {
            double t = tau * sc.duration;
            Jet gj = traj.gamma_jet(t, 1);
            for (Phase p : {Phase::solid, Phase::liquid}) {
                ReferenceSlice s = ref.slice(p, t);
                double alpha = mat.phase(p).diffusivity();
                double beta = phase_beta(p);
                double ext = std::abs(mat.phase(p).boundary - gj[0]);
                for (int i = 1; i <= 4; ++i) {
                    double zt = beta * ext * i / 4.0;
                    double res = alpha * s.dz(zt, 2) + gj[1] * s.dz(zt, 1) - s.time_jet(zt, 1)[1];
                    worst = std::max(worst, std::abs(res));
                }
            }
        }
        add(rep, "reference series residual", worst <= 1e-3,
            "max heat-equation residual " + fmt(worst) + " K/s");
    }

    // reduced marching grid against the successive-approximation route; the
    // oracle needs coefficient stacks as deep as its refined lattice, so it
    // gets its own trajectory
    {
        KernelGridGeom geom = KernelGridGeom::from_points(mat.domain_extent(), n_sigma);
        KernelGridGeom fine = KernelGridGeom::from_points(mat.domain_extent(), 33);
        const int depth_o = 32 + (sc.series_terms + 1) / 2;
        FlatTrajectory traj_o(sc.gamma_start, sc.gamma_end, sc.y1_start, sc.y1_end, sc.duration,
                              sc.omega, depth_o + 2);
        ReferenceField ref_o(mat, traj_o, sc.series_terms, depth_o);
        double t = 0.35 * sc.duration, mu = -1e-4;
        double worst = 0.0;
        for (Phase p : {Phase::solid, Phase::liquid}) {
            CoefficientField cf = assemble_coefficients(ref_o, p, t, mu, 0.0, geom);
            CoefficientField cff = assemble_coefficients(ref_o, p, t, mu, 0.0, fine);
            KernelGrid g = solve_kernel_midpoint(cf);
            std::vector<std::pair<double, double>> pts;
            std::vector<double> vals;
            for (int j = 0; j < n_sigma; ++j)
                for (int i = j; i <= geom.n_eta - j; ++i) {
                    pts.push_back({i * geom.delta, j * geom.delta});
                    vals.push_back(g.at(i, j));
                }
            std::vector<double> orc = solve_kernel_successive(cff, pts, 1e-12, 60);
            for (std::size_t q = 0; q < pts.size(); ++q)
                worst = std::max(worst, std::abs(vals[q] - orc[q]));
        }
        add(rep, "kernel scheme vs integral oracle", worst <= 4.0 * geom.delta,
            "max node deviation " + fmt(worst) + " vs bound " + fmt(4.0 * geom.delta));
    }

    // homogeneous coefficients must produce the zero kernel bit for bit
    {
        KernelGridGeom geom = KernelGridGeom::from_points(mat.domain_extent(), 17);
        auto zero = [](double, int order) { return jet_const(0.0, order); };
        CoefficientField cf = assemble_coefficients_raw(Phase::solid, 0.0,
                                                        mat.solid.diffusivity(), geom,
                                                        kernel_required_depth(17), zero, zero);
        KernelGrid g = solve_kernel_midpoint(cf);
        bool ok = true;
        for (double v : g.v) ok = ok && v == 0.0;
        for (double v : g.d1) ok = ok && v == 0.0;
        add(rep, "kernel null coefficients", ok, ok ? "grid bitwise zero" : "nonzero node found");
    }

    // order map of the discrete scheme
    {
        bool ok = true;
        for (int j = 0; j < 33 && ok; ++j)
            for (int i = j; i <= 2 * 32 - j && ok; ++i)
                ok = required_derivative_order(i, j) == std::min(i, j);
        add(rep, "kernel derivative order map", ok,
            ok ? "min(i,j) on the full triangle, n_sigma=33" : "mismatch found");
    }

    // controller: gains at mid-ramp from a 2-sample kernel table. The tame
    // rate keeps the reduced grid accurate, so gain magnitudes cannot drown
    // the node-interpolation noise of the sampled measurement.
    {
        KernelGridGeom geom = KernelGridGeom::from_points(mat.domain_extent(), n_sigma);
        double tc = 0.5 * sc.duration, mu = -1e-4;
        KernelTimeSeries ts = build_kernel_time_series(ref, mu, sc.nu, geom, tc - 1000.0,
                                                       tc + 1000.0, 2, opt.threads);
        ControllerConfig cc;
        cc.mu = mu;
        cc.nu = sc.nu;
        Controller ctrl(ref, ts, cc);

        PlantMeasurement m0 = reference_measurement(ref, tc, 400);
        double worst = 0.0;
        for (Phase p : {Phase::solid, Phase::liquid}) {
            double q = ctrl.control_input(m0, p);
            double ff = ctrl.feedforward(p, tc);
            worst = std::max(worst, std::abs(q - ff) / (std::abs(ff) + 1.0));
        }
        add(rep, "controller feedforward collapse", worst <= 1e-3,
            "zero-error input vs feedforward, rel " + fmt(worst));

        // additivity of the feedback in the temperature error
        double gr = m0.gamma;
        auto perturbed = [&](int which) {
            PlantMeasurement m = m0;
            for (std::size_t i = 0; i < m.z.size(); ++i) {
                double x = std::abs(m.z[i] - gr);
                double xb = m.z[i] <= gr ? gr - mat.solid.boundary : mat.liquid.boundary - gr;
                double e1 = shape1(x, xb), e2 = shape2(x, xb);
                if (x > 0.0)
                    m.temperature[i] += (which & 1 ? e1 : 0.0) + (which & 2 ? e2 : 0.0);
            }
            return m;
        };
        PlantMeasurement m1 = perturbed(1), m2 = perturbed(2), m12 = perturbed(3);
        double worst2 = 0.0;
        for (Phase p : {Phase::solid, Phase::liquid}) {
            double r = ctrl.control_input(m12, p) - ctrl.control_input(m1, p) -
                       ctrl.control_input(m2, p) + ctrl.control_input(m0, p);
            double scale = std::abs(ctrl.control_input(m12, p)) + 1.0;
            worst2 = std::max(worst2, std::abs(r) / scale);
        }
        add(rep, "controller superposition", worst2 <= 1e-9,
            "additivity residual, rel " + fmt(worst2));
    }

    // plant: uniform melting-point state is an exact fixed point
    {
        SimConfig cfg;
        cfg.cells = 21;
        cfg.t_end = 1.0;
        SimState s;
        s.t = 0.0;
        s.gamma = 0.5 * (mat.solid.boundary + mat.liquid.boundary);
        s.us.assign(21, 0.0);
        s.ul.assign(21, 0.0);
        SimState before = s;
        bool ok = true;
        for (int k = 0; k < 50; ++k) ok = ok && step(s, mat, cfg, 0.0, 0.0, 0.1);
        ok = ok && s.gamma == before.gamma && s.us == before.us && s.ul == before.ul;
        add(rep, "plant melting-point fixed point", ok,
            ok ? "50 zero-input steps leave the state bitwise unchanged" : "state moved");
    }

    // plant: sealed-domain conservation and the two-phase flux ledger
    {
        SimConfig cfg;
        cfg.cells = 31;
        cfg.interface_mode = InterfaceMode::insulated;
        SimState s;
        s.t = 0.0;
        s.gamma = 0.25;
        s.us.resize(31);
        s.ul.assign(31, 0.0);
        for (int j = 0; j < 31; ++j) s.us[j] = std::exp(-8.0 * (j / 31.0 - 0.4) * (j / 31.0 - 0.4));
        double worst = 0.0;
        double h0 = relative_enthalpy(s, mat);
        for (int k = 0; k < 200; ++k) {
            double before = relative_enthalpy(s, mat);
            step(s, mat, cfg, 0.0, 0.0, 5.0);
            worst = std::max(worst, std::abs(relative_enthalpy(s, mat) - before) /
                                        (std::abs(h0) + 1e-300));
        }
        bool ok1 = worst <= 1e-10;

        SimConfig cfg2;
        cfg2.cells = 31;
        cfg2.dgamma0 = 0.004;
        SimState s2 = make_initial_state(ref, cfg2);
        double qs = ref.feedforward_flux(Phase::solid, 0.0);
        double ql = ref.feedforward_flux(Phase::liquid, 0.0);
        double worst2 = 0.0;
        for (int k = 0; k < 200; ++k) {
            double before = relative_enthalpy(s2, mat) -
                            mat.melt_density * mat.latent_heat * s2.gamma;
            if (!step(s2, mat, cfg2, qs, ql, 2.0)) break;
            double after = relative_enthalpy(s2, mat) -
                           mat.melt_density * mat.latent_heat * s2.gamma;
            double res = (after - before) / 2.0 - (qs + ql);
            worst2 = std::max(worst2, std::abs(res) / (std::abs(qs) + std::abs(ql) + 1.0));
        }
        bool ok2 = worst2 <= 1e-8;
        add(rep, "plant conservation", ok1 && ok2,
            "sealed drift " + fmt(worst) + " rel/step, flux ledger " + fmt(worst2) + " rel");
    }

    // feedforward tracking over a mid-ramp window; the injection hook flips
    // the boundary-flux orientation sign in the published table, which must
    // drag the front off the plan and turn this check red
    {
        double t0 = 0.44 * sc.duration, t1 = t0 + 7200.0;
        FeedforwardTable tab = build_feedforward_table(ref, t0, t1, 49);
        if (opt.inject_kappa_flip) {
            for (double& q : tab.qs) q = -q;
            for (double& q : tab.ql) q = -q;
        }
        SimConfig cfg;
        cfg.cells = 41;
        cfg.t_start = t0;
        cfg.t_end = t1;
        cfg.output_interval = 600.0;
        RunInput in;
        in.feedforward = &tab;
        RunLog log = run_closed_loop(ref, cfg, in);
        double worst = 0.0;
        for (const RunRow& r : log.rows) worst = std::max(worst, std::abs(r.dgamma));
        // clean runs stay near 1e-7 m, the flipped table drifts to ~3e-2 m
        bool ok = log.completed && worst <= 1e-5;
        std::ostringstream os;
        os << "max front deviation " << fmt(worst) << " m over " << (t1 - t0) << " s";
        if (!log.completed) os << " (aborted: " << log.abort_reason << ")";
        add(rep, "feedforward tracking", ok, os.str());
    }

    return rep;
}

} // namespace stefan
