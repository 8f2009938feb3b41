#include "stefan/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stefan/errors.hpp"

namespace stefan {

namespace {

// Thomas solve of a tridiagonal system written in place; rhs becomes the
// solution. sub/sup are the j>0 and j<n-1 couplings of row j.
void tridiag_solve(std::vector<double>& diag, const std::vector<double>& sub,
                   const std::vector<double>& sup, std::vector<double>& rhs) {
    std::size_t n = diag.size();
    for (std::size_t j = 1; j < n; ++j) {
        double w = sub[j] / diag[j - 1];
        diag[j] -= w * sup[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) rhs[j] = (rhs[j] - sup[j] * rhs[j + 1]) / diag[j];
}

// face value extrapolated from the three nearest cell centers (second order)
double face_extrapolate(double u0, double u1, double u2) {
    return (15.0 * u0 - 10.0 * u1 + 3.0 * u2) / 8.0;
}

struct PhaseGeom {
    double alpha, lambda, rho_c, len;
};

PhaseGeom phase_geom(const SimState& s, const StefanMaterial& mat, Phase p) {
    const PhaseParams& pp = mat.phase(p);
    double len = p == Phase::solid ? s.gamma - mat.solid.boundary : mat.liquid.boundary - s.gamma;
    return {pp.diffusivity(), pp.conductivity, pp.density * pp.specific_heat, len};
}

} // namespace

void SimConfig::validate() const {
    if (cells < 5) throw validation_error("simulator needs at least 5 cells per phase");
    if (!std::isfinite(t_start) || !(t_start >= 0.0))
        throw validation_error("simulation start time must be finite and non-negative");
    if (!(t_end > t_start) || !std::isfinite(t_end))
        throw validation_error("simulation end time must lie past the start time");
    if (!(output_interval > 0.0) || !std::isfinite(output_interval))
        throw validation_error("output interval must be positive");
    if (!std::isfinite(dgamma0)) throw validation_error("initial front offset must be finite");
    if (dgamma_dot0 && !std::isfinite(*dgamma_dot0))
        throw validation_error("initial front-velocity offset must be finite");
    if (!(dt_safety > 0.0) || dt_safety > 1.0)
        throw validation_error("dt safety factor must lie in (0, 1]");
    if (!(guard_band >= 0.0) || !std::isfinite(guard_band))
        throw validation_error("guard band must be non-negative");
}

FaceGradients interface_gradients(const SimState& s, const StefanMaterial& mat) {
    int n = s.cells();
    double h = 1.0 / n;
    PhaseGeom gs = phase_geom(s, mat, Phase::solid);
    PhaseGeom gl = phase_geom(s, mat, Phase::liquid);
    FaceGradients fg;
    // parabola through the Dirichlet face value 0 and the two nearest cells
    fg.gz_solid = -(9.0 * s.us[n - 1] - s.us[n - 2]) / (3.0 * h * gs.len);
    fg.gz_liquid = (9.0 * s.ul[0] - s.ul[1]) / (3.0 * h * gl.len);
    return fg;
}

double interface_velocity(const SimState& s, const StefanMaterial& mat, InterfaceMode mode) {
    if (mode == InterfaceMode::insulated) return 0.0;
    FaceGradients fg = interface_gradients(s, mat);
    return (mat.solid.conductivity * fg.gz_solid - mat.liquid.conductivity * fg.gz_liquid) /
           (mat.melt_density * mat.latent_heat);
}

PlantMeasurement sample_measurement(const SimState& s, const StefanMaterial& mat,
                                    InterfaceMode mode) {
    int n = s.cells();
    double h = 1.0 / n;
    double tm = mat.melting_temperature;
    PhaseGeom gs = phase_geom(s, mat, Phase::solid);
    PhaseGeom gl = phase_geom(s, mat, Phase::liquid);

    PlantMeasurement m;
    m.t = s.t;
    m.gamma = s.gamma;
    m.gamma_dot = interface_velocity(s, mat, mode);
    m.z.reserve(2 * n + 3);
    m.temperature.reserve(2 * n + 3);

    m.z.push_back(mat.solid.boundary);
    m.temperature.push_back(tm + face_extrapolate(s.us[0], s.us[1], s.us[2]));
    for (int j = 0; j < n; ++j) {
        m.z.push_back(mat.solid.boundary + (j + 0.5) * h * gs.len);
        m.temperature.push_back(tm + s.us[j]);
    }
    m.z.push_back(s.gamma);
    m.temperature.push_back(tm);
    for (int j = 0; j < n; ++j) {
        m.z.push_back(s.gamma + (j + 0.5) * h * gl.len);
        m.temperature.push_back(tm + s.ul[j]);
    }
    m.z.push_back(mat.liquid.boundary);
    m.temperature.push_back(tm + face_extrapolate(s.ul[n - 1], s.ul[n - 2], s.ul[n - 3]));
    return m;
}

double relative_enthalpy(const SimState& s, const StefanMaterial& mat) {
    int n = s.cells();
    double h = 1.0 / n;
    PhaseGeom gs = phase_geom(s, mat, Phase::solid);
    PhaseGeom gl = phase_geom(s, mat, Phase::liquid);
    double sum_s = 0.0, sum_l = 0.0;
    for (double u : s.us) sum_s += u;
    for (double u : s.ul) sum_l += u;
    return gs.rho_c * h * gs.len * sum_s + gl.rho_c * h * gl.len * sum_l;
}

bool step(SimState& s, const StefanMaterial& mat, const SimConfig& cfg, double qs, double ql,
          double dt, StepReport* rep) {
    int n = s.cells();
    double h = 1.0 / n;
    bool dirichlet = cfg.interface_mode == InterfaceMode::dirichlet;

    FaceGradients fg = interface_gradients(s, mat);
    double gdot = dirichlet ? (mat.solid.conductivity * fg.gz_solid -
                               mat.liquid.conductivity * fg.gz_liquid) /
                                  (mat.melt_density * mat.latent_heat)
                            : 0.0;
    if (!std::isfinite(gdot)) return false;

    double gp = s.gamma + dt * gdot;
    if (gp - mat.solid.boundary < cfg.guard_band || mat.liquid.boundary - gp < cfg.guard_band) {
        std::ostringstream os;
        os << "front at " << gp << " m entered the " << cfg.guard_band
           << " m guard band of the domain [" << mat.solid.boundary << ", " << mat.liquid.boundary
           << "]; domain exhausted";
        throw divergence_error(os.str());
    }

    PhaseGeom pg[2] = {phase_geom(s, mat, Phase::solid), phase_geom(s, mat, Phase::liquid)};
    // keep the front crossing well under a cell per step
    if (std::abs(gp - s.gamma) > 0.2 * h * std::min(pg[0].len, pg[1].len)) return false;

    double len_new[2] = {gp - mat.solid.boundary, mat.liquid.boundary - gp};

    std::vector<double> unew[2];
    for (int pi = 0; pi < 2; ++pi) {
        const std::vector<double>& u = pi == 0 ? s.us : s.ul;
        const PhaseGeom& g = pg[pi];

        // explicit face terms E_f = alpha du/dz + w u at time level n;
        // faces 0..n, oriented with z
        std::vector<double> E(static_cast<std::size_t>(n) + 1);
        if (pi == 0) {
            E[0] = g.alpha * (-qs / g.lambda);  // Neumann heat flow, static face
            for (int f = 1; f < n; ++f)
                E[f] = (f * h) * gdot * 0.5 * (u[f - 1] + u[f]);
            E[n] = dirichlet ? g.alpha * fg.gz_solid : 0.0;  // u = 0 kills the mesh term
        } else {
            E[0] = dirichlet ? g.alpha * fg.gz_liquid : 0.0;
            for (int f = 1; f < n; ++f)
                E[f] = (1.0 - f * h) * gdot * 0.5 * (u[f - 1] + u[f]);
            E[n] = g.alpha * (ql / g.lambda);
        }

        // implicit interior diffusion on the post-step geometry
        double lp = len_new[pi];
        double c = g.alpha * dt / (h * lp);
        std::vector<double> diag(static_cast<std::size_t>(n)), sub(static_cast<std::size_t>(n)),
            sup(static_cast<std::size_t>(n)), rhs(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            double d = h * lp;
            if (j > 0) {
                d += c;
                sub[static_cast<std::size_t>(j)] = -c;
            }
            if (j < n - 1) {
                d += c;
                sup[static_cast<std::size_t>(j)] = -c;
            }
            diag[static_cast<std::size_t>(j)] = d;
            rhs[static_cast<std::size_t>(j)] =
                h * g.len * u[static_cast<std::size_t>(j)] + dt * (E[j + 1] - E[j]);
        }
        tridiag_solve(diag, sub, sup, rhs);
        for (double v : rhs)
            if (!std::isfinite(v)) return false;
        unew[pi] = std::move(rhs);
    }

    s.us = std::move(unew[0]);
    s.ul = std::move(unew[1]);
    s.gamma = gp;
    s.t += dt;
    if (rep) {
        rep->gamma_dot = gdot;
        rep->gz_solid = fg.gz_solid;
        rep->gz_liquid = fg.gz_liquid;
    }
    return true;
}

SimState make_initial_state(const ReferenceField& ref, const SimConfig& cfg) {
    cfg.validate();
    const StefanMaterial& mat = ref.material();
    Jet gj = ref.trajectory().gamma_jet(cfg.t_start, 1);
    double g0 = gj[0] + cfg.dgamma0;
    if (g0 - mat.solid.boundary <= cfg.guard_band || mat.liquid.boundary - g0 <= cfg.guard_band)
        throw validation_error("initial front position violates the guard band");

    int n = cfg.cells;
    double h = 1.0 / n;
    double tm = mat.melting_temperature;
    ReferenceSlice ss = ref.slice(Phase::solid, cfg.t_start);
    ReferenceSlice sl = ref.slice(Phase::liquid, cfg.t_start);

    SimState s;
    s.t = cfg.t_start;
    s.gamma = g0;
    s.us.resize(static_cast<std::size_t>(n));
    s.ul.resize(static_cast<std::size_t>(n));
    double ls = g0 - mat.solid.boundary, ll = mat.liquid.boundary - g0;
    for (int j = 0; j < n; ++j) {
        double zt_s = (j + 0.5) * h * ls - ls;  // z - gamma, solid side
        double zt_l = (j + 0.5) * h * ll;
        s.us[static_cast<std::size_t>(j)] = ss.value(zt_s) - tm;
        s.ul[static_cast<std::size_t>(j)] = sl.value(zt_l) - tm;
        if (cfg.perturbation) {
            s.us[static_cast<std::size_t>(j)] += cfg.perturbation(Phase::solid, zt_s);
            s.ul[static_cast<std::size_t>(j)] += cfg.perturbation(Phase::liquid, zt_l);
        }
    }

    if (cfg.dgamma_dot0) {
        // realise the requested discrete front velocity exactly by scaling the
        // liquid field so the latent-heat balance of the sampled profile hits it
        FaceGradients fg = interface_gradients(s, mat);
        double target = gj[1] + *cfg.dgamma_dot0;
        double gl_target = melt_gradient(fg.gz_solid, target, mat);
        if (std::abs(fg.gz_liquid) < 1e-30)
            throw validation_error(
                "cannot realise an initial front-velocity offset on a flat liquid profile");
        double scale = gl_target / fg.gz_liquid;
        for (double& u : s.ul) u *= scale;
    }
    return s;
}

std::pair<double, double> error_norms(const ErrorState& es) {
    auto trap = [](const std::vector<double>& z, const std::vector<double>& e) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < z.size(); ++i)
            acc += 0.5 * (e[i] * e[i] + e[i + 1] * e[i + 1]) * (z[i + 1] - z[i]);
        return std::sqrt(std::max(acc, 0.0));
    };
    return {trap(es.z_solid, es.err_solid), trap(es.z_liquid, es.err_liquid)};
}

double FeedforwardTable::at(Phase p, double time) const {
    const std::vector<double>& q = p == Phase::solid ? qs : ql;
    if (time <= t.front()) return q.front();
    if (time >= t.back()) return q.back();
    auto it = std::upper_bound(t.begin(), t.end(), time);
    std::size_t hi = static_cast<std::size_t>(it - t.begin());
    double w = (time - t[hi - 1]) / (t[hi] - t[hi - 1]);
    return (1.0 - w) * q[hi - 1] + w * q[hi];
}

FeedforwardTable build_feedforward_table(const ReferenceField& ref, double t0, double t1,
                                         int samples) {
    if (samples < 2) throw validation_error("feedforward table needs at least 2 samples");
    if (!(t1 > t0)) throw validation_error("feedforward table needs t1 > t0");
    FeedforwardTable tab;
    tab.t.resize(static_cast<std::size_t>(samples));
    tab.qs.resize(static_cast<std::size_t>(samples));
    tab.ql.resize(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) {
        double tk = t0 + (t1 - t0) * k / (samples - 1);
        tab.t[static_cast<std::size_t>(k)] = tk;
        tab.qs[static_cast<std::size_t>(k)] = ref.feedforward_flux(Phase::solid, tk);
        tab.ql[static_cast<std::size_t>(k)] = ref.feedforward_flux(Phase::liquid, tk);
    }
    return tab;
}

RunLog run_closed_loop(const ReferenceField& ref, const SimConfig& cfg, const RunInput& input,
                       const std::function<void(const RunRow&, const SimState&)>& on_row) {
    cfg.validate();
    if (!input.custom && !input.controller && !input.feedforward)
        throw validation_error("run needs an input source: custom law, controller, or table");
    const StefanMaterial& mat = ref.material();
    const FlatTrajectory& traj = ref.trajectory();

    RunLog log;
    SimState st = make_initial_state(ref, cfg);

    auto compute_inputs = [&](const SimState& s) -> std::pair<double, double> {
        if (input.custom)
            return {input.custom(Phase::solid, s.t, s), input.custom(Phase::liquid, s.t, s)};
        if (input.controller) {
            PlantMeasurement m = sample_measurement(s, mat, cfg.interface_mode);
            return {input.controller->control_input(m, Phase::solid),
                    input.controller->control_input(m, Phase::liquid)};
        }
        return {input.feedforward->at(Phase::solid, s.t), input.feedforward->at(Phase::liquid, s.t)};
    };

    auto emit_row = [&](const SimState& s) {
        Jet gj = traj.gamma_jet(s.t, 1);
        PlantMeasurement m = sample_measurement(s, mat, cfg.interface_mode);
        ErrorState es = error_state(m, ref);
        auto norms = error_norms(es);
        auto q = compute_inputs(s);
        RunRow row;
        row.t = s.t;
        row.gamma = s.gamma;
        row.gamma_r = gj[0];
        row.dgamma = es.dgamma;
        row.dgamma_dot = es.dgamma_dot;
        row.qs = q.first;
        row.ql = q.second;
        row.l2_solid = norms.first;
        row.l2_liquid = norms.second;
        log.rows.push_back(row);
        if (on_row) on_row(row, s);
    };

    emit_row(st);

    double wtiny = 1e-9 * cfg.output_interval;
    int nw = static_cast<int>(std::ceil((cfg.t_end - cfg.t_start) / cfg.output_interval - 1e-12));
    try {
        for (int k = 1; k <= nw; ++k) {
            double wend = std::min(cfg.t_start + k * cfg.output_interval, cfg.t_end);
            double h = 1.0 / cfg.cells;
            PhaseGeom gs = phase_geom(st, mat, Phase::solid);
            PhaseGeom gl = phase_geom(st, mat, Phase::liquid);
            double dt_raw = cfg.dt_safety * std::min((h * gs.len) * (h * gs.len) / (3.0 * gs.alpha),
                                                     (h * gl.len) * (h * gl.len) / (3.0 * gl.alpha));
            int m = std::max(1, static_cast<int>(std::ceil((wend - st.t) / dt_raw)));
            double dt_cur = (wend - st.t) / m;
            double dt_floor = dt_cur * 0x1p-30;

            while (st.t < wend - wtiny) {
                bool last = wend - st.t <= dt_cur * (1.0 + 1e-12);
                double dtq = last ? wend - st.t : dt_cur;
                auto q = compute_inputs(st);
                if (step(st, mat, cfg, q.first, q.second, dtq)) {
                    ++log.steps;
                    if (last) st.t = wend;
                } else {
                    dt_cur *= 0.5;
                    if (dt_cur < dt_floor) {
                        std::ostringstream os;
                        os << "time step collapsed below " << dt_floor << " s at t = " << st.t
                           << " s";
                        throw divergence_error(os.str());
                    }
                }
            }
            emit_row(st);
        }
        log.completed = true;
    } catch (const divergence_error& e) {
        log.completed = false;
        log.abort_reason = e.what();
    }
    log.final_state = st;
    return log;
}

} // namespace stefan
