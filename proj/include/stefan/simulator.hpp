#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stefan/controller.hpp"
#include "stefan/material.hpp"
#include "stefan/reference.hpp"

namespace stefan {

// Finite-volume plant model on interface-fitted coordinates. Each phase keeps
// N cell averages of u = T - T_m on a fixed unit grid; the solid cell j spans
// xi in [j/N, (j+1)/N] of [z_bs, gamma], the liquid likewise of [gamma, z_bl].
// Faces therefore move with the front (solid face velocity xi*gamma_dot,
// liquid (1-xi)*gamma_dot), and every step transports u through the moving
// faces in conservation form, so the discrete enthalpy ledger closes exactly:
//   d/dt [ H' - rho_melt L gamma ] = qdot_s + qdot_l,  H' = sum rho c l h u.
// The front speed uses the same one-sided second-order face gradients as the
// interface fluxes, which is what makes the ledger exact rather than O(h).
struct SimState {
    double t = 0.0;
    double gamma = 0.0;
    std::vector<double> us;  // solid cells, xi ascending towards the interface
    std::vector<double> ul;  // liquid cells, xi ascending away from it

    int cells() const { return static_cast<int>(us.size()); }
};

enum class InterfaceMode {
    dirichlet,  // melting-point interface with the latent-heat balance
    insulated   // both interface faces sealed, front frozen (conservation tests)
};

struct SimConfig {
    int cells = 41;
    double t_start = 0.0;  // initial condition sampled from the reference here
    double t_end = 90000.0;
    double output_interval = 300.0;
    double dgamma0 = 0.0;  // initial front offset against the reference [m]
    // Initial front velocity offset [m/s], realised exactly in the discrete
    // gradients by scaling the liquid field; nullopt leaves the sampled
    // profile untouched.
    std::optional<double> dgamma_dot0 = 0.0;
    double dt_safety = 0.5;    // fraction of the explicit interface-flux limit
    double guard_band = 0.005; // m; front closer than this to a boundary aborts
    InterfaceMode interface_mode = InterfaceMode::dirichlet;
    // optional additive perturbation of the initial field, args (phase, z - gamma)
    std::function<double(Phase, double)> perturbation;

    void validate() const;
};

struct FaceGradients {
    double gz_solid = 0.0;   // dT/dz at the interface, solid side
    double gz_liquid = 0.0;  // dT/dz at the interface, liquid side
};

FaceGradients interface_gradients(const SimState& s, const StefanMaterial& mat);

double interface_velocity(const SimState& s, const StefanMaterial& mat,
                          InterfaceMode mode = InterfaceMode::dirichlet);

// Node samples for the controller: boundary faces (quadratically
// extrapolated), all cell centers, and the interface node at T_m, with the
// discrete front velocity filled in.
PlantMeasurement sample_measurement(const SimState& s, const StefanMaterial& mat,
                                    InterfaceMode mode = InterfaceMode::dirichlet);

// total enthalpy relative to a uniform melting-point state, sum rho c l h u
double relative_enthalpy(const SimState& s, const StefanMaterial& mat);

struct StepReport {
    double gamma_dot = 0.0;
    double gz_solid = 0.0;
    double gz_liquid = 0.0;
};

// One IMEX step of size dt with boundary heat flows (qs, ql): interior
// diffusion implicit on the post-step geometry, interface/boundary and mesh
// fluxes explicit. Returns false and leaves the state untouched when the
// result must be rejected (non-finite values or the front moving further
// than a fraction of a cell); throws divergence_error when the front enters
// the guard band, since no step size recovers from that.
bool step(SimState& s, const StefanMaterial& mat, const SimConfig& cfg, double qs, double ql,
          double dt, StepReport* rep = nullptr);

SimState make_initial_state(const ReferenceField& ref, const SimConfig& cfg);

// L2 norms (sqrt of the trapezoidal integral of the squared field error over
// each phase's current extent) of an error state: (solid, liquid).
std::pair<double, double> error_norms(const ErrorState& es);

// Precomputed reference boundary heat flows for feedforward-only runs.
struct FeedforwardTable {
    std::vector<double> t, qs, ql;
    double at(Phase p, double time) const;
};

FeedforwardTable build_feedforward_table(const ReferenceField& ref, double t0, double t1,
                                         int samples);

// Input source for a run, first non-null wins: custom law, closed-loop
// controller, feedforward table.
struct RunInput {
    const Controller* controller = nullptr;
    const FeedforwardTable* feedforward = nullptr;
    std::function<double(Phase, double, const SimState&)> custom;
};

struct RunRow {
    double t = 0.0;
    double gamma = 0.0;
    double gamma_r = 0.0;
    double dgamma = 0.0;
    double dgamma_dot = 0.0;
    double qs = 0.0;
    double ql = 0.0;
    double l2_solid = 0.0;
    double l2_liquid = 0.0;
};

struct RunLog {
    std::vector<RunRow> rows;
    bool completed = false;
    std::string abort_reason;  // set when completed is false
    SimState final_state;
    long long steps = 0;
};

// Marches the plant from the configured initial state to t_end, logging one
// row per output window (first row at t = t_start). The step size is
// requantised per window to land on the output instants exactly and halved on
// step rejection; hitting the step floor or the guard band ends the run early
// with completed = false and the partial log intact. on_row, when set, is
// called for every row as it is produced, together with the state behind it.
RunLog run_closed_loop(const ReferenceField& ref, const SimConfig& cfg, const RunInput& input,
                       const std::function<void(const RunRow&, const SimState&)>& on_row = {});

} // namespace stefan
