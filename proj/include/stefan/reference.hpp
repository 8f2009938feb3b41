#pragma once

#include <utility>
#include <vector>

#include "stefan/gevrey.hpp"
#include "stefan/jet.hpp"
#include "stefan/material.hpp"

namespace stefan {

// Liquid-side interface gradient from the latent-heat balance,
// (lambda_s * solid_gradient - rho_melt * L * growth_rate) / lambda_l.
double melt_gradient(double solid_gradient, double growth_rate, const StefanMaterial& mat);

// Flat outputs of the two-phase problem: y2 = reference interface position
// gamma_ref(t), y1 = solid-side interface temperature gradient. Both ramp
// between their endpoint values through one shared smooth transition, so all
// stacks are available to the planner depth.
class FlatTrajectory {
public:
    FlatTrajectory(double gamma_start, double gamma_end, double y1_start, double y1_end,
                   double duration, double omega, int max_order);

    Jet gamma_jet(double t, int order) const;
    Jet y1_jet(double t, int order) const;
    double gamma(double t) const;
    double gamma_dot(double t) const;

    int max_order() const { return phi_.max_order(); }
    double duration() const { return phi_.duration(); }
    const GevreyTransition& transition() const { return phi_; }

private:
    GevreyTransition phi_;
    double g0_, g1_, y10_, y11_;
};

// (y1^(n), y2^(n)) of the flat output at time t.
std::pair<double, double> eval_flat_output(const FlatTrajectory& traj, double t, int n);

// Reference temperature of one phase at one instant, as the truncated series
//   T(z, t) = sum_{i=0}^{M} c_i(t) z^i / i!
// in interface-attached coordinates z (negative into the solid, positive into
// the liquid). c_i carries a derivative stack of depth base_depth - ceil(i/2);
// the stacks shrink with i because each recursion step
//   c_{i+2} = (c_i' - gamma_dot c_{i+1}) / alpha
// consumes one time derivative per two spatial orders.
struct ReferenceSlice {
    Phase phase = Phase::solid;
    double t = 0.0;
    double alpha = 0.0;
    std::vector<Jet> c;
    int terms = 0;       // M
    int base_depth = 0;  // stack depth of c_0
    // admissible evaluation interval in interface coordinates; the field
    // builder sets it to the maximum phase extent both ways (kernel grids and
    // the interface-side of the controller error both cross z = 0 slightly)
    double z_lo = -1e300;
    double z_hi = 1e300;

    double value(double z) const;
    double dz(double z, int n) const;

    // Uniformly valid time-derivative depth across all series indices.
    int uniform_depth() const { return base_depth - (terms + 1) / 2; }

    Jet time_jet(double z, int order) const;      // stacks of T(z, .)
    Jet gradient_jet(double z, int order) const;  // stacks of dT/dz(z, .)

private:
    void check_domain(double z) const;
};

// Closed-form reference evaluation for both phases. Slices are computed
// per query from the flat-output stacks; no spatial/temporal caching, so
// there is no interpolation error anywhere in the reference path.
class ReferenceField {
public:
    ReferenceField(const StefanMaterial& mat, const FlatTrajectory& traj, int series_terms,
                   int coeff_depth);

    ReferenceSlice slice(Phase p, double t) const;

    // interface-relative position of phase p's actuated boundary
    double boundary_offset(Phase p, double t) const;

    // boundary heat flux that tracks the reference exactly when the error is zero
    double feedforward_flux(Phase p, double t) const;

    const FlatTrajectory& trajectory() const { return *traj_; }
    const StefanMaterial& material() const { return mat_; }
    int terms() const { return terms_; }
    int coeff_depth() const { return depth_; }

private:
    StefanMaterial mat_;
    const FlatTrajectory* traj_;
    int terms_;
    int depth_;
};

} // namespace stefan
