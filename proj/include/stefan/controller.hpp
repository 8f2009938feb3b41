#pragma once

#include <limits>
#include <vector>

#include "stefan/kernel.hpp"
#include "stefan/material.hpp"
#include "stefan/reference.hpp"

namespace stefan {

// One temperature snapshot of the plant: samples over the full domain
// [z_bs, z_bl] at ascending node coordinates, including the interface node
// (value T_m there). gamma_dot is optional; when the plant cannot supply it,
// the error state estimates the interface velocity from the sampled gradients
// via the latent-heat balance (never by differencing gamma in time).
struct PlantMeasurement {
    double t = 0.0;
    double gamma = 0.0;
    double gamma_dot = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> z;
    std::vector<double> temperature;
};

// linear interpolation of the sampled profile; z clamped to the sampled span
double measurement_value(const PlantMeasurement& m, double z);

// Tracking-error coordinates: field errors per phase on the moving frame
// z~ = z - gamma (plant relative to its own interface, reference relative to
// the reference interface), plus the interface position/velocity errors.
struct ErrorState {
    double dgamma = 0.0;
    double dgamma_dot = 0.0;
    std::vector<double> z_solid, err_solid;    // z~ <= 0, ascending
    std::vector<double> z_liquid, err_liquid;  // z~ >= 0, ascending
};

ErrorState error_state(const PlantMeasurement& m, const ReferenceField& ref);

// Pointwise Hopf-Cole weighting with psi(z~) = exp(-gdot_r z~ / (2 alpha)).
// forward multiplies by psi, inverse divides; the pair is an exact identity.
std::vector<double> hopf_cole(const std::vector<double>& z, const std::vector<double>& values,
                              double gdot_r, double alpha, bool forward);

struct ControllerConfig {
    double mu = -1e-2;            // target reaction coefficient (1/s), <= 0
    double nu = 0.0;              // target boundary gain (1/m), <= 0
    double quadrature_step = 0.0; // controller integral step (m); 0 = kernel grid step
    void validate() const;
};

// Boundary feedback in original coordinates. For each phase the law is
// evaluated on the mirrored half-line x = beta (z - gamma):
//   qdot = lambda [ (k(Xb,Xb) + nu - V/(2 alpha)) e(Xb)
//                   + int_0^Xb (d1k - nu k)(Xb,xi) e(xi) exp(V (xi-Xb)/(2 alpha)) dxi
//                   + beta dT_ref/dz(Xb, interface coordinates) ]
// with V = beta gdot_r, Xb = beta (z_b - gamma) and the error sampled
// front-relative on both sides, e(xi) = T(gamma + beta xi) - T_ref(beta xi)
// with T_ref in its own interface frame: the same pairing error_state uses.
// Kernels are interpolated linearly between the two bracketing time samples.
class Controller {
public:
    Controller(const ReferenceField& ref, const KernelTimeSeries& kernels,
               const ControllerConfig& cfg);

    // heater heat flow for phase p (W/m^2)
    double control_input(const PlantMeasurement& m, Phase p) const;

    // pure feedforward part, (lambda/beta) dT_ref/dz at the actuated boundary
    double feedforward(Phase p, double t) const;

    ErrorState error_state(const PlantMeasurement& m) const;

    const ControllerConfig& config() const { return cfg_; }

private:
    const StefanMaterial mat_;
    ReferenceField eval_;  // shallow-depth field for value/gradient queries
    const KernelTimeSeries* kernels_;
    ControllerConfig cfg_;

    struct SliceCache {
        bool valid = false;
        double t = 0.0;
        ReferenceSlice slice;
    };
    mutable SliceCache cache_[2];

    const ReferenceSlice& slice_at(Phase p, double t) const;
};

} // namespace stefan
