#pragma once

#include <string>

namespace stefan {

enum class Phase { solid, liquid };

inline const char* phase_name(Phase p) { return p == Phase::solid ? "solid" : "liquid"; }

// Orientation sign: the solid occupies z < gamma, the liquid z > gamma, so the
// outward boundary sits at beta*(z_b - gamma) > 0 with beta = -1 for the solid
// and +1 for the liquid. The same sign mirrors each phase onto a common
// half-line x = beta*(z - gamma) >= 0.
inline double phase_beta(Phase p) { return p == Phase::solid ? -1.0 : 1.0; }

struct PhaseParams {
    double conductivity = 0.0;   // W/(m K)
    double density = 0.0;        // kg/m^3
    double specific_heat = 0.0;  // J/(kg K)
    double boundary = 0.0;       // z_b, actuated end of this phase [m]

    double diffusivity() const { return conductivity / (density * specific_heat); }
};

// Two-phase container with the interface data. Geometry convention:
// solid.boundary < liquid.boundary, interface position gamma in between.
struct StefanMaterial {
    PhaseParams solid;
    PhaseParams liquid;
    double melting_temperature = 0.0;  // K
    double latent_heat = 0.0;          // J/kg
    double melt_density = 0.0;         // kg/m^3, density in the latent-heat balance

    const PhaseParams& phase(Phase p) const { return p == Phase::solid ? solid : liquid; }

    // Front-velocity weight on the interface temperature gradient of phase p:
    // gamma_dot = kappa(solid)*dT_s/dz(gamma) + kappa(liquid)*dT_l/dz(gamma).
    double kappa(Phase p) const {
        return -phase_beta(p) * phase(p).conductivity / (latent_heat * melt_density);
    }

    // Maximum interface travel range; also the kernel grid's spatial extent.
    double domain_extent() const { return liquid.boundary - solid.boundary; }

    // Throws validation_error on unphysical or inconsistent values.
    void validate() const;
};

// GaAs vertical-gradient-freeze furnace values (handbook data, see shipped config).
StefanMaterial gaas_material();

} // namespace stefan
