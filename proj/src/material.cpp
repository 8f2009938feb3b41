#include "stefan/material.hpp"

#include <cmath>
#include <string>

#include "stefan/errors.hpp"

namespace stefan {

namespace {
void check_phase(const PhaseParams& p, const char* name) {
    auto bad = [&](const char* what, double v) {
        throw validation_error(std::string(name) + "." + what + " must be positive, got " +
                               std::to_string(v));
    };
    if (!(p.conductivity > 0.0) || !std::isfinite(p.conductivity)) bad("conductivity", p.conductivity);
    if (!(p.density > 0.0) || !std::isfinite(p.density)) bad("density", p.density);
    if (!(p.specific_heat > 0.0) || !std::isfinite(p.specific_heat)) bad("specific_heat", p.specific_heat);
    if (!std::isfinite(p.boundary))
        throw validation_error(std::string(name) + ".boundary is not finite");
}
} // namespace

void StefanMaterial::validate() const {
    check_phase(solid, "solid");
    check_phase(liquid, "liquid");
    if (!(latent_heat > 0.0)) throw validation_error("latent_heat must be positive");
    if (!(melt_density > 0.0)) throw validation_error("melt_density must be positive");
    if (!(melting_temperature > 0.0)) throw validation_error("melting_temperature must be positive");
    if (!(solid.boundary < liquid.boundary))
        throw validation_error("solid boundary must lie below the liquid boundary (got " +
                               std::to_string(solid.boundary) + " >= " +
                               std::to_string(liquid.boundary) + ")");
}

StefanMaterial gaas_material() {
    StefanMaterial m;
    m.solid = {7.1, 5316.0, 424.0, 0.0};
    m.liquid = {17.8, 5720.0, 434.0, 0.4};
    m.melting_temperature = 1511.0;
    m.latent_heat = 7.26e5;
    m.melt_density = 5720.0;
    return m;
}

} // namespace stefan
