#include "stefan/reference.hpp"

#include <cmath>
#include <string>

#include "stefan/errors.hpp"

namespace stefan {

double melt_gradient(double solid_gradient, double growth_rate, const StefanMaterial& mat) {
    if (mat.liquid.conductivity == 0.0)
        throw validation_error("melt gradient undefined for zero liquid conductivity");
    return (mat.solid.conductivity * solid_gradient -
            mat.melt_density * mat.latent_heat * growth_rate) /
           mat.liquid.conductivity;
}

std::pair<double, double> eval_flat_output(const FlatTrajectory& traj, double t, int n) {
    return {traj.y1_jet(t, n)[n], traj.gamma_jet(t, n)[n]};
}

FlatTrajectory::FlatTrajectory(double gamma_start, double gamma_end, double y1_start,
                               double y1_end, double duration, double omega, int max_order)
    : phi_(0.0, duration, omega, max_order),
      g0_(gamma_start), g1_(gamma_end), y10_(y1_start), y11_(y1_end) {}

Jet FlatTrajectory::gamma_jet(double t, int order) const {
    Jet j = phi_.jets(t, order);
    const double dg = g1_ - g0_;
    for (double& v : j.d) v *= dg;
    j[0] += g0_;
    return j;
}

Jet FlatTrajectory::y1_jet(double t, int order) const {
    Jet j = phi_.jets(t, order);
    const double dy = y11_ - y10_;
    for (double& v : j.d) v *= dy;
    j[0] += y10_;
    return j;
}

double FlatTrajectory::gamma(double t) const { return g0_ + (g1_ - g0_) * phi_.value(t); }

double FlatTrajectory::gamma_dot(double t) const { return gamma_jet(t, 1)[1]; }

void ReferenceSlice::check_domain(double z) const {
    const double tol = 1e-12 + 1e-9 * (z_hi - z_lo);
    if (z < z_lo - tol || z > z_hi + tol)
        throw validation_error("reference evaluated at z = " + std::to_string(z) +
                               " outside the admissible interval [" + std::to_string(z_lo) +
                               ", " + std::to_string(z_hi) + "]");
}

double ReferenceSlice::value(double z) const {
    check_domain(z);
    double term = 1.0;  // z^i / i!
    double s = 0.0;
    for (int i = 0; i <= terms; ++i) {
        s += c[static_cast<std::size_t>(i)][0] * term;
        term *= z / (i + 1);
    }
    return s;
}

double ReferenceSlice::dz(double z, int n) const {
    check_domain(z);
    if (n < 0 || n > terms) return 0.0;
    double term = 1.0;
    double s = 0.0;
    for (int i = 0; i + n <= terms; ++i) {
        s += c[static_cast<std::size_t>(i + n)][0] * term;
        term *= z / (i + 1);
    }
    return s;
}

Jet ReferenceSlice::time_jet(double z, int order) const {
    check_domain(z);
    if (order > uniform_depth())
        throw capability_error("reference time stack order " + std::to_string(order) +
                               " exceeds the uniformly valid depth " +
                               std::to_string(uniform_depth()) +
                               "; raise the planner depth or lower the series truncation");
    Jet out(order);
    for (int m = 0; m <= order; ++m) {
        double term = 1.0;
        double s = 0.0;
        for (int i = 0; i <= terms; ++i) {
            s += c[static_cast<std::size_t>(i)][m] * term;
            term *= z / (i + 1);
        }
        out[m] = s;
    }
    return out;
}

Jet ReferenceSlice::gradient_jet(double z, int order) const {
    check_domain(z);
    if (order > uniform_depth())
        throw capability_error("reference gradient stack order " + std::to_string(order) +
                               " exceeds the uniformly valid depth " +
                               std::to_string(uniform_depth()));
    Jet out(order);
    for (int m = 0; m <= order; ++m) {
        double term = 1.0;
        double s = 0.0;
        for (int i = 1; i <= terms; ++i) {
            s += c[static_cast<std::size_t>(i)][m] * term;
            term *= z / i;
        }
        out[m] = s;
    }
    return out;
}

ReferenceField::ReferenceField(const StefanMaterial& mat, const FlatTrajectory& traj,
                               int series_terms, int coeff_depth)
    : mat_(mat), traj_(&traj), terms_(series_terms), depth_(coeff_depth) {
    mat.validate();
    if (series_terms < 2) throw validation_error("series truncation must be at least 2");
    if (coeff_depth < (series_terms + 1) / 2 + 1)
        throw validation_error("coefficient depth too small for the series truncation");
    // the recursion consumes gamma stacks one order above the c_0 depth
    const int need = coeff_depth + 1;
    if (traj.max_order() < need)
        throw capability_error("planner stack depth " + std::to_string(traj.max_order()) +
                               " is insufficient: series coefficients need flat-output "
                               "derivatives to order " + std::to_string(need));
}

ReferenceSlice ReferenceField::slice(Phase p, double t) const {
    ReferenceSlice s;
    s.phase = p;
    s.t = t;
    s.alpha = mat_.phase(p).diffusivity();
    s.terms = terms_;
    s.base_depth = depth_;
    // series stays meaningful across the maximum phase extent either way;
    // the controller crosses z = 0 by the interface offset when perturbed
    s.z_hi = mat_.domain_extent();
    s.z_lo = -s.z_hi;

    const Jet gdot = jet_dot(traj_->gamma_jet(t, depth_ + 1));  // order depth_
    const Jet y1 = traj_->y1_jet(t, depth_);

    s.c.resize(static_cast<std::size_t>(terms_) + 1);
    s.c[0] = jet_const(mat_.melting_temperature, depth_);
    if (p == Phase::solid) {
        Jet c1(depth_ - 1);
        for (int m = 0; m < depth_; ++m) c1[m] = y1[m];
        s.c[1] = c1;
    } else {
        // liquid-side gradient from the latent-heat balance:
        // lambda_l c1_l = lambda_s y1 - rho L gamma_dot
        const double ls = mat_.solid.conductivity;
        const double ll = mat_.liquid.conductivity;
        const double rl = mat_.melt_density * mat_.latent_heat;
        Jet c1(depth_ - 1);
        for (int m = 0; m < depth_; ++m) c1[m] = (ls * y1[m] - rl * gdot[m]) / ll;
        s.c[1] = c1;
    }

    for (int i = 0; i + 2 <= terms_; ++i) {
        const int dep = depth_ - (i + 3) / 2;  // = depth(i) - 1
        Jet next(dep);
        const Jet& ci = s.c[static_cast<std::size_t>(i)];
        const Jet& cip = s.c[static_cast<std::size_t>(i) + 1];
        for (int m = 0; m <= dep; ++m) {
            double acc = ci[m + 1];
            for (int d = 0; d <= m; ++d) acc -= binom(m, d) * gdot[d] * cip[m - d];
            next[m] = acc / s.alpha;
        }
        s.c[static_cast<std::size_t>(i) + 2] = next;
    }
    return s;
}

double ReferenceField::boundary_offset(Phase p, double t) const {
    return mat_.phase(p).boundary - traj_->gamma(t);
}

double ReferenceField::feedforward_flux(Phase p, double t) const {
    const ReferenceSlice s = slice(p, t);
    return mat_.phase(p).conductivity * phase_beta(p) * s.dz(boundary_offset(p, t), 1);
}

} // namespace stefan
