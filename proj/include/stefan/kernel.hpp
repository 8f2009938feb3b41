#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "stefan/jet.hpp"
#include "stefan/material.hpp"
#include "stefan/reference.hpp"

namespace stefan {

// Both phases are handled on the mirrored half-line x = beta*(z - gamma) >= 0,
// so one kernel path serves solid and liquid; the controller undoes the mirror
// when it maps gains back to signed coordinates.

struct KernelGridGeom {
    double extent = 0.0;  // maximum phase extent (m); grids always cover it
    int n_sigma = 0;      // sigma nodes, step delta = extent/(n_sigma-1)
    int n_eta = 0;        // = 2*(n_sigma-1)
    double delta = 0.0;

    static KernelGridGeom from_points(double extent, int n_sigma);
    // step given directly; must divide the extent to grid tolerance
    static KernelGridGeom from_step(double extent, double delta);

    int row_len(int j) const { return n_eta - 2 * j + 1; }  // i ranges j..n_eta-j
    std::size_t node_count() const;
    std::size_t index(int i, int j) const;
};

// Kernel-equation coefficients a = mu - r and bbar (plus the diagnostic
// coupling weight cbar), tabulated with their time-derivative stacks on the
// half-step lattice x_q = q*delta/2 the discrete scheme samples. Stacks are
// propagated analytically from the planner; nothing here is finite-differenced.
class CoefficientField {
public:
    Phase phase = Phase::liquid;
    double t = 0.0;
    double alpha = 0.0;
    double mu = 0.0;
    double nu = 0.0;
    KernelGridGeom geom;
    int depth = 0;  // d_max = n_sigma - 1

    double a(int q, int l) const { return a_[idx(q, l)]; }
    double b(int q, int l) const { return b_[idx(q, l)]; }
    double cbar(int q) const { return c0_[static_cast<std::size_t>(q)]; }
    double x_of(int q) const { return 0.5 * q * geom.delta; }
    int half_points() const { return geom.n_eta; }  // q = 0..n_eta

    std::vector<double> a_, b_, c0_;

    std::size_t idx(int q, int l) const {
        return static_cast<std::size_t>(l) * (static_cast<std::size_t>(geom.n_eta) + 1) +
               static_cast<std::size_t>(q);
    }
};

// Pointwise stack evaluators shared by assembly and tests. gdot is the stack
// of the frame velocity (its entry [m] is the (m+1)-th position derivative).
Jet psi_jet(double z, const Jet& gdot, double alpha, int order);   // exp(-gdot z / (2 alpha))
Jet r_jet(double z, const Jet& gdot, double alpha, int order);     // -(2 gddot z + gdot^2)/(4 alpha)

CoefficientField assemble_coefficients(const ReferenceField& ref, Phase p, double t,
                                       double mu, double nu, const KernelGridGeom& geom);

// Test hook: arbitrary coefficient closures (canonical coordinates),
// each returning a stack of the requested order at x.
CoefficientField assemble_coefficients_raw(
    Phase p, double t, double alpha, const KernelGridGeom& geom, int depth,
    const std::function<Jet(double, int)>& a_fn,
    const std::function<Jet(double, int)>& b_fn);

struct KernelGrid {
    Phase phase = Phase::liquid;
    double t = 0.0;
    KernelGridGeom geom;
    std::vector<double> v;    // kernel values, rows j = 0..n_sigma-1 packed
    std::vector<double> d1;   // nodal d/dz at fixed zeta (diagonal lattice direction)
    // derivative planes per row (order 0..n_sigma-1-j), retained only when the
    // builder is asked to keep them (instrumentation / residual tests)
    std::vector<std::vector<double>> planes;

    double at(int i, int j) const { return v[geom.index(i, j)]; }
    double d1_at(int i, int j) const { return d1[geom.index(i, j)]; }

    // bilinear interpolation on the triangle; arguments are clamped to it
    double eval(double eta, double sigma) const;
    double eval_d1(double eta, double sigma) const;
};

// Explicit marching scheme in normal-form coordinates (eta = z + zeta,
// sigma = z - zeta): row 0 and the diagonal from the boundary relations, the
// interior from lower sums of the double integral, with kernel time
// derivatives eliminated recursively against coefficient stacks. trapezoid
// switches the two coefficient integrals to trapezoid weights (diagnostic
// variant; the reference path keeps lower sums).
KernelGrid solve_kernel_midpoint(const CoefficientField& cf, bool trapezoid = false,
                                 bool keep_planes = false);

// Instrumentation for tests: which coefficient derivative orders a node pulls.
struct KernelProbe {
    std::vector<std::uint8_t> a_touched, b_touched;
    long long nodes = 0;
    void init(int depth);
    void touch_a(int l);
    void touch_b(int l);
    int max_a() const;
    int max_b() const;
};

// Literal memoized transcription of the discrete scheme, one node at a time
// (value of d^l/dt^l k at node (i,j)). Slow; exists as an independent route to
// the same numbers as solve_kernel_midpoint and as the probe carrier.
double kernel_node_recursive(const CoefficientField& cf, int i, int j, int l,
                             std::map<std::tuple<int, int, int>, double>& memo,
                             KernelProbe* probe = nullptr);

// Appendix bookkeeping: time-derivative order the scheme consumes at (i,j).
int required_derivative_order(int i, int j);
int kernel_required_depth(int n_sigma);  // d_max

struct SuccessiveInfo {
    int iterations = 0;
    double last_increment = 0.0;
    double max_abs = 0.0;
};

// Successive-approximation route: iterates the integral form of the kernel
// equations with trapezoid quadrature on the coefficient field's own lattice
// (tests hand it a refined lattice) and evaluates at the requested
// normal-form points. Independent of the marching scheme in both quadrature
// and derivative handling.
std::vector<double> solve_kernel_successive(const CoefficientField& cf,
                                            const std::vector<std::pair<double, double>>& points,
                                            double tol, int max_iter,
                                            SuccessiveInfo* info = nullptr);

// Kernel in the phase's own coordinates 0 <= zeta <= z <= extent.
double kernel_lookup(const KernelGrid& grid, double z, double zeta);

// Residual cross-phase coupling of the modified target system,
// d(x,t) = int_0^x cbar(zeta) k(x,zeta) dzeta - cbar(x); diagnostic only.
double coupling_field(const KernelGrid& grid, const CoefficientField& cf, double x);

// Kernel tables sampled uniformly in time; the controller interpolates
// linearly between bracketing samples.
struct KernelTimeSeries {
    double t0 = 0.0, t1 = 0.0;
    std::vector<double> times;
    std::vector<KernelGrid> solid, liquid;

    const std::vector<KernelGrid>& of(Phase p) const {
        return p == Phase::solid ? solid : liquid;
    }
};

KernelTimeSeries build_kernel_time_series(const ReferenceField& ref, double mu, double nu,
                                          const KernelGridGeom& geom, double t0, double t1,
                                          int samples, int threads, bool trapezoid = false);

} // namespace stefan
