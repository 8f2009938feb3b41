#include "stefan/kernel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "stefan/errors.hpp"

namespace stefan {

namespace {
// Terms whose kernel factor has fallen below this magnitude are dropped from
// the inner sums: they cannot influence any retained digit and keeping them
// drags subnormal arithmetic into the hot loop at extreme derivative orders.
constexpr double kChainFloor = 1e-300;
} // namespace

KernelGridGeom KernelGridGeom::from_points(double extent, int n_sigma) {
    if (!(extent > 0.0)) throw validation_error("kernel grid extent must be positive");
    if (n_sigma < 2) throw validation_error("kernel grid needs at least 2 sigma points");
    KernelGridGeom g;
    g.extent = extent;
    g.n_sigma = n_sigma;
    g.n_eta = 2 * (n_sigma - 1);
    g.delta = extent / (n_sigma - 1);
    return g;
}

KernelGridGeom KernelGridGeom::from_step(double extent, double delta) {
    if (!(delta > 0.0)) throw validation_error("kernel grid step must be positive");
    const double ratio = extent / delta;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * ratio || rounded < 1.0)
        throw validation_error("kernel step " + std::to_string(delta) +
                               " does not divide the domain extent " + std::to_string(extent));
    return from_points(extent, static_cast<int>(rounded) + 1);
}

std::size_t KernelGridGeom::node_count() const {
    // sum of row lengths n_eta - 2j + 1 over j = 0..n_sigma-1
    return static_cast<std::size_t>(n_sigma) *
           static_cast<std::size_t>(n_eta + 2 - n_sigma);
}

std::size_t KernelGridGeom::index(int i, int j) const {
    // rows packed consecutively; row j starts at j*(n_eta + 2 - j)
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_eta + 2 - j) +
           static_cast<std::size_t>(i - j);
}

Jet psi_jet(double z, const Jet& gdot, double alpha, int order) {
    Jet h(order);
    const double f = -z / (2.0 * alpha);
    for (int m = 0; m <= order; ++m) h[m] = f * gdot[m];
    return jet_exp(h);
}

Jet r_jet(double z, const Jet& gdot, double alpha, int order) {
    if (gdot.order() < order + 1)
        throw capability_error("r stack to order " + std::to_string(order) +
                               " needs the velocity stack to order " + std::to_string(order + 1));
    const Jet v2 = jet_mul(gdot, gdot, order);
    Jet r(order);
    for (int l = 0; l <= order; ++l)
        r[l] = -(2.0 * gdot[l + 1] * z + v2[l]) / (4.0 * alpha);
    return r;
}

CoefficientField assemble_coefficients(const ReferenceField& ref, Phase p, double t,
                                       double mu, double nu, const KernelGridGeom& geom) {
    CoefficientField cf;
    cf.phase = p;
    cf.t = t;
    cf.mu = mu;
    cf.nu = nu;
    cf.geom = geom;
    cf.depth = geom.n_sigma - 1;

    const StefanMaterial& mat = ref.material();
    const double beta = phase_beta(p);
    const double alpha = mat.phase(p).diffusivity();
    cf.alpha = alpha;
    const Phase other = (p == Phase::solid) ? Phase::liquid : Phase::solid;
    const double alpha_o = mat.phase(other).diffusivity();
    const double kap = mat.kappa(p);
    const double kap_o = mat.kappa(other);

    const ReferenceSlice slice = ref.slice(p, t);
    // velocity of the mirrored frame; one extra order feeds the r stack
    const Jet gdot = jet_dot(ref.trajectory().gamma_jet(t, cf.depth + 2));
    Jet V(cf.depth + 1);
    for (int m = 0; m <= cf.depth + 1; ++m) V[m] = beta * gdot[m];

    const int nq = geom.n_eta;
    cf.a_.assign(static_cast<std::size_t>(cf.depth + 1) * (nq + 1), 0.0);
    cf.b_.assign(cf.a_.size(), 0.0);
    cf.c0_.assign(static_cast<std::size_t>(nq) + 1, 0.0);

    for (int q = 0; q <= nq; ++q) {
        const double x = cf.x_of(q);
        // mirrored reference gradient: Ghat(x) = beta * dT_ref/dz at z = beta x
        Jet ghat = slice.gradient_jet(beta * x, cf.depth);
        for (double& gv : ghat.d) gv *= beta;

        const Jet inv_psi = psi_jet(-x, V, alpha, cf.depth);  // exp(+V x / (2 alpha))
        const Jet bq = jet_scale(jet_mul(inv_psi, ghat, cf.depth), kap);
        const Jet rq = r_jet(x, V, alpha, cf.depth);
        for (int l = 0; l <= cf.depth; ++l) {
            cf.a_[cf.idx(q, l)] = (l == 0 ? mu : 0.0) - rq[l];
            cf.b_[cf.idx(q, l)] = bq[l];
        }
        // cross-phase coupling weight: other phase's kappa and Hopf-Cole factor
        cf.c0_[static_cast<std::size_t>(q)] =
            kap_o * ghat[0] * std::exp(V[0] * x / (2.0 * alpha_o));
    }
    return cf;
}

CoefficientField assemble_coefficients_raw(
    Phase p, double t, double alpha, const KernelGridGeom& geom, int depth,
    const std::function<Jet(double, int)>& a_fn,
    const std::function<Jet(double, int)>& b_fn) {
    if (depth < geom.n_sigma - 1)
        throw capability_error("coefficient depth " + std::to_string(depth) +
                               " below the scheme requirement " + std::to_string(geom.n_sigma - 1));
    CoefficientField cf;
    cf.phase = p;
    cf.t = t;
    cf.alpha = alpha;
    cf.geom = geom;
    cf.depth = depth;
    const int nq = geom.n_eta;
    cf.a_.assign(static_cast<std::size_t>(depth + 1) * (nq + 1), 0.0);
    cf.b_.assign(cf.a_.size(), 0.0);
    cf.c0_.assign(static_cast<std::size_t>(nq) + 1, 0.0);
    for (int q = 0; q <= nq; ++q) {
        const double x = cf.x_of(q);
        const Jet aj = a_fn(x, depth);
        const Jet bj = b_fn(x, depth);
        for (int l = 0; l <= depth; ++l) {
            cf.a_[cf.idx(q, l)] = aj[l];
            cf.b_[cf.idx(q, l)] = bj[l];
        }
    }
    return cf;
}

namespace {

// nodal derivative along the lattice diagonal (eta, sigma) -> (eta+d, sigma+d),
// which is d/dz at fixed zeta in the phase coordinates
void fill_diagonal_derivative(KernelGrid& g) {
    const KernelGridGeom& geom = g.geom;
    const double dlt = geom.delta;
    g.d1.assign(g.v.size(), 0.0);
    for (int j = 0; j < geom.n_sigma; ++j) {
        for (int i = j; i <= geom.n_eta - j; ++i) {
            double d;
            const bool fwd3 = (j + 2 <= geom.n_sigma - 1) && (i + 2 <= geom.n_eta - (j + 2));
            if (j >= 2) {
                d = (3.0 * g.at(i, j) - 4.0 * g.at(i - 1, j - 1) + g.at(i - 2, j - 2)) /
                    (2.0 * dlt);
            } else if (fwd3) {
                d = (-3.0 * g.at(i, j) + 4.0 * g.at(i + 1, j + 1) - g.at(i + 2, j + 2)) /
                    (2.0 * dlt);
            } else if (j >= 1) {
                d = (g.at(i, j) - g.at(i - 1, j - 1)) / dlt;
            } else if ((j + 1 <= geom.n_sigma - 1) && (i + 1 <= geom.n_eta - (j + 1))) {
                d = (g.at(i + 1, j + 1) - g.at(i, j)) / dlt;
            } else {
                // far apex of row 0; no diagonal neighbor exists, copy below
                d = std::numeric_limits<double>::quiet_NaN();
            }
            g.d1[geom.index(i, j)] = d;
        }
    }
    // patch the apex entries from their left neighbor (never reachable by the
    // controller, which stays a guard band away from the full extent);
    // ascending so a patched node can seed the next one
    for (int i = 1; i <= geom.n_eta; ++i) {
        const std::size_t id = geom.index(i, 0);
        if (std::isnan(g.d1[id])) g.d1[id] = g.d1[geom.index(i - 1, 0)];
    }
}

double eval_packed(const KernelGridGeom& geom, const std::vector<double>& val, double eta,
                   double sigma) {
    const double u = eta / geom.delta;
    const double w = sigma / geom.delta;
    int j0 = static_cast<int>(std::floor(w));
    j0 = std::clamp(j0, 0, geom.n_sigma - 2);
    const double fj = std::clamp(w - j0, 0.0, 1.0);
    int i0 = static_cast<int>(std::floor(u));
    i0 = std::clamp(i0, j0, geom.n_eta - j0 - 1);
    const double fi = std::clamp(u - i0, 0.0, 1.0);
    auto at_cl = [&](int i, int j) {
        i = std::clamp(i, j, geom.n_eta - j);
        return val[geom.index(i, j)];
    };
    const double v00 = at_cl(i0, j0);
    const double v10 = at_cl(i0 + 1, j0);
    const double v01 = at_cl(i0, j0 + 1);
    const double v11 = at_cl(i0 + 1, j0 + 1);
    return (1.0 - fi) * (1.0 - fj) * v00 + fi * (1.0 - fj) * v10 + (1.0 - fi) * fj * v01 +
           fi * fj * v11;
}

} // namespace

double KernelGrid::eval(double eta, double sigma) const {
    return eval_packed(geom, v, eta, sigma);
}

double KernelGrid::eval_d1(double eta, double sigma) const {
    return eval_packed(geom, d1, eta, sigma);
}

KernelGrid solve_kernel_midpoint(const CoefficientField& cf, bool trapezoid, bool keep_planes) {
    const KernelGridGeom& geom = cf.geom;
    const int ns = geom.n_sigma;
    const int ne = geom.n_eta;
    const double dlt = geom.delta;
    const double alpha = cf.alpha;
    if (cf.depth < ns - 1)
        throw capability_error("kernel solve needs coefficient stacks to order " +
                               std::to_string(ns - 1) + ", field carries " +
                               std::to_string(cf.depth));

    KernelGrid g;
    g.phase = cf.phase;
    g.t = cf.t;
    g.geom = geom;

    // planes[j][l * row_len + (i-j)] holds d^l/dt^l of the kernel at (i,j);
    // row j is carried to order n_sigma-1-j, exactly what rows above consume.
    std::vector<std::vector<double>> planes(static_cast<std::size_t>(ns));
    for (int j = 0; j < ns; ++j)
        planes[static_cast<std::size_t>(j)].assign(
            static_cast<std::size_t>(ns - j) * geom.row_len(j), 0.0);
    auto plane_at = [&](int j, int i, int l) -> double& {
        return planes[static_cast<std::size_t>(j)]
                     [static_cast<std::size_t>(l) * geom.row_len(j) +
                      static_cast<std::size_t>(i - j)];
    };

    for (int j = 0; j < ns; ++j) {
        const int lmax = ns - 1 - j;
        for (int l = 0; l <= lmax; ++l) {
            // boundary convolution over s in [0, sigma_j]; i-independent.
            // lower sum over m = 0..j-1; the trapezoid variant half-weights
            // m = 0 and adds the half-weighted m = j end after the diagonal
            // node is resolved (it references itself there).
            double W = 0.0;
            for (int m = 0; m < j; ++m) {
                const double wgt = (trapezoid && m == 0) ? 0.5 : 1.0;
                for (int d = 0; d <= l; ++d) {
                    const double kv = plane_at(m, j, l - d);
                    if (std::abs(kv) < kChainFloor) continue;
                    W += wgt * binom(l, d) * cf.b(j + m, d) * kv;
                }
            }

            // diagonal node (j,j)
            double diag = -cf.b(2 * j, l) / alpha + (dlt / alpha) * W;
            if (trapezoid && j > 0) {
                // self-referencing half cell: the d = 0 term carries the order
                // being solved, lower orders of the diagonal already exist
                double rhs_extra = 0.0;
                for (int d = 1; d <= l; ++d)
                    rhs_extra += 0.5 * binom(l, d) * cf.b(2 * j, d) * plane_at(j, j, l - d);
                const double den = 1.0 - (dlt / (2.0 * alpha)) * cf.b(2 * j, 0);
                if (std::abs(den) < 1e-12)
                    throw divergence_error("trapezoid diagonal solve degenerate at row " +
                                           std::to_string(j));
                diag = (diag + (dlt / alpha) * rhs_extra) / den;
                double self = 0.5 * cf.b(2 * j, 0) * diag;
                for (int d = 1; d <= l; ++d)
                    self += 0.5 * binom(l, d) * cf.b(2 * j, d) * plane_at(j, j, l - d);
                W += self;
            }
            plane_at(j, j, l) = diag;
            // interior marches in i; R accumulates the double lower sum and
            // asum the single integral of a along the eta characteristic
            double R = 0.0;
            double asum = trapezoid ? -0.5 * cf.a(j, l) : 0.0;
            for (int i = j + 1; i <= ne - j; ++i) {
                const int n = i - 1;
                asum += cf.a(n, l);
                double S = 0.0;
                for (int m = 0; m < j; ++m) {
                    const double kd = plane_at(m, n, l + 1);
                    if (std::abs(kd) >= kChainFloor) S += kd;
                    for (int d = 0; d <= l; ++d) {
                        const double kv = plane_at(m, n, l - d);
                        if (std::abs(kv) < kChainFloor) continue;
                        S -= binom(l, d) * cf.a(n - m, d) * kv;
                    }
                }
                R += S;
                const double atrap = trapezoid ? asum + 0.5 * cf.a(i, l) : asum;
                plane_at(j, i, l) = (dlt * dlt / (4.0 * alpha)) * R +
                                    (dlt / (4.0 * alpha)) * atrap -
                                    cf.b(2 * j, l) / alpha + (dlt / alpha) * W;
            }
        }
    }

    g.v.assign(geom.node_count(), 0.0);
    for (int j = 0; j < ns; ++j)
        for (int i = j; i <= ne - j; ++i) g.v[geom.index(i, j)] = plane_at(j, i, 0);
    fill_diagonal_derivative(g);
    if (keep_planes) g.planes = std::move(planes);
    return g;
}

void KernelProbe::init(int depth) {
    a_touched.assign(static_cast<std::size_t>(depth) + 1, 0);
    b_touched.assign(static_cast<std::size_t>(depth) + 1, 0);
    nodes = 0;
}
void KernelProbe::touch_a(int l) { a_touched[static_cast<std::size_t>(l)] = 1; }
void KernelProbe::touch_b(int l) { b_touched[static_cast<std::size_t>(l)] = 1; }
int KernelProbe::max_a() const {
    for (int l = static_cast<int>(a_touched.size()) - 1; l >= 0; --l)
        if (a_touched[static_cast<std::size_t>(l)]) return l;
    return -1;
}
int KernelProbe::max_b() const {
    for (int l = static_cast<int>(b_touched.size()) - 1; l >= 0; --l)
        if (b_touched[static_cast<std::size_t>(l)]) return l;
    return -1;
}

double kernel_node_recursive(const CoefficientField& cf, int i, int j, int l,
                             std::map<std::tuple<int, int, int>, double>& memo,
                             KernelProbe* probe) {
    const KernelGridGeom& geom = cf.geom;
    if (j < 0 || j > geom.n_sigma - 1 || i < j || i > geom.n_eta - j)
        throw validation_error("kernel node (" + std::to_string(i) + "," + std::to_string(j) +
                               ") outside the triangular index set");
    if (l > cf.depth)
        throw capability_error("kernel node (" + std::to_string(i) + "," + std::to_string(j) +
                               ") needs coefficient derivative order " + std::to_string(l) +
                               ", field carries " + std::to_string(cf.depth));
    const auto key = std::make_tuple(i, j, l);
    if (auto it = memo.find(key); it != memo.end()) return it->second;

    const double dlt = geom.delta;
    const double alpha = cf.alpha;
    auto coeff_a = [&](int q, int d) {
        if (probe) probe->touch_a(d);
        return cf.a(q, d);
    };
    auto coeff_b = [&](int q, int d) {
        if (probe) probe->touch_b(d);
        return cf.b(q, d);
    };

    double W = 0.0;
    for (int m = 0; m < j; ++m)
        for (int d = 0; d <= l; ++d)
            W += binom(l, d) * coeff_b(j + m, d) * kernel_node_recursive(cf, j, m, l - d, memo, probe);
    double val = -coeff_b(2 * j, l) / alpha + (dlt / alpha) * W;
    if (i > j) {
        double asum = 0.0;
        for (int n = j; n < i; ++n) asum += coeff_a(n, l);
        double R = 0.0;
        for (int n = j; n < i; ++n)
            for (int m = 0; m < j; ++m) {
                R += kernel_node_recursive(cf, n, m, l + 1, memo, probe);
                for (int d = 0; d <= l; ++d)
                    R -= binom(l, d) * coeff_a(n - m, d) *
                         kernel_node_recursive(cf, n, m, l - d, memo, probe);
            }
        val += (dlt * dlt / (4.0 * alpha)) * R + (dlt / (4.0 * alpha)) * asum;
    }
    memo[key] = val;
    if (probe) ++probe->nodes;
    return val;
}

int required_derivative_order(int i, int j) {
    if (j < 0 || i < j)
        throw validation_error("invalid triangular indices (" + std::to_string(i) + "," +
                               std::to_string(j) + ")");
    return std::min(i, j);
}

int kernel_required_depth(int n_sigma) {
    if (n_sigma < 2) throw validation_error("kernel grid needs at least 2 sigma points");
    return n_sigma - 1;
}

std::vector<double> solve_kernel_successive(const CoefficientField& cf,
                                            const std::vector<std::pair<double, double>>& points,
                                            double tol, int max_iter, SuccessiveInfo* info) {
    const KernelGridGeom& geom = cf.geom;
    const int ns = geom.n_sigma;
    const int ne = geom.n_eta;
    const double dlt = geom.delta;
    const double alpha = cf.alpha;
    const std::size_t nodes = geom.node_count();

    // depth budget: every iteration consumes one time derivative
    const int d0 = std::min(cf.depth, max_iter);

    auto node_stride = [&](int depth) { return static_cast<std::size_t>(depth) + 1; };

    // first term: (1/4a) int_sigma^eta a(r/2) dr - bbar(sigma)/alpha, trapezoid
    // in r via prefix sums of the half-lattice coefficient table
    std::vector<double> K(nodes * node_stride(d0), 0.0);
    {
        std::vector<double> pref(static_cast<std::size_t>(ne) + 1, 0.0);
        for (int l = 0; l <= d0; ++l) {
            double run = 0.0;
            for (int q = 0; q <= ne; ++q) {
                run += cf.a(q, l);
                pref[static_cast<std::size_t>(q)] = run;
            }
            for (int j = 0; j < ns; ++j)
                for (int i = j; i <= ne - j; ++i) {
                    double integ = 0.0;
                    if (i > j) {
                        const double sum_ji = pref[static_cast<std::size_t>(i)] -
                                              (j > 0 ? pref[static_cast<std::size_t>(j - 1)] : 0.0);
                        integ = dlt * (sum_ji - 0.5 * cf.a(j, l) - 0.5 * cf.a(i, l));
                    }
                    K[geom.index(i, j) * node_stride(d0) + static_cast<std::size_t>(l)] =
                        integ / (4.0 * alpha) - cf.b(2 * j, l) / alpha;
                }
        }
    }

    std::vector<double> ksum(nodes, 0.0);
    double max_abs = 0.0;
    for (std::size_t n = 0; n < nodes; ++n) {
        ksum[n] = K[n * node_stride(d0)];
        max_abs = std::max(max_abs, std::abs(ksum[n]));
    }

    int it = 1;
    double incr = max_abs;
    int dcur = d0;
    std::vector<double> F, Q, B, Knext;
    while (incr > tol && dcur >= 1 && it < max_iter) {
        const int dn = dcur - 1;
        const std::size_t sc = node_stride(dcur);
        const std::size_t sn = node_stride(dn);

        // F = dK/dt - a((r-s)/2) K, through order dn
        F.assign(nodes * sn, 0.0);
        for (int j = 0; j < ns; ++j)
            for (int i = j; i <= ne - j; ++i) {
                const std::size_t src = geom.index(i, j) * sc;
                const std::size_t dst = geom.index(i, j) * sn;
                for (int l = 0; l <= dn; ++l) {
                    double s = K[src + static_cast<std::size_t>(l) + 1];
                    for (int d = 0; d <= l; ++d)
                        s -= binom(l, d) * cf.a(i - j, d) * K[src + static_cast<std::size_t>(l - d)];
                    F[dst + static_cast<std::size_t>(l)] = s;
                }
            }

        // Q(n,m) = int_0^{m dlt} F(n dlt, s) ds, cumulative trapezoid per row
        Q.assign(nodes * sn, 0.0);
        for (int n = 0; n <= ne; ++n) {
            const int mtop = std::min({n, ns - 1, ne - n});
            for (int m = 1; m <= mtop; ++m) {
                const std::size_t cur = geom.index(n, m) * sn;
                const std::size_t pre = geom.index(n, m - 1) * sn;
                for (int l = 0; l <= dn; ++l)
                    Q[cur + static_cast<std::size_t>(l)] =
                        Q[pre + static_cast<std::size_t>(l)] +
                        0.5 * dlt * (F[pre + static_cast<std::size_t>(l)] +
                                     F[cur + static_cast<std::size_t>(l)]);
            }
        }

        // boundary convolution per sigma row, trapezoid in s
        B.assign(static_cast<std::size_t>(ns) * sn, 0.0);
        for (int j = 1; j < ns; ++j)
            for (int l = 0; l <= dn; ++l) {
                double s = 0.0;
                for (int m = 0; m <= j; ++m) {
                    const double w = (m == 0 || m == j) ? 0.5 : 1.0;
                    double term = 0.0;
                    const std::size_t kn = geom.index(j, m) * sc;
                    for (int d = 0; d <= l; ++d)
                        term += binom(l, d) * cf.b(j + m, d) * K[kn + static_cast<std::size_t>(l - d)];
                    s += w * term;
                }
                B[static_cast<std::size_t>(j) * sn + static_cast<std::size_t>(l)] = dlt * s;
            }

        // next iterate: (1/4a) int_sigma^eta Q(r, sigma) dr + (1/a) B(sigma)
        Knext.assign(nodes * sn, 0.0);
        for (int j = 0; j < ns; ++j) {
            std::vector<double> G(sn, 0.0);
            for (int i = j; i <= ne - j; ++i) {
                const std::size_t cur = geom.index(i, j) * sn;
                if (i > j) {
                    const std::size_t qc = geom.index(i, j) * sn;
                    const std::size_t qp = geom.index(i - 1, j) * sn;
                    for (int l = 0; l <= dn; ++l)
                        G[static_cast<std::size_t>(l)] +=
                            0.5 * dlt * (Q[qp + static_cast<std::size_t>(l)] +
                                         Q[qc + static_cast<std::size_t>(l)]);
                }
                for (int l = 0; l <= dn; ++l)
                    Knext[cur + static_cast<std::size_t>(l)] =
                        G[static_cast<std::size_t>(l)] / (4.0 * alpha) +
                        B[static_cast<std::size_t>(j) * sn + static_cast<std::size_t>(l)] / alpha;
            }
        }

        incr = 0.0;
        for (std::size_t n = 0; n < nodes; ++n) {
            const double v = Knext[n * sn];
            ksum[n] += v;
            incr = std::max(incr, std::abs(v));
            max_abs = std::max(max_abs, std::abs(ksum[n]));
        }
        K.swap(Knext);
        dcur = dn;
        ++it;

        // Terms of the series may grow for a while before the factorial decay
        // takes over, so growth alone is not failure; only a genuine blow-up is.
        if (!std::isfinite(incr) || incr > 1e150)
            throw divergence_error("successive kernel approximation diverging: increment " +
                                   std::to_string(incr) + " after " + std::to_string(it) +
                                   " terms");
    }
    if (incr > tol)
        throw divergence_error("successive kernel approximation not converged: increment " +
                               std::to_string(incr) + " after " + std::to_string(it) +
                               " terms (tol " + std::to_string(tol) + ")");
    if (info) {
        info->iterations = it;
        info->last_increment = incr;
        info->max_abs = max_abs;
    }

    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& [eta, sigma] : points) out.push_back(eval_packed(geom, ksum, eta, sigma));
    return out;
}

double kernel_lookup(const KernelGrid& grid, double z, double zeta) {
    const double tol = 1e-9 * grid.geom.extent;
    if (zeta < -tol || zeta > z + tol || z > grid.geom.extent + tol)
        throw validation_error("kernel lookup outside triangle: z=" + std::to_string(z) +
                               " zeta=" + std::to_string(zeta) + " extent=" +
                               std::to_string(grid.geom.extent));
    return grid.eval(z + zeta, z - zeta);
}

double coupling_field(const KernelGrid& grid, const CoefficientField& cf, double x) {
    const KernelGridGeom& geom = grid.geom;
    const double tol = 1e-9 * geom.extent;
    if (x < -tol || x > geom.extent + tol)
        throw validation_error("coupling field query outside extent: x=" + std::to_string(x));
    x = std::clamp(x, 0.0, geom.extent);

    auto cbar_at = [&](double xi) {
        // coupling weight lives on the half-step lattice; linear in between
        const double u = 2.0 * xi / geom.delta;
        int q = std::clamp(static_cast<int>(std::floor(u)), 0, geom.n_eta - 1);
        const double f = std::clamp(u - q, 0.0, 1.0);
        return (1.0 - f) * cf.cbar(q) + f * cf.cbar(q + 1);
    };

    double acc = 0.0;
    const int nfull = static_cast<int>(std::floor(x / geom.delta));
    for (int q = 0; q < nfull; ++q) {
        const double zm = (q + 0.5) * geom.delta;
        acc += geom.delta * cbar_at(zm) * grid.eval(x + zm, x - zm);
    }
    const double rem = x - nfull * geom.delta;
    if (rem > tol) {
        const double zm = nfull * geom.delta + 0.5 * rem;
        acc += rem * cbar_at(zm) * grid.eval(x + zm, x - zm);
    }
    return acc - cbar_at(x);
}

KernelTimeSeries build_kernel_time_series(const ReferenceField& ref, double mu, double nu,
                                          const KernelGridGeom& geom, double t0, double t1,
                                          int samples, int threads, bool trapezoid) {
    if (samples < 2) throw validation_error("kernel time series needs at least 2 samples");
    if (!(t1 > t0)) throw validation_error("kernel time series needs t1 > t0");
    KernelTimeSeries ts;
    ts.t0 = t0;
    ts.t1 = t1;
    ts.times.resize(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k)
        ts.times[static_cast<std::size_t>(k)] = t0 + (t1 - t0) * k / (samples - 1);
    ts.solid.resize(ts.times.size());
    ts.liquid.resize(ts.times.size());

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex err_mx;
    auto worker = [&] {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= 2 * samples || failed.load()) return;
            const Phase p = (k < samples) ? Phase::solid : Phase::liquid;
            const int s = (k < samples) ? k : k - samples;
            try {
                const CoefficientField cf =
                    assemble_coefficients(ref, p, ts.times[static_cast<std::size_t>(s)], mu, nu, geom);
                KernelGrid grid = solve_kernel_midpoint(cf, trapezoid, false);
                (p == Phase::solid ? ts.solid : ts.liquid)[static_cast<std::size_t>(s)] =
                    std::move(grid);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(err_mx);
                if (!failed.exchange(true)) first_error = e.what();
                return;
            }
        }
    };

    const int nw = std::max(1, std::min(threads, 2 * samples));
    if (nw == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nw));
        for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw divergence_error("kernel time series build failed: " + first_error);
    return ts;
}

} // namespace stefan
