#include <cstdio>
#include "stefan/kernel.hpp"
#include "stefan/material.hpp"
using namespace stefan;
int main() {
    StefanMaterial mat = gaas_material();
    KernelGridGeom geom = KernelGridGeom::from_points(mat.domain_extent(), 17);
    auto zero = [](double, int order) { return jet_const(0.0, order); };
    CoefficientField cf = assemble_coefficients_raw(Phase::solid, 0.0, mat.solid.diffusivity(),
                                                    geom, kernel_required_depth(17), zero, zero);
    KernelGrid g = solve_kernel_midpoint(cf);
    int bad = 0;
    for (int j = 0; j < geom.n_sigma; ++j)
        for (int i = j; i <= geom.n_eta - j; ++i) {
            if (g.at(i, j) != 0.0 && bad < 8) { printf("v(%d,%d) = %a\n", i, j, g.at(i, j)); ++bad; }
            if (g.d1_at(i, j) != 0.0 && bad < 8) { printf("d1(%d,%d) = %a\n", i, j, g.d1_at(i, j)); ++bad; }
        }
    printf("bad>=%d nodes=%zu vsize=%zu\n", bad, geom.node_count(), g.v.size());
    // also scan raw storage for entries the triangle loop never visits
    for (std::size_t q = 0; q < g.v.size(); ++q)
        if (g.v[q] != 0.0) { printf("raw v[%zu] = %a\n", q, g.v[q]); break; }
    return 0;
}
