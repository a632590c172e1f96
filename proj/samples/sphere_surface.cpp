// Extracts the unit sphere from a Kuhn grid on [-2,2]^3 and prints its
// angle statistics and matrix conditioning.

#include <iostream>

#include "levelsurf/experiments.hpp"

int main()
{
    using namespace levelsurf;
    const TetMesh mesh = build_uniform_mesh(BoxDomain({-2, -2, -2}, {2, 2, 2}), 0.25);
    const LevelSet sphere = LevelSet::sphere({0, 0, 0.01}, 1.0);
    const SurfaceMesh surface = experiments::extract_level_set(mesh, sphere);
    const QualityReport q = quality_report(surface, sphere);

    const auto mass = diag_scale(assemble_mass(surface));
    const auto stiff = diag_scale(assemble_stiffness(surface));
    const auto cond_m = condition_number(mass.matrix);
    const auto cond_a = effective_cond(stiff.matrix, scaled_kernel(stiff.diagonal));

    std::cout << "vertices      " << surface.num_vertices() << "\n"
              << "triangles     " << surface.num_triangles() << "\n"
              << "max angle     " << q.phi_max_deg << " deg\n"
              << "min angle     " << q.phi_min_deg << " deg\n"
              << "cond(M^s)     " << cond_m.cond << "\n"
              << "cond(A^s) eff " << cond_a.cond << "\n";
}
