#pragma once

/// \file surface_fem.hpp
/// Linear finite elements on a surface triangulation. Row i of every matrix
/// and entry i of every coefficient vector belong to surface vertex i.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "level_set.hpp"
#include "sparse_matrix.hpp"
#include "surface_extract.hpp"

namespace levelsurf {

struct QuadraturePoint {
    std::array<double, 3> bary;
    double weight; ///< weights sum to one; multiply by |T|
};

/// Symmetric 6-point rule, exact for polynomials of degree 4.
inline constexpr std::array<QuadraturePoint, 6> kTriangleRule6{{
    {{0.108103018168070, 0.445948490915965, 0.445948490915965}, 0.223381589678011},
    {{0.445948490915965, 0.108103018168070, 0.445948490915965}, 0.223381589678011},
    {{0.445948490915965, 0.445948490915965, 0.108103018168070}, 0.223381589678011},
    {{0.816847572980459, 0.091576213509771, 0.091576213509771}, 0.109951743655322},
    {{0.091576213509771, 0.816847572980459, 0.091576213509771}, 0.109951743655322},
    {{0.091576213509771, 0.091576213509771, 0.816847572980459}, 0.109951743655322},
}};

inline Vec3 bary_point(const std::array<Vec3, 3>& p, const std::array<double, 3>& b)
{
    return b[0] * p[0] + b[1] * p[1] + b[2] * p[2];
}

/// Gradients of the barycentric coordinates; they lie in the triangle plane.
inline std::array<Vec3, 3> barycentric_gradients(const std::array<Vec3, 3>& p)
{
    const Vec3 n = cross(p[1] - p[0], p[2] - p[0]);
    const double nn = dot(n, n);
    if (!(nn > 0.0))
        throw std::invalid_argument("barycentric_gradients: degenerate triangle");
    std::array<Vec3, 3> g{};
    for (std::size_t i = 0; i < 3; ++i)
        g[i] = (1.0 / nn) * cross(n, p[(i + 2) % 3] - p[(i + 1) % 3]);
    return g;
}

using ElementMatrix = std::array<std::array<double, 3>, 3>;

/// Exact P1 mass matrix: |T| (1 + delta_ij) / 12.
inline ElementMatrix element_mass(const std::array<Vec3, 3>& p)
{
    const double area = triangle_area(p[0], p[1], p[2]);
    ElementMatrix m{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            m[i][j] = area * (i == j ? 2.0 : 1.0) / 12.0;
    return m;
}

/// Cotangent formula: entry (i, j) is -cot(angle at the third vertex) / 2.
inline ElementMatrix element_stiffness(const std::array<Vec3, 3>& p)
{
    std::array<double, 3> cot{};
    for (std::size_t k = 0; k < 3; ++k) {
        const Vec3 u = p[(k + 1) % 3] - p[k], v = p[(k + 2) % 3] - p[k];
        const double c = norm(cross(u, v));
        if (!(c > 0.0))
            throw std::invalid_argument("element_stiffness: degenerate triangle");
        cot[k] = dot(u, v) / c;
    }
    ElementMatrix a{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j)
                a[i][j] = -0.5 * cot[3 - i - j];
    for (std::size_t i = 0; i < 3; ++i)
        a[i][i] = -(a[i][(i + 1) % 3] + a[i][(i + 2) % 3]);
    return a;
}

namespace detail {

template <class Element>
CsrMatrix assemble(const SurfaceMesh& s, Element&& element)
{
    std::vector<Triplet> t;
    t.reserve(9 * s.num_triangles());
    for (std::size_t e = 0; e < s.num_triangles(); ++e) {
        const auto corners = s.corners(e);
        if (!(norm(cross(corners[1] - corners[0], corners[2] - corners[0])) > 0.0))
            throw DegenerateElement("zero-area surface triangle", e);
        const ElementMatrix m = element(corners);
        const auto& v = s.triangles[e].v;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                t.push_back({v[i], v[j], m[i][j]});
    }
    return CsrMatrix::from_triplets(s.num_vertices(), std::move(t));
}

} // namespace detail

/// m_ij = integral of phi_i phi_j over Γ_h.
inline CsrMatrix assemble_mass(const SurfaceMesh& s) { return detail::assemble(s, element_mass); }

/// a_ij = integral of grad phi_i . grad phi_j over Γ_h (tangential gradients).
inline CsrMatrix assemble_stiffness(const SurfaceMesh& s) { return detail::assemble(s, element_stiffness); }

/// Nodal interpolant of the normal extension: coefficient i = u(p(x_i)).
inline std::vector<double> interpolate(const SurfaceFunction& u, const LevelSet& ls, const SurfaceMesh& s)
{
    std::vector<double> c(s.num_vertices());
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = extend_function(u, ls, s.vertices[i].position);
    return c;
}

struct ErrorNorms {
    double l2 = 0.0;
    double h1_semi = 0.0;
    std::size_t skipped = 0; ///< triangles below the area guard
};

/// L2 norm and H1 seminorm of u^e - v_h over Γ_h. The tangential gradient of
/// u^e is taken by central differences along two orthonormal in-plane
/// directions with step 1e-6 diam(T).
inline ErrorNorms interpolation_errors(const SurfaceFunction& u, const LevelSet& ls, const SurfaceMesh& s,
                                       std::span<const double> coeffs)
{
    if (coeffs.size() != s.num_vertices())
        throw std::invalid_argument("interpolation_errors: coefficient vector does not match the surface");
    ErrorNorms out;
    double l2 = 0.0, h1 = 0.0;
    for (std::size_t e = 0; e < s.num_triangles(); ++e) {
        const auto p = s.corners(e);
        const double area = triangle_area(p[0], p[1], p[2]);
        if (!(area > 1e-300)) {
            ++out.skipped;
            continue;
        }
        const auto& v = s.triangles[e].v;
        const std::array<double, 3> c{coeffs[v[0]], coeffs[v[1]], coeffs[v[2]]};
        const auto grad = barycentric_gradients(p);
        const Vec3 grad_vh = c[0] * grad[0] + c[1] * grad[1] + c[2] * grad[2];

        const Vec3 t1 = normalized(p[1] - p[0]);
        const Vec3 t2 = normalized(cross(cross(p[1] - p[0], p[2] - p[0]), t1));
        const double diam = std::max({norm(p[1] - p[0]), norm(p[2] - p[1]), norm(p[0] - p[2])});
        const double step = 1e-6 * diam;

        for (const auto& q : kTriangleRule6) {
            const Vec3 x = bary_point(p, q.bary);
            const double vh = c[0] * q.bary[0] + c[1] * q.bary[1] + c[2] * q.bary[2];
            const double diff = extend_function(u, ls, x) - vh;
            l2 += q.weight * area * diff * diff;

            const double d1 = (extend_function(u, ls, x + step * t1) - extend_function(u, ls, x - step * t1)) / (2 * step);
            const double d2 = (extend_function(u, ls, x + step * t2) - extend_function(u, ls, x - step * t2)) / (2 * step);
            const Vec3 g = d1 * t1 + d2 * t2 - grad_vh;
            h1 += q.weight * area * dot(g, g);
        }
    }
    out.l2 = std::sqrt(l2);
    out.h1_semi = std::sqrt(h1);
    return out;
}

inline double l2_error(const SurfaceFunction& u, const LevelSet& ls, const SurfaceMesh& s, std::span<const double> c)
{
    return interpolation_errors(u, ls, s, c).l2;
}

inline double h1_semi_error(const SurfaceFunction& u, const LevelSet& ls, const SurfaceMesh& s,
                            std::span<const double> c)
{
    return interpolation_errors(u, ls, s, c).h1_semi;
}

/// Kernel direction of the diagonally scaled stiffness matrix: D^{1/2} 1, normalized.
inline std::vector<double> scaled_kernel(std::span<const double> diagonal)
{
    std::vector<double> k(diagonal.size());
    for (std::size_t i = 0; i < k.size(); ++i)
        k[i] = std::sqrt(diagonal[i]);
    const double n = norm2(k);
    for (double& x : k)
        x /= n;
    return k;
}

} // namespace levelsurf
