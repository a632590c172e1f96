#pragma once

/// \file surface_extract.hpp
/// Zero level of a P1 field on a tet mesh as a consistent triangulation.
///
/// Every tet cut by the zero level contributes one planar segment: a triangle
/// when one node has a sign different from the other three, a quadrilateral
/// when the signs split two and two. Quadrilaterals are divided along the
/// diagonal through the vertex with the largest inner angle, which keeps all
/// surface angles bounded away from pi for a regular family of tet meshes.
/// Cut vertices are keyed by their tet-mesh edge so that neighbouring
/// segments share them exactly.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "level_set.hpp"
#include "tet_grid.hpp"

namespace levelsurf {

/// Surface vertex on the tet-mesh edge (a, b), a < b, at (1-t) x_a + t x_b.
struct CutVertex {
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double t = 0.0;
    Vec3 position{};
};

/// Planar polygon S ∩ Γ_h of one tet, vertices in cyclic order.
struct RawSegment {
    std::uint32_t tet = 0;
    std::uint8_t size = 0; ///< 3 or 4
    std::array<std::uint32_t, 4> v{};
    Vec3 normal{}; ///< unit gradient direction of the field inside the tet
};

struct RawSurface {
    std::vector<CutVertex> vertices;
    std::vector<RawSegment> segments;
};

enum class Provenance : std::uint8_t { Triangle, QuadHalf };

struct SurfaceTriangle {
    std::array<std::uint32_t, 3> v{};
    std::uint32_t tet = 0;
    Provenance kind = Provenance::Triangle;
    Vec3 normal{}; ///< points from negative to positive field values
};

struct SurfaceMesh {
    std::vector<CutVertex> vertices;
    std::vector<SurfaceTriangle> triangles;
    /// Smallest inner angle (radians) of any raw quadrilateral; +inf without quads.
    double min_quad_angle = std::numeric_limits<double>::infinity();
    std::size_t num_quads = 0;

    std::size_t num_vertices() const { return vertices.size(); }
    std::size_t num_triangles() const { return triangles.size(); }

    std::array<Vec3, 3> corners(std::size_t t) const
    {
        const auto& v = triangles[t].v;
        return {vertices[v[0]].position, vertices[v[1]].position, vertices[v[2]].position};
    }

    double area(std::size_t t) const
    {
        const auto p = corners(t);
        return triangle_area(p[0], p[1], p[2]);
    }

    double total_area() const
    {
        double s = 0.0;
        for (std::size_t t = 0; t < num_triangles(); ++t)
            s += area(t);
        return s;
    }
};

namespace detail {

/// Gradient of the affine interpolant of `phi` on the tet with corners p.
inline Vec3 p1_gradient(const std::array<Vec3, 4>& p, const std::array<double, 4>& phi)
{
    const Vec3 e1 = p[1] - p[0], e2 = p[2] - p[0], e3 = p[3] - p[0];
    const double det = dot(e1, cross(e2, e3));
    return (1.0 / det) * ((phi[1] - phi[0]) * cross(e2, e3) + (phi[2] - phi[0]) * cross(e3, e1) +
                          (phi[3] - phi[0]) * cross(e1, e2));
}

} // namespace detail

/// Cuts every tet and returns the deduplicated vertex table and raw polygons.
/// Throws if any nodal value is exactly zero (snap the field first).
inline RawSurface extract_raw(const TetMesh& mesh, const NodalField& field)
{
    if (field.size() != mesh.num_nodes())
        throw std::invalid_argument("extract_raw: field size does not match the mesh");
    for (std::size_t i = 0; i < field.size(); ++i)
        if (field[i] == 0.0)
            throw std::invalid_argument("extract_raw: zero nodal value at node " + std::to_string(i) +
                                        "; apply snap_small_values first");

    RawSurface out;
    std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;

    auto cut = [&](std::uint32_t i, std::uint32_t j) -> std::uint32_t {
        const std::uint32_t a = std::min(i, j), b = std::max(i, j);
        const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
        auto [it, inserted] = edge_vertex.try_emplace(key, static_cast<std::uint32_t>(out.vertices.size()));
        if (inserted) {
            const double fa = field[a], fb = field[b];
            const double t = fa / (fa - fb);
            out.vertices.push_back({a, b, t, (1.0 - t) * mesh.nodes[a] + t * mesh.nodes[b]});
        }
        return it->second;
    };

    for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
        const Tet& tet = mesh.tets[t];
        std::array<std::uint32_t, 4> pos{}, neg{};
        std::size_t np = 0, nn = 0;
        for (std::uint32_t n : tet) {
            if (field[n] > 0.0)
                pos[np++] = n;
            else
                neg[nn++] = n;
        }
        if (np == 0 || nn == 0)
            continue;

        RawSegment seg;
        seg.tet = static_cast<std::uint32_t>(t);
        if (np == 1 || nn == 1) {
            const bool lone_pos = (np == 1);
            const std::uint32_t lone = lone_pos ? pos[0] : neg[0];
            const auto& others = lone_pos ? neg : pos;
            seg.size = 3;
            for (std::size_t k = 0; k < 3; ++k)
                seg.v[k] = cut(lone, others[k]);
        } else {
            // Consecutive cut edges share a node, hence lie on a common tet face.
            seg.size = 4;
            seg.v = {cut(pos[0], neg[0]), cut(pos[0], neg[1]), cut(pos[1], neg[1]), cut(pos[1], neg[0])};
        }

        const auto corners = mesh.corners(t);
        const Vec3 grad = detail::p1_gradient(corners, {field[tet[0]], field[tet[1]], field[tet[2]], field[tet[3]]});
        seg.normal = normalized(grad);
        const auto& P = out.vertices;
        const Vec3 poly_normal =
            seg.size == 3 ? cross(P[seg.v[1]].position - P[seg.v[0]].position, P[seg.v[2]].position - P[seg.v[0]].position)
                          : cross(P[seg.v[2]].position - P[seg.v[0]].position, P[seg.v[3]].position - P[seg.v[1]].position);
        if (dot(poly_normal, grad) < 0.0)
            std::reverse(seg.v.begin() + 1, seg.v.begin() + seg.size);
        out.segments.push_back(seg);
    }
    return out;
}

/// Inner angles (radians) of a planar polygon given in cyclic order.
inline std::array<double, 4> quad_angles(const std::array<Vec3, 4>& q)
{
    std::array<double, 4> ang{};
    for (std::size_t i = 0; i < 4; ++i)
        ang[i] = angle_between(q[(i + 3) % 4] - q[i], q[(i + 1) % 4] - q[i]);
    return ang;
}

/// Splits a quadrilateral along the diagonal through its largest inner
/// angle. Angles within 1e-12 rad count as tied; ties go to the smallest
/// vertex index. Returns (v_max, v_next, v_opp) and (v_max, v_opp, v_prev).
inline std::array<std::array<std::uint32_t, 3>, 2> split_quad(const std::array<std::uint32_t, 4>& quad,
                                                             std::span<const CutVertex> vertices)
{
    const std::array<Vec3, 4> q{vertices[quad[0]].position, vertices[quad[1]].position,
                                vertices[quad[2]].position, vertices[quad[3]].position};
    double diam = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j)
            diam = std::max(diam, norm(q[j] - q[i]));
    const double area = 0.5 * norm(cross(q[2] - q[0], q[3] - q[1]));
    if (!(area > 1e-24 * diam * diam))
        throw std::invalid_argument("split_quad: degenerate quadrilateral");

    const auto ang = quad_angles(q);
    std::size_t best = 0;
    for (std::size_t i = 1; i < 4; ++i) {
        const double d = ang[i] - ang[best];
        if (d > 1e-12 || (d >= -1e-12 && quad[i] < quad[best]))
            best = i;
    }
    const std::uint32_t vmax = quad[best], vnext = quad[(best + 1) % 4], vopp = quad[(best + 2) % 4],
                        vprev = quad[(best + 3) % 4];
    return {{{vmax, vnext, vopp}, {vmax, vopp, vprev}}};
}

/// Full pipeline: raw extraction followed by the quadrilateral split.
inline SurfaceMesh extract_surface(const TetMesh& mesh, const NodalField& field)
{
    RawSurface raw = extract_raw(mesh, field);
    SurfaceMesh surf;
    surf.triangles.reserve(2 * raw.segments.size());
    for (const auto& seg : raw.segments) {
        if (seg.size == 3) {
            surf.triangles.push_back({{seg.v[0], seg.v[1], seg.v[2]}, seg.tet, Provenance::Triangle, seg.normal});
            continue;
        }
        const std::array<Vec3, 4> q{raw.vertices[seg.v[0]].position, raw.vertices[seg.v[1]].position,
                                    raw.vertices[seg.v[2]].position, raw.vertices[seg.v[3]].position};
        for (double a : quad_angles(q))
            surf.min_quad_angle = std::min(surf.min_quad_angle, a);
        ++surf.num_quads;
        for (const auto& tri : split_quad(seg.v, raw.vertices))
            surf.triangles.push_back({tri, seg.tet, Provenance::QuadHalf, seg.normal});
    }
    surf.vertices = std::move(raw.vertices);
    return surf;
}

/// Largest |phi_h| at the vertices of a segment, evaluated in its parent tet.
inline double planarity_residual(const TetMesh& mesh, const NodalField& field, const RawSurface& raw,
                                 const RawSegment& seg)
{
    double r = 0.0;
    for (std::size_t k = 0; k < seg.size; ++k)
        r = std::max(r, std::abs(evaluate_p1(mesh, field, seg.tet, raw.vertices[seg.v[k]].position)));
    return r;
}

/// Undirected edge -> number of incident triangles.
inline std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_multiplicities(const SurfaceMesh& s)
{
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
    for (const auto& tri : s.triangles)
        for (std::size_t k = 0; k < 3; ++k) {
            const std::uint32_t a = tri.v[k], b = tri.v[(k + 1) % 3];
            ++edges[{std::min(a, b), std::max(a, b)}];
        }
    return edges;
}

inline bool is_watertight(const SurfaceMesh& s)
{
    const auto edges = edge_multiplicities(s);
    return std::all_of(edges.begin(), edges.end(), [](const auto& e) { return e.second == 2; });
}

/// Every directed edge appears once, so neighbours traverse shared edges oppositely.
inline bool is_consistently_oriented(const SurfaceMesh& s)
{
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
    for (const auto& tri : s.triangles)
        for (std::size_t k = 0; k < 3; ++k)
            if (++directed[{tri.v[k], tri.v[(k + 1) % 3]}] > 1)
                return false;
    return true;
}

inline long euler_characteristic(const SurfaceMesh& s)
{
    return static_cast<long>(s.num_vertices()) - static_cast<long>(edge_multiplicities(s).size()) +
           static_cast<long>(s.num_triangles());
}

/// Number of connected components of the triangle adjacency graph.
inline std::size_t connected_components(const SurfaceMesh& s)
{
    std::vector<std::uint32_t> parent(s.num_vertices());
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<bool> used(s.num_vertices(), false);
    for (const auto& tri : s.triangles)
        for (std::size_t k = 0; k < 3; ++k) {
            used[tri.v[k]] = true;
            parent[find(tri.v[k])] = find(tri.v[(k + 1) % 3]);
        }
    std::size_t count = 0;
    for (std::uint32_t v = 0; v < s.num_vertices(); ++v)
        if (used[v] && find(v) == v)
            ++count;
    return count;
}

} // namespace levelsurf
