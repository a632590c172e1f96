#pragma once

/// \file tet_grid.hpp
/// Uniform tetrahedral grids of a box (Kuhn subdivision of every cube into
/// six tetrahedra around the main diagonal) and their regularity metrics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"

namespace levelsurf {

struct BoxDomain {
    Vec3 lo{};
    Vec3 hi{};

    BoxDomain() = default;
    BoxDomain(const Vec3& lo_, const Vec3& hi_) : lo(lo_), hi(hi_)
    {
        for (int k = 0; k < 3; ++k)
            if (!(hi[k] > lo[k]))
                throw std::invalid_argument("BoxDomain: hi must exceed lo in every coordinate");
    }

    double volume() const { return (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]); }
};

using Tet = std::array<std::uint32_t, 4>;

struct TetMesh {
    std::vector<Vec3> nodes;
    std::vector<Tet> tets;
    double h = 0.0; ///< edge length of the underlying cube grid

    std::size_t num_nodes() const { return nodes.size(); }
    std::size_t num_tets() const { return tets.size(); }

    std::array<Vec3, 4> corners(std::size_t t) const
    {
        const Tet& c = tets[t];
        return {nodes[c[0]], nodes[c[1]], nodes[c[2]], nodes[c[3]]};
    }

    double volume(std::size_t t) const
    {
        auto p = corners(t);
        return signed_volume(p[0], p[1], p[2], p[3]);
    }
};

/// Builds the Kuhn mesh of `box` with cube edge `h`. Nodes are numbered
/// lexicographically with x fastest; every tet is positively oriented.
inline TetMesh build_uniform_mesh(const BoxDomain& box, double h)
{
    if (!(h > 0.0))
        throw std::invalid_argument("build_uniform_mesh: h must be positive");
    std::array<std::size_t, 3> n{};
    for (int k = 0; k < 3; ++k) {
        const double cells = (box.hi[k] - box.lo[k]) / h;
        const double rounded = std::round(cells);
        if (rounded < 1.0 || std::abs(cells - rounded) > 1e-9 * std::max(1.0, rounded))
            throw std::invalid_argument("build_uniform_mesh: box extent in dimension " + std::to_string(k) +
                                        " is not an integer multiple of h");
        n[k] = static_cast<std::size_t>(rounded);
    }

    TetMesh mesh;
    mesh.h = h;
    const std::size_t nx = n[0] + 1, ny = n[1] + 1, nz = n[2] + 1;
    mesh.nodes.reserve(nx * ny * nz);
    for (std::size_t k = 0; k < nz; ++k)
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 0; i < nx; ++i)
                mesh.nodes.push_back({box.lo[0] + static_cast<double>(i) * h, box.lo[1] + static_cast<double>(j) * h,
                                      box.lo[2] + static_cast<double>(k) * h});

    auto node_id = [&](std::size_t i, std::size_t j, std::size_t k) {
        return static_cast<std::uint32_t>(i + nx * (j + ny * k));
    };

    // Each permutation (a,b,c) of the axes gives the path 0 -> e_a -> e_a+e_b -> 1.
    static constexpr std::array<std::array<int, 3>, 6> perms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

    mesh.tets.reserve(6 * n[0] * n[1] * n[2]);
    for (std::size_t k = 0; k < n[2]; ++k)
        for (std::size_t j = 0; j < n[1]; ++j)
            for (std::size_t i = 0; i < n[0]; ++i) {
                for (const auto& p : perms) {
                    std::array<std::size_t, 3> off{0, 0, 0};
                    Tet tet{};
                    tet[0] = node_id(i, j, k);
                    for (int s = 0; s < 3; ++s) {
                        off[static_cast<std::size_t>(p[static_cast<std::size_t>(s)])] = 1;
                        tet[static_cast<std::size_t>(s) + 1] = node_id(i + off[0], j + off[1], k + off[2]);
                    }
                    const auto& a = mesh.nodes[tet[0]];
                    if (signed_volume(a, mesh.nodes[tet[1]], mesh.nodes[tet[2]], mesh.nodes[tet[3]]) < 0.0)
                        std::swap(tet[2], tet[3]);
                    mesh.tets.push_back(tet);
                }
            }
    return mesh;
}

namespace detail {

inline void check_tet(const std::array<Vec3, 4>& p, std::size_t index)
{
    double longest = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            longest = std::max(longest, norm(p[static_cast<std::size_t>(b)] - p[static_cast<std::size_t>(a)]));
    const double vol = signed_volume(p[0], p[1], p[2], p[3]);
    if (!(std::abs(vol) > 1e-14 * longest * longest * longest))
        throw DegenerateElement("degenerate tetrahedron", index);
}

struct Ball {
    Vec3 center;
    double radius;
};

inline Ball circumball(const Vec3& a, const Vec3& b, const Vec3& c)
{
    const Vec3 u = b - a, v = c - a, w = cross(u, v);
    const Vec3 off = (1.0 / (2.0 * dot(w, w))) * (dot(u, u) * cross(v, w) + dot(v, v) * cross(w, u));
    return {a + off, norm(off)};
}

inline Ball circumball(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d)
{
    const Vec3 d1 = b - a, d2 = c - a, d3 = d - a;
    const double det = 2.0 * dot(d1, cross(d2, d3));
    const Vec3 off = (1.0 / det) * (dot(d1, d1) * cross(d2, d3) + dot(d2, d2) * cross(d3, d1) +
                                    dot(d3, d3) * cross(d1, d2));
    return {a + off, norm(off)};
}

} // namespace detail

/// Radius of the smallest ball containing the four points. The optimal ball
/// is determined by two, three or four of them, so all candidates are tried.
inline double min_enclosing_radius(const std::array<Vec3, 4>& p)
{
    std::vector<detail::Ball> candidates;
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = a + 1; b < 4; ++b)
            candidates.push_back({0.5 * (p[a] + p[b]), 0.5 * norm(p[b] - p[a])});
    for (std::size_t skip = 0; skip < 4; ++skip) {
        std::array<Vec3, 3> f{};
        std::size_t m = 0;
        for (std::size_t i = 0; i < 4; ++i)
            if (i != skip)
                f[m++] = p[i];
        candidates.push_back(detail::circumball(f[0], f[1], f[2]));
    }
    candidates.push_back(detail::circumball(p[0], p[1], p[2], p[3]));

    double best = std::numeric_limits<double>::infinity();
    for (const auto& ball : candidates) {
        const double slack = 1e-12 * ball.radius;
        bool contains = true;
        for (const auto& q : p)
            contains = contains && norm(q - ball.center) <= ball.radius + slack;
        if (contains)
            best = std::min(best, ball.radius);
    }
    return best;
}

/// Inradius 3V / (total face area).
inline double inradius(const std::array<Vec3, 4>& p)
{
    const double vol = std::abs(signed_volume(p[0], p[1], p[2], p[3]));
    const double faces = triangle_area(p[1], p[2], p[3]) + triangle_area(p[0], p[2], p[3]) +
                         triangle_area(p[0], p[1], p[3]) + triangle_area(p[0], p[1], p[2]);
    return 3.0 * vol / faces;
}

/// Regularity constant: max over tets of (enclosing ball diameter) / (inscribed ball diameter).
inline double shape_regularity(const TetMesh& mesh)
{
    double alpha = 0.0;
    for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
        const auto p = mesh.corners(t);
        detail::check_tet(p, t);
        alpha = std::max(alpha, min_enclosing_radius(p) / inradius(p));
    }
    return alpha;
}

/// Smallest of the 12 face angles and the 12 angles between an edge at a
/// vertex and the face opposite that vertex, for a single tetrahedron.
inline double tet_min_angle(const std::array<Vec3, 4>& p)
{
    double theta = kPi;
    for (std::size_t v = 0; v < 4; ++v) {
        std::array<std::size_t, 3> o{};
        std::size_t m = 0;
        for (std::size_t i = 0; i < 4; ++i)
            if (i != v)
                o[m++] = i;
        // Face angles at v, over the three faces containing v.
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = a + 1; b < 3; ++b)
                theta = std::min(theta, angle_between(p[o[a]] - p[v], p[o[b]] - p[v]));
        // Edge (v, w) against the plane of the opposite face.
        const Vec3 n = normalized(cross(p[o[1]] - p[o[0]], p[o[2]] - p[o[0]]));
        const double height = std::abs(dot(p[v] - p[o[0]], n));
        for (std::size_t w : o)
            theta = std::min(theta, std::asin(std::min(1.0, height / norm(p[w] - p[v]))));
    }
    return theta;
}

/// Minimum angle (radians) over all tets; see tet_min_angle.
inline double min_angle_theta(const TetMesh& mesh)
{
    double theta = kPi;
    for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
        const auto p = mesh.corners(t);
        detail::check_tet(p, t);
        theta = std::min(theta, tet_min_angle(p));
    }
    return theta;
}

/// Multiplicity of every face (sorted node triple). A conforming mesh has
/// only multiplicities 1 (boundary) and 2 (interior).
inline std::map<std::array<std::uint32_t, 3>, int> face_multiplicities(const TetMesh& mesh)
{
    std::map<std::array<std::uint32_t, 3>, int> faces;
    for (const auto& tet : mesh.tets)
        for (std::size_t skip = 0; skip < 4; ++skip) {
            std::array<std::uint32_t, 3> key{};
            std::size_t m = 0;
            for (std::size_t i = 0; i < 4; ++i)
                if (i != skip)
                    key[m++] = tet[i];
            std::sort(key.begin(), key.end());
            ++faces[key];
        }
    return faces;
}

} // namespace levelsurf
