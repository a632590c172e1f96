#pragma once

/// \file level_set.hpp
/// Analytic level set functions, surface data and their nodal interpolants.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "geometry.hpp"
#include "tet_grid.hpp"

namespace levelsurf {

/// Signed distance to the sphere |x - center| = radius (negative inside).
struct Sphere {
    Vec3 center{0.0, 0.0, 0.0};
    double radius = 1.0;
};

/// Signed distance to the plane {x : normal . x + offset = 0}, normal made unit length.
struct Plane {
    Vec3 normal{0.0, 0.0, 1.0};
    double offset = 0.0;
};

/// Arbitrary scalar function; no distance or projection support.
struct Analytic {
    std::function<double(const Vec3&)> value;
};

class LevelSet {
public:
    static LevelSet sphere(const Vec3& center, double radius)
    {
        if (!(radius > 0.0))
            throw std::invalid_argument("sphere radius must be positive");
        return LevelSet(Sphere{center, radius});
    }

    static LevelSet plane(const Vec3& normal, double offset)
    {
        const double len = norm(normal);
        if (!(len > 0.0))
            throw std::invalid_argument("plane normal must be nonzero");
        return LevelSet(Plane{(1.0 / len) * normal, offset / len});
    }

    static LevelSet analytic(std::function<double(const Vec3&)> f) { return LevelSet(Analytic{std::move(f)}); }

    double operator()(const Vec3& x) const
    {
        return std::visit(
            [&](const auto& s) -> double {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Sphere>)
                    return norm(x - s.center) - s.radius;
                else if constexpr (std::is_same_v<S, Plane>)
                    return dot(s.normal, x) + s.offset;
                else
                    return s.value(x);
            },
            kind_);
    }

    /// True when the function is a signed distance with a closest-point map.
    bool has_distance() const { return !std::holds_alternative<Analytic>(kind_); }

    const std::variant<Sphere, Plane, Analytic>& kind() const { return kind_; }

    /// Unit normal n(x) = grad d(x).
    Vec3 normal(const Vec3& x) const
    {
        if (const auto* s = std::get_if<Sphere>(&kind_)) {
            const Vec3 r = x - s->center;
            const double len = norm(r);
            if (len == 0.0)
                throw std::domain_error("normal undefined at the sphere center");
            return (1.0 / len) * r;
        }
        if (const auto* p = std::get_if<Plane>(&kind_))
            return p->normal;
        throw std::logic_error("normal requires a distance level set");
    }

private:
    explicit LevelSet(std::variant<Sphere, Plane, Analytic> k) : kind_(std::move(k)) {}
    std::variant<Sphere, Plane, Analytic> kind_;
};

/// Closest point p(x) = x - d(x) n(x) on the zero level.
inline Vec3 closest_point(const LevelSet& ls, const Vec3& x)
{
    if (const auto* s = std::get_if<Sphere>(&ls.kind())) {
        const Vec3 r = x - s->center;
        const double len = norm(r);
        if (len == 0.0)
            throw std::domain_error("closest_point: x coincides with the sphere center");
        return s->center + (s->radius / len) * r;
    }
    if (const auto* p = std::get_if<Plane>(&ls.kind()))
        return x - (dot(p->normal, x) + p->offset) * p->normal;
    throw std::logic_error("closest_point requires a sphere or plane level set");
}

/// Scalar function on the surface, evaluated at points of the exact surface.
struct SurfaceFunction {
    std::string name;
    std::function<double(const Vec3&)> value;
};

namespace functions {

inline SurfaceFunction constant(double c)
{
    return {"const", [c](const Vec3&) { return c; }};
}

inline SurfaceFunction x3()
{
    return {"x3", [](const Vec3& x) { return x[2]; }};
}

/// u(x) = x1 x2 arctan(2 x3) / pi.
inline SurfaceFunction smooth_test()
{
    return {"smooth", [](const Vec3& x) { return x[0] * x[1] * std::atan(2.0 * x[2]) / kPi; }};
}

inline std::optional<SurfaceFunction> by_name(const std::string& name)
{
    if (name == "smooth")
        return smooth_test();
    if (name == "x3")
        return x3();
    if (name == "const")
        return constant(1.0);
    return std::nullopt;
}

} // namespace functions

/// Normal extension u^e(x) = u(p(x)).
inline double extend_function(const SurfaceFunction& u, const LevelSet& ls, const Vec3& x)
{
    return u.value(closest_point(ls, x));
}

/// Nodal values of a level set on a tet mesh (its P1 interpolant).
struct NodalField {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

inline NodalField interpolate_nodal(const LevelSet& ls, const TetMesh& mesh)
{
    NodalField field;
    field.values.resize(mesh.num_nodes());
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const double v = ls(mesh.nodes[i]);
        if (!std::isfinite(v))
            throw std::domain_error("level set is not finite at node " + std::to_string(i));
        field.values[i] = v;
    }
    return field;
}

/// Values with |v| < eps are moved to +eps so that no node lies on the zero level.
inline NodalField snap_small_values(NodalField field, double eps)
{
    if (!(eps > 0.0))
        throw std::invalid_argument("snap_small_values: eps must be positive");
    for (double& v : field.values)
        if (std::abs(v) < eps)
            v = eps;
    return field;
}

/// Default snapping threshold, 1e-10 times the largest nodal magnitude.
inline double default_snap_eps(const NodalField& field)
{
    double m = 0.0;
    for (double v : field.values)
        m = std::max(m, std::abs(v));
    return m > 0.0 ? 1e-10 * m : 1e-10;
}

/// Value of the P1 interpolant at x inside tet t, via barycentric coordinates.
inline double evaluate_p1(const TetMesh& mesh, const NodalField& field, std::size_t t, const Vec3& x)
{
    const auto p = mesh.corners(t);
    const double vol = signed_volume(p[0], p[1], p[2], p[3]);
    const std::array<double, 4> lambda{
        signed_volume(x, p[1], p[2], p[3]) / vol, signed_volume(p[0], x, p[2], p[3]) / vol,
        signed_volume(p[0], p[1], x, p[3]) / vol, signed_volume(p[0], p[1], p[2], x) / vol};
    double v = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
        v += lambda[i] * field[mesh.tets[t][i]];
    return v;
}

} // namespace levelsurf
