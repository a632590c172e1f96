#pragma once

/// \file mesh_quality.hpp
/// Angle statistics of surface triangulations and the geometric
/// approximation checks |d| = O(h^2), |n - n_h| = O(h) on Γ_h.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"
#include "level_set.hpp"
#include "surface_extract.hpp"

namespace levelsurf {

/// Inner angles (radians) at p, q and r.
inline std::array<double, 3> triangle_angles(const Vec3& p, const Vec3& q, const Vec3& r)
{
    if (!(norm(cross(q - p, r - p)) > 0.0))
        throw std::invalid_argument("triangle_angles: degenerate triangle");
    return {angle_between(q - p, r - p), angle_between(r - q, p - q), angle_between(p - r, q - r)};
}

struct QualityReport {
    double phi_max_deg = 0.0;
    double phi_min_deg = 180.0;
    std::size_t count_below_1deg = 0; ///< triangles whose smallest angle is below 1 degree
    std::array<std::size_t, 36> histogram{}; ///< all angles, 5 degree bins
    std::size_t n_triangles = 0;
    std::size_t n_vertices = 0;
    double min_area = std::numeric_limits<double>::infinity();
    double min_quad_angle_deg = std::numeric_limits<double>::infinity();

    bool distance_checked = false; ///< false when the level set has no distance function
    double max_dist = 0.0;
    double max_normal_dev = 0.0;
    bool fold_free = true; ///< n . n_h > 0 on every triangle
};

inline QualityReport quality_report(const SurfaceMesh& surface, const LevelSet& ls)
{
    if (surface.num_triangles() == 0)
        throw std::invalid_argument("quality_report: empty surface");

    QualityReport rep;
    rep.n_triangles = surface.num_triangles();
    rep.n_vertices = surface.num_vertices();
    rep.min_quad_angle_deg = to_degrees(surface.min_quad_angle);

    double phi_min = kPi, phi_max = 0.0;
    for (std::size_t t = 0; t < surface.num_triangles(); ++t) {
        const auto p = surface.corners(t);
        const auto ang = triangle_angles(p[0], p[1], p[2]);
        const double lo = std::min({ang[0], ang[1], ang[2]});
        phi_min = std::min(phi_min, lo);
        phi_max = std::max({phi_max, ang[0], ang[1], ang[2]});
        if (to_degrees(lo) < 1.0)
            ++rep.count_below_1deg;
        for (double a : ang) {
            const auto bin = static_cast<std::size_t>(std::clamp(to_degrees(a) / 5.0, 0.0, 35.0));
            ++rep.histogram[bin];
        }
        rep.min_area = std::min(rep.min_area, surface.area(t));
    }
    rep.phi_min_deg = to_degrees(phi_min);
    rep.phi_max_deg = to_degrees(phi_max);

    if (!ls.has_distance())
        return rep;
    rep.distance_checked = true;
    for (const auto& v : surface.vertices)
        rep.max_dist = std::max(rep.max_dist, std::abs(ls(v.position)));
    for (std::size_t t = 0; t < surface.num_triangles(); ++t) {
        const auto p = surface.corners(t);
        const Vec3 c = (1.0 / 3.0) * (p[0] + p[1] + p[2]);
        rep.max_dist = std::max(rep.max_dist, std::abs(ls(c)));
        const Vec3 n = ls.normal(c);
        const Vec3& nh = surface.triangles[t].normal;
        rep.max_normal_dev = std::max(rep.max_normal_dev, norm(n - nh));
        if (!(dot(n, nh) > 0.0))
            rep.fold_free = false;
    }
    return rep;
}

/// Least-squares slope of log(y) against log(x). Returns +inf when every y is
/// zero (exact reproduction) and NaN when only some are.
inline double loglog_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need at least two matching samples");
    if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; }))
        return std::numeric_limits<double>::infinity();
    if (std::any_of(y.begin(), y.end(), [](double v) { return !(v > 0.0); }))
        return std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct ResidualRow {
    double h = 0.0;
    double max_dist = 0.0;
    double max_normal_dev = 0.0;
};

struct ResidualTable {
    std::vector<ResidualRow> rows;
    double dist_slope = 0.0;
    double normal_slope = 0.0;
};

/// Geometric residuals per level and their fitted log-log slopes in h.
inline ResidualTable assumption_residuals(std::span<const SurfaceMesh> surfaces, std::span<const double> hs,
                                          const LevelSet& ls)
{
    if (surfaces.size() != hs.size() || surfaces.size() < 2)
        throw std::invalid_argument("assumption_residuals: need at least two levels");
    ResidualTable table;
    std::vector<double> dists, devs;
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        const auto rep = quality_report(surfaces[i], ls);
        if (!rep.distance_checked)
            throw std::invalid_argument("assumption_residuals: level set has no distance function");
        table.rows.push_back({hs[i], rep.max_dist, rep.max_normal_dev});
        dists.push_back(rep.max_dist);
        devs.push_back(rep.max_normal_dev);
    }
    table.dist_slope = loglog_slope(hs, dists);
    table.normal_slope = loglog_slope(hs, devs);
    return table;
}

} // namespace levelsurf
