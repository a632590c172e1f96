#pragma once

// Test-side helpers: tiny meshes and a dense eigen-solver oracle.

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "levelsurf/geometry.hpp"
#include "levelsurf/sparse_matrix.hpp"
#include "levelsurf/surface_extract.hpp"
#include "levelsurf/tet_grid.hpp"

namespace testing_support {

using namespace levelsurf;

inline Eigen::MatrixXd to_dense(const levelsurf::CsrMatrix& a)
{
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.size(), a.size());
    const auto rp = a.row_ptr();
    const auto cols = a.cols();
    const auto vals = a.values();
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
            d(i, cols[k]) += vals[k];
    return d;
}

// The dense oracle works in long double: stiffness matrices of near-touching
// spheres have lambda_2 around 1e-9 lambda_max, below what a double-precision
// dense solve resolves to 1e-6 relative.
using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

/// Sorted eigenvalues from a dense self-adjoint solve.
inline Eigen::VectorXd dense_eigenvalues(const levelsurf::CsrMatrix& a)
{
    const MatrixL d = to_dense(a).cast<long double>();
    Eigen::SelfAdjointEigenSolver<MatrixL> es(d, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cast<double>();
}

/// Eigenvalues of a restricted to the orthogonal complement of the vector k.
inline Eigen::VectorXd dense_deflated_eigenvalues(const levelsurf::CsrMatrix& a, const std::vector<double>& k)
{
    const auto n = static_cast<Eigen::Index>(k.size());
    VectorL u(n);
    for (Eigen::Index i = 0; i < n; ++i)
        u(i) = k[i];
    u.normalize();
    // Orthonormal basis of the complement from a full QR of u.
    Eigen::HouseholderQR<MatrixL> qr(u);
    const MatrixL q = qr.householderQ();
    const MatrixL basis = q.rightCols(n - 1);
    const MatrixL r = basis.transpose() * to_dense(a).cast<long double>() * basis;
    Eigen::SelfAdjointEigenSolver<MatrixL> es(0.5L * (r + r.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cast<double>();
}

inline levelsurf::TetMesh single_tet(const std::array<Vec3, 4>& p)
{
    levelsurf::TetMesh m;
    m.nodes.assign(p.begin(), p.end());
    m.tets.push_back({0, 1, 2, 3});
    m.h = 1.0;
    return m;
}

inline std::array<Vec3, 4> regular_tet()
{
    return {Vec3{1, 1, 1}, Vec3{1, -1, -1}, Vec3{-1, 1, -1}, Vec3{-1, -1, 1}};
}

/// A surface mesh built directly from vertex positions and triangles.
inline levelsurf::SurfaceMesh make_surface(const std::vector<Vec3>& pts,
                                           const std::vector<std::array<std::uint32_t, 3>>& tris)
{
    levelsurf::SurfaceMesh s;
    for (std::size_t i = 0; i < pts.size(); ++i)
        s.vertices.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i), 0.0, pts[i]});
    for (const auto& t : tris)
        s.triangles.push_back({t, 0, levelsurf::Provenance::Triangle, {0, 0, 1}});
    return s;
}

/// Structured triangulation of the unit square with n x n cells, diagonals alternating.
inline levelsurf::SurfaceMesh square_patch(std::size_t n)
{
    std::vector<Vec3> pts;
    std::vector<std::array<std::uint32_t, 3>> tris;
    for (std::size_t j = 0; j <= n; ++j)
        for (std::size_t i = 0; i <= n; ++i)
            pts.push_back({double(i) / double(n), double(j) / double(n), 0.0});
    auto id = [n](std::size_t i, std::size_t j) { return static_cast<std::uint32_t>(j * (n + 1) + i); };
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            if ((i + j) % 2 == 0) {
                tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                tris.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    return make_surface(pts, tris);
}

// Gauss-Legendre on [0,1] with 5 points, combined with the collapsed (Duffy)
// map of the square onto the triangle. Exact for polynomials of degree <= 8 in
// the barycentric coordinates.
struct Gauss5 {
    std::array<double, 5> x{}, w{};
    Gauss5()
    {
        const std::array<double, 5> xs{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                       0.9061798459386640};
        const std::array<double, 5> ws{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                       0.2369268850561891, 0.2369268850561891};
        for (int i = 0; i < 5; ++i) {
            x[i] = 0.5 * (xs[i] + 1.0);
            w[i] = 0.5 * ws[i];
        }
    }
};

template <class F>
inline double duffy_integral(const std::array<Vec3, 3>& p, F&& f)
{
    static const Gauss5 g;
    const double area = triangle_area(p[0], p[1], p[2]);
    double sum = 0.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const double s = g.x[i], t = g.x[j] * (1.0 - g.x[i]);
            const double weight = g.w[i] * g.w[j] * (1.0 - g.x[i]) * 2.0 * area;
            sum += weight * f(std::array<double, 3>{1.0 - s - t, s, t});
        }
    return sum;
}

// Tangential gradients of the barycentric coordinates from the inverse metric tensor.
inline std::array<Vec3, 3> metric_gradients(const std::array<Vec3, 3>& p)
{
    const Vec3 e1 = p[1] - p[0], e2 = p[2] - p[0];
    const double g11 = dot(e1, e1), g12 = dot(e1, e2), g22 = dot(e2, e2);
    const double det = g11 * g22 - g12 * g12;
    const Vec3 d1 = (g22 / det) * e1 - (g12 / det) * e2;  // gradient of lambda_1
    const Vec3 d2 = (-g12 / det) * e1 + (g11 / det) * e2; // gradient of lambda_2
    return {-1.0 * (d1 + d2), d1, d2};
}

} // namespace testing_support
