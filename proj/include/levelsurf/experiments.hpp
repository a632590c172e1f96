#pragma once

/// \file experiments.hpp
/// End-to-end drivers for the sphere experiments: interpolation convergence,
/// mass and stiffness conditioning across sphere positions, and the
/// reference-matrix PCG run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "eigen_estimate.hpp"
#include "level_set.hpp"
#include "mesh_quality.hpp"
#include "solvers.hpp"
#include "sparse_matrix.hpp"
#include "surface_extract.hpp"
#include "surface_fem.hpp"
#include "tet_grid.hpp"

namespace levelsurf::experiments {

inline const std::vector<double> kTableShifts{0.03, 0.02, 0.008, 0.002, 0.0005, 0.00025, 0.00005, 0.0};

/// Upper bound on cond(D^{-1/2} M D^{-1/2}) for any P1 surface mass matrix: 2 (2 + sqrt 2).
inline const double kScaledMassCondBound = 2.0 * (2.0 + std::sqrt(2.0));

/// Snapped nodal interpolant of `ls` and its extracted zero level.
inline SurfaceMesh extract_level_set(const TetMesh& mesh, const LevelSet& ls)
{
    NodalField field = interpolate_nodal(ls, mesh);
    field = snap_small_values(std::move(field), default_snap_eps(field));
    return extract_surface(mesh, field);
}

/// Random unit vector from a fixed-seed generator.
inline std::vector<double> seeded_unit_vector(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> v(n);
    for (double& x : v)
        x = normal(rng);
    const double nv = norm2(v);
    for (double& x : v)
        x /= nv;
    return v;
}

struct ConvergenceRow {
    double h = 0.0;
    std::size_t n = 0;
    double l2 = 0.0;
    double h1 = 0.0;
    double max_dist = 0.0;
    double max_normal_dev = 0.0;
    /// Observed orders against the previous (coarser) level; NaN on the first row.
    double l2_order = std::numeric_limits<double>::quiet_NaN();
    double h1_order = std::numeric_limits<double>::quiet_NaN();
    double n_ratio = std::numeric_limits<double>::quiet_NaN();
};

/// Errors at or below this are treated as zero (quadrature and difference-quotient roundoff).
inline constexpr double kRoundoffError = 1e-9;

/// Observed order log(e_coarse / e_fine) / log(h_coarse / h_fine); +inf (exact fit) when both
/// errors are at roundoff level.
inline double observed_order(double e_coarse, double e_fine, double h_coarse, double h_fine)
{
    if (e_coarse <= kRoundoffError && e_fine <= kRoundoffError)
        return std::numeric_limits<double>::infinity();
    return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

inline std::vector<ConvergenceRow> convergence_study(const BoxDomain& box, std::span<const double> hs,
                                                     const LevelSet& ls, const SurfaceFunction& u)
{
    std::vector<ConvergenceRow> rows;
    for (double h : hs) {
        const TetMesh mesh = build_uniform_mesh(box, h);
        const SurfaceMesh s = extract_level_set(mesh, ls);
        const auto coeffs = interpolate(u, ls, s);
        const auto err = interpolation_errors(u, ls, s, coeffs);
        const auto q = quality_report(s, ls);
        ConvergenceRow row{h, s.num_vertices(), err.l2, err.h1_semi, q.max_dist, q.max_normal_dev};
        if (!rows.empty()) {
            const auto& prev = rows.back();
            row.l2_order = observed_order(prev.l2, row.l2, prev.h, h);
            row.h1_order = observed_order(prev.h1, row.h1, prev.h, h);
            row.n_ratio = static_cast<double>(row.n) / static_cast<double>(prev.n);
        }
        rows.push_back(row);
    }
    return rows;
}

struct ConditioningRow {
    double zc = 0.0;
    QualityReport quality;
    std::size_t dim = 0;
    double cond_ms = 0.0;
    double cond_as = 0.0;
    double lambda2_as = 0.0;
    SolveStats pcg;
    bool flagged = false; ///< an eigenvalue or solver step failed
    std::string note;
};

struct ConditioningOptions {
    double radius = 1.0;
    double pcg_tol = 1e-8;
    std::size_t pcg_max_iter = 20000;
    Preconditioner preconditioner = Preconditioner::Ilu0;
    std::uint64_t seed = 20130917;
    LanczosOptions lanczos{};
};

/// One row of the sphere-position sweep: angles, cond(M^s), effective
/// cond(A^s), and PCG iterations for A^s x = A^s v with a seeded unit v.
inline ConditioningRow conditioning_row(const TetMesh& mesh, double zc, const ConditioningOptions& opt)
{
    ConditioningRow row;
    row.zc = zc;
    const LevelSet ls = LevelSet::sphere({0.0, 0.0, zc}, opt.radius);
    const SurfaceMesh s = extract_level_set(mesh, ls);
    row.quality = quality_report(s, ls);
    row.dim = s.num_vertices();

    try {
        const auto ms = diag_scale(assemble_mass(s));
        row.cond_ms = condition_number(ms.matrix, opt.lanczos).cond;
    } catch (const std::exception& e) {
        row.flagged = true;
        row.note += std::string("mass: ") + e.what() + "; ";
    }

    const auto as = diag_scale(assemble_stiffness(s));
    try {
        const auto kernel = scaled_kernel(as.diagonal);
        const auto c = effective_cond(as.matrix, kernel, opt.lanczos);
        row.cond_as = c.cond;
        row.lambda2_as = c.lambda_min_or_2;
    } catch (const std::exception& e) {
        row.flagged = true;
        row.note += std::string("stiffness: ") + e.what() + "; ";
    }

    try {
        const auto v = seeded_unit_vector(row.dim, opt.seed);
        const auto b = as.matrix * v;
        row.pcg = pcg(as.matrix, b, opt.preconditioner, opt.pcg_tol, opt.pcg_max_iter).stats;
        if (!row.pcg.converged) {
            row.flagged = true;
            row.note += "pcg: not converged; ";
        }
    } catch (const std::exception& e) {
        row.flagged = true;
        row.note += std::string("pcg: ") + e.what() + "; ";
    }
    return row;
}

struct MassBoundRow {
    double h = 0.0;
    std::size_t n = 0;
    double cond_m = 0.0;
    double cond_ms = 0.0;
};

inline MassBoundRow mass_conditioning(const SurfaceMesh& s, double h, const LanczosOptions& opt = {})
{
    const auto m = assemble_mass(s);
    return {h, s.num_vertices(), condition_number(m, opt).cond, condition_number(diag_scale(m).matrix, opt).cond};
}

struct RefMatrixReport {
    std::size_t dim = 0;
    std::size_t modal_row_nnz = 0;
    bool symmetric = false;
    SolveStats stats;
    double wall_seconds = 0.0;
};

inline std::size_t modal_row_nnz(const CsrMatrix& a)
{
    std::map<std::size_t, std::size_t> hist;
    for (std::size_t i = 0; i < a.size(); ++i)
        ++hist[a.row_nnz(i)];
    return std::max_element(hist.begin(), hist.end(), [](const auto& x, const auto& y) {
               return x.second < y.second;
           })->first;
}

inline RefMatrixReport reference_matrix_run(std::size_t blocks, std::size_t block_size, Preconditioner prec,
                                            double tol, std::uint64_t seed)
{
    RefMatrixReport rep;
    const CsrMatrix a = build_reference_matrix(blocks, block_size);
    rep.dim = a.size();
    rep.modal_row_nnz = modal_row_nnz(a);
    rep.symmetric = a.is_symmetric();
    const auto v = seeded_unit_vector(a.size(), seed);
    const auto b = a * v;
    const auto start = std::chrono::steady_clock::now();
    rep.stats = pcg(a, b, prec, tol, 10 * a.size()).stats;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

} // namespace levelsurf::experiments
