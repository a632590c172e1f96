#pragma once

/// \file eigen_estimate.hpp
/// Extreme eigenvalues of sparse symmetric matrices by Lanczos with full
/// reorthogonalization, optionally restricted to the orthogonal complement
/// of a known kernel vector.
///
/// The smallest eigenvalue is first sought directly; when that does not
/// converge within the step cap (strongly ill-conditioned matrices), Lanczos
/// is run on the inverse operator instead, each application being an inner
/// Jacobi-PCG solve on the deflated space.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "solvers.hpp"
#include "sparse_matrix.hpp"

namespace levelsurf {

enum class Extreme { Max, Min };

struct LanczosOptions {
    double tol = 1e-6;            ///< relative accuracy target for the Ritz value
    std::size_t max_steps = 0;    ///< 0: min(n, 600)
    std::size_t check_every = 5;
    std::uint64_t seed = 20130917;
};

struct LanczosResult {
    double value = 0.0;
    double error_bound = 0.0;
    std::size_t steps = 0;
    bool converged = false;
};

namespace detail {

/// Number of eigenvalues of the symmetric tridiagonal (a, b) below x.
inline std::size_t sturm_count(std::span<const double> a, std::span<const double> b, double x)
{
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double off = i > 0 ? b[i - 1] * b[i - 1] : 0.0;
        q = (a[i] - x) - (i > 0 ? off / q : 0.0);
        if (q == 0.0)
            q = -std::numeric_limits<double>::min();
        if (q < 0.0)
            ++count;
    }
    return count;
}

/// k-th smallest eigenvalue (0-based) of the symmetric tridiagonal by bisection.
inline double tridiag_eigenvalue(std::span<const double> a, std::span<const double> b, std::size_t k)
{
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double r = (i > 0 ? std::abs(b[i - 1]) : 0.0) + (i + 1 < a.size() ? std::abs(b[i]) : 0.0);
        lo = std::min(lo, a[i] - r);
        hi = std::max(hi, a[i] + r);
    }
    const double scale = std::max(std::abs(lo), std::abs(hi));
    lo -= 1e-14 * scale + std::numeric_limits<double>::min();
    hi += 1e-14 * scale + std::numeric_limits<double>::min();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        if (sturm_count(a, b, mid) > k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// Solves a tridiagonal system by Gaussian elimination with partial pivoting.
inline std::vector<double> tridiag_solve(std::vector<double> dl, std::vector<double> d, std::vector<double> du,
                                         std::vector<double> rhs)
{
    const std::size_t n = d.size();
    if (n == 1)
        return {rhs[0] / (d[0] != 0.0 ? d[0] : std::numeric_limits<double>::min())};
    std::vector<double> du2(n, 0.0);
    const double tiny = std::numeric_limits<double>::min();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0)
                d[i] = tiny;
            const double f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            rhs[i + 1] -= f * rhs[i];
        } else {
            const double f = d[i] / dl[i];
            d[i] = dl[i];
            const double t = d[i + 1];
            d[i + 1] = du[i] - f * t;
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            du[i] = t;
            const double rb = rhs[i];
            rhs[i] = rhs[i + 1];
            rhs[i + 1] = rb - f * rhs[i + 1];
        }
    }
    if (d[n - 1] == 0.0)
        d[n - 1] = tiny;
    rhs[n - 1] /= d[n - 1];
    rhs[n - 2] = (rhs[n - 2] - du[n - 2] * rhs[n - 1]) / d[n - 2];
    for (std::size_t i = n - 2; i-- > 0;)
        rhs[i] = (rhs[i] - du[i] * rhs[i + 1] - du2[i] * rhs[i + 2]) / d[i];
    return rhs;
}

/// Last component of the unit eigenvector of T for eigenvalue theta.
inline double ritz_last_component(std::span<const double> a, std::span<const double> b, double theta)
{
    const std::size_t n = a.size();
    if (n == 1)
        return 1.0;
    double scale = 0.0;
    for (double v : a)
        scale = std::max(scale, std::abs(v));
    for (double v : b.first(n - 1))
        scale = std::max(scale, std::abs(v));
    const double shift = theta + 1e-13 * scale;
    std::vector<double> x(n, 1.0);
    for (int it = 0; it < 3; ++it) {
        std::vector<double> d(n), off(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(n - 1));
        for (std::size_t i = 0; i < n; ++i)
            d[i] = a[i] - shift;
        x = tridiag_solve(off, d, off, x);
        const double nx = norm2(x);
        for (double& v : x)
            v /= nx;
    }
    return x[n - 1];
}

inline void project_out(std::span<double> w, std::span<const double> unit)
{
    if (unit.empty())
        return;
    const double c = dot(w, unit);
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] -= c * unit[i];
}

} // namespace detail

/// Lanczos for the largest or smallest eigenvalue of the symmetric operator
/// `apply(x, y)`: y = A x, restricted to the complement of `deflate` (unit
/// vector, may be empty).
template <class Apply>
LanczosResult lanczos_extreme(const Apply& apply, std::size_t n, Extreme which, std::span<const double> deflate,
                              const LanczosOptions& opt)
{
    if (n == 0)
        throw std::invalid_argument("lanczos_extreme: empty operator");
    const std::size_t dim = deflate.empty() ? n : n - 1;
    const std::size_t cap = std::min(dim, opt.max_steps ? opt.max_steps : std::size_t{600});

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal;
    std::vector<std::vector<double>> basis;
    std::vector<double> v(n), w(n), alpha, beta;
    for (double& x : v)
        x = normal(rng);
    detail::project_out(v, deflate);
    const double nv = norm2(v);
    for (double& x : v)
        x /= nv;

    LanczosResult res;
    while (true) {
        basis.push_back(v);
        apply(std::span<const double>(basis.back()), std::span<double>(w));
        detail::project_out(w, deflate);
        const std::size_t j = basis.size() - 1;
        alpha.push_back(dot(w, basis[j]));
        for (std::size_t i = 0; i < n; ++i)
            w[i] -= alpha[j] * basis[j][i] + (j > 0 ? beta[j - 1] * basis[j - 1][i] : 0.0);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis) {
                const double c = dot(w, q);
                for (std::size_t i = 0; i < n; ++i)
                    w[i] -= c * q[i];
            }
            detail::project_out(w, deflate);
        }
        const double b = norm2(w);
        beta.push_back(b);

        const std::size_t m = alpha.size();
        double tscale = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            tscale = std::max({tscale, std::abs(alpha[i]), std::abs(beta[i])});
        const bool exhausted = m >= cap || b <= 1e-14 * tscale;
        if (exhausted || m % opt.check_every == 0) {
            const std::size_t k = which == Extreme::Min ? 0 : m - 1;
            const double theta = detail::tridiag_eigenvalue(alpha, beta, k);
            const double s = detail::ritz_last_component(alpha, beta, theta);
            const double bound = std::abs(b * s);
            res.value = theta;
            res.error_bound = bound;
            res.steps = m;
            const double target = opt.tol * std::max(std::abs(theta), 1e-13 * tscale);
            res.converged = bound <= target || b <= 1e-14 * tscale || m == dim;
            if (res.converged || exhausted)
                return res;
        }
        for (std::size_t i = 0; i < n; ++i)
            v[i] = w[i] / b;
    }
}

/// y = P A P x with P the orthogonal projector onto the complement of a unit vector.
struct DeflatedOperator {
    const CsrMatrix& a;
    std::span<const double> unit;

    std::size_t size() const { return a.size(); }
    void multiply(std::span<const double> x, std::span<double> y) const
    {
        std::vector<double> px(x.begin(), x.end());
        detail::project_out(px, unit);
        a.multiply(px, y);
        detail::project_out(y, unit);
    }
};

template <PreconditionerOp Prec>
struct DeflatedPreconditioner {
    const Prec& inner;
    std::span<const double> unit;

    void apply(std::span<const double> r, std::span<double> z) const
    {
        std::vector<double> pr(r.begin(), r.end());
        detail::project_out(pr, unit);
        inner.apply(pr, z);
        detail::project_out(z, unit);
    }
};

/// Extreme eigenvalue of a symmetric matrix, optionally on the complement of
/// the unit vector `deflate`. Throws NotConverged with the best estimate.
inline double eig_extreme(const CsrMatrix& a, Extreme which, std::span<const double> deflate = {},
                          const LanczosOptions& opt = {})
{
    auto apply = [&](std::span<const double> x, std::span<double> y) { a.multiply(x, y); };
    LanczosOptions direct = opt;
    if (which == Extreme::Min && !direct.max_steps)
        direct.max_steps = 150;
    const auto res = lanczos_extreme(apply, a.size(), which, deflate, direct);
    if (res.converged)
        return res.value;
    if (which == Extreme::Max)
        throw NotConverged("eig_extreme: Lanczos did not converge for the largest eigenvalue", res.value);

    // Inverse operator on the deflated space; its largest eigenvalue is 1 / lambda_min.
    // The inner solve runs on P A P, P = I - k k^T, so that k is an exact kernel.
    const double inner_tol = 1e-2 * opt.tol;
    bool inner_failed = false;
    LanczosOptions inv = opt;
    inv.max_steps = opt.max_steps ? opt.max_steps : 200;
    auto run_inverse = [&](const auto& prec) {
        const DeflatedOperator op{a, deflate};
        const DeflatedPreconditioner<std::decay_t<decltype(prec)>> dprec{prec, deflate};
        auto inverse = [&](std::span<const double> x, std::span<double> y) {
            auto sol = pcg(op, x, dprec, inner_tol, 10 * a.size() + 100, false);
            inner_failed = inner_failed || !sol.stats.converged;
            detail::project_out(sol.x, deflate);
            std::copy(sol.x.begin(), sol.x.end(), y.begin());
        };
        return lanczos_extreme(inverse, a.size(), Extreme::Max, deflate, inv);
    };
    std::optional<Ilu0> ilu;
    try {
        ilu.emplace(a);
    } catch (const std::domain_error&) { // zero pivot: fall back to Jacobi
    }
    const LanczosResult ires = ilu ? run_inverse(*ilu) : run_inverse(JacobiPreconditioner(a));
    if (!ires.converged || inner_failed || !(ires.value > 0.0))
        throw NotConverged("eig_extreme: smallest eigenvalue did not converge", res.value);
    return 1.0 / ires.value;
}

struct CondEstimate {
    double lambda_max = 0.0;
    double lambda_min_or_2 = 0.0;
    double cond = 0.0;
    bool deflated = false;
};

/// Ratios above this are reported as +inf: the smallest eigenvalue is then at roundoff level.
inline constexpr double kSingularCond = 1e13;

/// Spectral condition number of an SPD matrix; +inf if the smallest eigenvalue is not
/// positive or lies below lambda_max / kSingularCond.
inline CondEstimate condition_number(const CsrMatrix& a, const LanczosOptions& opt = {})
{
    CondEstimate c;
    c.lambda_max = eig_extreme(a, Extreme::Max, {}, opt);
    try {
        c.lambda_min_or_2 = eig_extreme(a, Extreme::Min, {}, opt);
    } catch (const NotConverged& e) {
        c.lambda_min_or_2 = e.estimate();
        if (c.lambda_min_or_2 > 0.0)
            throw;
    }
    c.cond = c.lambda_min_or_2 * kSingularCond > c.lambda_max ? c.lambda_max / c.lambda_min_or_2
                                                               : std::numeric_limits<double>::infinity();
    return c;
}

/// lambda_max / lambda_2 for a positive semidefinite matrix whose kernel is spanned by `kernel`.
inline CondEstimate effective_cond(const CsrMatrix& a, std::span<const double> kernel, const LanczosOptions& opt = {})
{
    if (kernel.size() != a.size())
        throw std::invalid_argument("effective_cond: kernel vector has wrong length");
    std::vector<double> k(kernel.begin(), kernel.end());
    const double kn = norm2(k);
    if (!(kn > 0.0))
        throw std::invalid_argument("effective_cond: zero kernel vector");
    for (double& x : k)
        x /= kn;

    CondEstimate c;
    c.deflated = true;
    c.lambda_max = eig_extreme(a, Extreme::Max, k, opt);
    const auto ak = a * k;
    if (norm2(ak) > 1e-8 * c.lambda_max)
        throw std::invalid_argument("effective_cond: supplied vector is not in the kernel");
    c.lambda_min_or_2 = eig_extreme(a, Extreme::Min, k, opt);
    c.cond = c.lambda_max / c.lambda_min_or_2;
    return c;
}

} // namespace levelsurf
