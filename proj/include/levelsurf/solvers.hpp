#pragma once

/// \file solvers.hpp
/// Preconditioned conjugate gradients with Jacobi and ILU(0) preconditioners.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparse_matrix.hpp"

namespace levelsurf {

enum class Preconditioner { None, Jacobi, Ilu0 };

inline Preconditioner preconditioner_from_string(const std::string& s)
{
    if (s == "none")
        return Preconditioner::None;
    if (s == "jacobi")
        return Preconditioner::Jacobi;
    if (s == "ilu0")
        return Preconditioner::Ilu0;
    throw std::invalid_argument("unknown preconditioner '" + s + "'");
}

struct SolveStats {
    std::size_t iterations = 0;
    double relative_residual = 0.0; ///< true residual |b - Ax| / |b| at exit
    bool converged = false;
};

struct SolveResult {
    std::vector<double> x;
    SolveStats stats;
};

template <class P>
concept PreconditionerOp = requires(const P& p, std::span<const double> r, std::span<double> z) {
    p.apply(r, z);
};

template <class A>
concept LinearOp = requires(const A& a, std::span<const double> x, std::span<double> y) {
    a.multiply(x, y);
    { a.size() } -> std::convertible_to<std::size_t>;
};

struct IdentityPreconditioner {
    void apply(std::span<const double> r, std::span<double> z) const { std::copy(r.begin(), r.end(), z.begin()); }
};

class JacobiPreconditioner {
public:
    explicit JacobiPreconditioner(const CsrMatrix& a) : inv_diag_(a.diagonal())
    {
        for (std::size_t i = 0; i < inv_diag_.size(); ++i) {
            if (inv_diag_[i] == 0.0)
                throw std::domain_error("Jacobi: zero diagonal in row " + std::to_string(i));
            inv_diag_[i] = 1.0 / inv_diag_[i];
        }
    }

    void apply(std::span<const double> r, std::span<double> z) const
    {
        for (std::size_t i = 0; i < r.size(); ++i)
            z[i] = inv_diag_[i] * r[i];
    }

private:
    std::vector<double> inv_diag_;
};

/// Incomplete LU without fill: L (unit lower) and U share the pattern of A.
class Ilu0 {
public:
    explicit Ilu0(const CsrMatrix& a) : lu_(a), diag_pos_(a.size())
    {
        const std::size_t n = a.size();
        const auto rp = lu_.row_ptr();
        const auto cols = lu_.cols();
        auto vals = lu_.values();
        std::vector<std::ptrdiff_t> pos(n, -1);

        for (std::size_t i = 0; i < n; ++i) {
            diag_pos_[i] = static_cast<std::size_t>(-1);
            for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
                if (cols[k] == i)
                    diag_pos_[i] = k;
            if (diag_pos_[i] == static_cast<std::size_t>(-1))
                throw std::domain_error("ILU(0): missing diagonal in row " + std::to_string(i));
        }

        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
                pos[cols[k]] = static_cast<std::ptrdiff_t>(k);
            for (std::size_t k = rp[i]; k < rp[i + 1] && cols[k] < i; ++k) {
                const std::size_t p = cols[k];
                const double pivot = vals[diag_pos_[p]];
                vals[k] /= pivot;
                const double lik = vals[k];
                for (std::size_t m = diag_pos_[p] + 1; m < rp[p + 1]; ++m)
                    if (pos[cols[m]] >= 0)
                        vals[static_cast<std::size_t>(pos[cols[m]])] -= lik * vals[m];
            }
            if (vals[diag_pos_[i]] == 0.0 || !std::isfinite(vals[diag_pos_[i]]))
                throw std::domain_error("ILU(0): zero pivot in row " + std::to_string(i));
            for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
                pos[cols[k]] = -1;
        }
    }

    /// Solves L U z = r by forward and backward substitution.
    void apply(std::span<const double> r, std::span<double> z) const
    {
        const std::size_t n = lu_.size();
        const auto rp = lu_.row_ptr();
        const auto cols = lu_.cols();
        const auto vals = lu_.values();
        for (std::size_t i = 0; i < n; ++i) {
            double s = r[i];
            for (std::size_t k = rp[i]; k < diag_pos_[i]; ++k)
                s -= vals[k] * z[cols[k]];
            z[i] = s;
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = z[i];
            for (std::size_t k = diag_pos_[i] + 1; k < rp[i + 1]; ++k)
                s -= vals[k] * z[cols[k]];
            z[i] = s / vals[diag_pos_[i]];
        }
    }

    const CsrMatrix& factors() const { return lu_; }

private:
    CsrMatrix lu_;
    std::vector<std::size_t> diag_pos_;
};

/// PCG from a zero initial guess. Stops when the recursively updated residual
/// drops below tol * |b|. With `verify` set, the true residual is then
/// checked and iteration resumes from it if it is still too large; without
/// it, convergence is judged on the recursive residual alone (useful for
/// inner solves on ill-conditioned systems, where the true residual
/// stagnates near machine precision times the condition number).
template <LinearOp Op, PreconditionerOp Prec>
SolveResult pcg(const Op& a, std::span<const double> b, const Prec& m, double tol, std::size_t max_iter,
                bool verify = true)
{
    const std::size_t n = a.size();
    SolveResult res;
    res.x.assign(n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        res.stats.converged = true;
        return res;
    }

    std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n);
    double rho_old = 0.0;
    bool restart = true;
    auto true_residual = [&]() {
        a.multiply(res.x, q);
        for (std::size_t i = 0; i < n; ++i)
            r[i] = b[i] - q[i];
        return norm2(r) / bnorm;
    };

    for (std::size_t it = 1; it <= max_iter; ++it) {
        m.apply(r, z);
        const double rho = dot(r, z);
        if (restart) {
            p = z;
            restart = false;
        } else {
            const double beta = rho / rho_old;
            for (std::size_t i = 0; i < n; ++i)
                p[i] = z[i] + beta * p[i];
        }
        a.multiply(p, q);
        const double pq = dot(p, q);
        res.stats.iterations = it;
        if (!(pq > 0.0) || !(rho > 0.0))
            break;
        const double alpha = rho / pq;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rho_old = rho;
        if (norm2(r) / bnorm <= tol) {
            if (!verify) {
                res.stats.relative_residual = norm2(r) / bnorm;
                res.stats.converged = true;
                return res;
            }
            if (true_residual() <= tol) {
                res.stats.converged = true;
                break;
            }
            restart = true;
        }
    }
    res.stats.relative_residual = true_residual();
    res.stats.converged = res.stats.relative_residual <= tol;
    return res;
}

inline SolveResult pcg(const CsrMatrix& a, std::span<const double> b, Preconditioner kind, double tol,
                       std::size_t max_iter)
{
    switch (kind) {
    case Preconditioner::Jacobi:
        return pcg(a, b, JacobiPreconditioner(a), tol, max_iter);
    case Preconditioner::Ilu0:
        return pcg(a, b, Ilu0(a), tol, max_iter);
    case Preconditioner::None:
        break;
    }
    return pcg(a, b, IdentityPreconditioner{}, tol, max_iter);
}

} // namespace levelsurf
