#pragma once

/// \file sparse_matrix.hpp
/// Compressed sparse row storage with both triangles of symmetric matrices
/// stored explicitly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace levelsurf {

struct Triplet {
    std::uint32_t row;
    std::uint32_t col;
    double value;
};

class CsrMatrix {
public:
    CsrMatrix() = default;

    /// Duplicates are summed in their order of appearance in `entries`,
    /// so identical input sequences give bit-identical matrices.
    static CsrMatrix from_triplets(std::size_t n, std::vector<Triplet> entries)
    {
        for (const auto& e : entries)
            if (e.row >= n || e.col >= n)
                throw std::out_of_range("CsrMatrix: triplet index out of range");
        std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        CsrMatrix m;
        m.n_ = n;
        m.row_ptr_.assign(n + 1, 0);
        for (std::size_t k = 0; k < entries.size();) {
            const auto r = entries[k].row, c = entries[k].col;
            double sum = 0.0;
            for (; k < entries.size() && entries[k].row == r && entries[k].col == c; ++k)
                sum += entries[k].value;
            m.col_.push_back(c);
            m.val_.push_back(sum);
            ++m.row_ptr_[r + 1];
        }
        std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
        return m;
    }

    static CsrMatrix identity(std::size_t n)
    {
        std::vector<Triplet> t;
        for (std::size_t i = 0; i < n; ++i)
            t.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i), 1.0});
        return from_triplets(n, std::move(t));
    }

    std::size_t size() const { return n_; }
    std::size_t nnz() const { return val_.size(); }

    std::span<const std::size_t> row_ptr() const { return row_ptr_; }
    std::span<const std::uint32_t> cols() const { return col_; }
    std::span<const double> values() const { return val_; }
    std::span<double> values() { return val_; }

    std::size_t row_nnz(std::size_t i) const { return row_ptr_[i + 1] - row_ptr_[i]; }

    /// Entry (i, j), zero when outside the pattern.
    double at(std::size_t i, std::size_t j) const
    {
        const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
        const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
        const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(j));
        return (it != last && *it == j) ? val_[static_cast<std::size_t>(it - col_.begin())] : 0.0;
    }

    std::vector<double> diagonal() const
    {
        std::vector<double> d(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i)
            d[i] = at(i, i);
        return d;
    }

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const
    {
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                s += val_[k] * x[col_[k]];
            y[i] = s;
        }
    }

    std::vector<double> operator*(std::span<const double> x) const
    {
        std::vector<double> y(n_);
        multiply(x, y);
        return y;
    }

    /// Exact symmetry a_ij == a_ji including the pattern.
    bool is_symmetric() const
    {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                const std::size_t j = col_[k];
                const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[j]);
                const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[j + 1]);
                const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(i));
                if (it == last || *it != i || val_[static_cast<std::size_t>(it - col_.begin())] != val_[k])
                    return false;
            }
        return true;
    }

    /// P A P^T for the permutation new_index = perm[old_index].
    CsrMatrix permuted(std::span<const std::uint32_t> perm) const
    {
        std::vector<Triplet> t;
        t.reserve(nnz());
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                t.push_back({perm[i], perm[col_[k]], val_[k]});
        return from_triplets(n_, std::move(t));
    }

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::uint32_t> col_;
    std::vector<double> val_;
};

inline double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// D^{-1/2} A D^{-1/2} with D = diag(A).
struct ScaledMatrix {
    CsrMatrix matrix;
    std::vector<double> diagonal; ///< the original diagonal D
};

inline ScaledMatrix diag_scale(const CsrMatrix& a)
{
    ScaledMatrix out{a, a.diagonal()};
    std::vector<double> inv_sqrt(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(out.diagonal[i] > 0.0))
            throw std::domain_error("diag_scale: nonpositive diagonal in row " + std::to_string(i));
        inv_sqrt[i] = 1.0 / std::sqrt(out.diagonal[i]);
    }
    const auto rp = out.matrix.row_ptr();
    const auto cols = out.matrix.cols();
    auto vals = out.matrix.values();
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
            vals[k] = cols[k] == i ? 1.0 : vals[k] * (inv_sqrt[i] * inv_sqrt[cols[k]]);
    return out;
}

/// blocktridiag(-B^T, D, -B) with D = tridiag(-1, 6, -1) and B = tridiag(0, 1, 1),
/// all blocks of size block_size; -B^T sits above the diagonal block and -B below.
inline CsrMatrix build_reference_matrix(std::size_t blocks = 120, std::size_t block_size = 120)
{
    if (blocks < 2 || block_size < 2)
        throw std::invalid_argument("build_reference_matrix: need at least 2 blocks of size 2");
    const std::size_t n = blocks * block_size;
    std::vector<Triplet> t;
    t.reserve(7 * n);
    auto add = [&](std::size_t i, std::size_t j, double v) {
        t.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), v});
    };
    for (std::size_t b = 0; b < blocks; ++b)
        for (std::size_t r = 0; r < block_size; ++r) {
            const std::size_t i = b * block_size + r;
            add(i, i, 6.0);
            if (r > 0)
                add(i, i - 1, -1.0);
            if (r + 1 < block_size)
                add(i, i + 1, -1.0);
            // B has ones on its diagonal and its first subdiagonal.
            if (b + 1 < blocks) { // upper block -B^T: (r, r) and (r, r + 1)
                add(i, i + block_size, -1.0);
                if (r + 1 < block_size)
                    add(i, i + block_size + 1, -1.0);
            }
            if (b > 0) { // lower block -B: (r, r) and (r, r - 1)
                add(i, i - block_size, -1.0);
                if (r > 0)
                    add(i, i - block_size - 1, -1.0);
            }
        }
    return CsrMatrix::from_triplets(n, std::move(t));
}

} // namespace levelsurf
