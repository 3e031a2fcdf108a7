#pragma once

// Diagonalization of integer relation matrices by elementary row and column
// operations. Only the column transform V and its inverse are tracked: for a
// relation lattice L = rowspace(R), x -> x V maps Z^n / L onto
// (+)_t Z / d_t where d_t are the diagonal entries.

#include <cstddef>
#include <utility>
#include <vector>

#include "arith.hpp"

namespace abelbias {

using IntMatrix = std::vector<std::vector<Integer>>;

struct Diagonalization {
    std::vector<Integer> diagonal;  ///< one nonnegative entry per column
    IntMatrix right;                ///< V, n x n, unimodular
    IntMatrix right_inverse;        ///< V^{-1}
};

namespace detail {

inline IntMatrix identity_matrix(std::size_t n) {
    IntMatrix m(n, std::vector<Integer>(n, 0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

}  // namespace detail

/// Diagonalizes `rows` (m x ncols). Divisibility of the diagonal is not enforced; callers
/// split each entry into prime powers anyway.
inline Diagonalization diagonalize(IntMatrix rows, std::size_t ncols) {
    const std::size_t m = rows.size();
    const std::size_t n = ncols;
    for (const auto& r : rows)
        if (r.size() != n) throw InputError("diagonalize: ragged relation matrix");

    IntMatrix v = detail::identity_matrix(n);
    IntMatrix vinv = detail::identity_matrix(n);

    auto swap_cols = [&](std::size_t a, std::size_t b) {
        if (a == b) return;
        for (auto& r : rows) std::swap(r[a], r[b]);
        for (auto& r : v) std::swap(r[a], r[b]);
        std::swap(vinv[a], vinv[b]);
    };
    // col_j -= q * col_t
    auto col_axpy = [&](std::size_t j, std::size_t t, const Integer& q) {
        for (auto& r : rows) r[j] -= q * r[t];
        for (auto& r : v) r[j] -= q * r[t];
        for (std::size_t c = 0; c < n; ++c) vinv[t][c] += q * vinv[j][c];
    };

    const std::size_t steps = std::min(m, n);
    for (std::size_t t = 0; t < steps; ++t) {
        // Pivot: smallest nonzero magnitude in the trailing block.
        std::size_t pi = m, pj = n;
        Integer best;
        for (std::size_t i = t; i < m; ++i)
            for (std::size_t j = t; j < n; ++j) {
                if (rows[i][j] == 0) continue;
                Integer a = abs(rows[i][j]);
                if (pi == m || a < best) {
                    best = a;
                    pi = i;
                    pj = j;
                }
            }
        if (pi == m) break;
        std::swap(rows[t], rows[pi]);
        swap_cols(t, pj);

        for (;;) {
            bool clean = true;
            for (std::size_t i = t + 1; i < m; ++i) {
                if (rows[i][t] == 0) continue;
                Integer q;
                mpz_tdiv_q(q.get_mpz_t(), rows[i][t].get_mpz_t(), rows[t][t].get_mpz_t());
                for (std::size_t c = t; c < n; ++c) rows[i][c] -= q * rows[t][c];
                if (rows[i][t] != 0) clean = false;
            }
            for (std::size_t j = t + 1; j < n; ++j) {
                if (rows[t][j] == 0) continue;
                Integer q;
                mpz_tdiv_q(q.get_mpz_t(), rows[t][j].get_mpz_t(), rows[t][t].get_mpz_t());
                col_axpy(j, t, q);
                if (rows[t][j] != 0) clean = false;
            }
            if (clean) break;
            // A remainder survived: move the smallest entry of row t / column t to the pivot.
            std::size_t bi = t, bj = t;
            Integer b = abs(rows[t][t]);
            for (std::size_t i = t + 1; i < m; ++i)
                if (rows[i][t] != 0 && abs(rows[i][t]) < b) {
                    b = abs(rows[i][t]);
                    bi = i;
                    bj = t;
                }
            for (std::size_t j = t + 1; j < n; ++j)
                if (rows[t][j] != 0 && abs(rows[t][j]) < b) {
                    b = abs(rows[t][j]);
                    bi = t;
                    bj = j;
                }
            std::swap(rows[t], rows[bi]);
            swap_cols(t, bj);
        }
        if (rows[t][t] < 0) {
            for (auto& r : rows) r[t] = -r[t];
            for (auto& r : v) r[t] = -r[t];
            for (auto& x : vinv[t]) x = -x;
        }
    }

    Diagonalization out;
    out.diagonal.assign(n, 0);
    for (std::size_t t = 0; t < steps; ++t) out.diagonal[t] = rows[t][t];
    out.right = std::move(v);
    out.right_inverse = std::move(vinv);
    return out;
}

}  // namespace abelbias
