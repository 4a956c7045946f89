#pragma once

#include <cstdlib>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numtheory.hpp"

namespace weilinv {

using IntMatrix = std::vector<std::vector<i64>>;

inline IntMatrix identity_matrix(std::size_t n) {
    IntMatrix m(n, std::vector<i64>(n, 0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

inline i64 checked(__int128 v) {
    if (v > INT64_MAX || v < INT64_MIN) throw Error(errc::bound_exceeded, "integer overflow in Smith form");
    return static_cast<i64>(v);
}

/// Smith normal form: U * A * V = diag(d_1 | d_2 | ...), U and V unimodular, d_i >= 0.
struct SmithForm {
    IntMatrix U, V;
    std::vector<i64> diag;
};

inline SmithForm smith_normal_form(IntMatrix A) {
    const std::size_t n = A.size(), m = n ? A[0].size() : 0;
    IntMatrix U = identity_matrix(n), V = identity_matrix(m);
    auto row_axpy = [&](std::size_t dst, std::size_t src, i64 k) {  // row_dst -= k row_src
        for (std::size_t j = 0; j < m; ++j) A[dst][j] = checked((__int128)A[dst][j] - (__int128)k * A[src][j]);
        for (std::size_t j = 0; j < n; ++j) U[dst][j] = checked((__int128)U[dst][j] - (__int128)k * U[src][j]);
    };
    auto col_axpy = [&](std::size_t dst, std::size_t src, i64 k) {  // col_dst -= k col_src
        for (std::size_t i = 0; i < n; ++i) A[i][dst] = checked((__int128)A[i][dst] - (__int128)k * A[i][src]);
        for (std::size_t i = 0; i < m; ++i) V[i][dst] = checked((__int128)V[i][dst] - (__int128)k * V[i][src]);
    };
    auto swap_rows = [&](std::size_t a, std::size_t b) { std::swap(A[a], A[b]); std::swap(U[a], U[b]); };
    auto swap_cols = [&](std::size_t a, std::size_t b) {
        for (auto& row : A) std::swap(row[a], row[b]);
        for (auto& row : V) std::swap(row[a], row[b]);
    };

    const std::size_t r = std::min(n, m);
    for (std::size_t t = 0; t < r; ++t) {
        while (true) {
            std::size_t bi = n, bj = m;
            for (std::size_t i = t; i < n; ++i)
                for (std::size_t j = t; j < m; ++j)
                    if (A[i][j] != 0 && (bi == n || std::llabs(A[i][j]) < std::llabs(A[bi][bj]))) { bi = i; bj = j; }
            if (bi == n) break;
            swap_rows(t, bi);
            swap_cols(t, bj);
            bool clean = true;
            for (std::size_t i = t + 1; i < n; ++i) {
                row_axpy(i, t, A[i][t] / A[t][t]);
                if (A[i][t] != 0) clean = false;
            }
            for (std::size_t j = t + 1; j < m; ++j) {
                col_axpy(j, t, A[t][j] / A[t][t]);
                if (A[t][j] != 0) clean = false;
            }
            if (!clean) continue;
            // Divisibility: fold any non-multiple into the pivot row.
            std::size_t bad = n;
            for (std::size_t i = t + 1; i < n && bad == n; ++i)
                for (std::size_t j = t + 1; j < m; ++j)
                    if (A[i][j] % A[t][t] != 0) { bad = i; break; }
            if (bad == n) break;
            row_axpy(t, bad, -1);
        }
        if (A[t][t] < 0) {
            for (std::size_t j = 0; j < m; ++j) A[t][j] = -A[t][j];
            for (std::size_t j = 0; j < n; ++j) U[t][j] = -U[t][j];
        }
    }
    SmithForm out{std::move(U), std::move(V), {}};
    for (std::size_t t = 0; t < r; ++t) out.diag.push_back(A[t][t]);
    return out;
}

}  // namespace weilinv
