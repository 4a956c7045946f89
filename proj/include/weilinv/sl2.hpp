#pragma once

#include <array>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numtheory.hpp"
#include "smith.hpp"

namespace weilinv {

/// 2x2 integer matrix (a b; c d).
struct Mat2 {
    i64 a = 1, b = 0, c = 0, d = 1;

    i64 det() const { return checked((__int128)a * d - (__int128)b * c); }
    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        return {checked((__int128)x.a * y.a + (__int128)x.b * y.c), checked((__int128)x.a * y.b + (__int128)x.b * y.d),
                checked((__int128)x.c * y.a + (__int128)x.d * y.c), checked((__int128)x.c * y.b + (__int128)x.d * y.d)};
    }
    friend bool operator==(const Mat2&, const Mat2&) = default;
    Mat2 inverse() const { return {d, -b, -c, a}; }  // det 1 only
    Mat2 reduced(i64 N) const { return {mod(a, N), mod(b, N), mod(c, N), mod(d, N)}; }
    std::string str() const {
        return "(" + std::to_string(a) + " " + std::to_string(b) + "; " + std::to_string(c) + " " + std::to_string(d) + ")";
    }
};

enum class Letter { S, T, Tinv };

inline Mat2 letter_matrix(Letter l) {
    switch (l) {
        case Letter::S: return {0, -1, 1, 0};
        case Letter::T: return {1, 1, 0, 1};
        default: return {1, -1, 0, 1};
    }
}

inline const char* letter_name(Letter l) { return l == Letter::S ? "S" : l == Letter::T ? "T" : "T^-1"; }

/// Matrix together with a word in S, T, T^-1 whose ordered product equals it.
struct SL2Word {
    Mat2 target;
    std::vector<Letter> word;

    Mat2 product() const {
        Mat2 m;
        for (Letter l : word) m = m * letter_matrix(l);
        return m;
    }
};

/// Euclidean reduction: peels T^q and S off the left until an upper triangular ±T^n remains.
inline SL2Word word_decompose(const Mat2& M) {
    if (M.det() != 1) throw Error(errc::invalid_input, "matrix " + M.str() + " does not have determinant 1");
    std::vector<Letter> word;
    auto push_t = [&](i64 q) {
        for (i64 i = 0; i < std::llabs(q); ++i) word.push_back(q > 0 ? Letter::T : Letter::Tinv);
    };
    Mat2 R = M;
    while (R.c != 0) {
        // R = T^q R' with |a'| <= |c|/2, then R' = S R''.
        i64 q = R.a / R.c;
        i64 r = R.a - q * R.c;
        if (2 * std::llabs(r) > std::llabs(R.c)) q += ((r > 0) == (R.c > 0)) ? 1 : -1;
        push_t(q);
        R = Mat2{1, -q, 0, 1} * R;
        word.push_back(Letter::S);
        R = Mat2{0, 1, -1, 0} * R;  // S^-1 R
    }
    // R = ±(1 n; 0 1).
    if (R.a == -1) {
        word.push_back(Letter::S);
        word.push_back(Letter::S);
        R = Mat2{-1, 0, 0, -1} * R;
    }
    check_internal(R.a == 1 && R.d == 1 && R.c == 0, "word_decompose: unexpected remainder");
    push_t(R.b);
    SL2Word out{M, std::move(word)};
    check_internal(out.product() == M, "word_decompose: product mismatch");
    return out;
}

/// Index N^3 prod (1 - 1/p^2) of Gamma(N).
inline i64 sl2_order(i64 N) {
    i64 r = N * N * N;
    for (i64 p : prime_divisors(N)) r = r / (p * p) * (p * p - 1);
    return r;
}

/// Elements of SL2(Z/N) as a spanning tree: node i = letter[i] * node parent[i] with integer lifts.
struct CosetTree {
    i64 N = 1;
    std::vector<Mat2> lift;
    std::vector<int> parent;
    std::vector<Letter> letter;
    std::vector<int> s_count;  // number of S letters on the path from the root

    std::size_t size() const { return lift.size(); }
    SL2Word word(int i) const {
        SL2Word w{lift[i], {}};
        for (int j = i; j > 0; j = parent[j]) w.word.push_back(letter[j]);
        return w;
    }
    /// Children lists for depth-first traversal.
    std::vector<std::vector<int>> children() const {
        std::vector<std::vector<int>> ch(size());
        for (std::size_t i = 1; i < size(); ++i) ch[parent[i]].push_back(static_cast<int>(i));
        return ch;
    }
};

/// Breadth-first enumeration of SL2(Z/N) by left multiplication with S and T.
inline CosetTree enumerate_cosets(i64 N) {
    if (N < 1) throw Error(errc::invalid_input, "level must be positive");
    if (N > level_bound().load()) throw Error(errc::bound_exceeded, "level " + std::to_string(N) + " exceeds the configured bound");
    CosetTree tree;
    tree.N = N;
    auto key = [&](const Mat2& m) {
        Mat2 r = m.reduced(N);
        return ((r.a * N + r.b) * N + r.c) * N + r.d;
    };
    std::vector<int> seen_index(static_cast<std::size_t>(N * N * N * N), -1);
    tree.lift.push_back(Mat2{});
    tree.parent.push_back(-1);
    tree.letter.push_back(Letter::S);
    tree.s_count.push_back(0);
    seen_index[key(Mat2{})] = 0;
    for (std::size_t head = 0; head < tree.lift.size(); ++head) {
        for (Letter l : {Letter::S, Letter::T}) {
            Mat2 lifted = letter_matrix(l) * tree.lift[head];
            i64 k = key(lifted);
            if (seen_index[k] != -1) continue;
            seen_index[k] = static_cast<int>(tree.lift.size());
            tree.lift.push_back(lifted);
            tree.parent.push_back(static_cast<int>(head));
            tree.letter.push_back(l);
            tree.s_count.push_back(tree.s_count[head] + (l == Letter::S ? 1 : 0));
        }
    }
    check_internal(static_cast<i64>(tree.size()) == sl2_order(N), "coset enumeration has the wrong size");
    return tree;
}

}  // namespace weilinv
