#pragma once

#include <ostream>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <weilinv/weilinv.hpp>

namespace weilinv {

/// Readable gtest diagnostics: nonzero coefficients as index:value.
inline void PrintTo(const GroupAlgebraVector& v, std::ostream* os) {
    *os << "{";
    bool first = true;
    for (int g : v.support()) {
        *os << (first ? "" : ", ") << g << ": " << v[g];
        first = false;
    }
    *os << "}";
}

inline void PrintTo(const Element& e, std::ostream* os) {
    *os << "(";
    for (std::size_t i = 0; i < e.coeffs.size(); ++i) *os << (i ? "," : "") << e.coeffs[i];
    *os << ")";
}

}  // namespace weilinv

namespace weilinv::testkit {

/// Indecomposable pieces used to assemble random forms.
inline const std::vector<std::string>& component_pool() {
    static const std::vector<std::string> pool = {
        "2_II^+2", "2_II^-2", "2_1^+1", "2_7^+1", "2_3^-1", "2_5^-1", "4_II^+2", "4_1^+1", "4_3^-1",
        "3^+1",    "3^-1",    "5^+1",   "5^-1",   "7^+1",   "9^+1",   "8_1^+1", "2_0^+2", "2_2^+2"};
    return pool;
}

struct RandomForm {
    std::string symbol;
    DiscriminantForm form;
};

/// Orthogonal sum of random pool components with |D| <= max_order and level <= max_level.
inline RandomForm random_form(std::mt19937_64& rng, i64 max_order, i64 max_level, bool even_signature) {
    const auto& pool = component_pool();
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::uniform_int_distribution<int> count(1, 3);
    while (true) {
        JordanSymbol sym;
        const int k = count(rng);
        for (int i = 0; i < k; ++i) sym = sym + JordanSymbol::parse(pool[pick(rng)]);
        if (sym.order() > max_order || sym.level() > max_level) continue;
        if (even_signature && sym.signature() % 2) continue;
        try {
            return {sym.str(), from_jordan_symbol(sym)};
        } catch (const Error&) {
            // merged components may violate the consistency rules; draw again
        }
    }
}

/// Small integer coefficients, occasionally times a root of unity of the level.
inline GroupAlgebraVector random_vector(const DiscriminantForm& D, std::mt19937_64& rng, bool cyclotomic = true) {
    std::uniform_int_distribution<int> coef(-3, 3);
    std::uniform_int_distribution<i64> root(0, D.level() - 1);
    std::bernoulli_distribution twist(cyclotomic ? 0.3 : 0.0);
    GroupAlgebraVector v(D.size());
    for (int g = 0; g < D.size(); ++g) {
        int c = coef(rng);
        if (!c) continue;
        v[g] = CycloNumber(c);
        if (twist(rng)) v[g] *= CycloNumber::e_of(root(rng), D.level());
    }
    return v;
}

/// ρ(Z) e^γ = e(sign/4) e^{-γ}.
inline GroupAlgebraVector rho_Z(const DiscriminantForm& D, const GroupAlgebraVector& v) {
    GroupAlgebraVector w(D.size());
    for (int g = 0; g < D.size(); ++g)
        if (!v[g].is_zero()) w[D.neg(g)] = CycloNumber::e_of(D.signature(), 4) * v[g];
    return w;
}

/// (g, x, y) with a x + b y = g = gcd(a, b).
inline std::tuple<i64, i64, i64> ext_gcd(i64 a, i64 b) {
    if (b == 0) return {a >= 0 ? a : -a, a >= 0 ? 1 : -1, 0};
    auto [g, x, y] = ext_gcd(b, a % b);
    return {g, y, x - (a / b) * y};
}

/// Average of ρ(M) v over SL2(Z/N) using independent Euclidean words and the direct letter formulas.
inline GroupAlgebraVector inv_by_direct_words(const DiscriminantForm& D, const GroupAlgebraVector& v) {
    const i64 N = D.level();
    GroupAlgebraVector acc(D.size());
    i64 count = 0;
    for (i64 a = 0; a < N; ++a)
        for (i64 b = 0; b < N; ++b)
            for (i64 c = 0; c < N; ++c)
                for (i64 d = 0; d < N; ++d) {
                    if (mod(a * d - b * c, N) != 1 % N) continue;
                    // Lift the first column to coprime integers, complete by extended Euclid, then fix the
                    // second column by a right factor T^t.
                    i64 aa = a, cc = c;
                    if (N == 1) aa = 1;
                    else if (cc == 0) cc = N;
                    while (std::gcd(aa, cc) != 1) aa += N;
                    auto [g, x, y] = ext_gcd(aa, cc);  // aa x + cc y = 1
                    Mat2 M{aa, -y, cc, x};
                    bool ok = false;
                    for (i64 t = 0; t < N && !ok; ++t) {
                        Mat2 Mt = M * Mat2{1, t, 0, 1};
                        if (mod(Mt.b - b, N) == 0 && mod(Mt.d - d, N) == 0) { M = Mt; ok = true; }
                    }
                    check_internal(ok && g == 1, "no SL2(Z) lift found");
                    acc += rho_word_direct(D, word_decompose(M).word, v);
                    ++count;
                }
    return CycloNumber(Rational(1, count)) * acc;
}

}  // namespace weilinv::testkit
