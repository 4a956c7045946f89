#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cyclo.hpp"
#include "errors.hpp"
#include "jordan.hpp"
#include "numtheory.hpp"
#include "qmodz.hpp"
#include "smith.hpp"

namespace weilinv {

/// Group element as a coefficient tuple over the generators of its parent form.
struct Element {
    std::vector<i64> coeffs;
    friend auto operator<=>(const Element&, const Element&) = default;
};

/// Jordan bookkeeping for a generator built from a symbol: scale q and whether it spans an odd 2-adic piece.
struct GeneratorTag {
    i64 scale = 1;
    bool odd_two_adic = false;
};

/// Finite quadratic module with elements indexed 0..|D|-1 in lexicographic order of coefficient tuples.
class DiscriminantForm {
public:
    /// Trivial form.
    DiscriminantForm() { build(); }

    DiscriminantForm(std::vector<i64> orders, std::vector<QmodZ> q_gen, std::vector<std::vector<QmodZ>> b_gen,
                     std::vector<GeneratorTag> tags = {}, std::string name = "")
        : tags_(std::move(tags)), name_(std::move(name)) {
        const std::size_t k = orders.size();
        if (q_gen.size() != k || b_gen.size() != k) throw Error(errc::invalid_input, "generator data size mismatch");
        for (std::size_t i = 0; i < k; ++i) {
            if (orders[i] < 1) throw Error(errc::invalid_input, "generator orders must be positive");
            if (b_gen[i].size() != k) throw Error(errc::invalid_input, "bilinear matrix must be square");
        }
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < k; ++i)
            if (orders[i] > 1) keep.push_back(i);
        for (std::size_t i : keep) {
            orders_.push_back(orders[i]);
            q_gen_.push_back(q_gen[i]);
            std::vector<QmodZ> row;
            for (std::size_t j : keep) row.push_back(i == j ? 2 * q_gen[i] : b_gen[i][j]);
            b_gen_.push_back(row);
        }
        if (!tags_.empty()) {
            std::vector<GeneratorTag> kept;
            for (std::size_t i : keep) kept.push_back(tags_.at(i));
            tags_ = kept;
        }
        build();
    }

    // --- group structure ---------------------------------------------------
    i64 order() const { return size_; }
    int size() const { return static_cast<int>(size_); }
    int num_generators() const { return static_cast<int>(orders_.size()); }
    const std::vector<i64>& generator_orders() const { return orders_; }
    const std::vector<QmodZ>& q_generators() const { return q_gen_; }
    const std::vector<std::vector<QmodZ>>& b_generators() const { return b_gen_; }
    const std::vector<GeneratorTag>& tags() const { return tags_; }
    const std::string& name() const { return name_; }
    std::string describe() const { return name_.empty() ? "<" + std::to_string(size_) + " elements>" : name_; }

    Element element(int idx) const {
        Element e;
        for (std::size_t i = 0; i < orders_.size(); ++i) e.coeffs.push_back((idx / strides_[i]) % orders_[i]);
        return e;
    }
    int index(const Element& e) const { return index(e.coeffs); }
    int index(const std::vector<i64>& coeffs) const {
        if (coeffs.size() != orders_.size()) throw Error(errc::invalid_input, "element has wrong number of coordinates");
        i64 r = 0;
        for (std::size_t i = 0; i < orders_.size(); ++i) r += mod(coeffs[i], orders_[i]) * strides_[i];
        return static_cast<int>(r);
    }
    int generator(int i) const { return static_cast<int>(strides_.at(i)); }

    int add(int a, int b) const {
        i64 r = 0;
        for (std::size_t i = 0; i < orders_.size(); ++i) {
            i64 d = orders_[i], s = strides_[i];
            r += ((a / s) % d + (b / s) % d) % d * s;
        }
        return static_cast<int>(r);
    }
    int neg(int a) const { return neg_[a]; }
    int sub(int a, int b) const { return add(a, neg_[b]); }
    int mul(i64 c, int a) const {
        i64 r = 0;
        for (std::size_t i = 0; i < orders_.size(); ++i) {
            i64 d = orders_[i], s = strides_[i];
            r += static_cast<i64>((__int128)mod(c, d) * ((a / s) % d) % d) * s;
        }
        return static_cast<int>(r);
    }
    int element_order(int a) const {
        i64 o = 1;
        for (std::size_t i = 0; i < orders_.size(); ++i) {
            i64 d = orders_[i], x = (a / strides_[i]) % d;
            o = lcm64(o, d / std::gcd(x, d));
        }
        return static_cast<int>(o);
    }

    // --- quadratic structure -----------------------------------------------
    i64 level() const { return level_; }
    i64 exponent() const { return exponent_; }
    /// q(a) = q_residue(a) / level.
    i64 q_residue(int a) const { return qtab_[a]; }
    i64 b_residue(int a, int b) const { return mod(qtab_[add(a, b)] - qtab_[a] - qtab_[b], level_); }
    QmodZ q(int a) const { return QmodZ(qtab_[a], level_); }
    QmodZ b(int a, int b) const { return QmodZ(b_residue(a, b), level_); }
    QmodZ q(const Element& e) const { return q(index(e)); }
    QmodZ b(const Element& x, const Element& y) const { return b(index(x), index(y)); }
    bool isotropic(int a) const { return qtab_[a] == 0; }

    int signature() const { return sign_; }
    bool even_signature() const { return sign_ % 2 == 0; }
    /// Oddity: signature of the 2-part.
    int oddity() const { return oddity_; }
    bool square_class() const { return is_square(size_); }

    /// Sum over D of e(c q(γ)).
    CycloNumber gauss_sum(i64 c = 1) const {
        std::map<i64, Rational> counts;
        for (i64 r : qtab_) counts[mod(c * r, level_)] += 1;
        return CycloNumber::from_map(level_, std::move(counts));
    }

    /// Quadratic character χ_D(a) = (a/|D|) e((a-1) oddity/8), defined for even signature and gcd(a, N) = 1.
    int chi(i64 a) const {
        if (!even_signature()) throw Error(errc::odd_signature, "character requires even signature");
        if (std::gcd(mod(a, level_), level_) != 1) throw Error(errc::invalid_input, "character argument must be prime to the level");
        int kr = kronecker(a, size_);
        i64 phase = mod((a - 1) * oddity_, 8);
        if (phase != 0 && phase != 4) throw Error(errc::internal, "character value is not real");
        return phase == 0 ? kr : -kr;
    }

private:
    std::vector<i64> orders_, strides_;
    std::vector<QmodZ> q_gen_;
    std::vector<std::vector<QmodZ>> b_gen_;
    std::vector<GeneratorTag> tags_;
    std::string name_;
    i64 size_ = 1, level_ = 1, exponent_ = 1;
    int sign_ = 0, oddity_ = 0;
    std::vector<i64> qtab_;
    std::vector<int> neg_;

    static int milgram_signature(const CycloNumber& gauss, i64 order) {
        CycloNumber root = CycloNumber::sqrt_int(order);
        for (int s = 0; s < 8; ++s)
            if (gauss == root * CycloNumber::e_of(s, 8)) return s;
        throw Error(errc::invalid_input, "Gauss sum is not of Milgram type (degenerate form?)");
    }

    void build() {
        const std::size_t k = orders_.size();
        size_ = 1;
        for (i64 d : orders_) {
            size_ *= d;
            if (size_ > brute_force_bound().load())
                throw Error(errc::bound_exceeded, "group order exceeds the brute-force bound");
        }
        strides_.assign(k, 1);
        for (std::size_t i = k; i-- > 1;) strides_[i - 1] = strides_[i] * orders_[i];
        exponent_ = 1;
        for (i64 d : orders_) exponent_ = lcm64(exponent_, d);

        // Well-definedness on Z/d_i.
        i64 L0 = 1;
        for (std::size_t i = 0; i < k; ++i) {
            i64 d = orders_[i];
            if ((d * d) % q_gen_[i].den() != 0 || (2 * d) % q_gen_[i].den() != 0)
                throw Error(errc::invalid_input, "q(g) incompatible with the generator order");
            L0 = lcm64(L0, q_gen_[i].den());
            for (std::size_t j = 0; j < k; ++j) {
                if (b_gen_[i][j] != b_gen_[j][i]) throw Error(errc::invalid_input, "bilinear form must be symmetric");
                if (i != j && (d % b_gen_[i][j].den() != 0 || orders_[j] % b_gen_[i][j].den() != 0))
                    throw Error(errc::invalid_input, "b(g_i, g_j) incompatible with the generator orders");
                L0 = lcm64(L0, b_gen_[i][j].den());
            }
        }
        qtab_.assign(size_, 0);
        std::vector<i64> digits(k, 0);
        for (i64 idx = 0; idx < size_; ++idx) {
            __int128 acc = 0;
            for (std::size_t i = 0; i < k; ++i) {
                digits[i] = (idx / strides_[i]) % orders_[i];
                acc += (__int128)digits[i] * digits[i] % L0 * q_gen_[i].scaled(L0);
                for (std::size_t j = 0; j < i; ++j)
                    acc += (__int128)digits[i] * digits[j] % L0 * b_gen_[i][j].scaled(L0);
                acc %= L0;
            }
            qtab_[idx] = static_cast<i64>(acc % L0);
        }
        i64 g = L0;
        for (i64 r : qtab_) g = std::gcd(g, r);
        level_ = L0 / g;
        for (i64& r : qtab_) r /= g;

        neg_.assign(size_, 0);
        for (int a = 0; a < size_; ++a) neg_[a] = mul(-1, a);

        // Non-degeneracy: no nonzero γ with b(γ, g_j) = 0 for all j.
        for (int a = 1; a < size_; ++a) {
            bool radical = true;
            for (std::size_t j = 0; j < k && radical; ++j)
                if (b_residue(a, generator(static_cast<int>(j))) != 0) radical = false;
            if (radical) throw Error(errc::invalid_input, "bilinear form is degenerate");
        }

        sign_ = milgram_signature(gauss_sum(), size_);
        i64 two_part = 1;
        while (size_ % (2 * two_part) == 0) two_part *= 2;
        if (two_part == 1) {
            oddity_ = 0;
        } else {
            std::map<i64, Rational> counts;
            for (int a = 0; a < size_; ++a)
                if (mul(two_part, a) == 0) counts[qtab_[a]] += 1;
            oddity_ = milgram_signature(CycloNumber::from_map(level_, std::move(counts)), two_part);
        }
    }
};

// --- construction from symbols and Gram matrices ------------------------------

/// Smallest a > 0 with (2a/p) = sign.
inline i64 odd_generator_numerator(i64 p, int sign) {
    for (i64 a = 1; a < p; ++a)
        if (kronecker(2 * a, p) == sign) return a;
    throw Error(errc::internal, "no generator numerator");
}

inline DiscriminantForm from_jordan_symbol(const JordanSymbol& sym) {
    std::vector<i64> orders;
    std::vector<QmodZ> qg;
    std::vector<GeneratorTag> tags;
    std::vector<std::pair<int, int>> hyperbolic_pairs;  // indices with b = 1/q
    std::vector<i64> pair_scale;
    for (const auto& c : sym.components()) {
        if (c.p != 2) {
            for (int i = 0; i < c.rank; ++i) {
                int s = (i + 1 == c.rank) ? c.sign : 1;
                orders.push_back(c.q);
                qg.emplace_back(odd_generator_numerator(c.p, s), c.q);
                tags.push_back({c.q, false});
            }
        } else if (c.even) {
            for (int i = 0; i < c.rank / 2; ++i) {
                bool minus = (i + 1 == c.rank / 2) && c.sign < 0;
                int first = static_cast<int>(orders.size());
                for (int r = 0; r < 2; ++r) {
                    orders.push_back(c.q);
                    qg.push_back(minus ? QmodZ(1, c.q) : QmodZ(0, 1));
                    tags.push_back({c.q, false});
                }
                hyperbolic_pairs.emplace_back(first, first + 1);
                pair_scale.push_back(c.q);
            }
        } else {
            for (int ti : split_odd_component(c.t, c.rank, c.sign)) {
                orders.push_back(c.q);
                qg.emplace_back(ti, 2 * c.q);
                tags.push_back({c.q, true});
            }
        }
    }
    const std::size_t k = orders.size();
    std::vector<std::vector<QmodZ>> bg(k, std::vector<QmodZ>(k));
    for (std::size_t i = 0; i < k; ++i) bg[i][i] = 2 * qg[i];
    for (std::size_t h = 0; h < hyperbolic_pairs.size(); ++h) {
        auto [a, b] = hyperbolic_pairs[h];
        bg[a][b] = bg[b][a] = QmodZ(1, pair_scale[h]);
    }
    DiscriminantForm D(orders, qg, bg, tags, sym.str());
    if (D.signature() != sym.signature())
        throw Error(errc::internal, "signature of realized form disagrees with the symbol");
    return D;
}

inline DiscriminantForm from_jordan_symbol(std::string_view text) { return from_jordan_symbol(JordanSymbol::parse(text)); }

/// Discriminant form L'/L of an even lattice together with the map from dual coordinates to elements.
struct GramForm {
    IntMatrix gram;
    IntMatrix U;                   // unimodular with U * gram * V diagonal
    std::vector<std::size_t> kept;  // rows of U giving the nontrivial elementary divisors
    std::vector<i64> divisors;
    DiscriminantForm form;

    /// Element of L'/L represented by the dual vector gram^{-1} x.
    int element_of_dual(const std::vector<i64>& x) const {
        std::vector<i64> coeffs;
        for (std::size_t r = 0; r < kept.size(); ++r) {
            __int128 acc = 0;
            for (std::size_t j = 0; j < x.size(); ++j) acc += (__int128)U[kept[r]][j] * x[j];
            coeffs.push_back(mod(static_cast<i64>(acc % divisors[r]), divisors[r]));
        }
        return form.index(coeffs);
    }
};

/// Rational inverse of a nonsingular integer matrix.
inline std::vector<std::vector<Rational>> rational_inverse(const IntMatrix& A) {
    const std::size_t n = A.size();
    std::vector<std::vector<Rational>> M(n, std::vector<Rational>(2 * n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) M[i][j] = Rational(static_cast<long>(A[i][j]));
        M[i][n + i] = 1;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && sgn(M[piv][c]) == 0) ++piv;
        if (piv == n) throw Error(errc::invalid_input, "Gram matrix is singular");
        std::swap(M[c], M[piv]);
        Rational inv = 1 / M[c][c];
        for (auto& x : M[c]) x *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || sgn(M[r][c]) == 0) continue;
            Rational f = M[r][c];
            for (std::size_t j = 0; j < 2 * n; ++j) M[r][j] -= f * M[c][j];
        }
    }
    std::vector<std::vector<Rational>> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i].assign(M[i].begin() + n, M[i].end());
    return out;
}

inline QmodZ rational_mod1(const Rational& r) {
    if (!r.get_den().fits_slong_p()) throw Error(errc::bound_exceeded, "denominator too large");
    mpz_class n = r.get_num() % r.get_den();
    return QmodZ(n.get_si(), r.get_den().get_si());
}

inline GramForm from_gram(const IntMatrix& G) {
    const std::size_t n = G.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (G[i].size() != n) throw Error(errc::invalid_input, "Gram matrix must be square");
        if (mod(G[i][i], 2) != 0) throw Error(errc::invalid_input, "Gram matrix must have even diagonal");
        for (std::size_t j = 0; j < n; ++j)
            if (G[i][j] != G[j][i]) throw Error(errc::invalid_input, "Gram matrix must be symmetric");
    }
    GramForm out;
    out.gram = G;
    auto Ginv = rational_inverse(G);
    SmithForm snf = smith_normal_form(G);
    out.U = snf.U;
    IntMatrix Uinv_int;
    auto Uinv = rational_inverse(snf.U);
    for (std::size_t i = 0; i < n; ++i)
        if (snf.diag[i] == 0) throw Error(errc::invalid_input, "Gram matrix is singular");
    for (std::size_t i = 0; i < n; ++i)
        if (snf.diag[i] > 1) { out.kept.push_back(i); out.divisors.push_back(snf.diag[i]); }
    // Generator i is gram^{-1} x_i with x_i the i-th column of U^{-1}.
    const std::size_t k = out.kept.size();
    std::vector<std::vector<Rational>> xs(k, std::vector<Rational>(n));
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t j = 0; j < n; ++j) xs[r][j] = Uinv[j][out.kept[r]];
    auto pair = [&](std::size_t a, std::size_t b) {
        Rational acc = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) acc += xs[a][i] * Ginv[i][j] * xs[b][j];
        return acc;
    };
    std::vector<QmodZ> qg;
    std::vector<std::vector<QmodZ>> bg(k, std::vector<QmodZ>(k));
    for (std::size_t a = 0; a < k; ++a) {
        qg.push_back(rational_mod1(pair(a, a) / 2));
        for (std::size_t b = 0; b < k; ++b) bg[a][b] = rational_mod1(pair(a, b));
    }
    out.form = DiscriminantForm(out.divisors, qg, bg, {}, "");
    return out;
}

// --- subgroups ---------------------------------------------------------------

/// Sorted element list of the subgroup generated by gens.
inline std::vector<int> subgroup_generated(const DiscriminantForm& D, const std::vector<int>& gens) {
    std::vector<char> in(D.size(), 0);
    std::vector<int> elems{0};
    in[0] = 1;
    for (int g : gens) {
        if (in[g]) continue;
        std::vector<int> cur = elems;
        for (int x = g; !in[x]; x = D.add(x, g)) {
            for (int e : cur) {
                int y = D.add(e, x);
                if (!in[y]) { in[y] = 1; elems.push_back(y); }
            }
        }
    }
    std::sort(elems.begin(), elems.end());
    return elems;
}

/// Greedy generating set of a subgroup given by its elements (first elements not yet reached).
inline std::vector<int> generating_set(const DiscriminantForm& D, const std::vector<int>& elems) {
    std::vector<int> gens, span{0};
    std::vector<char> in(D.size(), 0);
    in[0] = 1;
    for (int e : elems) {
        if (in[e]) continue;
        gens.push_back(e);
        for (int x : subgroup_generated(D, gens)) in[x] = 1;
    }
    return gens;
}

/// Elements orthogonal to every element of the given subgroup.
inline std::vector<int> orthogonal_complement(const DiscriminantForm& D, const std::vector<int>& subgroup) {
    auto gens = generating_set(D, subgroup);
    std::vector<int> out;
    for (int a = 0; a < D.size(); ++a) {
        bool ok = true;
        for (int g : gens)
            if (D.b_residue(a, g) != 0) { ok = false; break; }
        if (ok) out.push_back(a);
    }
    return out;
}

/// A/H realized as a form with its own generators; section picks lexicographically smallest representatives.
struct Subquotient {
    DiscriminantForm form;
    std::vector<int> section;     // quotient index -> parent index
    std::vector<int> projection;  // parent index -> quotient index, -1 outside A
};

inline Subquotient realize_subquotient(const DiscriminantForm& D, const std::vector<int>& A, const std::vector<int>& H,
                                       const std::string& name = "") {
    std::vector<int> coset(D.size(), -1);
    std::vector<int> rep;
    for (int a : A) {
        if (coset[a] != -1) continue;
        int id = static_cast<int>(rep.size());
        rep.push_back(a);
        for (int h : H) {
            int y = D.add(a, h);
            check_internal(coset[y] == -1 || coset[y] == id, "subquotient: H not contained in A");
            coset[y] = id;
        }
    }
    const int m = static_cast<int>(rep.size());
    auto qadd = [&](int x, int y) { return coset[D.add(rep[x], rep[y])]; };
    auto qmul = [&](i64 c, int x) { return coset[D.mul(c, rep[x])]; };
    auto qorder = [&](int x) {
        int o = 1;
        for (int y = x; y != 0; y = qadd(y, x)) ++o;
        return o;
    };

    // Basis per prime: repeatedly take an element of maximal order modulo the span, lifted without order loss.
    std::vector<int> basis;
    std::vector<i64> basis_orders;
    for (auto [p, e] : (m > 1 ? factorize(m) : std::vector<std::pair<i64, int>>{})) {
        i64 pe = ipow(p, e);
        std::vector<int> part;
        for (int x = 0; x < m; ++x)
            if (qmul(pe, x) == 0) part.push_back(x);
        std::vector<char> in_span(m, 0);
        in_span[0] = 1;
        std::vector<int> span{0};
        while (span.size() < part.size()) {
            int best = -1;
            i64 best_ord = 0;
            for (int x : part) {
                if (in_span[x]) continue;
                i64 o = 1;
                for (int y = x; !in_span[y]; y = qmul(p, y)) o *= p;
                // o = order of x modulo span (y runs over p^j x).
                if (o > best_ord) { best_ord = o; best = x; }
            }
            int chosen = -1;
            for (int s : span) {
                int y = qadd(best, s);
                if (qorder(y) == best_ord) { chosen = y; break; }
            }
            check_internal(chosen != -1, "subquotient: no order-preserving lift");
            basis.push_back(chosen);
            basis_orders.push_back(best_ord);
            std::vector<int> grown;
            for (int s : span) {
                int y = s;
                for (i64 j = 0; j < best_ord; ++j, y = qadd(y, chosen)) {
                    check_internal(!in_span[y] || j == 0, "subquotient: sum not direct");
                    if (!in_span[y]) { in_span[y] = 1; grown.push_back(y); }
                }
            }
            span.insert(span.end(), grown.begin(), grown.end());
        }
    }
    const std::size_t k = basis.size();
    std::vector<QmodZ> qg;
    std::vector<std::vector<QmodZ>> bg(k, std::vector<QmodZ>(k));
    for (std::size_t i = 0; i < k; ++i) {
        qg.push_back(D.q(rep[basis[i]]));
        for (std::size_t j = 0; j < k; ++j) bg[i][j] = D.b(rep[basis[i]], rep[basis[j]]);
    }
    Subquotient out{DiscriminantForm(basis_orders, qg, bg, {}, name), {}, {}};
    const int qs = out.form.size();
    check_internal(qs == m, "subquotient: order mismatch");
    out.section.assign(qs, -1);
    out.projection.assign(D.size(), -1);
    std::vector<int> id_of(qs, -1);
    for (int idx = 0; idx < qs; ++idx) {
        Element e = out.form.element(idx);
        int id = 0;
        for (std::size_t i = 0; i < k; ++i) id = qadd(id, qmul(e.coeffs[i], basis[i]));
        id_of[idx] = id;
    }
    std::vector<int> idx_of(m, -1);
    for (int idx = 0; idx < qs; ++idx) {
        check_internal(idx_of[id_of[idx]] == -1, "subquotient: basis does not give a bijection");
        idx_of[id_of[idx]] = idx;
        out.section[idx] = rep[id_of[idx]];
    }
    for (int a = 0; a < D.size(); ++a)
        if (coset[a] != -1) out.projection[a] = idx_of[coset[a]];
    return out;
}

/// p-part D_{p^ν} with its embedding into D.
struct PPart {
    i64 p;
    DiscriminantForm form;
    std::vector<int> embedding;  // part index -> D index
};

inline std::vector<PPart> p_part_decompose(const DiscriminantForm& D) {
    std::vector<PPart> out;
    if (D.order() == 1) return out;
    for (auto [p, e] : factorize(D.order())) {
        i64 pe = ipow(p, e);
        std::vector<int> A;
        for (int a = 0; a < D.size(); ++a)
            if (D.mul(pe, a) == 0) A.push_back(a);
        auto sq = realize_subquotient(D, A, {0});
        out.push_back({p, std::move(sq.form), std::move(sq.section)});
    }
    return out;
}

/// D_c (kernel of c), D^c (image) and D^{c*}.
struct CSubgroups {
    std::vector<int> kernel, image, star;
};

inline CSubgroups subgroup_Dc(const DiscriminantForm& D, i64 c) {
    CSubgroups out;
    std::vector<char> img(D.size(), 0);
    for (int a = 0; a < D.size(); ++a) {
        if (D.mul(c, a) == 0) out.kernel.push_back(a);
        img[D.mul(c, a)] = 1;
    }
    for (int a = 0; a < D.size(); ++a)
        if (img[a]) out.image.push_back(a);
    auto gens = generating_set(D, out.kernel);
    const i64 N = D.level();
    for (int g = 0; g < D.size(); ++g) {
        bool ok = true;
        for (int a : gens)
            if (mod(c * D.q_residue(a) + D.b_residue(a, g), N) != 0) { ok = false; break; }
        if (ok) out.star.push_back(g);
    }
    check_internal(out.star.size() == out.image.size(), "|D^{c*}| differs from |D^c|");
    for (int s : out.star)
        check_internal(img[D.sub(s, out.star.front())] != 0, "D^{c*} is not a coset of D^c");
    return out;
}

/// 2-torsion representative of D^{c*}: from the Jordan tags when available, otherwise the first one found.
inline std::optional<int> find_xc(const DiscriminantForm& D, i64 c) {
    auto sub = subgroup_Dc(D, c);
    std::vector<char> in_star(D.size(), 0);
    for (int s : sub.star) in_star[s] = 1;
    if (!D.tags().empty()) {
        i64 c2 = 1;
        while (c != 0 && c % (2 * c2) == 0) c2 *= 2;
        int x = 0;
        if (c2 > 1)
            for (int i = 0; i < D.num_generators(); ++i)
                if (D.tags()[i].odd_two_adic && D.tags()[i].scale == c2) x = D.add(x, D.mul(c2 / 2, D.generator(i)));
        if (in_star[x] && D.mul(2, x) == 0) return x;
    }
    for (int s : sub.star)
        if (D.mul(2, s) == 0) return s;
    return std::nullopt;
}

/// q_c(γ) = c q(μ) + b(x_c, μ) for γ = x_c + c μ; checks independence of μ.
inline QmodZ q_c(const DiscriminantForm& D, i64 c, int gamma, int xc) {
    std::optional<i64> value;
    const i64 N = D.level();
    for (int mu = 0; mu < D.size(); ++mu) {
        if (D.add(xc, D.mul(c, mu)) != gamma) continue;
        i64 v = mod(c * D.q_residue(mu) + D.b_residue(xc, mu), N);
        if (value && *value != v) throw Error(errc::internal, "q_c depends on the choice of μ");
        value = v;
    }
    if (!value) throw Error(errc::invalid_input, "γ is not of the form x_c + cμ");
    return QmodZ(*value, N);
}

/// Order of b(x, y) in Q/Z.
inline i64 pairing_order(const DiscriminantForm& D, int x, int y) { return D.b(x, y).den(); }

/// Orthogonal splitting into blocks of rank one or two (rank two only for even 2-adic pieces).
inline std::vector<DiscriminantForm> orthogonal_blocks(const DiscriminantForm& D) {
    std::vector<DiscriminantForm> out;
    for (const auto& part : p_part_decompose(D)) {
        DiscriminantForm P = part.form;
        while (P.order() > 1) {
            int top = 1;
            for (int a = 0; a < P.size(); ++a) top = std::max(top, P.element_order(a));
            std::vector<int> gens;
            for (int a = 0; a < P.size() && gens.empty(); ++a)
                if (P.element_order(a) == top && pairing_order(P, a, a) == top) gens = {a};
            if (gens.empty()) {
                int x = -1;
                for (int a = 0; a < P.size() && x < 0; ++a)
                    if (P.element_order(a) == top) x = a;
                for (int y = 0; y < P.size() && gens.empty(); ++y)
                    if (P.element_order(y) == top && pairing_order(P, x, y) == top) gens = {x, y};
                check_internal(!gens.empty(), "orthogonal_blocks: no hyperbolic partner");
            }
            auto block = subgroup_generated(P, gens);
            out.push_back(realize_subquotient(P, block, {0}).form);
            auto rest = orthogonal_complement(P, block);
            check_internal(rest.size() * block.size() == static_cast<std::size_t>(P.order()), "orthogonal_blocks: block is degenerate");
            P = realize_subquotient(P, rest, {0}).form;
        }
    }
    return out;
}

// --- element counts ----------------------------------------------------------

/// Brute-force number of γ with q(γ) = j/den mod 1.
inline i64 count_norm_brute(const DiscriminantForm& D, i64 j, i64 den) {
    QmodZ target(j, den);
    i64 n = 0;
    for (int a = 0; a < D.size(); ++a)
        if (D.q(a) == target) ++n;
    return n;
}

/// Closed-form number of elements of norm j/p, j/2 or j/4 in p^{εn}, 2_II^{εn}, 2_t^{εn}.
inline i64 count_norm(const JordanSymbol& sym, i64 j) {
    if (sym.components().size() != 1 || sym.components()[0].k != 1)
        throw Error(errc::no_closed_form, "count_norm needs a single component of prime scale");
    const auto& c = sym.components()[0];
    const i64 n = c.rank, eps = c.sign;
    if (c.p != 2) {
        const i64 p = c.p;
        const i64 leg = kronecker(-1, p);
        if (n % 2 == 0) {
            i64 delta = mod(j, p) == 0 ? 1 : 0;
            return ipow(p, n - 1) + eps * ipow(leg, n / 2) * (p * delta - 1) * ipow(p, (n - 2) / 2);
        }
        return ipow(p, n - 1) + eps * ipow(leg, (n - 1) / 2) * kronecker(2, p) * kronecker(j, p) * ipow(p, (n - 1) / 2);
    }
    if (c.even) {
        // 2^{n-1} + ε(-1)^j 2^{(n-2)/2}
        return ipow(2, n - 1) + eps * (mod(j, 2) ? -1 : 1) * ipow(2, (n - 2) / 2);
    }
    const i64 t = c.t, jj = mod(j, 4);
    // Counts carry a factor 2^{n-2}, which is fractional for n = 1; work in units of 1/2.
    if (n % 2 == 1) {
        i64 base2 = ipow(2, n - 1);  // 2 * 2^{n-2}
        i64 corr2 = ipow(2, (n - 1) / 2) * eps * kronecker(t, 2);  // 2 * ε(t/2) 2^{(n-3)/2}
        i64 twist = ((t - 1) / 2) % 2 == 0 ? 1 : -1;
        i64 v2 = 0;
        switch (jj) {
            case 0: v2 = base2 + corr2; break;
            case 2: v2 = base2 - corr2; break;
            case 1: v2 = base2 + corr2 * twist; break;
            default: v2 = base2 - corr2 * twist; break;
        }
        return v2 / 2;
    }
    i64 base = ipow(2, n - 2);
    i64 k2 = kronecker(t - 1, 2) * ipow(2, (n - 2) / 2) * eps;
    i64 d0 = mod(t, 4) == 0 ? 1 : 0, d2 = mod(t + 2, 4) == 0 ? 1 : 0;
    switch (jj) {
        case 0: return base + d0 * k2;
        case 2: return base - d0 * k2;
        case 1: return base + d2 * k2;
        default: return base - d2 * k2;
    }
}

// --- isomorphism invariants ----------------------------------------------------

/// Invariants (order, level, signature, p-part orders, Gauss sums at c | 2N) used to recognize forms.
struct IsoInvariant {
    i64 order, level, exponent;
    int signature;
    std::vector<i64> part_orders;
    std::vector<CycloNumber> gauss;
    friend bool operator==(const IsoInvariant&, const IsoInvariant&) = default;
};

inline IsoInvariant iso_invariant(const DiscriminantForm& D) {
    IsoInvariant inv{D.order(), D.level(), D.exponent(), D.signature(), {}, {}};
    for (const auto& part : p_part_decompose(D)) inv.part_orders.push_back(part.form.order());
    for (i64 c = 1; c <= 2 * D.level(); ++c)
        if ((2 * D.level()) % c == 0) inv.gauss.push_back(D.gauss_sum(c));
    return inv;
}

}  // namespace weilinv
