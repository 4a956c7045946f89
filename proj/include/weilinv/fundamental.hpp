#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fqm.hpp"
#include "induct.hpp"
#include "jordan.hpp"
#include "weil.hpp"

namespace weilinv {

/// Minimal p-adic form with a one-dimensional invariant space, keyed by (p, square class, signature).
struct FundamentalDescriptor {
    enum Row { trivial, odd_minus_four, odd_three, two_minus_four, two_four, two_four_eight } row = trivial;
    i64 p = 1;
    bool square = true;
    int signature = 0;
    JordanSymbol symbol;

    i64 order() const { return symbol.order(); }
    i64 level() const { return symbol.level(); }
    i64 exponent() const {
        i64 e = 1;
        for (const auto& c : symbol.components()) e = std::max(e, c.q);
        return e;
    }
    /// Rows whose generator is the projection of e^0 rather than of an element of order equal to the level.
    bool uses_zero() const { return row == trivial || row == odd_minus_four || row == two_minus_four; }
};

/// Looks up D_p^{x,s}; nullopt when the combination has no fundamental form.
inline std::optional<FundamentalDescriptor> find_fundamental_form(i64 p, bool square, int s) {
    if (!is_prime(p)) throw Error(errc::invalid_input, "fundamental forms are indexed by primes");
    s = static_cast<int>(mod(s, 8));
    if (s % 2) return std::nullopt;
    FundamentalDescriptor d;
    d.p = p;
    d.square = square;
    d.signature = s;
    auto with = [&](FundamentalDescriptor::Row row, const std::string& sym) -> std::optional<FundamentalDescriptor> {
        d.row = row;
        d.symbol = JordanSymbol::parse(sym);
        if (d.symbol.signature() != s) throw Error(errc::internal, "fundamental symbol " + sym + " has the wrong signature");
        return d;
    };
    const std::string P = std::to_string(p);
    if (square && s == 0) return with(FundamentalDescriptor::trivial, "");
    if (p != 2) {
        if (square) return s == 4 ? with(FundamentalDescriptor::odd_minus_four, P + "^-4") : std::nullopt;
        for (const char* sign : {"+", "-"}) {
            auto sym = P + "^" + sign + "3";
            if (JordanSymbol::parse(sym).signature() == s) return with(FundamentalDescriptor::odd_three, sym);
        }
        return std::nullopt;
    }
    if (square) {
        if (s == 4) return with(FundamentalDescriptor::two_minus_four, "2_II^-4");
        return with(FundamentalDescriptor::two_four, "2_" + std::to_string(s) + "^+2.4_II^+2");
    }
    const int t = static_cast<int>(mod(s - 1, 8));
    const char* eps = kronecker(t, 2) > 0 ? "+" : "-";
    return with(FundamentalDescriptor::two_four_eight, "2_1^+1.4_" + std::to_string(t) + "^" + eps + "1.8_II^+2");
}

/// D_p^{x,s}; throws not_fundamental when no fundamental form exists.
inline FundamentalDescriptor fundamental_form(i64 p, bool square, int s) {
    auto d = find_fundamental_form(p, square, s);
    if (!d)
        throw Error(errc::not_fundamental, "no fundamental form for p = " + std::to_string(p) + ", " +
                                               (square ? "square" : "non-square") + ", signature " + std::to_string(mod(s, 8)));
    return *d;
}

/// Rescales v to coprime integers with positive least-index nonzero coefficient; requires v to be a multiple of a rational vector.
inline GroupAlgebraVector normalize_integer(const GroupAlgebraVector& v) {
    const auto supp = v.support();
    if (supp.empty()) return v;
    const CycloNumber pivot = v[supp.front()];
    std::vector<Rational> r(v.size());
    mpz_class den = 1, num = 0;
    for (int i : supp) {
        auto q = (v[i] / pivot).as_rational();
        if (!q) throw Error(errc::internal, "vector is not a multiple of a rational vector");
        r[i] = *q;
        den = lcm(den, mpz_class(q->get_den()));
    }
    for (int i : supp) {
        r[i] *= den;
        num = gcd(num, mpz_class(r[i].get_num()));
    }
    GroupAlgebraVector out(v.size());
    for (int i : supp) {
        Rational c = r[i] / num;
        c.canonicalize();
        out[i] = CycloNumber(c);
    }
    return out;
}

/// Exact rank over the cyclotomic numbers by Gaussian elimination (rational fast path).
inline std::size_t exact_rank(const std::vector<GroupAlgebraVector>& vs) {
    if (vs.empty()) return 0;
    const std::size_t n = vs.front().size();
    bool rational = true;
    for (const auto& v : vs)
        for (const auto& c : v.coeffs)
            if (!c.is_zero() && !c.as_rational()) { rational = false; break; }
    auto eliminate = [&]<typename T>(std::vector<std::vector<T>> rows, auto is_zero) {
        std::size_t rank = 0;
        for (std::size_t col = 0; col < n && rank < rows.size(); ++col) {
            std::size_t piv = rank;
            while (piv < rows.size() && is_zero(rows[piv][col])) ++piv;
            if (piv == rows.size()) continue;
            std::swap(rows[rank], rows[piv]);
            const T inv_p = T(1) / rows[rank][col];
            for (std::size_t r = rank + 1; r < rows.size(); ++r) {
                if (is_zero(rows[r][col])) continue;
                const T f = rows[r][col] * inv_p;
                for (std::size_t c = col; c < n; ++c)
                    if (!is_zero(rows[rank][c])) rows[r][c] = rows[r][c] - T(f * rows[rank][c]);
            }
            ++rank;
        }
        return rank;
    };
    if (rational) {
        std::vector<std::vector<Rational>> rows;
        for (const auto& v : vs) {
            std::vector<Rational> row(n);
            for (std::size_t i = 0; i < n; ++i)
                if (!v[i].is_zero()) row[i] = *v[i].as_rational();
            rows.push_back(std::move(row));
        }
        return eliminate(std::move(rows), [](const Rational& x) { return sgn(x) == 0; });
    }
    std::vector<std::vector<CycloNumber>> rows;
    for (const auto& v : vs) rows.push_back(v.coeffs);
    return eliminate(std::move(rows), [](const CycloNumber& x) { return x.is_zero(); });
}

/// Greedy maximal linearly independent subfamily, in input order.
inline std::vector<GroupAlgebraVector> independent_subset(const std::vector<GroupAlgebraVector>& vs) {
    std::vector<GroupAlgebraVector> out;
    for (const auto& v : vs) {
        out.push_back(v);
        if (exact_rank(out) < out.size()) out.pop_back();
    }
    return out;
}

/// Integer-normalized inv(e^γ), γ = 0 or the first isotropic element of order equal to the level.
inline std::pair<int, GroupAlgebraVector> generic_fundamental_vector(const DiscriminantForm& Q, bool use_zero) {
    int gamma = 0;
    if (!use_zero) {
        gamma = -1;
        for (int g : isotropic_indices(Q))
            if (Q.element_order(g) == Q.level()) { gamma = g; break; }
        check_internal(gamma >= 0, "no isotropic element of order equal to the level");
    }
    auto v = normalize_integer(inv(Q, gamma));
    check_internal(!v.is_zero(), "projection of the reference element vanishes");
    return {gamma, std::move(v)};
}

struct FundamentalInvariant {
    FundamentalDescriptor descriptor;
    DiscriminantForm form;
    int gamma = 0;                 // reference element (0 for the e^0 rows)
    GroupAlgebraVector vector;     // coprime integers, least-index coefficient positive
    std::vector<int> plus_set, minus_set;  // M^± where the row has them
};

namespace detail {

inline std::vector<int> isotropic_of_order(const DiscriminantForm& D, i64 order) {
    std::vector<int> out;
    for (int g : isotropic_indices(D))
        if (D.element_order(g) == order) out.push_back(g);
    return out;
}

/// M^± for p^{ε3}: pairing classes M(γ)_j selected by εχ(j), plus the multiples jγ selected by χ(j).
inline void odd_three_sets(const FundamentalDescriptor& d, const DiscriminantForm& D, int gamma, FundamentalInvariant& out) {
    const i64 p = d.p;
    const int eps = d.symbol.components().front().sign * kronecker(2, p);
    for (int mu : isotropic_indices(D)) {
        if (mu == 0) continue;
        const i64 j = D.b_residue(mu, gamma);
        if (j == 0) continue;
        (eps * D.chi(j) > 0 ? out.plus_set : out.minus_set).push_back(mu);
    }
    for (i64 j = 1; j < p; ++j) (D.chi(j) > 0 ? out.plus_set : out.minus_set).push_back(D.mul(j, gamma));
}

/// M^± for 2_t^{+2}4_II^{+2}: M(γ)_j with εχ(j) = +1, then +α and +γ, where q_2(α - γ) = 0.
inline void two_four_sets(const FundamentalDescriptor& d, const DiscriminantForm& D, int gamma, FundamentalInvariant& out) {
    const int t = d.symbol.components().front().t;
    const int eps = t == 6 ? 1 : -1;
    auto xc = find_xc(D, 2);
    check_internal(xc.has_value(), "no x_2 for 2_t^{+2}4_II^{+2}");
    const auto M = isotropic_of_order(D, 4);
    int alpha = -1;
    for (int mu : M) {
        if (D.b_residue(mu, gamma) != 2) continue;
        auto star = subgroup_Dc(D, 2).star;
        const int diff = D.sub(mu, gamma);
        if (!std::binary_search(star.begin(), star.end(), diff)) continue;
        if (q_c(D, 2, diff, *xc).num() == 0) { alpha = mu; break; }
    }
    check_internal(alpha >= 0, "no α with q_2(α - γ) = 0");
    for (int mu : M) {
        const i64 j = D.b_residue(mu, gamma);
        if (j % 2) (eps * D.chi(j) > 0 ? out.plus_set : out.minus_set).push_back(mu);
    }
    out.plus_set.push_back(alpha);
    out.plus_set.push_back(gamma);
    out.minus_set.push_back(D.neg(alpha));
    out.minus_set.push_back(D.neg(gamma));
}

/// M^± for 2_1^{+1}4_t^ε8_II^{+2} in coordinates with q(a,b,c,d) = a²/4 + tb²/8 + cd/8.
inline void two_four_eight_sets(const FundamentalDescriptor& d, const DiscriminantForm& D, FundamentalInvariant& out) {
    const int t = d.symbol.components()[1].t;
    const int eps = (t == 5 || t == 7) ? 1 : -1;
    const int gamma = D.index(std::vector<i64>{0, 0, 1, 0});
    out.gamma = gamma;
    const std::vector<int> special = {D.index(std::vector<i64>{1, 2, 1, 2}), D.index(std::vector<i64>{1, 0, 1, 6}),
                                      D.index(std::vector<i64>{0, 2, 1, 4}), gamma};
    for (int mu : isotropic_of_order(D, 8)) {
        const i64 j = D.b_residue(mu, gamma);
        if (j % 2) (eps * D.chi(j) > 0 ? out.plus_set : out.minus_set).push_back(mu);
    }
    for (i64 j = 1; j < 8; j += 2)
        for (int s : special) (D.chi(j) > 0 ? out.plus_set : out.minus_set).push_back(D.mul(j, s));
}

}  // namespace detail

/// Generator of C[D_p^{x,s}]^Γ computed by projection and checked against the explicit M^± description.
inline FundamentalInvariant fundamental_invariant(const FundamentalDescriptor& d) {
    FundamentalInvariant out{d, from_jordan_symbol(d.symbol), 0, {}, {}, {}};
    const DiscriminantForm& D = out.form;
    if (dim_invariants(D) != 1) throw Error(errc::internal, "fundamental form " + d.symbol.str() + " has dim != 1");
    auto [gamma, v] = generic_fundamental_vector(D, d.uses_zero());
    out.gamma = gamma;
    out.vector = std::move(v);

    GroupAlgebraVector explicit_v(D.size());
    switch (d.row) {
        case FundamentalDescriptor::trivial:
            explicit_v[0] = CycloNumber(1);
            break;
        case FundamentalDescriptor::odd_minus_four:
        case FundamentalDescriptor::two_minus_four: {
            const i64 zero_coef = d.row == FundamentalDescriptor::odd_minus_four ? d.p - 1 : 1;
            explicit_v[0] = CycloNumber(static_cast<long>(zero_coef));
            for (int mu : detail::isotropic_of_order(D, D.level())) explicit_v[mu] = CycloNumber(-1);
            break;
        }
        case FundamentalDescriptor::odd_three: detail::odd_three_sets(d, D, gamma, out); break;
        case FundamentalDescriptor::two_four: detail::two_four_sets(d, D, gamma, out); break;
        case FundamentalDescriptor::two_four_eight: detail::two_four_eight_sets(d, D, out); break;
    }
    for (int mu : out.plus_set) explicit_v[mu] += CycloNumber(1);
    for (int mu : out.minus_set) explicit_v[mu] -= CycloNumber(1);
    std::sort(out.plus_set.begin(), out.plus_set.end());
    std::sort(out.minus_set.begin(), out.minus_set.end());
    explicit_v = normalize_integer(explicit_v);
    if (explicit_v != out.vector)
        throw Error(errc::internal, "explicit and projected invariants differ for " + d.symbol.str());
    return out;
}

/// Recognition by (order, level, exponent, signature), which determines the fundamental forms.
inline bool is_fundamental_quotient(const DiscriminantForm& Q, const FundamentalDescriptor& d) {
    return Q.order() == d.order() && Q.level() == d.level() && Q.exponent() == d.exponent() &&
           Q.signature() == d.signature;
}

/// One generator ↑_H(i) of the main theorem.
struct InducedVector {
    IsotropicSubgroup subgroup;
    GroupAlgebraVector vector;
};

/// Lifts of the fundamental invariant along every isotropic H with H^⊥/H fundamental; D of prime-power level.
/// Empty for odd signature.
inline std::vector<InducedVector> induced_generating_set(const DiscriminantForm& D) {
    if (!D.even_signature()) return {};
    const auto primes = prime_divisors(D.order());
    if (primes.size() > 1) throw Error(errc::invalid_input, "induced_generating_set needs prime-power level; use invariant_basis");
    const i64 p = primes.empty() ? 2 : primes.front();
    auto desc = find_fundamental_form(p, D.square_class(), D.signature());
    std::vector<InducedVector> out;
    if (!desc) return out;
    for (const auto& H : isotropic_subgroups(D)) {
        if (static_cast<i64>(H.order() * H.order()) * desc->order() != D.order()) continue;
        auto Q = quotient(D, H);
        if (!is_fundamental_quotient(Q.form, *desc)) continue;
        auto [gamma, v] = generic_fundamental_vector(Q.form, desc->uses_zero());
        out.push_back({H, lift_up(D, Q, v)});
    }
    return out;
}

/// Tensor products of one vector per p-part, re-indexed into D along the part embeddings.
inline std::vector<GroupAlgebraVector> tensor_combine(const DiscriminantForm& D, const std::vector<PPart>& parts,
                                                      const std::vector<std::vector<GroupAlgebraVector>>& bases) {
    check_internal(parts.size() == bases.size(), "one basis per part expected");
    std::vector<std::pair<int, CycloNumber>> seed{{0, CycloNumber(1)}};
    std::vector<std::vector<std::pair<int, CycloNumber>>> current{seed};
    for (std::size_t i = 0; i < parts.size(); ++i) {
        std::vector<std::vector<std::pair<int, CycloNumber>>> next;
        for (const auto& partial : current)
            for (const auto& v : bases[i]) {
                std::vector<std::pair<int, CycloNumber>> prod;
                for (const auto& [x, cx] : partial)
                    for (int y : v.support()) prod.emplace_back(D.add(x, parts[i].embedding[y]), cx * v[y]);
                next.push_back(std::move(prod));
            }
        current = std::move(next);
    }
    std::vector<GroupAlgebraVector> out;
    for (const auto& terms : current) {
        GroupAlgebraVector w(D.size());
        for (const auto& [x, c] : terms) w[x] += c;
        out.push_back(std::move(w));
    }
    return out;
}

/// Invariant basis of C[D]^Γ from the main theorem on each p-part, combined by tensor products.
inline std::vector<GroupAlgebraVector> invariant_basis(const DiscriminantForm& D) {
    if (!D.even_signature()) return {};
    const auto parts = p_part_decompose(D);
    if (parts.size() <= 1) {
        std::vector<GroupAlgebraVector> vs;
        for (auto& iv : induced_generating_set(D)) vs.push_back(std::move(iv.vector));
        return independent_subset(vs);
    }
    std::vector<std::vector<GroupAlgebraVector>> bases;
    for (const auto& part : parts) bases.push_back(invariant_basis(part.form));
    return tensor_combine(D, parts, bases);
}

}  // namespace weilinv
