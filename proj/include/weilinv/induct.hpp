#pragma once

#include <deque>
#include <set>
#include <vector>

#include "errors.hpp"
#include "fqm.hpp"
#include "weil.hpp"

namespace weilinv {

/// Isotropic subgroup H with its elements, a generating set and H^⊥ (all sorted ascending).
struct IsotropicSubgroup {
    std::vector<int> elements;
    std::vector<int> generators;
    std::vector<int> perp;

    std::size_t order() const { return elements.size(); }
};

inline IsotropicSubgroup make_isotropic_subgroup(const DiscriminantForm& D, const std::vector<int>& gens) {
    IsotropicSubgroup H;
    H.elements = subgroup_generated(D, gens);
    for (int h : H.elements)
        if (!D.isotropic(h)) throw Error(errc::invalid_input, "subgroup is not isotropic");
    H.generators = generating_set(D, H.elements);
    H.perp = orthogonal_complement(D, H.elements);
    check_internal(H.perp.size() * H.elements.size() == static_cast<std::size_t>(D.order()), "|H^⊥||H| differs from |D|");
    return H;
}

/// Isotropic elements as coefficient tuples.
inline std::vector<Element> isotropic_elements(const DiscriminantForm& D) {
    std::vector<Element> out;
    for (int g : isotropic_indices(D)) out.push_back(D.element(g));
    return out;
}

/// All isotropic subgroups of order at most max_order (0 = unlimited), each once, sorted by (order, elements).
inline std::vector<IsotropicSubgroup> isotropic_subgroups(const DiscriminantForm& D, i64 max_order = 0) {
    if (D.order() > brute_force_bound().load()) throw Error(errc::bound_exceeded, "group order exceeds the brute-force bound");
    const auto I = isotropic_indices(D);
    std::set<std::vector<int>> seen{{0}};
    std::deque<std::vector<int>> queue{{0}};
    while (!queue.empty()) {
        std::vector<int> H = std::move(queue.front());
        queue.pop_front();
        std::vector<char> in(D.size(), 0);
        for (int h : H) in[h] = 1;
        const auto gens = generating_set(D, H);
        for (int x : I) {
            if (in[x]) continue;
            bool orth = true;
            for (int g : gens)
                if (D.b_residue(x, g) != 0) { orth = false; break; }
            if (!orth) continue;
            std::vector<int> ext = gens;
            ext.push_back(x);
            auto K = subgroup_generated(D, ext);
            if (max_order && static_cast<i64>(K.size()) > max_order) continue;
            if (seen.insert(K).second) queue.push_back(std::move(K));
        }
    }
    std::vector<std::vector<int>> all(seen.begin(), seen.end());
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    std::vector<IsotropicSubgroup> out;
    for (const auto& elems : all) {
        IsotropicSubgroup H;
        H.elements = elems;
        H.generators = generating_set(D, elems);
        H.perp = orthogonal_complement(D, elems);
        out.push_back(std::move(H));
    }
    return out;
}

/// a(p, γ): number of isotropic subgroups of order p inside γ^⊥.
inline i64 count_isotropic_in_perp(const DiscriminantForm& D, int gamma, i64 p) {
    i64 n = 0;
    for (const auto& H : isotropic_subgroups(D, p)) {
        if (static_cast<i64>(H.order()) != p) continue;
        bool inside = true;
        for (int h : H.elements)
            if (D.b_residue(h, gamma) != 0) { inside = false; break; }
        if (inside) ++n;
    }
    return n;
}

/// H^⊥/H with section (smallest coset representatives) and projection.
struct QuotientForm {
    DiscriminantForm form;
    std::vector<int> section;     // quotient index -> representative in D
    std::vector<int> projection;  // D index -> quotient index, -1 outside H^⊥
    IsotropicSubgroup subgroup;
};

inline QuotientForm quotient(const DiscriminantForm& D, const IsotropicSubgroup& H) {
    for (int h : H.elements)
        if (!D.isotropic(h)) throw Error(errc::invalid_input, "quotient needs an isotropic subgroup");
    auto sq = realize_subquotient(D, H.perp, H.elements);
    QuotientForm Q{std::move(sq.form), std::move(sq.section), std::move(sq.projection), H};
    check_internal(Q.form.order() * static_cast<i64>(H.order() * H.order()) == D.order(), "|H^⊥/H| differs from |D|/|H|^2");
    for (int a : H.perp)
        check_internal(Q.form.q(Q.projection[a]) == D.q(a), "quotient form does not restrict q");
    check_internal(Q.form.signature() == D.signature(), "quotient changes the signature");
    return Q;
}

/// ↑_H^D: e^{γ+H} -> sum_{μ in H} e^{γ+μ}.
inline GroupAlgebraVector lift_up(const DiscriminantForm& D, const QuotientForm& Q, const GroupAlgebraVector& v) {
    check_internal(static_cast<i64>(v.size()) == Q.form.order(), "vector does not live on the quotient");
    GroupAlgebraVector w(D.size());
    for (int a : Q.subgroup.perp) {
        const auto& c = v[Q.projection[a]];
        if (!c.is_zero()) w[a] = c;
    }
    return w;
}

/// ↓_H^D: e^γ -> e^{γ+H} for γ in H^⊥, 0 otherwise.
inline GroupAlgebraVector descend(const DiscriminantForm& D, const QuotientForm& Q, const GroupAlgebraVector& v) {
    check_internal(static_cast<i64>(v.size()) == D.order(), "vector does not live on D");
    GroupAlgebraVector w(Q.form.size());
    for (int a : Q.subgroup.perp)
        if (!v[a].is_zero()) w[Q.projection[a]] += v[a];
    return w;
}

}  // namespace weilinv
