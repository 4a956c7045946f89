#include <gtest/gtest.h>

#include <random>

#include "common.hpp"

using namespace weilinv;
using testkit::random_form;
using testkit::random_vector;

namespace {

GroupAlgebraVector basis(i64 n, int g) { return GroupAlgebraVector::basis(static_cast<std::size_t>(n), g); }

const std::vector<std::string> battery = {"",        "3^-2",    "5^+2",   "3^-4",   "2_II^+2", "2_II^-4", "2_0^+2",
                                          "4_II^+2", "2_II^+4", "3^+3",   "2_2^+2.4_II^+2", "2_II^+2.3^-2", "9^+1",
                                          "2_1^+1.4_1^+1.8_II^+2"};

/// Image of an isotropic subgroup K ⊇ H in H^⊥/H.
IsotropicSubgroup image_in_quotient(const QuotientForm& Q, const IsotropicSubgroup& K) {
    std::vector<int> gens;
    for (int k : K.generators) gens.push_back(Q.projection[k]);
    return make_isotropic_subgroup(Q.form, gens);
}

bool contains(const IsotropicSubgroup& K, const IsotropicSubgroup& H) {
    return std::includes(K.elements.begin(), K.elements.end(), H.elements.begin(), H.elements.end());
}

}  // namespace

TEST(Induct, IsotropicElements) {
    EXPECT_EQ(isotropic_elements(from_jordan_symbol("")).size(), 1u);
    EXPECT_EQ(isotropic_elements(from_jordan_symbol("2_II^-4")).size(), 6u);
    EXPECT_EQ(count_norm(JordanSymbol::parse("2_II^-4"), 0), 6);
    for (int t : {1, 3, 5, 7}) {
        auto D = from_jordan_symbol("2_1^+1.4_" + std::to_string(t) + ((t == 1 || t == 7) ? "^+1" : "^-1") + ".8_II^+2");
        EXPECT_EQ(isotropic_elements(D).size(), 64u) << t;
    }
    auto D = from_jordan_symbol("3^-2");
    const auto I = isotropic_elements(D);
    EXPECT_EQ(I.front(), D.element(0));
    for (const auto& x : I) EXPECT_TRUE(D.q(x).is_zero());
}

TEST(Induct, IsotropicSubgroupExamples) {
    auto T = isotropic_subgroups(from_jordan_symbol(""));
    ASSERT_EQ(T.size(), 1u);
    EXPECT_EQ(T[0].elements, std::vector<int>{0});

    for (const char* s : {"3^-2", "5^+2", "7^-2"}) {
        auto D = from_jordan_symbol(s);
        auto all = isotropic_subgroups(D);
        EXPECT_EQ(all.front().elements, std::vector<int>{0});
        int maximal = 0;
        for (const auto& H : all) maximal += static_cast<i64>(H.order()) == D.level();
        EXPECT_EQ(maximal, 2) << s;
        EXPECT_EQ(all.size(), 3u) << s;
    }

    auto D = from_jordan_symbol("3^-4");
    for (int g : isotropic_indices(D))
        if (g != 0) { EXPECT_EQ(count_isotropic_in_perp(D, g, 3), 1) << g; }
}

TEST(Induct, SubgroupsAreIsotropicAndDistinct) {
    for (const auto& s : battery) {
        auto D = from_jordan_symbol(s);
        const auto all = isotropic_subgroups(D);
        std::set<std::vector<int>> seen;
        for (const auto& H : all) {
            EXPECT_TRUE(seen.insert(H.elements).second) << s;
            EXPECT_EQ(H.perp.size() * H.order(), static_cast<std::size_t>(D.order())) << s;
            for (int h : H.elements) {
                EXPECT_TRUE(D.isotropic(h)) << s;
                for (int k : H.elements) EXPECT_EQ(D.b_residue(h, k), 0) << s;
            }
            EXPECT_EQ(subgroup_generated(D, H.generators), H.elements) << s;
        }
        // Brute force: subgroups generated by pairs of isotropic elements that are isotropic all lie in the list.
        const auto I = isotropic_indices(D);
        if (I.size() > 40) continue;
        for (int x : I)
            for (int y : I) {
                auto K = subgroup_generated(D, {x, y});
                bool iso = true;
                for (int k : K) iso = iso && D.isotropic(k);
                if (iso) { EXPECT_TRUE(seen.count(K)) << s; }
            }
    }
}

TEST(Induct, SubgroupBound) {
    const auto saved = brute_force_bound().load();
    brute_force_bound() = 50;
    try {
        isotropic_subgroups(from_jordan_symbol("3^-4"));
        ADD_FAILURE() << "bound ignored";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), std::string(errc::bound_exceeded));
    }
    brute_force_bound() = saved;
}

TEST(Induct, QuotientExamples) {
    auto D = from_jordan_symbol("3^-2");
    auto trivial = quotient(D, make_isotropic_subgroup(D, {}));
    EXPECT_EQ(trivial.form.order(), D.order());
    for (int g = 0; g < D.size(); ++g) EXPECT_EQ(trivial.form.q(trivial.projection[g]), D.q(g));

    auto H2 = from_jordan_symbol("2_II^+2");
    for (const auto& H : isotropic_subgroups(H2))
        if (H.order() == 2) { EXPECT_EQ(quotient(H2, H).form.order(), 1); }

    auto P = from_jordan_symbol("3^-4");
    for (const auto& H : isotropic_subgroups(P, 3)) {
        if (H.order() != 3) continue;
        auto Q = quotient(P, H);
        EXPECT_EQ(Q.form.order(), 9);
        EXPECT_EQ(Q.form.signature(), 4);
        EXPECT_EQ(Q.form.gauss_sum(), CycloNumber::e_of(4, 8) * CycloNumber(3));
    }

    int non_iso = -1;
    for (int g = 0; g < D.size() && non_iso < 0; ++g)
        if (!D.isotropic(g)) non_iso = g;
    EXPECT_THROW(make_isotropic_subgroup(D, {non_iso}), Error);
}

TEST(Induct, QuotientInvariants) {
    for (const auto& s : battery) {
        auto D = from_jordan_symbol(s);
        for (const auto& H : isotropic_subgroups(D)) {
            auto Q = quotient(D, H);
            EXPECT_EQ(Q.form.order() * static_cast<i64>(H.order() * H.order()), D.order()) << s;
            EXPECT_EQ(Q.form.signature(), D.signature()) << s;
            for (int a : H.perp) EXPECT_EQ(Q.form.q(Q.projection[a]), D.q(a)) << s;
            for (int x = 0; x < Q.form.size(); ++x) {
                const int rep = Q.section[x];
                EXPECT_EQ(Q.projection[rep], x) << s;
                // Smallest representative of its coset.
                for (int h : H.elements) EXPECT_LE(rep, D.add(rep, h)) << s;
            }
        }
    }
}

TEST(Induct, LiftAndDescendExamples) {
    auto D = from_jordan_symbol("5^+2");
    auto Q0 = quotient(D, make_isotropic_subgroup(D, {}));
    std::mt19937_64 rng(1);
    const auto v = random_vector(D, rng);
    GroupAlgebraVector permuted(D.size());
    for (int g = 0; g < D.size(); ++g) permuted[Q0.projection[g]] = v[g];
    EXPECT_EQ(lift_up(D, Q0, permuted), v);

    for (const auto& H : isotropic_subgroups(D)) {
        auto Q = quotient(D, H);
        GroupAlgebraVector chi(D.size());
        for (int h : H.elements) chi[h] = CycloNumber(1);
        EXPECT_EQ(lift_up(D, Q, basis(Q.form.order(), Q.projection[0])), chi);
        std::vector<char> in_perp(D.size(), 0);
        for (int a : H.perp) in_perp[a] = 1;
        for (int g = 0; g < D.size(); ++g)
            if (!in_perp[g]) { EXPECT_TRUE(descend(D, Q, basis(D.order(), g)).is_zero()); }
        for (int x = 0; x < Q.form.size(); ++x) {
            const auto ex = basis(Q.form.order(), x);
            EXPECT_EQ(descend(D, Q, lift_up(D, Q, ex)), CycloNumber(static_cast<long>(H.order())) * ex);
        }
    }
}

TEST(Induct, Transitivity) {
    for (const auto& s : battery) {
        auto D = from_jordan_symbol(s);
        if (D.order() > 256) continue;
        const auto all = isotropic_subgroups(D);
        for (const auto& H : all)
            for (const auto& K : all) {
                if (!contains(K, H)) continue;
                auto QH = quotient(D, H), QK = quotient(D, K);
                auto QKH = quotient(QH.form, image_in_quotient(QH, K));
                ASSERT_EQ(QKH.form.order(), QK.form.order()) << s;
                for (int x : K.perp) {
                    const auto top = basis(QKH.form.order(), QKH.projection[QH.projection[x]]);
                    EXPECT_EQ(lift_up(D, QH, lift_up(QH.form, QKH, top)), lift_up(D, QK, basis(QK.form.order(), QK.projection[x])))
                        << s;
                }
            }
    }
}

TEST(InductProperty, AdjointIntertwiningAndInv) {
    std::mt19937_64 rng(9);
    int checked = 0;
    for (int i = 0; i < 200 && checked < 60; ++i) {
        auto r = random_form(rng, 128, 24, true);
        const auto& D = r.form;
        auto all = isotropic_subgroups(D);
        if (all.size() < 2) continue;
        std::uniform_int_distribution<std::size_t> pick(1, all.size() - 1);
        const auto& H = all[pick(rng)];
        auto Q = quotient(D, H);
        const auto v = random_vector(Q.form, rng), w = random_vector(D, rng);
        const auto up = lift_up(D, Q, v);
        EXPECT_EQ(inner(up, w), inner(v, descend(D, Q, w))) << r.symbol;
        EXPECT_EQ(rho_S(D, up), lift_up(D, Q, rho_S(Q.form, v))) << r.symbol;
        EXPECT_EQ(rho_T(D, up), lift_up(D, Q, rho_T(Q.form, v))) << r.symbol;
        EXPECT_EQ(descend(D, Q, rho_S(D, w)), rho_S(Q.form, descend(D, Q, w))) << r.symbol;
        EXPECT_EQ(descend(D, Q, rho_T(D, w)), rho_T(Q.form, descend(D, Q, w))) << r.symbol;
        if (D.level() <= 24) {
            EXPECT_EQ(inv(D, up), lift_up(D, Q, inv(Q.form, v))) << r.symbol;
            EXPECT_EQ(descend(D, Q, inv(D, w)), inv(Q.form, descend(D, Q, w))) << r.symbol;
        }
        ++checked;
    }
    EXPECT_GE(checked, 30);
}
