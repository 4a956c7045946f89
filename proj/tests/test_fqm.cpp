#include <gtest/gtest.h>

#include <random>
#include <set>

#include "common.hpp"

using namespace weilinv;

namespace {

const std::vector<std::string> battery = {
    "", "5^+1", "5^-1", "3^+1", "3^-2", "3^+3", "2_II^+2", "2_II^-2", "2_II^-4", "2_1^+1", "2_7^+1", "2_3^-1",
    "2_0^+2", "2_2^+2", "2_4^-2", "4_II^+2", "4_1^+1", "2_2^+2.4_II^+2", "2_1^+1.4_1^+1.8_II^+2",
    "2_1^+1.4_5^-1.8_II^+2", "2_II^+2.3^-1", "9^+1", "3^+1.9^-1", "2_II^+4.3^+1", "7^-2", "2_6^+2.4_II^+2"};

CycloNumber milgram_rhs(const DiscriminantForm& D) {
    return CycloNumber::e_of(D.signature(), 8) * CycloNumber::sqrt_int(D.order());
}

}  // namespace

TEST(Fqm, FromSymbolOddPrime) {
    auto D = from_jordan_symbol("5^+1");
    ASSERT_EQ(D.order(), 5);
    ASSERT_EQ(D.num_generators(), 1);
    const QmodZ q = D.q(D.generator(0));
    EXPECT_EQ(q.den(), 5);
    EXPECT_EQ(kronecker(2 * q.num(), 5), 1);
    EXPECT_EQ(D.signature(), 4);
}

TEST(Fqm, FromSymbolEvenTwoAdic) {
    auto D = from_jordan_symbol("2_II^+2");
    const int g = D.generator(0), h = D.generator(1);
    EXPECT_EQ(D.element_order(g), 2);
    EXPECT_EQ(D.q(g), QmodZ(0, 1));
    EXPECT_EQ(D.q(h), QmodZ(0, 1));
    EXPECT_EQ(D.b(g, h), QmodZ(1, 2));
    EXPECT_EQ(D.q(D.add(g, h)), QmodZ(1, 2));
    EXPECT_EQ(D.level(), 2);
}

TEST(Fqm, TrivialForm) {
    auto D = from_jordan_symbol("");
    EXPECT_EQ(D.order(), 1);
    EXPECT_EQ(D.level(), 1);
    EXPECT_EQ(D.signature(), 0);
    EXPECT_TRUE(p_part_decompose(D).empty());
}

TEST(Fqm, InconsistentSymbolsRejected) {
    for (const char* s : {"2_3^+1", "2_1^-1", "2_II^+3", "2_2^+1", "5_1^+1", "3_II^+2", "2_4^+2"}) {
        try {
            from_jordan_symbol(s);
            ADD_FAILURE() << s << " accepted";
        } catch (const Error& e) {
            EXPECT_TRUE(e.code() == errc::inconsistent_symbol || e.code() == errc::parse) << s << " " << e.code();
        }
    }
    for (const char* s : {"bogus^^", "5^+", "6^+1", "2^+1", "5^+1.", "5^*1"}) {
        try {
            JordanSymbol::parse(s);
            ADD_FAILURE() << s << " parsed";
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), std::string(errc::parse)) << s;
        }
    }
}

TEST(Fqm, Levels) {
    EXPECT_EQ(from_jordan_symbol("2_II^+2").level(), 2);
    EXPECT_EQ(from_jordan_symbol("2_1^+1").level(), 4);
    EXPECT_EQ(from_jordan_symbol("4_II^-2").level(), 4);
    EXPECT_EQ(from_jordan_symbol("2_1^+1.4_1^+1.8_II^+2").level(), 8);
}

TEST(Fqm, Signatures) {
    EXPECT_EQ(from_jordan_symbol("2_II^-4").signature(), 4);
    EXPECT_EQ(from_jordan_symbol("3^+3").signature(), 2);
    EXPECT_EQ(from_jordan_symbol("2_II^-2").signature(), 4);
    EXPECT_EQ(from_jordan_symbol("2_2^+2").signature(), 2);
}

TEST(Fqm, FromGram) {
    auto A1 = from_gram({{2}});
    EXPECT_EQ(A1.form.order(), 2);
    EXPECT_EQ(A1.form.q(A1.form.generator(0)), QmodZ(1, 4));
    EXPECT_EQ(A1.form.signature(), 1);

    auto A2 = from_gram({{2, 1}, {1, 2}});
    EXPECT_EQ(A2.form.order(), 3);
    EXPECT_EQ(A2.form.q(A2.form.generator(0)), QmodZ(1, 3));
    EXPECT_EQ(A2.form.signature(), 2);
    EXPECT_EQ(A2.form.gauss_sum(), milgram_rhs(A2.form));

    auto A1A1 = from_gram({{2, 0}, {0, 2}});
    EXPECT_EQ(A1A1.form.order(), 4);
    EXPECT_EQ(A1A1.form.signature(), 2);
    EXPECT_EQ(A1A1.form.oddity(), 2);
    EXPECT_EQ(iso_invariant(A1A1.form), iso_invariant(from_jordan_symbol("2_2^+2")));

    // D4 has discriminant form 2_II^{-2}: signature 4, no nonzero isotropic element.
    auto D4 = from_gram({{2, -1, 0, 0}, {-1, 2, -1, -1}, {0, -1, 2, 0}, {0, -1, 0, 2}});
    EXPECT_EQ(D4.form.order(), 4);
    EXPECT_EQ(D4.form.level(), 2);
    EXPECT_EQ(D4.form.signature(), 4);
    EXPECT_EQ(isotropic_indices(D4.form).size(), 1u);

    EXPECT_THROW(from_gram({{1}}), Error);
    EXPECT_THROW(from_gram({{2, 2}, {2, 2}}), Error);
    EXPECT_THROW(from_gram({{2, 1}, {0, 2}}), Error);
}

TEST(Fqm, GramSumMatchesSymbolSum) {
    // A2 ⊕ A1 ⊕ E8-free blocks: the orthogonal sum of Gram matrices realizes the sum of forms.
    auto sum = from_gram({{2, 1, 0}, {1, 2, 0}, {0, 0, 2}});
    auto parts = iso_invariant(from_jordan_symbol("3^-1.2_1^+1"));
    EXPECT_EQ(iso_invariant(sum.form), parts);
    EXPECT_EQ(sum.form.gauss_sum(), milgram_rhs(sum.form));
}

TEST(Fqm, ValuesAndPolarization) {
    for (const auto& s : battery) {
        auto D = from_jordan_symbol(s);
        EXPECT_EQ(D.q(0), QmodZ(0, 1));
        for (int g = 0; g < D.size(); ++g) {
            EXPECT_EQ(D.b(g, g), 2 * D.q(g)) << s;
            for (int h = 0; h < D.size(); ++h) {
                EXPECT_EQ(D.q(D.add(g, h)) - D.q(g) - D.q(h), D.b(g, h));
                EXPECT_EQ(D.b(g, h), D.b(h, g));
            }
        }
    }
}

TEST(Fqm, ExplicitQuadraticFormula) {
    // q(Σ a_i g_i) = Σ a_i² q(g_i) + Σ_{i<j} a_i a_j b(g_i, g_j).
    for (const auto& s : battery) {
        auto D = from_jordan_symbol(s);
        for (int g = 0; g < D.size(); ++g) {
            const auto a = D.element(g).coeffs;
            QmodZ v(0, 1);
            for (int i = 0; i < D.num_generators(); ++i) {
                v = v + (a[i] * a[i]) * D.q_generators()[i];
                for (int j = i + 1; j < D.num_generators(); ++j) v = v + (a[i] * a[j]) * D.b_generators()[i][j];
            }
            EXPECT_EQ(v, D.q(g)) << s;
        }
    }
}

TEST(Fqm, NonDegenerateAndLevelMinimal) {
    for (const auto& s : battery) {
        auto D = from_jordan_symbol(s);
        for (int g = 1; g < D.size(); ++g) {
            bool degenerate = true;
            for (int h = 0; h < D.size() && degenerate; ++h) degenerate = D.b_residue(g, h) == 0;
            EXPECT_FALSE(degenerate) << s;
        }
        i64 N = 1;
        for (int g = 0; g < D.size(); ++g) N = lcm64(N, D.q(g).den());
        EXPECT_EQ(N, D.level()) << s;
    }
}

TEST(FqmProperty, Milgram) {
    for (const auto& s : battery) {
        auto D = from_jordan_symbol(s);
        EXPECT_EQ(D.gauss_sum(), milgram_rhs(D)) << s;
    }
    std::mt19937_64 rng(11);
    for (int i = 0; i < 60; ++i) {
        auto r = testkit::random_form(rng, 512, 72, false);
        EXPECT_EQ(r.form.gauss_sum(), milgram_rhs(r.form)) << r.symbol;
        EXPECT_EQ(r.form.signature(), JordanSymbol::parse(r.symbol).signature()) << r.symbol;
    }
}

TEST(Fqm, Character) {
    auto D = from_jordan_symbol("5^+1");
    EXPECT_EQ(D.chi(1), 1);
    EXPECT_EQ(D.chi(2), -1);
    EXPECT_THROW(D.chi(5), Error);
    EXPECT_THROW(from_jordan_symbol("2_1^+1").chi(3), Error);
}

TEST(FqmProperty, CharacterMultiplicative) {
    for (const auto& s : battery) {
        auto D = from_jordan_symbol(s);
        if (!D.even_signature()) continue;
        const i64 N = D.level();
        for (i64 a : units_mod(N))
            for (i64 b : units_mod(N)) EXPECT_EQ(D.chi(a) * D.chi(b), D.chi(mod(a * b, N))) << s;
    }
}

TEST(Fqm, SubgroupsDc) {
    auto D = from_jordan_symbol("3^-2");
    auto one = subgroup_Dc(D, 1);
    EXPECT_EQ(one.kernel, std::vector<int>{0});
    EXPECT_EQ(one.image.size(), 9u);
    EXPECT_EQ(one.star.size(), 9u);
    auto zero = subgroup_Dc(D, 0);
    EXPECT_EQ(zero.kernel.size(), 9u);
    EXPECT_EQ(zero.star, std::vector<int>{0});

    auto T = from_jordan_symbol("2_1^+1");
    auto two = subgroup_Dc(T, 2);
    EXPECT_EQ(two.kernel.size(), 2u);
    ASSERT_EQ(two.star.size(), 1u);
    auto x2 = find_xc(T, 2);
    ASSERT_TRUE(x2.has_value());
    EXPECT_EQ(*x2, two.star[0]);
    EXPECT_NO_THROW(q_c(T, 2, *x2, *x2));
}

TEST(Fqm, QcValues) {
    auto D = from_jordan_symbol("3^+2");
    EXPECT_EQ(q_c(D, 3, 0, 0), QmodZ(0, 1));
    for (int mu = 0; mu < D.size(); ++mu) EXPECT_EQ(q_c(D, 2, D.mul(2, mu), 0), 2 * D.q(mu));
    EXPECT_THROW(q_c(D, 3, D.generator(0), 0), Error);
}

TEST(Fqm, CountNormExamples) {
    EXPECT_EQ(count_norm(JordanSymbol::parse("5^+2"), 0), 9);
    EXPECT_EQ(count_norm(JordanSymbol::parse("2_II^+2"), 0), 3);
    EXPECT_EQ(count_norm(JordanSymbol::parse("2_1^+1"), 0), 1);
    EXPECT_THROW(count_norm(JordanSymbol::parse("4_II^+2"), 0), Error);
}

TEST(FqmProperty, CountNormMatchesBruteForce) {
    std::vector<std::string> syms;
    for (int p : {3, 5, 7})
        for (int n = 1; n <= 4; ++n)
            for (const char* e : {"+", "-"}) syms.push_back(std::to_string(p) + "^" + e + std::to_string(n));
    for (int n = 2; n <= 6; n += 2)
        for (const char* e : {"+", "-"}) syms.push_back(std::string("2_II^") + e + std::to_string(n));
    for (int n = 1; n <= 4; ++n)
        for (int t = 0; t < 8; ++t)
            for (const char* e : {"+", "-"}) syms.push_back("2_" + std::to_string(t) + "^" + e + std::to_string(n));
    int checked = 0;
    for (const auto& s : syms) {
        JordanSymbol sym;
        try {
            sym = JordanSymbol::parse(s);
        } catch (const Error&) {
            continue;  // invalid (t, ε) combination
        }
        auto D = from_jordan_symbol(sym);
        const i64 den = D.level();
        for (i64 j = 0; j < den; ++j) EXPECT_EQ(count_norm(sym, j), count_norm_brute(D, j, den)) << s << " j=" << j;
        ++checked;
    }
    EXPECT_GT(checked, 40);
}

TEST(Fqm, PPartDecompose) {
    auto D = from_jordan_symbol("2_II^+2.3^-1");
    auto parts = p_part_decompose(D);
    ASSERT_EQ(parts.size(), 2u);
    EXPECT_EQ(parts[0].p, 2);
    EXPECT_EQ(parts[0].form.order(), 4);
    EXPECT_EQ(parts[1].form.order(), 3);
    auto D27 = from_jordan_symbol("3^+3");
    auto single = p_part_decompose(D27);
    ASSERT_EQ(single.size(), 1u);
    std::set<int> image(single[0].embedding.begin(), single[0].embedding.end());
    EXPECT_EQ(image.size(), 27u);
    for (int g = 0; g < single[0].form.size(); ++g) EXPECT_EQ(single[0].form.q(g), D27.q(single[0].embedding[g]));
}

TEST(FqmProperty, PPartsReassemble) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 40; ++i) {
        auto r = testkit::random_form(rng, 256, 60, false);
        auto parts = p_part_decompose(r.form);
        i64 order = 1;
        for (const auto& p : parts) {
            order *= p.form.order();
            for (int g = 0; g < p.form.size(); ++g) EXPECT_EQ(p.form.q(g), r.form.q(p.embedding[g])) << r.symbol;
        }
        EXPECT_EQ(order, r.form.order());
        if (parts.size() == 2) {
            // q of a sum of lifted elements is the sum of the q values.
            for (int a = 0; a < parts[0].form.size(); ++a)
                for (int b = 0; b < parts[1].form.size(); ++b)
                    EXPECT_EQ(r.form.q(r.form.add(parts[0].embedding[a], parts[1].embedding[b])),
                              parts[0].form.q(a) + parts[1].form.q(b));
        }
    }
}

TEST(Fqm, Bounds) {
    const auto saved = brute_force_bound().load();
    brute_force_bound() = 100;
    EXPECT_THROW(from_jordan_symbol("3^+5"), Error);
    brute_force_bound() = saved;
}
