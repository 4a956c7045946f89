#include <gtest/gtest.h>

#include <random>
#include <set>

#include <weilinv/sl2.hpp>

using namespace weilinv;

namespace {

const Mat2 S{0, -1, 1, 0};

Mat2 random_sl2(std::mt19937_64& rng, int steps) {
    std::uniform_int_distribution<int> pick(0, 3);
    std::uniform_int_distribution<i64> power(-4, 4);
    Mat2 M;
    for (int i = 0; i < steps; ++i) {
        const i64 n = power(rng);
        switch (pick(rng)) {
            case 0: M = M * S; break;
            case 1: M = M * Mat2{1, n, 0, 1}; break;
            case 2: M = M * Mat2{1, 0, n, 1}; break;
            default: M = Mat2{1, n, 0, 1} * M; break;
        }
    }
    return M;
}

}  // namespace

TEST(Sl2, WordExamples) {
    EXPECT_TRUE(word_decompose(Mat2{}).word.empty());
    EXPECT_EQ(word_decompose(S).word, std::vector<Letter>{Letter::S});
    EXPECT_EQ(word_decompose(Mat2{1, 5, 0, 1}).word, std::vector<Letter>(5, Letter::T));
    EXPECT_EQ(word_decompose(Mat2{1, -3, 0, 1}).word, std::vector<Letter>(3, Letter::Tinv));
    EXPECT_EQ(word_decompose(Mat2{-1, 0, 0, -1}).product(), (Mat2{-1, 0, 0, -1}));
}

TEST(Sl2, RejectsWrongDeterminant) {
    try {
        word_decompose(Mat2{2, 0, 0, 1});
        ADD_FAILURE() << "accepted det 2";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), std::string(errc::invalid_input));
    }
    EXPECT_THROW(word_decompose(Mat2{1, 1, 1, 1}), Error);
}

TEST(Sl2Property, WordProductAndLength) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        const Mat2 M = random_sl2(rng, 1 + i % 9);
        const auto w = word_decompose(M);
        EXPECT_EQ(w.product(), M) << M.str();
        // Euclidean reduction: each S step at least halves |c|, and T powers are bounded by the entries.
        double logsum = 0;
        for (i64 x : {M.a, M.b, M.c, M.d}) logsum += std::log2(2.0 + static_cast<double>(std::llabs(x)));
        EXPECT_LE(static_cast<double>(w.word.size()), 8 * (logsum + 1) + static_cast<double>(std::llabs(M.b)) + std::llabs(M.a)) << M.str();
    }
}

TEST(Sl2, GroupOrder) {
    EXPECT_EQ(sl2_order(1), 1);
    EXPECT_EQ(sl2_order(2), 6);
    EXPECT_EQ(sl2_order(3), 24);
    EXPECT_EQ(sl2_order(8), 384);
    EXPECT_EQ(sl2_order(12), 1152);
}

TEST(Sl2, CosetEnumeration) {
    for (i64 N : {1, 2, 3, 4, 5, 6, 8, 9, 12}) {
        const auto tree = enumerate_cosets(N);
        EXPECT_EQ(static_cast<i64>(tree.size()), sl2_order(N)) << N;
        std::set<std::array<i64, 4>> seen;
        for (std::size_t i = 0; i < tree.size(); ++i) {
            const Mat2& M = tree.lift[i];
            EXPECT_EQ(M.det(), 1);
            const Mat2 r = M.reduced(N);
            EXPECT_TRUE(seen.insert({r.a, r.b, r.c, r.d}).second) << N << " duplicate " << r.str();
            EXPECT_EQ(tree.word(static_cast<int>(i)).product(), M);
        }
    }
    EXPECT_EQ(enumerate_cosets(1).lift.front(), Mat2{});
}

TEST(Sl2, CosetEnumerationIsExhaustiveModEight) {
    // Independent count: all (a b; c d) mod 8 with ad - bc = 1.
    i64 count = 0;
    for (i64 a = 0; a < 8; ++a)
        for (i64 b = 0; b < 8; ++b)
            for (i64 c = 0; c < 8; ++c)
                for (i64 d = 0; d < 8; ++d) count += mod(a * d - b * c, 8) == 1;
    EXPECT_EQ(count, 384);
    EXPECT_EQ(static_cast<i64>(enumerate_cosets(8).size()), count);
}

TEST(Sl2, LevelBound) {
    try {
        enumerate_cosets(61);
        ADD_FAILURE() << "level 61 accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), std::string(errc::bound_exceeded));
    }
    EXPECT_THROW(enumerate_cosets(0), Error);
}
