#include <gtest/gtest.h>

#include <random>

#include "bbs/core.hpp"
#include "bbs/soliton.hpp"
#include "test_util.hpp"

using namespace bbs;

namespace {

std::vector<std::int64_t> sub(const std::vector<std::int64_t>& v, std::size_t from, std::size_t to) {
    return {v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(to)};
}

} // namespace

TEST(Carrier, EmptyConfigNeverLoads) {
    const auto p = carrier(BallConfig{});
    EXPECT_EQ(p.length(), 0);
    EXPECT_EQ(p.W, std::vector<std::int64_t>{0});
    EXPECT_EQ(p.records, std::vector<Site>{0});

    const auto q = carrier(BallConfig::from_string("0000"));
    for (auto w : q.W) EXPECT_EQ(w, 0);
    EXPECT_EQ(q.records, (std::vector<Site>{0, 1, 2, 3, 4}));
}

TEST(Carrier, SingleBallPickedUpAndDropped) {
    const auto p = carrier(BallConfig::from_string("1"));
    ASSERT_GE(p.length(), 3);
    EXPECT_EQ(p.W[1], 1);
    EXPECT_EQ(p.W[2], 0);
    EXPECT_EQ(p.W[3], 0);
}

TEST(Carrier, WorkedExample) {
    const auto p = carrier(BallConfig::from_string(gen::kWorkedEta));
    ASSERT_EQ(p.length(), 19);
    EXPECT_EQ(sub(p.W, 1, 20), (std::vector<std::int64_t>{1, 2, 1, 2, 3, 2, 1, 2, 3, 2, 1, 0, 1, 2, 3, 2, 1, 0, 0}));
    EXPECT_EQ(p.records, (std::vector<Site>{0, 19}));
    for (Site x = 0; x <= 19; ++x) EXPECT_EQ(p.record_count(x), x < 19 ? 1 : 2);
}

TEST(Carrier, PathIdentitiesOnRandomConfigs) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto eta = gen::iid_config(rng, 0.4, 300);
        const auto p = carrier(eta);
        EXPECT_EQ(p.S[0], 0);
        for (Site x = 1; x <= p.length(); ++x) {
            const auto k = static_cast<std::size_t>(x);
            EXPECT_EQ(std::abs(p.S[k] - p.S[k - 1]), 1);
            EXPECT_GE(p.W[k], 0);
            EXPECT_EQ(p.W[k], p.M[k] - p.S[k]);
            const bool rec = p.W[k] == 0 && p.W[k - 1] == 0;
            EXPECT_EQ(rec, std::binary_search(p.records.begin(), p.records.end(), x));
        }
        EXPECT_TRUE(p.is_record(p.length()));
    }
}

TEST(Step, IsolatedSolitonsAdvanceByTheirSize) {
    EXPECT_EQ(step(BallConfig::from_string("10")), BallConfig::from_string("01"));
    EXPECT_EQ(step(BallConfig::from_string("1100")), BallConfig::from_string("0011"));
}

TEST(Step, WorkedExample) {
    const auto t = step(BallConfig::from_string(gen::kWorkedEta));
    EXPECT_EQ(t, BallConfig::from_string("0010011001110001110"));
}

TEST(Step, GrowsWindowAndConservesBalls) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto eta = gen::iid_config(rng, 0.45, 200);
        const auto t = step(eta);
        EXPECT_EQ(t.ball_count(), eta.ball_count());
    }
    // All balls at the edge of the window: they must be carried past it.
    const auto t = step(BallConfig::from_string("111"));
    EXPECT_EQ(t, BallConfig::from_string("000111"));
}

TEST(Evolve, ZeroStepsIsIdentity) {
    const auto eta = BallConfig::from_string(gen::kWorkedEta);
    EXPECT_EQ(evolve(eta, 0), eta);
    EXPECT_THROW(evolve(eta, -1), Error);
}

TEST(Evolve, FreeSizeThreeSoliton) {
    EXPECT_EQ(evolve(BallConfig::from_string("111000"), 2), BallConfig::from_string("000000111000"));
}

TEST(Evolve, TwoSolitonCollision) {
    const auto out = evolve(BallConfig::from_string("11100001"), 3);
    EXPECT_EQ(out.ball_sites(), (std::vector<Site>{9, 12, 13, 14}));
}

TEST(Evolve, IsolatedSolitonTranslatesBySizeTimesSteps) {
    for (int i = 1; i <= 6; ++i) {
        std::vector<std::uint8_t> occ(static_cast<std::size_t>(2 * i), 0);
        for (int q = 0; q < i; ++q) occ[static_cast<std::size_t>(q)] = 1;
        const BallConfig eta(occ);
        for (int k : {1, 3, 17}) {
            const auto out = evolve(eta, k);
            const auto sites = out.ball_sites();
            ASSERT_EQ(static_cast<int>(sites.size()), i);
            for (int q = 0; q < i; ++q) EXPECT_EQ(sites[static_cast<std::size_t>(q)], 1 + q + i * k);
        }
    }
}

// A size-i soliton overtaking a size-j one (i > j) is pushed forward by 2j and
// the small one is pushed back by 2j.
TEST(Evolve, PhaseShiftOfOvertakingPairs) {
    for (int i = 2; i <= 5; ++i) {
        for (int j = 1; j < i; ++j) {
            const Site small_start = 2 * i + 6;
            std::vector<Site> balls;
            for (int q = 0; q < i; ++q) balls.push_back(1 + q);
            for (int q = 0; q < j; ++q) balls.push_back(small_start + q);
            const auto eta = BallConfig::from_sites(balls);
            const std::int64_t k = 80;
            const auto marks = decompose(evolve(eta, k));
            ASSERT_EQ(marks.solitons.size(), 2u);
            const auto big = marks.starts(i);
            const auto small = marks.starts(j);
            ASSERT_EQ(big.size(), 1u);
            ASSERT_EQ(small.size(), 1u);
            EXPECT_GT(big[0], small[0]) << "collision did not complete";
            EXPECT_EQ(big[0] - (1 + i * k), 2 * j) << "i=" << i << " j=" << j;
            EXPECT_EQ(small[0] - (small_start + j * k), -2 * j) << "i=" << i << " j=" << j;
        }
    }
}
