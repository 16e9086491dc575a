#include <gtest/gtest.h>

#include <random>

#include "bbs/core.hpp"
#include "bbs/soliton.hpp"
#include "test_util.hpp"

using namespace bbs;

namespace {

constexpr int R = SlotProfile::kRecord;

SlotDecomposition worked_slots() {
    SlotDecomposition z(3);
    z.set(1, 2, 1);
    z.set(2, 2, 1);
    z.set(3, 1, 2);
    return z;
}

} // namespace

TEST(Decompose, EmptyConfig) {
    EXPECT_TRUE(decompose(BallConfig{}).solitons.empty());
    EXPECT_TRUE(decompose(BallConfig::from_string("000")).solitons.empty());
}

TEST(Decompose, BasicString) {
    const auto m = decompose(BallConfig::from_string("10"));
    ASSERT_EQ(m.solitons.size(), 1u);
    EXPECT_EQ(m.solitons[0].size, 1);
    EXPECT_EQ(m.solitons[0].sites, (std::vector<Site>{1, 2}));
}

TEST(Decompose, WorkedExampleSigmaRows) {
    const auto eta = BallConfig::from_string(gen::kWorkedEta);
    for (const auto& m : {decompose(eta), decompose_literal(eta)}) {
        EXPECT_EQ(m.starts(1), std::vector<Site>{3});
        EXPECT_EQ(m.starts(2), std::vector<Site>{6});
        EXPECT_EQ(m.starts(3), (std::vector<Site>{1, 13}));
        EXPECT_EQ(m.solitons.size(), 4u);
        for (Site x = 1; x <= 19; ++x) {
            EXPECT_EQ(m.sigma(1, x), x == 3);
            EXPECT_EQ(m.sigma(2, x), x == 6);
            EXPECT_EQ(m.sigma(3, x), x == 1 || x == 13);
        }
        // Site sets from the identification table.
        for (const auto& s : m.solitons) {
            if (s.start() == 1) { EXPECT_EQ(s.sites, (std::vector<Site>{1, 2, 5, 10, 11, 12})); }
            if (s.start() == 6) { EXPECT_EQ(s.sites, (std::vector<Site>{6, 7, 8, 9})); }
        }
    }
}

TEST(Decompose, StackMatcherAgreesWithLiteralRule) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 3000; ++trial) {
        const auto eta = trial % 2 ? gen::iid_config(rng, 0.42, 120) : gen::random_config(rng, 6, 150);
        const auto a = decompose(eta);
        const auto b = decompose_literal(eta);
        ASSERT_EQ(a.solitons.size(), b.solitons.size());
        for (std::size_t k = 0; k < a.solitons.size(); ++k) {
            EXPECT_EQ(a.solitons[k].size, b.solitons[k].size);
            EXPECT_EQ(a.solitons[k].sites, b.solitons[k].sites);
        }
    }
}

TEST(Decompose, MarksPartitionEveryExcursion) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 300; ++trial) {
        const auto eta = gen::iid_config(rng, 0.4, 200);
        const auto path = carrier(eta);
        const auto m = decompose(eta);
        std::vector<int> owner(static_cast<std::size_t>(path.length()) + 1, 0);
        for (const auto& s : m.solitons) {
            ASSERT_EQ(static_cast<int>(s.sites.size()), 2 * s.size);
            for (std::size_t q = 0; q < s.sites.size(); ++q) {
                if (q > 0) { EXPECT_LT(s.sites[q - 1], s.sites[q]); }
                // first run and second run carry opposite, constant bits
                const int expected = eta.at(s.sites[q < static_cast<std::size_t>(s.size) ? 0 : s.sites.size() - 1]);
                EXPECT_EQ(eta.at(s.sites[q]), expected);
                ++owner[static_cast<std::size_t>(s.sites[q])];
            }
            EXPECT_NE(eta.at(s.sites.front()), eta.at(s.sites.back()));
        }
        for (Site x = 1; x <= path.length(); ++x)
            EXPECT_EQ(owner[static_cast<std::size_t>(x)], path.is_record(x) ? 0 : 1);
    }
}

TEST(SlotProfile, EmptyConfigIsAllRecords) {
    const auto p = slot_profile(BallConfig{});
    for (Site x = 0; x < 10; ++x) {
        EXPECT_EQ(p.nu_at(x), R);
        for (int i = 1; i <= 4; ++i) EXPECT_EQ(p.count(i, x), x + 1);
    }
}

TEST(SlotProfile, WorkedExampleTable) {
    const auto p = slot_profile(BallConfig::from_string(gen::kWorkedEta));
    ASSERT_EQ(p.length(), 19);
    EXPECT_EQ(p.nu, (std::vector<int>{R, 0, 1, 0, 0, 2, 0, 1, 0, 1, 0, 1, 2, 0, 1, 2, 0, 1, 2, R}));
    const std::vector<std::int64_t> s1{1, 1, 2, 2, 2, 3, 3, 4, 4, 5, 5, 6, 7, 7, 8, 9, 9, 10, 11, 12};
    const std::vector<std::int64_t> s2{1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 3, 3, 3, 4, 4, 4, 5, 6};
    const std::vector<std::int64_t> s3{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 2};
    EXPECT_EQ(p.S[0], s1);
    EXPECT_EQ(p.S[1], s2);
    EXPECT_EQ(p.S[2], s3);
}

TEST(SlotProfile, SingleSizeTwoSoliton) {
    const auto p = slot_profile(BallConfig::from_string("1100"));
    EXPECT_EQ(p.nu_at(1), 0);
    EXPECT_EQ(p.nu_at(2), 1);
    EXPECT_EQ(p.nu_at(3), 0);
    EXPECT_EQ(p.nu_at(4), 1);
}

TEST(SlotProfile, SlotBudgetAndNesting) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const auto eta = gen::random_config(rng, 6, 200);
        const auto marks = decompose(eta);
        const auto p = slot_profile(marks, carrier(eta));
        for (const auto& s : marks.solitons) {
            for (int j = 1; j < s.size; ++j) {
                int n = 0;
                for (Site x : s.sites) n += p.nu_at(x) >= j;
                EXPECT_EQ(n, 2 * (s.size - j));
            }
        }
        for (int i = 1; i < p.max_size(); ++i)
            for (Site x = 0; x <= p.length(); ++x) {
                EXPECT_LE(p.count(i + 1, x), p.count(i, x));
                if (x > 0) { EXPECT_EQ(p.count(i, x) - p.count(i, x - 1), p.nu_at(x) >= i ? 1 : 0); }
            }
    }
}

TEST(SlotDecompose, Examples) {
    EXPECT_EQ(slot_decompose(BallConfig{}).total(), 0);
    EXPECT_EQ(slot_decompose(BallConfig::from_string(gen::kWorkedEta)), worked_slots());

    const auto z = slot_decompose(BallConfig::from_string("1100"));
    EXPECT_EQ(z.at(2, 1), 1);
    EXPECT_EQ(z.total(), 1);
}

TEST(Reconstruct, Examples) {
    EXPECT_EQ(reconstruct(SlotDecomposition(3)), BallConfig{});
    EXPECT_EQ(reconstruct(worked_slots()).to_string(), "110110011000111");
    EXPECT_EQ(reconstruct(worked_slots()), BallConfig::from_string(gen::kWorkedEta));
    SlotDecomposition one(1);
    one.set(1, 1, 1);
    EXPECT_EQ(reconstruct(one).to_string(), "1");
    EXPECT_EQ(reconstruct(one), BallConfig::from_string("10"));
}

TEST(Reconstruct, InsertsAfterOccupiedSlotsInFlippedForm) {
    // A size-2 soliton placed in the second 1-slot of "1100" sits after a ball.
    SlotDecomposition z(2);
    z.set(2, 1, 1);
    z.set(1, 2, 1);
    const auto eta = reconstruct(z);
    EXPECT_EQ(eta, BallConfig::from_string("110100"));
    EXPECT_EQ(slot_decompose(eta), z);
}

TEST(ShiftSlots, Examples) {
    const auto w = worked_slots();
    EXPECT_EQ(shift_slots(w, 0), w);

    SlotDecomposition z(3);
    z.set(3, 1, 2);
    SlotDecomposition z1(3);
    z1.set(3, 4, 2);
    EXPECT_EQ(shift_slots(z, 1), z1);

    SlotDecomposition w2(3);
    w2.set(1, 4, 1);
    w2.set(2, 6, 1);
    w2.set(3, 7, 2);
    EXPECT_EQ(shift_slots(w, 2), w2);
    EXPECT_THROW(shift_slots(w, -1), Error);
}

TEST(Codec, RoundTripsBothWays) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto eta = trial % 2 ? gen::iid_config(rng, 0.4, 150) : gen::random_config(rng, 5, 200);
        const auto z = slot_decompose(eta);
        EXPECT_EQ(reconstruct(z), eta) << eta.to_string();
    }
    for (int trial = 0; trial < 2000; ++trial) {
        const int I = 1 + static_cast<int>(rng() % 5);
        SlotDecomposition z(I);
        for (int i = 1; i <= I; ++i)
            for (std::int64_t m = 1; m <= 20; ++m)
                if (rng() % 4 == 0) z.set(i, m, static_cast<std::int64_t>(1 + rng() % 3));
        EXPECT_EQ(slot_decompose(reconstruct(z)), z);
    }
}

TEST(Codec, EvolutionIsSlotShift) {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 500; ++trial) {
        const auto eta = trial % 2 ? gen::iid_config(rng, 0.4, 120) : gen::random_config(rng, 5, 150);
        const auto z = slot_decompose(eta);
        const std::int64_t k = static_cast<std::int64_t>(rng() % 51);
        EXPECT_EQ(evolve(eta, k), reconstruct(shift_slots(z, k))) << eta.to_string() << " k=" << k;
    }
}

TEST(Codec, SolitonCountsConservedByStep) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        auto eta = gen::iid_config(rng, 0.4, 150);
        const auto before = decompose(eta);
        eta = step(eta);
        const auto after = decompose(eta);
        for (int i = 1; i <= std::max(before.max_size(), after.max_size()); ++i)
            EXPECT_EQ(before.count(i), after.count(i));
    }
}

TEST(Codec, SizeHint) {
    auto eta = BallConfig::from_string(gen::kWorkedEta);
    eta.set_max_size_hint(3);
    EXPECT_NO_THROW(check_size_hint(eta));
    eta.set_max_size_hint(2);
    EXPECT_THROW(check_size_hint(eta), Error);
}
