#include "oracles.hpp"
#include "sps/error.hpp"
#include "sps/pps.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace sps;

namespace {

KernelVariant kv(std::initializer_list<KernelPos> taps) { return KernelVariant{taps}; }

PpsConfig corners_config()
{
    PpsConfig cfg;
    cfg.period = 2;
    cfg.support = 2;
    cfg.h_k = cfg.w_k = 3;
    cfg.patterns = {kv({{0, 0}, {2, 2}}), kv({{0, 2}, {2, 0}})};
    return cfg;
}

}  // namespace

TEST(KvOf, Examples)
{
    for (std::uint32_t ic = 0; ic < 6; ++ic) {
        EXPECT_EQ(kv_of(0, ic, 2), ic % 2);
        EXPECT_EQ(kv_of(1, ic, 2), (ic + 1) % 2);
    }
    for (std::uint32_t p = 1; p < 10; ++p) EXPECT_EQ(kv_of(0, 0, p), 0u);
    EXPECT_EQ(kv_of(2, 4, 3), 0u);
    static_assert(kv_of(7, 7, 8) == 6);
}

TEST(KvOf, PeriodicityAndDiagonals)
{
    for (std::uint32_t p = 1; p <= 8; ++p)
        for (std::uint32_t oc = 0; oc < 12; ++oc)
            for (std::uint32_t ic = 1; ic < 12; ++ic) {
                EXPECT_EQ(kv_of(oc, ic, p), kv_of(oc, ic + p, p));
                EXPECT_EQ(kv_of(oc, ic, p), kv_of(oc + p, ic, p));
                EXPECT_EQ(kv_of(oc + 1, ic - 1, p), kv_of(oc, ic, p));
            }
}

TEST(SelectPatterns, Unanimous)
{
    Tensor4 d(4, 3, 3, 3);
    for (std::uint32_t o = 0; o < 4; ++o)
        for (std::uint32_t i = 0; i < 3; ++i) {
            d(o, i, 1, 1) = 100;
            d(o, i, 0, 0) = -90;
            d(o, i, 2, 1) = 10;
        }
    auto sel = select_patterns(d, 1, 2, PatternStrategy::magnitude, 0);
    ASSERT_EQ(sel.patterns.size(), 1u);
    EXPECT_EQ(sel.patterns[0], kv({{0, 0}, {1, 1}}));
    EXPECT_TRUE(sel.warnings.empty());
}

TEST(SelectPatterns, MatchesBruteForceHistogram)
{
    std::mt19937 rng(21);
    auto d = oracle::random_tensor(rng, 6, 5, 2, 2);
    // Oracle: per kernel, the two largest |w| with row-major tie break.
    std::map<std::vector<KernelPos>, int> hist;
    for (std::uint32_t o = 0; o < 6; ++o)
        for (std::uint32_t i = 0; i < 5; ++i) {
            std::vector<std::pair<int, int>> taps;  // (-|w|, pos)
            for (int t = 0; t < 4; ++t) taps.push_back({-std::abs(int(d(o, i, t / 2, t % 2))), t});
            std::sort(taps.begin(), taps.end());
            std::vector<KernelPos> m{{taps[0].second / 2, taps[0].second % 2}, {taps[1].second / 2, taps[1].second % 2}};
            std::sort(m.begin(), m.end());
            ++hist[m];
        }
    std::vector<std::pair<int, std::vector<KernelPos>>> ranked;
    for (auto& [m, c] : hist) ranked.push_back({-c, m});
    std::sort(ranked.begin(), ranked.end());
    const auto P = std::uint32_t(ranked.size());
    auto sel = select_patterns(d, P, 2, PatternStrategy::magnitude, 0);
    ASSERT_EQ(sel.patterns.size(), P);
    for (std::uint32_t p = 0; p < P; ++p) EXPECT_EQ(sel.patterns[p].positions, ranked[p].second);
    EXPECT_TRUE(sel.warnings.empty());
}

TEST(SelectPatterns, PadsWithWarning)
{
    Tensor4 d(2, 2, 3, 3);
    for (auto& v : d.values()) v = 1;
    for (std::uint32_t o = 0; o < 2; ++o)
        for (std::uint32_t i = 0; i < 2; ++i) d(o, i, 2, 2) = 50;
    auto sel = select_patterns(d, 3, 1, PatternStrategy::magnitude, 0);
    ASSERT_EQ(sel.patterns.size(), 3u);
    EXPECT_EQ(sel.patterns[0], kv({{2, 2}}));
    EXPECT_EQ(sel.patterns[1], kv({{0, 0}}));
    EXPECT_EQ(sel.patterns[2], kv({{0, 1}}));
    EXPECT_FALSE(sel.warnings.empty());
}

TEST(SelectPatterns, DeterministicAndErrors)
{
    std::mt19937 rng(2);
    auto d = oracle::random_tensor(rng, 8, 8, 3, 3);
    for (auto s : {PatternStrategy::magnitude, PatternStrategy::random}) {
        auto a = select_patterns(d, 8, 2, s, 77);
        auto b = select_patterns(d, 8, 2, s, 77);
        EXPECT_EQ(a.patterns, b.patterns);
        std::set<KernelVariant> uniq(a.patterns.begin(), a.patterns.end());
        EXPECT_EQ(uniq.size(), 8u);
    }
    EXPECT_NE(select_patterns(d, 8, 2, PatternStrategy::random, 1).patterns,
              select_patterns(d, 8, 2, PatternStrategy::random, 2).patterns);
    EXPECT_THROW(select_patterns(d, 8, 2, PatternStrategy::fixed, 0), ConfigError);
    EXPECT_THROW(select_patterns(d, 2, 10, PatternStrategy::magnitude, 0), DimensionError);
    EXPECT_THROW(select_patterns(Tensor4(1, 1, 2, 1), 3, 1, PatternStrategy::magnitude, 0), DimensionError);
}

TEST(PpsConfig, Validate)
{
    auto cfg = corners_config();
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.w_num(), 4u);
    auto dup = cfg;
    dup.patterns[1] = dup.patterns[0];
    EXPECT_THROW(dup.validate(), DimensionError);
    auto count = cfg;
    count.patterns.pop_back();
    EXPECT_THROW(count.validate(), DimensionError);
    auto oob = cfg;
    oob.patterns[1] = kv({{0, 2}, {3, 0}});
    EXPECT_THROW(oob.validate(), DimensionError);
    auto support = cfg;
    support.patterns[1] = kv({{0, 2}});
    EXPECT_THROW(support.validate(), DimensionError);
    auto repeated = cfg;
    repeated.patterns[1] = kv({{0, 2}, {0, 2}});
    EXPECT_THROW(repeated.validate(), DimensionError);
}

TEST(Mask, FullPatternIsNoOp)
{
    std::mt19937 rng(6);
    auto d = oracle::random_tensor(rng, 3, 4, 2, 3);
    PpsConfig cfg;
    cfg.period = 1;
    cfg.support = 6;
    cfg.h_k = 2;
    cfg.w_k = 3;
    KernelVariant all;
    for (std::uint32_t t = 0; t < 6; ++t) all.positions.emplace_back(t / 3, t % 3);
    cfg.patterns = {all};
    EXPECT_EQ(apply_periodic_mask(d, cfg), d);
}

TEST(Mask, CornerExample)
{
    Tensor4 d(2, 2, 3, 3, std::vector<std::int8_t>(36, 1));
    auto m = apply_periodic_mask(d, corners_config());
    auto kept = [&](std::uint32_t o, std::uint32_t i) {
        std::vector<KernelPos> out;
        for (std::uint32_t a = 0; a < 3; ++a)
            for (std::uint32_t b = 0; b < 3; ++b)
                if (m(o, i, a, b)) out.emplace_back(a, b);
        return out;
    };
    EXPECT_EQ(kept(0, 0), (std::vector<KernelPos>{{0, 0}, {2, 2}}));
    EXPECT_EQ(kept(0, 1), (std::vector<KernelPos>{{0, 2}, {2, 0}}));
    EXPECT_EQ(kept(1, 0), (std::vector<KernelPos>{{0, 2}, {2, 0}}));
    EXPECT_EQ(kept(1, 1), (std::vector<KernelPos>{{0, 0}, {2, 2}}));
}

TEST(Mask, MatchesOracleAndInvariants)
{
    std::mt19937 rng(12);
    for (int t = 0; t < 40; ++t) {
        std::uint32_t P = std::uniform_int_distribution<int>(1, 8)(rng);
        std::uint32_t kss = std::uniform_int_distribution<int>(1, 9)(rng);
        if (oracle::binom(9, kss) < P) continue;
        auto cfg = oracle::random_config(rng, P, kss, 3, 3);
        auto d = oracle::random_tensor(rng, 9, 7, 3, 3, 1, 127);  // no zeros: slot count == value count
        std::vector<std::vector<std::pair<int, int>>> pats;
        for (const auto& p : cfg.patterns) {
            pats.emplace_back();
            for (auto [a, b] : p.positions) pats.back().emplace_back(int(a), int(b));
        }
        auto m = apply_periodic_mask(d, cfg);
        EXPECT_EQ(m, oracle::mask(d, pats));
        EXPECT_EQ(apply_periodic_mask(m, cfg), m);
        EXPECT_EQ(m.count_nonzero(), std::size_t(9) * 7 * kss);
        EXPECT_NO_THROW(check_compliance(m, cfg));
    }
}

TEST(Mask, DensityTwoNinths)
{
    std::mt19937 rng(1);
    auto d = oracle::random_tensor(rng, 16, 16, 3, 3, 1, 100);
    auto cfg = make_config(d, 8, 2, PatternStrategy::magnitude, 0);
    auto m = apply_periodic_mask(d, cfg);
    EXPECT_DOUBLE_EQ(double(m.count_nonzero()) / double(m.size()), 2.0 / 9.0);
}

TEST(Mask, DimensionMismatch)
{
    EXPECT_THROW(apply_periodic_mask(Tensor4(1, 1, 2, 2), corners_config()), DimensionError);
}

TEST(Compliance, ReportsOffendingWeight)
{
    Tensor4 d(2, 2, 3, 3, std::vector<std::int8_t>(36, 1));
    auto m = apply_periodic_mask(d, corners_config());
    m(1, 0, 1, 1) = 3;
    try {
        check_compliance(m, corners_config());
        FAIL() << "expected ComplianceError";
    } catch (const ComplianceError& e) {
        EXPECT_EQ(e.oc, 1u);
        EXPECT_EQ(e.ic, 0u);
        EXPECT_EQ(e.kh, 1u);
        EXPECT_EQ(e.kw, 1u);
    }
}

TEST(PpsConfigJson, RoundTrip)
{
    auto cfg = corners_config();
    cfg.seed = 42;
    cfg.strategy = PatternStrategy::magnitude;
    EXPECT_EQ(config_from_json(config_to_json(cfg)), cfg);
    EXPECT_THROW(config_from_json("{\"P\": 2}"), ConfigError);
    EXPECT_EQ(parse_strategy(to_string(PatternStrategy::random)), PatternStrategy::random);
    EXPECT_THROW(parse_strategy("best"), ConfigError);
}
