#include "oracles.hpp"
#include "sps/error.hpp"
#include "sps/ppw.hpp"

#include <gtest/gtest.h>

using namespace sps;

namespace {

using Groups = std::vector<std::vector<std::uint32_t>>;

PpsConfig full_config(std::uint32_t hk, std::uint32_t wk)
{
    PpsConfig cfg;
    cfg.period = 1;
    cfg.support = hk * wk;
    cfg.h_k = hk;
    cfg.w_k = wk;
    KernelVariant all;
    for (std::uint32_t t = 0; t < hk * wk; ++t) all.positions.emplace_back(t / wk, t % wk);
    cfg.patterns = {all};
    return cfg;
}

}  // namespace

TEST(GroupChannels, Examples)
{
    auto a = group_channels(6, 3);
    EXPECT_EQ(a.groups, (Groups{{0, 3}, {1, 4}, {2, 5}}));
    EXPECT_EQ(a.group_size, 2u);
    auto b = group_channels(7, 3);
    EXPECT_EQ(b.groups, (Groups{{0, 3, 6}, {1, 4}, {2, 5}}));
    EXPECT_EQ(b.group_size, 3u);
    EXPECT_EQ(b.padded_size, 3u);
    auto c = group_channels(5, 1);
    EXPECT_EQ(c.groups, (Groups{{0, 1, 2, 3, 4}}));
    auto d = group_channels(3, 8);
    EXPECT_EQ(d.groups.size(), 8u);
    EXPECT_EQ(d.group_size, 1u);
    EXPECT_TRUE(d.groups[5].empty());
}

TEST(GroupChannels, PartitionProperty)
{
    for (std::uint32_t n = 1; n < 40; ++n)
        for (std::uint32_t p = 1; p <= 9; ++p) {
            auto t = group_channels(n, p);
            std::vector<int> seen(n, 0);
            std::size_t lo = n, hi = 0;
            for (std::uint32_t g = 0; g < p; ++g) {
                for (std::size_t k = 0; k < t.groups[g].size(); ++k) {
                    EXPECT_EQ(t.groups[g][k], g + k * p);
                    ++seen[t.groups[g][k]];
                }
                lo = std::min(lo, t.groups[g].size());
                hi = std::max(hi, t.groups[g].size());
            }
            for (int s : seen) EXPECT_EQ(s, 1);
            EXPECT_LE(hi - lo, 1u);
            EXPECT_EQ(t.group_size, (n + p - 1) / p);
        }
}

TEST(PadGroups, RoundsUp)
{
    EXPECT_EQ(pad_groups(group_channels(7, 3), 2).padded_size, 4u);
    EXPECT_EQ(pad_groups(group_channels(7, 3), 3).padded_size, 3u);
    EXPECT_EQ(pad_groups(group_channels(7, 3), 4).padded_size, 4u);
    EXPECT_EQ(pad_groups(group_channels(64, 8), 8).padded_size, 8u);
}

TEST(Slot, Examples)
{
    EXPECT_EQ(slot(0, 0, 0, 2, 16), 0u);
    EXPECT_EQ(slot(1, 2, 0, 2, 6), 0u);
    EXPECT_EQ(slot(7, 7, 1, 2, 16), 13u);
    static_assert(slot(7, 7, 1, 2, 16) == 13);
}

TEST(Slot, OnlySumMatters)
{
    for (std::uint32_t p = 1; p <= 8; ++p)
        for (std::uint32_t kss = 1; kss <= 4; ++kss)
            for (std::uint32_t g = 0; g < p; ++g)
                for (std::uint32_t k = 0; k < p; ++k)
                    for (std::uint32_t w = 0; w < kss; ++w) {
                        EXPECT_EQ(slot(g, k, w, kss, p * kss), slot((g + p - 1) % p, (k + 1) % p, w, kss, p * kss));
                        EXPECT_EQ(slot(g, k, w, kss, p * kss), ((g + k) % p) * kss + w);
                    }
}

TEST(CompileLayer, FullPatternIsRelayout)
{
    std::mt19937 rng(3);
    auto d = oracle::random_tensor(rng, 4, 6, 3, 3);
    auto l = compile_layer(d, full_config(3, 3), 2, 2);
    // P = 1: weight order is [oc][ic][tap] with row-major taps.
    ASSERT_EQ(l.weights.size(), d.size());
    for (std::uint32_t o = 0; o < 4; ++o)
        for (std::uint32_t i = 0; i < 6; ++i)
            for (std::uint32_t t = 0; t < 9; ++t) EXPECT_EQ(l.weights[(o * 6 + i) * 9 + t], d(o, i, t / 3, t % 3));
    EXPECT_EQ(decode_ppw(l), d);
}

TEST(CompileLayer, ThreeGroupExample)
{
    std::mt19937 rng(4);
    auto cfg = oracle::random_config(rng, 3, 2, 3, 3);
    std::vector<std::vector<std::pair<int, int>>> pats;
    for (const auto& p : cfg.patterns) {
        pats.emplace_back();
        for (auto [a, b] : p.positions) pats.back().emplace_back(int(a), int(b));
    }
    auto m = oracle::mask(oracle::random_tensor(rng, 6, 9, 3, 3), pats);
    auto l = compile_layer(m, cfg, 1, 1);
    EXPECT_EQ(l.ic_table.groups, (Groups{{0, 3, 6}, {1, 4, 7}, {2, 5, 8}}));
    EXPECT_EQ(l.ic_table.group_size, 3u);
    EXPECT_EQ(l.out_perm, (std::vector<std::uint32_t>{0, 3, 1, 4, 2, 5}));
    // Every weight lands at the canonical position with the pattern of KV (g + kv) mod P.
    for (std::uint32_t g = 0; g < 3; ++g)
        for (std::uint32_t k = 0; k < 3; ++k)
            for (std::uint32_t a = 0; a < 2; ++a)
                for (std::uint32_t b = 0; b < 3; ++b)
                    for (std::uint32_t w = 0; w < 2; ++w) {
                        std::uint32_t oc = g + 3 * a, ic = k + 3 * b;
                        auto [kh, kw] = pats[(g + k) % 3][w];
                        EXPECT_EQ(l.weights[l.weight_index(g, k, a, b, w)], m(oc, ic, kh, kw));
                        EXPECT_EQ(l.kh_buf[slot(g, k, w, 2, 6)], kh);
                        EXPECT_EQ(l.kw_buf[slot(g, k, w, 2, 6)], kw);
                    }
}

TEST(CompileLayer, RoundTripRandom)
{
    std::mt19937 rng(5);
    auto cfg = oracle::random_config(rng, 2, 2, 3, 3);
    auto m = apply_periodic_mask(oracle::random_tensor(rng, 8, 8, 3, 3), cfg);
    auto l = compile_layer(m, cfg, 2, 2);
    EXPECT_EQ(decode_ppw(l), m);
    EXPECT_EQ(decode_ppw_natural(l), m);
}

TEST(CompileLayer, InvariantsOverRandomShapes)
{
    std::mt19937 rng(6);
    for (int t = 0; t < 150; ++t) {
        std::uniform_int_distribution<int> dim(1, 16), sys(1, 4), pd(1, 8);
        std::uint32_t hk = std::uniform_int_distribution<int>(1, 3)(rng);
        std::uint32_t wk = std::uniform_int_distribution<int>(1, 3)(rng);
        std::uint32_t kss = std::uniform_int_distribution<int>(1, int(hk * wk))(rng);
        std::uint32_t P = pd(rng);
        if (oracle::binom(hk * wk, kss) < P) continue;
        auto cfg = oracle::random_config(rng, P, kss, hk, wk);
        auto m = apply_periodic_mask(oracle::random_tensor(rng, dim(rng), dim(rng), hk, wk), cfg);
        std::uint32_t sw = sys(rng), sh = sys(rng);
        auto l = compile_layer(m, cfg, sw, sh);
        EXPECT_NO_THROW(l.validate());
        EXPECT_EQ(decode_ppw(l), m);
        EXPECT_EQ(decode_ppw(compile_layer(m, cfg, 1, 1)), m);  // padding neutrality
        EXPECT_EQ(l.weights.size(),
                  std::size_t(P) * P * l.oc_table.padded_size * l.ic_table.padded_size * kss);
        EXPECT_EQ(l.ic_table.padded_size % sw, 0u);
        EXPECT_EQ(l.oc_table.padded_size % sh, 0u);
        // concatenated oc groups followed by out_perm is the identity
        std::vector<std::uint32_t> concat;
        for (const auto& g : l.oc_table.groups) concat.insert(concat.end(), g.begin(), g.end());
        EXPECT_EQ(concat, l.out_perm);
        for (std::uint32_t v = 0; v < P; ++v)
            for (std::uint32_t w = 0; w < kss; ++w) {
                EXPECT_EQ(l.kh_buf[v * kss + w], cfg.patterns[v].positions[w].first);
                EXPECT_EQ(l.kw_buf[v * kss + w], cfg.patterns[v].positions[w].second);
            }
    }
}

TEST(CompileLayer, RejectsNonCompliant)
{
    std::mt19937 rng(7);
    auto cfg = oracle::random_config(rng, 2, 2, 3, 3);
    auto m = apply_periodic_mask(oracle::random_tensor(rng, 4, 4, 3, 3, 1, 50), cfg);
    // find a tap outside kernel (2, 3)'s pattern
    const auto& pat = cfg.patterns[kv_of(2, 3, 2)];
    for (std::uint32_t t = 0; t < 9; ++t) {
        if (!pat.contains(t / 3, t % 3)) {
            m(2, 3, t / 3, t % 3) = 9;
            try {
                compile_layer(m, cfg, 1, 1);
                FAIL();
            } catch (const ComplianceError& e) {
                EXPECT_EQ(e.oc, 2u);
                EXPECT_EQ(e.ic, 3u);
                EXPECT_EQ(e.kh, t / 3);
                EXPECT_EQ(e.kw, t % 3);
            }
            break;
        }
    }
}

TEST(Decode, HandBuiltLayer)
{
    PpwLayer l;
    l.period = 1;
    l.support = 2;
    l.h_k = l.w_k = 2;
    l.c_in = 2;
    l.c_out = 1;
    l.ic_table = group_channels(2, 1);
    l.oc_table = group_channels(1, 1);
    l.kh_buf = {0, 1};
    l.kw_buf = {1, 0};
    l.out_perm = {0};
    l.in_perm = {0, 1};
    l.weights = {5, -6, 7, 8};  // [ic][w]
    Tensor4 expect(1, 2, 2, 2);
    expect(0, 0, 0, 1) = 5;
    expect(0, 0, 1, 0) = -6;
    expect(0, 1, 0, 1) = 7;
    expect(0, 1, 1, 0) = 8;
    EXPECT_EQ(decode_ppw(l), expect);

    l.weights.assign(4, 0);
    EXPECT_EQ(decode_ppw(l), Tensor4(1, 2, 2, 2));
}

TEST(Decode, RejectsInconsistentLayers)
{
    std::mt19937 rng(8);
    auto cfg = oracle::random_config(rng, 2, 2, 3, 3);
    auto good = compile_layer(apply_periodic_mask(oracle::random_tensor(rng, 5, 5, 3, 3), cfg), cfg, 2, 2);
    auto a = good;
    a.kh_buf.pop_back();
    EXPECT_THROW(decode_ppw(a), FormatError);
    auto b = good;
    b.out_perm[0] = b.out_perm[1];
    EXPECT_THROW(decode_ppw(b), FormatError);
    auto c = good;
    c.weights.push_back(0);
    EXPECT_THROW(decode_ppw(c), FormatError);
    auto d = good;
    d.ic_table.groups[0][0] = 99;
    EXPECT_THROW(decode_ppw(d), FormatError);
    auto e = good;
    e.weights[e.weight_index(1, 0, 3, 0, 0)] = 1;  // oc group 1 holds 2 channels; position 3 is padding
    EXPECT_THROW(decode_ppw(e), FormatError);
}

TEST(NextLayerReorder, IdentityProducer)
{
    std::mt19937 rng(9);
    auto c1 = full_config(1, 1);
    auto w1 = oracle::random_tensor(rng, 6, 3, 1, 1);
    auto prod = compile_layer(w1, c1, 1, 1);
    auto cfg2 = oracle::random_config(rng, 2, 2, 3, 3);
    auto w2 = oracle::random_tensor(rng, 4, 6, 3, 3);
    auto nlr = next_layer_reorder(prod, cfg2, w2, 2, 2);
    EXPECT_EQ(nlr, compile_layer(apply_periodic_mask(w2, cfg2), cfg2, 2, 2));
}

TEST(NextLayerReorder, ConsumesProducerOrder)
{
    std::mt19937 rng(10);
    auto cfg1 = oracle::random_config(rng, 3, 2, 3, 3);
    auto cfg2 = oracle::random_config(rng, 2, 3, 3, 3);
    auto prod = compile_layer(apply_periodic_mask(oracle::random_tensor(rng, 7, 4, 3, 3), cfg1), cfg1, 2, 1);
    auto w2 = oracle::random_tensor(rng, 5, 7, 3, 3);
    auto cons = next_layer_reorder(prod, cfg2, w2, 1, 2);
    EXPECT_EQ(cons.in_perm, prod.out_perm);
    EXPECT_EQ(decode_ppw_natural(cons), apply_periodic_mask(w2, cfg2));
    // consumed-order tensor is the masked tensor with its input axis in producer order
    EXPECT_EQ(decode_ppw(cons), permute_input_channels(apply_periodic_mask(w2, cfg2), invert_permutation(prod.out_perm)));
    EXPECT_THROW(next_layer_reorder(prod, cfg2, oracle::random_tensor(rng, 5, 6, 3, 3), 1, 1), DimensionError);
}
