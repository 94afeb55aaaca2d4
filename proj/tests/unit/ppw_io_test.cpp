#include "oracles.hpp"
#include "sps/error.hpp"
#include "sps/ppw.hpp"
#include "sps/storage.hpp"

#include <gtest/gtest.h>

using namespace sps;

namespace {

PpwLayer sample(std::uint32_t seed, std::uint32_t P = 8, std::uint32_t kss = 2)
{
    std::mt19937 rng(seed);
    auto cfg = oracle::random_config(rng, P, kss, 3, 3);
    return compile_layer(apply_periodic_mask(oracle::random_tensor(rng, 20, 11, 3, 3), cfg), cfg, 2, 4);
}

std::uint32_t u32_at(const std::vector<std::uint8_t>& b, std::size_t at)
{
    return b[at] | (b[at + 1] << 8) | (b[at + 2] << 16) | (std::uint32_t(b[at + 3]) << 24);
}

}  // namespace

TEST(PpwIo, HeaderAndMagic)
{
    auto l = sample(1);
    auto b = serialize(l);
    EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "PPW1");
    EXPECT_EQ(b[4], 1);
    EXPECT_EQ(b[5] | (b[6] << 8), 8);   // P
    EXPECT_EQ(b[7] | (b[8] << 8), 2);   // KSS
    EXPECT_EQ(b[9], 3);
    EXPECT_EQ(b[10], 3);
    EXPECT_EQ(u32_at(b, 11), 11u);      // c_in
    EXPECT_EQ(u32_at(b, 15), 20u);      // c_out
    EXPECT_EQ(b[19] | (b[20] << 8), 2); // sys_w
    EXPECT_EQ(b[21] | (b[22] << 8), 4); // sys_h
}

TEST(PpwIo, IndexSectionIs96Bits)
{
    auto l = sample(2);
    EXPECT_EQ(index_section_bits(l), 96u);
    // equal to the storage model and independent of layer size
    EXPECT_EQ(index_section_bits(l), storage_ppw(pps_shape("x", 512, 512, 3, 3, 2), 8, 2).index_bits);
    // packed taps: first byte holds kh0 | kw0 << 2 | kh1 << 4 | kw1 << 6
    auto b = serialize(l);
    EXPECT_EQ(b[23], l.kh_buf[0] | (l.kw_buf[0] << 2) | (l.kh_buf[1] << 4) | (l.kw_buf[1] << 6));
}

TEST(PpwIo, RoundTrip)
{
    for (std::uint32_t s = 0; s < 20; ++s) {
        auto l = sample(s, 1 + s % 8, 1 + s % 3);
        auto b = serialize(l);
        auto back = deserialize_ppw(b);
        EXPECT_EQ(back, l);
        EXPECT_EQ(serialize(back), b);
    }
}

TEST(PpwIo, OneByOneKernels)
{
    std::mt19937 rng(3);
    auto cfg = oracle::random_config(rng, 1, 1, 1, 1);
    auto l = compile_layer(oracle::random_tensor(rng, 4, 4, 1, 1), cfg, 1, 1);
    EXPECT_EQ(index_section_bits(l), 32u);
    EXPECT_EQ(deserialize_ppw(serialize(l)), l);
}

TEST(PpwIo, RejectsCorruptFiles)
{
    auto b = serialize(sample(4));
    auto truncated = b;
    truncated.resize(b.size() - 1);
    EXPECT_THROW(deserialize_ppw(truncated), FormatError);
    auto magic = b;
    magic[3] = '2';
    EXPECT_THROW(deserialize_ppw(magic), FormatError);
    auto version = b;
    version[4] = 9;
    EXPECT_THROW(deserialize_ppw(version), FormatError);
    auto trailing = b;
    trailing.push_back(0);
    EXPECT_THROW(deserialize_ppw(trailing), FormatError);
    auto perm = b;
    perm[b.size() - sample(4).weights.size() - 4 * 11 - 4] ^= 0x40;  // last out_perm entry
    EXPECT_THROW(deserialize_ppw(perm), FormatError);
    EXPECT_THROW(deserialize_ppw(std::vector<std::uint8_t>{}), FormatError);
}
