#include "oracles.hpp"
#include "sps/error.hpp"
#include "sps/fixtures.hpp"
#include "sps/storage.hpp"

#include <gtest/gtest.h>

using namespace sps;

namespace {

const LayerShape big = pps_shape("L8", 512, 512, 3, 3, 2);
const auto analytic = BitWidthPolicy::analytic();
const auto calibrated = BitWidthPolicy::paper_calibrated();

}  // namespace

TEST(Storage, DenseExamples)
{
    EXPECT_EQ(storage_dense(big).total_bits(), 8ull * 2359296);
    LayerShape one{"one", 1, 1, 1, 1, 1};
    EXPECT_EQ(storage_dense(one).total_bits(), 8u);
    EXPECT_EQ(storage_dense(big).index_bits, 0u);
}

TEST(Storage, CooWidths)
{
    auto s = storage_coo(big, analytic);
    EXPECT_EQ(s.index_bits, big.nnz * 22);
    EXPECT_EQ(s.weight_bits, big.nnz * 8);
    LayerShape empty = big;
    empty.nnz = 0;
    EXPECT_EQ(storage_coo(empty, analytic).total_bits(), 0u);
    auto wide = analytic;
    wide.coo_index_bits = 28;
    EXPECT_EQ(storage_coo(big, wide).index_bits, big.nnz * 28);
}

TEST(Storage, CsrCsc)
{
    EXPECT_EQ(storage_csr(big, analytic).index_bits,
              big.nnz * 13 + 513ull * std::uint64_t(oracle::clog2(big.nnz + 1)));
    EXPECT_EQ(storage_csc(big, analytic).index_bits,
              big.nnz * 9 + 4609ull * std::uint64_t(oracle::clog2(big.nnz + 1)));
}

TEST(Storage, FkwModel)
{
    const double keep = default_fkw_keep_ratio(big, 2);
    EXPECT_DOUBLE_EQ(keep, 9.0 / 16.0);
    auto s = storage_fkw(big, calibrated, keep, 2);
    const std::uint64_t retained = 147456;  // 0.5625 * 512 * 512
    EXPECT_EQ(s.weight_bits, 8 * 2 * retained);
    EXPECT_EQ(s.index_bits, retained * (8 + 9) + 512 * 9);
    EXPECT_GT(s.index_bits / 8, 250000u);  // hundreds of KB for one late layer
    EXPECT_THROW(storage_fkw(big, calibrated, 0.0, 2), ConfigError);
    EXPECT_THROW(storage_fkw(big, calibrated, 1.5, 2), ConfigError);
    LayerShape tiny{"t", 4, 4, 3, 3, 32};
    auto one = analytic;
    one.fkw_pattern_id_bits = 0;
    EXPECT_EQ(storage_fkw(tiny, one, 1.0, 2).index_bits, 16u * 2 + 4 * 2);
}

TEST(Storage, PpwConstantIndex)
{
    EXPECT_EQ(storage_ppw(big, 8, 2).index_bits, 96u);
    EXPECT_EQ(storage_ppw(big, 8, 2).weight_bits, 512ull * 512 * 2 * 8);
    EXPECT_NEAR(double(storage_dense(big).total_bits()) / double(storage_ppw(big, 8, 2).total_bits()), 4.5, 0.001);
    EXPECT_EQ(storage_ppw(pps_shape("s", 3, 64, 3, 3, 2), 8, 2).index_bits, 96u);
    for (const auto& fx : {vgg16_cifar10(), resnet18_cifar10()})
        for (const auto& s : unique_shapes(fx, 2)) EXPECT_EQ(storage_ppw(s, 8, 2).index_bits, 96u);
}

TEST(Storage, IndexBitsGrowWithNnz)
{
    auto shapes = unique_shapes(vgg16_cifar10(), 2);
    StorageParams p;
    for (auto f : {Format::coo, Format::csr, Format::csc, Format::fkw}) {
        for (std::size_t i = 1; i < shapes.size(); ++i) {
            ASSERT_GT(shapes[i].nnz, shapes[i - 1].nnz);
            EXPECT_GT(storage_of(f, shapes[i], calibrated, p).index_bits,
                      storage_of(f, shapes[i - 1], calibrated, p).index_bits)
                << to_string(f) << " layer " << i;
        }
    }
}

TEST(Storage, TotalNondecreasingInDensity)
{
    StorageParams p;
    for (const auto& s : unique_shapes(vgg16_cifar10(), 2))
        for (auto f : all_formats()) {
            double prev = -1;
            for (int k = 0; k <= 100; ++k) {
                auto v = total_bits_at_density(f, s, k / 100.0, calibrated, p);
                if (!v) {
                    EXPECT_EQ(f, Format::fkw);
                    continue;
                }
                EXPECT_GE(*v, prev);
                prev = *v;
            }
        }
}

TEST(Storage, SparseFormatsNeverBeatDenseWhenFull)
{
    StorageParams p;
    for (const auto& s : unique_shapes(vgg16_cifar10(), 2)) {
        const double dense = double(storage_dense(s).total_bits());
        for (auto f : {Format::coo, Format::csr, Format::csc, Format::ppw}) {
            EXPECT_GE(*total_bits_at_density(f, s, 1.0, analytic, p), dense);
        }
    }
}

TEST(Storage, NetworkOrdering)
{
    auto shapes = unique_shapes(vgg16_cifar10(), 2);
    StorageParams p;
    std::vector<std::uint64_t> totals;
    for (auto f : {Format::dense, Format::coo, Format::csr, Format::csc, Format::fkw, Format::ppw}) {
        totals.push_back(network_storage(f, shapes, calibrated, p).total_bits());
    }
    for (std::size_t i = 1; i < totals.size(); ++i) EXPECT_GT(totals[i - 1], totals[i]);
    EXPECT_EQ(network_storage(Format::ppw, shapes, calibrated, p, true).index_bits, 96u);
    EXPECT_EQ(network_storage(Format::ppw, shapes, calibrated, p, false).index_bits, 96u * 8);
}

TEST(Threshold, ClosedFormAndBisection)
{
    auto lin = effective_sparsity_threshold(100.0, [](double d) { return 400.0 * d; }, 1.0);
    EXPECT_TRUE(lin.achievable);
    EXPECT_TRUE(lin.closed_form);
    EXPECT_NEAR(lin.density, 0.25, 1e-12);
    auto quad = effective_sparsity_threshold(100.0, [](double d) { return 400.0 * d * d; }, 1.0);
    EXPECT_TRUE(quad.achievable);
    EXPECT_FALSE(quad.closed_form);
    EXPECT_NEAR(quad.density, 0.5, 1e-9);
    auto never = effective_sparsity_threshold(1.0, [](double d) { return 5.0 + d; }, 1.0);
    EXPECT_FALSE(never.achievable);
    auto always = effective_sparsity_threshold(1e9, [](double d) { return d; }, 0.3);
    EXPECT_TRUE(always.achievable);
    EXPECT_DOUBLE_EQ(always.density, 0.3);
}

TEST(Threshold, SelfIsFixedPoint)
{
    auto shapes = unique_shapes(vgg16_cifar10(), 2);
    StorageParams p;
    const double ppw = double(network_storage(Format::ppw, shapes, calibrated, p).total_bits());
    auto t = effective_sparsity_threshold(ppw, Format::ppw, shapes, calibrated, p);
    EXPECT_NEAR(t.density, 2.0 / 9.0, 1e-9);
}

TEST(Threshold, CooAtConstantWidthIsReciprocal)
{
    auto shapes = unique_shapes(vgg16_cifar10(), 2);
    StorageParams p;
    auto wide = analytic;
    wide.coo_index_bits = 28;
    const double dense = double(network_storage(Format::dense, shapes, wide, p).total_bits());
    auto t = effective_sparsity_threshold(dense, Format::coo, shapes, wide, p);
    EXPECT_NEAR(t.density, 8.0 / 36.0, 1e-9);
}

TEST(StorageReport, CsvShape)
{
    auto shapes = unique_shapes(vgg16_cifar10(), 2);
    auto rows = storage_table(shapes, calibrated, {});
    EXPECT_EQ(rows.size(), shapes.size() * all_formats().size());
    auto csv = storage_csv(rows);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "layer,format,weight_bits,index_bits,total_bits,percent_index");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), long(rows.size() + 1));
    EXPECT_NE(storage_json(rows).find("\"ppw\""), std::string::npos);
    EXPECT_EQ(parse_format("csc"), Format::csc);
    EXPECT_THROW(parse_format("bsr"), ConfigError);
    EXPECT_EQ(parse_preset("paper-calibrated"), BitWidthPreset::paper_calibrated);
}
