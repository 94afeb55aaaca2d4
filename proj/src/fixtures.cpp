// SPDX-License-Identifier: Apache-2.0
#include "sps/fixtures.hpp"

#include "sps/error.hpp"

#include <random>

namespace sps {

NetworkFixture vgg16_cifar10()
{
    NetworkFixture fx;
    fx.name = "vgg16";
    struct Row {
        std::uint32_t c_in, c_out;
        bool pool;
    };
    const Row rows[] = {{3, 64, false},    {64, 64, true},    {64, 128, false},  {128, 128, true},
                        {128, 256, false}, {256, 256, false}, {256, 256, true},  {256, 512, false},
                        {512, 512, false}, {512, 512, true},  {512, 512, false}, {512, 512, false},
                        {512, 512, true}};
    int k = 1;
    for (const auto& r : rows) {
        FixtureLayer l;
        l.name = "conv" + std::to_string(k++);
        l.c_in = r.c_in;
        l.c_out = r.c_out;
        l.maxpool = r.pool;
        fx.layers.push_back(l);
    }
    // conv1 has a single input channel per group at P=8; a one-column array avoids padding it.
    fx.layers[0].sys_w = 1;

    const std::pair<std::uint32_t, std::uint32_t> unique[] = {{3, 64},    {64, 64},   {64, 128},  {128, 128},
                                                              {128, 256}, {256, 256}, {256, 512}, {512, 512}};
    k = 1;
    for (auto [ci, co] : unique) {
        FixtureLayer l;
        l.name = "L" + std::to_string(k++);
        l.c_in = ci;
        l.c_out = co;
        fx.unique.push_back(l);
    }
    return fx;
}

NetworkFixture resnet18_cifar10()
{
    NetworkFixture fx;
    fx.name = "resnet18";
    struct Row {
        std::uint32_t c_in, c_out, count;
    };
    const Row rows[] = {{3, 64, 1},    {64, 64, 4},   {64, 128, 1},  {128, 128, 3},
                        {128, 256, 1}, {256, 256, 3}, {256, 512, 1}, {512, 512, 3}};
    int k = 1;
    for (const auto& r : rows) {
        if (r.c_out == 2 * r.c_in && !fx.layers.empty()) {
            fx.layers.back().maxpool = true;  // stage transition: halve the resolution
        }
        for (std::uint32_t n = 0; n < r.count; ++n) {
            FixtureLayer l;
            l.name = "conv" + std::to_string(k++);
            l.c_in = r.c_in;
            l.c_out = r.c_out;
            fx.layers.push_back(l);
        }
    }
    fx.layers[0].sys_w = 1;

    k = 1;
    for (const auto& r : rows) {
        FixtureLayer l;
        l.name = "L" + std::to_string(k++);
        l.c_in = r.c_in;
        l.c_out = r.c_out;
        fx.unique.push_back(l);
    }
    return fx;
}

NetworkFixture fixture_by_name(const std::string& name)
{
    if (name == "vgg16") return vgg16_cifar10();
    if (name == "resnet18") return resnet18_cifar10();
    throw ConfigError("unknown network fixture \"" + name + "\" (expected vgg16|resnet18)");
}

std::vector<LayerShape> unique_shapes(const NetworkFixture& fx, std::uint32_t support)
{
    std::vector<LayerShape> shapes;
    for (const auto& l : fx.unique) {
        shapes.push_back(pps_shape(l.name, l.c_out, l.c_in, l.h_k, l.w_k, support));
    }
    return shapes;
}

std::uint32_t default_requant_shift(std::uint32_t c_in, std::uint32_t support)
{
    return 7 + (ceil_log2(std::uint64_t(c_in) * support) + 1) / 2;
}

Tensor4 random_tensor(std::uint32_t c_out, std::uint32_t c_in, std::uint32_t h_k, std::uint32_t w_k,
                      std::uint64_t seed)
{
    Tensor4 t(c_out, c_in, h_k, w_k);
    std::mt19937_64 rng(seed);
    for (auto& v : t.values()) {
        v = std::int8_t(std::uint8_t(rng() & 0xFF));
    }
    return t;
}

FeatureMap random_feature_map(std::uint32_t c, std::uint32_t h, std::uint32_t w, std::uint64_t seed)
{
    FeatureMap fm(c, h, w);
    std::mt19937_64 rng(seed);
    for (auto& v : fm.values()) {
        v = std::int32_t(std::int8_t(std::uint8_t(rng() & 0xFF)));
    }
    return fm;
}

std::vector<NetworkLayer> build_network(const NetworkFixture& fx, const NetworkBuildOptions& opts)
{
    std::vector<NetworkLayer> net;
    std::mt19937_64 seeds(opts.seed);
    if (!opts.weights.empty() && opts.weights.size() != fx.layers.size()) {
        throw ConfigError("build_network: " + std::to_string(opts.weights.size()) + " weight overrides for " +
                          std::to_string(fx.layers.size()) + " layers");
    }
    for (std::size_t i = 0; i < fx.layers.size(); ++i) {
        const auto& l = fx.layers[i];
        const std::uint64_t w_seed = seeds();
        const std::uint64_t p_seed = seeds();
        NetworkLayer nl;
        if (!opts.weights.empty() && opts.weights[i]) {
            nl.weights = *opts.weights[i];
            if (nl.weights.c_out() != l.c_out || nl.weights.c_in() != l.c_in || nl.weights.h_k() != l.h_k ||
                nl.weights.w_k() != l.w_k) {
                throw DimensionError(l.name + ": weights " + nl.weights.dims_string() + " do not match the layer");
            }
        } else {
            nl.weights = random_tensor(l.c_out, l.c_in, l.h_k, l.w_k, w_seed);
        }
        if (opts.patterns) {
            nl.cfg.period = opts.period;
            nl.cfg.support = opts.support;
            nl.cfg.h_k = l.h_k;
            nl.cfg.w_k = l.w_k;
            nl.cfg.patterns = *opts.patterns;
            nl.cfg.seed = p_seed;
            nl.cfg.strategy = PatternStrategy::fixed;
            nl.cfg.validate();
        } else {
            nl.cfg = make_config(nl.weights, opts.period, opts.support, opts.strategy, p_seed);
        }
        nl.sys_w = opts.sys_w.value_or(l.sys_w);
        nl.sys_h = opts.sys_h.value_or(l.sys_h);
        nl.stage.geom = l.geom;
        nl.stage.relu = true;
        nl.stage.requant_shift = default_requant_shift(l.c_in, opts.support);
        nl.stage.maxpool = l.maxpool;
        net.push_back(std::move(nl));
    }
    return net;
}

}  // namespace sps
