// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sps/network.hpp"
#include "sps/storage.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sps {

/// A convolution of a built-in network. sys_w / sys_h are the array shape
/// used when the fixture is simulated.
struct FixtureLayer {
    std::string name;
    std::uint32_t c_in = 1, c_out = 1;
    std::uint32_t h_k = 3, w_k = 3;
    ConvGeometry geom{1, 1};
    bool maxpool = false;
    std::uint32_t sys_w = 8, sys_h = 8;
};

struct NetworkFixture {
    std::string name;
    std::uint32_t in_c = 3, in_h = 32, in_w = 32;
    std::vector<FixtureLayer> layers;  // execution chain
    std::vector<FixtureLayer> unique;  // layers with distinct weight shapes (L1, L2, ...)
};

/// VGG16 for CIFAR-10: 13 3x3 convolutions, max-pooling after conv 2, 4, 7, 10, 13.
NetworkFixture vgg16_cifar10();

/// The 3x3 convolutions of ResNet18 for CIFAR-10 as a plain chain (residual
/// adds omitted). Each stage transition halves the resolution with a 2x2
/// max-pool in place of a stride-2 convolution.
NetworkFixture resnet18_cifar10();

NetworkFixture fixture_by_name(const std::string& name);

/// PPS layer shapes of the fixture's unique layers.
std::vector<LayerShape> unique_shapes(const NetworkFixture& fx, std::uint32_t support);

/// Requantization shift that keeps a layer's outputs near the 8-bit range for
/// random int8 weights and activations.
std::uint32_t default_requant_shift(std::uint32_t c_in, std::uint32_t support);

struct NetworkBuildOptions {
    std::uint32_t period = 8;
    std::uint32_t support = 2;
    PatternStrategy strategy = PatternStrategy::magnitude;
    std::uint64_t seed = 1;
    std::optional<std::uint32_t> sys_w, sys_h;  // override every layer's array shape
    std::optional<std::vector<KernelVariant>> patterns;  // fixed patterns for every layer
    std::vector<std::optional<Tensor4>> weights;         // per-layer weights instead of random ones
};

/// Instantiate a fixture with seeded random int8 weights and per-layer patterns.
/// Two seeds are drawn per layer whether or not they are used, so overriding
/// one layer leaves the others unchanged.
std::vector<NetworkLayer> build_network(const NetworkFixture& fx, const NetworkBuildOptions& opts);

/// Seeded random tensors (uniform over the full int8 range).
Tensor4 random_tensor(std::uint32_t c_out, std::uint32_t c_in, std::uint32_t h_k, std::uint32_t w_k,
                      std::uint64_t seed);
FeatureMap random_feature_map(std::uint32_t c, std::uint32_t h, std::uint32_t w, std::uint64_t seed);

}  // namespace sps
