// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sps/pps.hpp"
#include "sps/ppw.hpp"
#include "sps/systolic.hpp"

#include <optional>
#include <vector>

namespace sps {

/// Per-layer convolution geometry and the vector-unit ops applied after it
/// (ReLU, then requantization, then 2x2 max-pooling).
struct LayerStage {
    ConvGeometry geom;
    bool relu = true;
    std::optional<std::uint32_t> requant_shift;
    bool maxpool = false;
};

FeatureMap apply_post_ops(const FeatureMap& fm, const LayerStage& stage);

/// One convolution of a network: dense weights, its pattern config and array shape.
struct NetworkLayer {
    Tensor4 weights;
    PpsConfig cfg;
    std::uint32_t sys_w = 1, sys_h = 1;
    LayerStage stage;
};

std::vector<LayerStage> stages_of(const std::vector<NetworkLayer>& net);

/// Compile every layer to PPW. With nlr, each layer after the first is
/// compiled against its producer's output order.
std::vector<PpwLayer> compile_network(const std::vector<NetworkLayer>& net, bool nlr);

/// Chain simulate_sps over compiled layers. With nlr the layers must carry
/// their producer's out_perm as in_perm; intermediate outputs stay in compiled
/// order and only the last layer is permuted back. Without nlr every layer
/// emits natural order.
SimResult run_network(const std::vector<PpwLayer>& layers, const std::vector<LayerStage>& stages,
                      const FeatureMap& ifm, bool nlr);

/// Chain a whole network in one execution mode (SPS compiles internally;
/// the format models and dense baseline run on masked / dense weights).
SimResult simulate_network(const std::vector<NetworkLayer>& net, const FeatureMap& ifm, SimMode mode, bool nlr);

/// conv2d_dense chain on the masked weights, natural channel order.
FeatureMap dense_reference_chain(const std::vector<NetworkLayer>& net, const FeatureMap& ifm);

/// Set every layer's requantization shift from the masked reference chain
/// run on `ifm`: the RMS of each accumulator map is brought to about 32.
void calibrate_requant_shifts(std::vector<NetworkLayer>& net, const FeatureMap& ifm);

/// Sum of the conv output sizes of every layer except the last.
std::uint64_t intermediate_ofm_elements(const std::vector<NetworkLayer>& net, const FeatureMap& ifm);

}  // namespace sps
