// SPDX-License-Identifier: Apache-2.0
#include "sps/network.hpp"

#include "sps/error.hpp"

#include <cmath>

namespace sps {

FeatureMap apply_post_ops(const FeatureMap& fm, const LayerStage& stage)
{
    FeatureMap out = stage.relu ? relu(fm) : fm;
    if (stage.requant_shift) {
        out = requantize(out, *stage.requant_shift);
    }
    if (stage.maxpool) {
        out = maxpool2(out);
    }
    return out;
}

std::vector<LayerStage> stages_of(const std::vector<NetworkLayer>& net)
{
    std::vector<LayerStage> stages;
    stages.reserve(net.size());
    for (const auto& l : net) {
        stages.push_back(l.stage);
    }
    return stages;
}

std::vector<PpwLayer> compile_network(const std::vector<NetworkLayer>& net, bool nlr)
{
    std::vector<PpwLayer> layers;
    layers.reserve(net.size());
    for (std::size_t k = 0; k < net.size(); ++k) {
        const auto& l = net[k];
        if (k > 0 && net[k - 1].weights.c_out() != l.weights.c_in()) {
            throw DimensionError("compile_network: layer " + std::to_string(k - 1) + " emits " +
                                 std::to_string(net[k - 1].weights.c_out()) + " channels, layer " +
                                 std::to_string(k) + " expects " + std::to_string(l.weights.c_in()));
        }
        if (nlr && k > 0) {
            layers.push_back(next_layer_reorder(layers.back(), l.cfg, l.weights, l.sys_w, l.sys_h));
        } else {
            layers.push_back(compile_layer(apply_periodic_mask(l.weights, l.cfg), l.cfg, l.sys_w, l.sys_h));
        }
    }
    return layers;
}

SimResult run_network(const std::vector<PpwLayer>& layers, const std::vector<LayerStage>& stages,
                      const FeatureMap& ifm, bool nlr)
{
    if (layers.empty() || layers.size() != stages.size()) {
        throw DimensionError("run_network: need one stage per layer and at least one layer");
    }
    SimResult res;
    res.mode = SimMode::sps;
    FeatureMap act = ifm;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& layer = layers[k];
        if (k > 0 && layers[k - 1].c_out != layer.c_in) {
            throw DimensionError("run_network: layer " + std::to_string(k) + " expects c_in=" +
                                 std::to_string(layer.c_in) + " but receives " + std::to_string(layers[k - 1].c_out));
        }
        const auto& expected_in = (nlr && k > 0) ? layers[k - 1].out_perm : identity_permutation(layer.c_in);
        if (layer.in_perm != expected_in) {
            throw DimensionError("run_network: layer " + std::to_string(k) +
                                 " was not compiled for its producer's channel order (nlr=" +
                                 (nlr ? std::string("on") : std::string("off")) + ")");
        }
        const bool last = k + 1 == layers.size();
        auto step = simulate_sps(act, layer, stages[k].geom, !nlr || last);
        res.counters += step.counters;
        act = apply_post_ops(step.ofm, stages[k]);
    }
    res.ofm = std::move(act);
    return res;
}

SimResult simulate_network(const std::vector<NetworkLayer>& net, const FeatureMap& ifm, SimMode mode, bool nlr)
{
    if (mode == SimMode::sps) {
        return run_network(compile_network(net, nlr), stages_of(net), ifm, nlr);
    }
    SimResult res;
    res.mode = mode;
    FeatureMap act = ifm;
    for (const auto& l : net) {
        SimResult step;
        switch (mode) {
        case SimMode::dense_baseline:
            step = simulate_dense_baseline(act, l.weights, l.stage.geom, l.sys_w, l.sys_h);
            break;
        case SimMode::csr_model:
            step = simulate_format_model(act, apply_periodic_mask(l.weights, l.cfg), l.stage.geom, FormatModel::csr);
            break;
        case SimMode::fkw_model:
            step = simulate_format_model(act, apply_periodic_mask(l.weights, l.cfg), l.stage.geom, FormatModel::fkw);
            break;
        case SimMode::sps: break;
        }
        res.counters += step.counters;
        act = apply_post_ops(step.ofm, l.stage);
    }
    res.ofm = std::move(act);
    return res;
}

FeatureMap dense_reference_chain(const std::vector<NetworkLayer>& net, const FeatureMap& ifm)
{
    FeatureMap act = ifm;
    for (const auto& l : net) {
        act = apply_post_ops(conv2d_dense(act, apply_periodic_mask(l.weights, l.cfg), l.stage.geom), l.stage);
    }
    return act;
}

void calibrate_requant_shifts(std::vector<NetworkLayer>& net, const FeatureMap& ifm)
{
    FeatureMap act = ifm;
    for (auto& l : net) {
        FeatureMap acc = conv2d_dense(act, apply_periodic_mask(l.weights, l.cfg), l.stage.geom);
        double sq = 0;
        for (auto v : acc.values()) sq += double(v) * double(v);
        const double rms = acc.values().empty() ? 0.0 : std::sqrt(sq / double(acc.values().size()));
        l.stage.requant_shift = rms > 64.0 ? std::uint32_t(std::floor(std::log2(rms / 32.0))) : 0u;
        act = apply_post_ops(acc, l.stage);
    }
}

std::uint64_t intermediate_ofm_elements(const std::vector<NetworkLayer>& net, const FeatureMap& ifm)
{
    std::uint64_t total = 0;
    std::uint32_t h = ifm.h(), w = ifm.w();
    for (std::size_t k = 0; k < net.size(); ++k) {
        const auto& l = net[k];
        const auto ho = l.stage.geom.output_extent(h, l.weights.h_k());
        const auto wo = l.stage.geom.output_extent(w, l.weights.w_k());
        if (k + 1 < net.size()) {
            total += std::uint64_t(l.weights.c_out()) * ho * wo;
        }
        h = l.stage.maxpool ? ho / 2 : ho;
        w = l.stage.maxpool ? wo / 2 : wo;
    }
    return total;
}

}  // namespace sps
