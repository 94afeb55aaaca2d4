// SPDX-License-Identifier: Apache-2.0
#include "sps/ppw.hpp"

#include "sps/error.hpp"

#include <algorithm>
#include <numeric>

namespace sps {

namespace {

std::uint32_t ceil_div(std::uint32_t a, std::uint32_t b) { return (a + b - 1) / b; }

void check_table(const GroupTable& t, std::uint32_t period, std::uint32_t n, std::uint32_t lanes, const char* name)
{
    auto fail = [name](const std::string& msg) { throw FormatError(std::string(name) + ": " + msg); };
    if (t.groups.size() != period) {
        fail("expected " + std::to_string(period) + " groups, got " + std::to_string(t.groups.size()));
    }
    if (t.group_size != ceil_div(n, period)) {
        fail("group_size " + std::to_string(t.group_size) + " != ceil(" + std::to_string(n) + "/" +
             std::to_string(period) + ")");
    }
    if (t.padded_size < t.group_size || t.padded_size % lanes != 0) {
        fail("padded_size " + std::to_string(t.padded_size) + " is not a multiple of " + std::to_string(lanes) +
             " covering group_size");
    }
    std::vector<bool> seen(n, false);
    for (const auto& g : t.groups) {
        if (g.size() > t.group_size) {
            fail("group larger than group_size");
        }
        for (auto c : g) {
            if (c >= n || seen[c]) {
                fail("channel " + std::to_string(c) + " out of range or repeated");
            }
            seen[c] = true;
        }
    }
    if (t.channel_count() != n) {
        fail("groups do not cover all " + std::to_string(n) + " channels");
    }
}

}  // namespace

std::size_t GroupTable::channel_count() const
{
    std::size_t n = 0;
    for (const auto& g : groups) {
        n += g.size();
    }
    return n;
}

GroupTable group_channels(std::uint32_t n, std::uint32_t period)
{
    if (n == 0 || period == 0) {
        throw DimensionError("group_channels: n and P must be >= 1");
    }
    GroupTable t;
    t.groups.resize(period);
    for (std::uint32_t c = 0; c < n; ++c) {
        t.groups[c % period].push_back(c);
    }
    t.group_size = ceil_div(n, period);
    t.padded_size = t.group_size;
    return t;
}

GroupTable pad_groups(GroupTable table, std::uint32_t lanes)
{
    if (lanes == 0) {
        throw DimensionError("pad_groups: systolic dimension must be >= 1");
    }
    table.padded_size = ceil_div(table.group_size, lanes) * lanes;
    return table;
}

void PpwLayer::validate() const
{
    if (period == 0 || support == 0 || h_k == 0 || w_k == 0 || sys_w == 0 || sys_h == 0 || c_in == 0 ||
        c_out == 0) {
        throw FormatError("PpwLayer: zero-sized parameter");
    }
    if (kh_buf.size() != w_num() || kw_buf.size() != w_num()) {
        throw FormatError("PpwLayer: index buffers must hold W_NUM=" + std::to_string(w_num()) + " entries");
    }
    for (std::uint32_t v = 0; v < period; ++v) {
        for (std::uint32_t w = 0; w < support; ++w) {
            auto s = v * support + w;
            if (kh_buf[s] >= h_k || kw_buf[s] >= w_k) {
                throw FormatError("PpwLayer: index buffer slot " + std::to_string(s) + " outside kernel");
            }
            for (std::uint32_t u = 0; u < w; ++u) {
                if (kh_buf[v * support + u] == kh_buf[s] && kw_buf[v * support + u] == kw_buf[s]) {
                    throw FormatError("PpwLayer: pattern " + std::to_string(v) + " repeats a tap");
                }
            }
        }
    }
    check_table(ic_table, period, c_in, sys_w, "ic_table");
    check_table(oc_table, period, c_out, sys_h, "oc_table");
    std::vector<std::uint32_t> concat;
    for (const auto& g : oc_table.groups) {
        concat.insert(concat.end(), g.begin(), g.end());
    }
    if (out_perm != concat) {
        throw FormatError("PpwLayer: out_perm must equal the concatenated oc_table groups");
    }
    if (!is_permutation(in_perm, c_in)) {
        throw FormatError("PpwLayer: in_perm is not a permutation of the input channels");
    }
    auto expected = std::size_t(period) * period * oc_table.padded_size * ic_table.padded_size * support;
    if (weights.size() != expected) {
        throw FormatError("PpwLayer: weight payload has " + std::to_string(weights.size()) + " entries, expected " +
                          std::to_string(expected));
    }
}

PpwLayer compile_layer(const Tensor4& masked, const PpsConfig& cfg, std::uint32_t sys_w, std::uint32_t sys_h)
{
    check_compliance(masked, cfg);
    if (sys_w == 0 || sys_h == 0) {
        throw DimensionError("compile_layer: systolic dimensions must be >= 1");
    }

    PpwLayer layer;
    layer.period = cfg.period;
    layer.support = cfg.support;
    layer.h_k = cfg.h_k;
    layer.w_k = cfg.w_k;
    layer.c_in = masked.c_in();
    layer.c_out = masked.c_out();
    layer.sys_w = sys_w;
    layer.sys_h = sys_h;
    layer.ic_table = pad_groups(group_channels(layer.c_in, cfg.period), sys_w);
    layer.oc_table = pad_groups(group_channels(layer.c_out, cfg.period), sys_h);

    for (const auto& kv : cfg.patterns) {
        for (const auto& [kh, kw] : kv.positions) {
            layer.kh_buf.push_back(std::uint8_t(kh));
            layer.kw_buf.push_back(std::uint8_t(kw));
        }
    }

    const auto P = cfg.period;
    const auto KSS = cfg.support;
    layer.weights.assign(std::size_t(P) * P * layer.oc_table.padded_size * layer.ic_table.padded_size * KSS, 0);
    for (std::uint32_t g = 0; g < P; ++g) {
        const auto& ocs = layer.oc_table.groups[g];
        for (std::uint32_t kv = 0; kv < P; ++kv) {
            const auto& ics = layer.ic_table.groups[kv];
            for (std::uint32_t o = 0; o < ocs.size(); ++o) {
                for (std::uint32_t i = 0; i < ics.size(); ++i) {
                    for (std::uint32_t w = 0; w < KSS; ++w) {
                        auto s = slot(g, kv, w, KSS, layer.w_num());
                        layer.weights[layer.weight_index(g, kv, o, i, w)] =
                            masked(ocs[o], ics[i], layer.kh_buf[s], layer.kw_buf[s]);
                    }
                }
            }
        }
    }

    for (const auto& g : layer.oc_table.groups) {
        layer.out_perm.insert(layer.out_perm.end(), g.begin(), g.end());
    }
    layer.in_perm = identity_permutation(layer.c_in);
    return layer;
}

Tensor4 decode_ppw(const PpwLayer& layer)
{
    layer.validate();
    Tensor4 out(layer.c_out, layer.c_in, layer.h_k, layer.w_k);
    const auto P = layer.period;
    const auto KSS = layer.support;
    for (std::uint32_t g = 0; g < P; ++g) {
        const auto& ocs = layer.oc_table.groups[g];
        for (std::uint32_t kv = 0; kv < P; ++kv) {
            const auto& ics = layer.ic_table.groups[kv];
            for (std::uint32_t o = 0; o < layer.oc_table.padded_size; ++o) {
                for (std::uint32_t i = 0; i < layer.ic_table.padded_size; ++i) {
                    const bool real = o < ocs.size() && i < ics.size();
                    for (std::uint32_t w = 0; w < KSS; ++w) {
                        auto value = layer.weights[layer.weight_index(g, kv, o, i, w)];
                        if (!real) {
                            if (value != 0) {
                                throw FormatError("decode_ppw: nonzero weight in a padded slot");
                            }
                            continue;
                        }
                        auto s = slot(g, kv, w, KSS, layer.w_num());
                        out(ocs[o], ics[i], layer.kh_buf[s], layer.kw_buf[s]) = value;
                    }
                }
            }
        }
    }
    return out;
}

Tensor4 decode_ppw_natural(const PpwLayer& layer)
{
    return permute_input_channels(decode_ppw(layer), layer.in_perm);
}

PpwLayer next_layer_reorder(const PpwLayer& producer, const PpsConfig& consumer_cfg, const Tensor4& consumer_weights,
                            std::uint32_t sys_w, std::uint32_t sys_h)
{
    if (producer.c_out != consumer_weights.c_in()) {
        throw DimensionError("next_layer_reorder: producer emits " + std::to_string(producer.c_out) +
                             " channels, consumer expects c_in=" + std::to_string(consumer_weights.c_in()));
    }
    auto layer = compile_layer(apply_periodic_mask(consumer_weights, consumer_cfg), consumer_cfg, sys_w, sys_h);

    // Natural channel c arrives at compiled position inverse[c].
    const auto inverse = invert_permutation(producer.out_perm);
    for (auto& group : layer.ic_table.groups) {
        for (auto& c : group) {
            c = inverse[c];
        }
    }
    layer.in_perm = producer.out_perm;
    return layer;
}

}  // namespace sps
