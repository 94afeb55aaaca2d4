// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sps/pps.hpp"
#include "sps/tensor.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sps {

/// Channel groups produced by kernel/filter reordering. groups[g] lists the
/// channel indices of group g in the order the array consumes them.
struct GroupTable {
    std::vector<std::vector<std::uint32_t>> groups;
    std::uint32_t group_size = 0;   // ceil(n / P), before systolic padding
    std::uint32_t padded_size = 0;  // group_size rounded up to the array dimension

    std::size_t channel_count() const;
    bool operator==(const GroupTable&) const = default;
};

/// Split [0, n) into P strided groups {g, g+P, g+2P, ...}; padded_size == group_size.
GroupTable group_channels(std::uint32_t n, std::uint32_t period);

/// Round the table's padded_size up to a multiple of `lanes`.
GroupTable pad_groups(GroupTable table, std::uint32_t lanes);

/// Index-buffer slot of tap w for FV group g and IC group kv.
constexpr std::uint32_t slot(std::uint32_t g, std::uint32_t kv, std::uint32_t w, std::uint32_t support,
                             std::uint32_t w_num)
{
    return ((g + kv) * support + w) % w_num;
}

/// A layer compiled to the period-pattern-weight (PPW) layout.
///
/// Weights are stored as [g][kv][oc'][ic'][w] where oc' / ic' are padded
/// positions inside the output / input channel groups. Padded slots are zero.
/// kh_buf / kw_buf hold the W_NUM pattern taps; slot v*KSS+w is tap w of
/// pattern v.
///
/// out_perm[p] is the natural output channel emitted at compiled position p
/// (compiled order is the concatenation of oc_table groups). in_perm[p] is
/// the natural input channel found at consumed position p; it is the identity
/// unless the layer was compiled for a reordered producer.
struct PpwLayer {
    std::uint32_t period = 1, support = 1;
    std::uint32_t h_k = 1, w_k = 1;
    std::uint32_t c_in = 0, c_out = 0;
    std::uint32_t sys_w = 1, sys_h = 1;
    GroupTable ic_table, oc_table;
    std::vector<std::int8_t> weights;
    std::vector<std::uint8_t> kh_buf, kw_buf;
    std::vector<std::uint32_t> out_perm;
    std::vector<std::uint32_t> in_perm;

    std::uint32_t w_num() const { return period * support; }
    std::uint32_t inc() const { return ic_table.padded_size / sys_w; }  // INC_p
    std::uint32_t onc() const { return oc_table.padded_size / sys_h; }  // ONC_p

    std::size_t weight_index(std::uint32_t g, std::uint32_t kv, std::uint32_t oc_pos, std::uint32_t ic_pos,
                             std::uint32_t w) const
    {
        return (((std::size_t(g) * period + kv) * oc_table.padded_size + oc_pos) * ic_table.padded_size + ic_pos) *
                   support +
               w;
    }

    /// Throws FormatError describing the first inconsistency.
    void validate() const;

    bool operator==(const PpwLayer&) const = default;
};

/// Reorder, pad and pack a PPS-compliant tensor. Throws ComplianceError when
/// a nonzero weight falls outside its assigned pattern.
PpwLayer compile_layer(const Tensor4& masked, const PpsConfig& cfg, std::uint32_t sys_w, std::uint32_t sys_h);

/// Scatter the layer back to a dense tensor whose input-channel axis follows
/// the consumed order (natural order unless compiled with next_layer_reorder).
Tensor4 decode_ppw(const PpwLayer& layer);

/// Like decode_ppw but with the input-channel axis mapped back through in_perm.
Tensor4 decode_ppw_natural(const PpwLayer& layer);

/// Compile the consumer so it reads the producer's compiled output order
/// directly. The consumer weights are masked with consumer_cfg first.
PpwLayer next_layer_reorder(const PpwLayer& producer, const PpsConfig& consumer_cfg, const Tensor4& consumer_weights,
                            std::uint32_t sys_w, std::uint32_t sys_h);

/// Bits of the PPW1 index section: the P and KSS header fields plus the
/// packed kh/kw buffers.
std::uint64_t index_section_bits(const PpwLayer& layer);

// PPW1 binary layout, little-endian:
//   "PPW1", u8 version = 1
//   u16 P, u16 KSS, u8 h_k, u8 w_k, u32 c_in, u32 c_out, u16 sys_w, u16 sys_h
//   index buffers: W_NUM entries, each kh then kw in b = ceil(log2(max(h_k, w_k))) bits (0 for 1x1),
//     LSB-first bit stream padded to a whole byte
//   ic_table, oc_table: u32 padded_size, then per group u32 count + count x u32
//   out_perm: c_out x u32, in_perm: c_in x u32
//   weights: P*P*oc_padded*ic_padded*KSS int8
std::vector<std::uint8_t> serialize(const PpwLayer& layer);
PpwLayer deserialize_ppw(std::span<const std::uint8_t> data);
void save(const std::string& path, const PpwLayer& layer);
PpwLayer load_ppw(const std::string& path);

}  // namespace sps
