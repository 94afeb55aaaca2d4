// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sps/ppw.hpp"
#include "sps/tensor.hpp"

#include <cstdint>
#include <string>

namespace sps {

/// Dataflow event tallies. mac_ops == psum_accums always.
struct EventCounters {
    std::uint64_t weight_fetches = 0;
    std::uint64_t mac_ops = 0;
    std::uint64_t index_reads = 0;
    std::uint64_t act_fetches = 0;
    std::uint64_t psum_accums = 0;
    std::uint64_t reorder_moves = 0;
    std::uint64_t output_writes = 0;

    EventCounters& operator+=(const EventCounters& o);
    bool operator==(const EventCounters&) const = default;
};

enum class SimMode { sps, dense_baseline, csr_model, fkw_model };

std::string to_string(SimMode m);
SimMode parse_sim_mode(const std::string& s);

struct SimResult {
    FeatureMap ofm;
    EventCounters counters;
    SimMode mode = SimMode::sps;
};

/// Run one PPW layer through the sparse periodic systolic dataflow.
///
/// Loop order: oh, ow, g < P, cc < ONC_p, kv < P, w < KSS, rr < INC_p, then the
/// unrolled i < sys_w and j < sys_h lanes. One index-buffer read per (w, rr)
/// tile, one activation fetch per input lane, one MAC per PE. After the
/// kv/w/rr nest an adder tree folds each PE row into one output channel.
/// Padded lanes are computed and their results dropped.
///
/// With emit_natural_order the output is permuted to natural channel order
/// (one reorder move per element); otherwise channels stay in compiled order.
SimResult simulate_sps(const FeatureMap& ifm, const PpwLayer& layer, const ConvGeometry& geom,
                       bool emit_natural_order);

/// Same array skeleton with every kernel tap and no index buffer.
SimResult simulate_dense_baseline(const FeatureMap& ifm, const Tensor4& dense, const ConvGeometry& geom,
                                  std::uint32_t sys_w, std::uint32_t sys_h);

enum class FormatModel { csr, fkw };

/// Functional run of a masked tensor under a competing sparse format's cost model.
///
/// csr: one index read per nonzero weight fetch (row pointer + column index decode).
/// fkw: filters are reordered by retained-kernel count, each retained kernel's
/// pattern id is read once per layer, and the output is permuted back to
/// natural order (one reorder move per OFM element).
/// Both skip zero weights.
SimResult simulate_format_model(const FeatureMap& ifm, const Tensor4& masked, const ConvGeometry& geom,
                                FormatModel model);

}  // namespace sps
