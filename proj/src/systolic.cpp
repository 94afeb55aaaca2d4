// SPDX-License-Identifier: Apache-2.0
#include "sps/systolic.hpp"

#include "sps/error.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace sps {

EventCounters& EventCounters::operator+=(const EventCounters& o)
{
    weight_fetches += o.weight_fetches;
    mac_ops += o.mac_ops;
    index_reads += o.index_reads;
    act_fetches += o.act_fetches;
    psum_accums += o.psum_accums;
    reorder_moves += o.reorder_moves;
    output_writes += o.output_writes;
    return *this;
}

std::string to_string(SimMode m)
{
    switch (m) {
    case SimMode::sps: return "sps";
    case SimMode::dense_baseline: return "dense_baseline";
    case SimMode::csr_model: return "csr_model";
    case SimMode::fkw_model: return "fkw_model";
    }
    return "?";
}

SimMode parse_sim_mode(const std::string& s)
{
    if (s == "sps" || s == "ppw") return SimMode::sps;
    if (s == "dense" || s == "dense_baseline") return SimMode::dense_baseline;
    if (s == "csr" || s == "csr_model") return SimMode::csr_model;
    if (s == "fkw" || s == "fkw_model") return SimMode::fkw_model;
    throw ConfigError("unknown simulation mode \"" + s + "\"");
}

namespace {

// Activation tap with zero padding outside the map.
class Window {
public:
    Window(const FeatureMap& ifm, const ConvGeometry& g) : ifm_(ifm), g_(g) {}

    // Row/column of the input for an output pixel and tap; false if outside.
    bool locate(std::uint32_t oh, std::uint32_t ow, std::uint32_t kh, std::uint32_t kw, std::uint32_t& y,
                std::uint32_t& x) const
    {
        auto yy = std::int64_t(oh) * g_.stride + kh - std::int64_t(g_.pad);
        auto xx = std::int64_t(ow) * g_.stride + kw - std::int64_t(g_.pad);
        if (yy < 0 || xx < 0 || yy >= ifm_.h() || xx >= ifm_.w()) {
            return false;
        }
        y = std::uint32_t(yy);
        x = std::uint32_t(xx);
        return true;
    }

private:
    const FeatureMap& ifm_;
    const ConvGeometry& g_;
};

void require_channels(const FeatureMap& ifm, std::uint32_t c_in, const char* who)
{
    if (ifm.c() != c_in) {
        throw DimensionError(std::string(who) + ": ifm " + ifm.dims_string() + " has " + std::to_string(ifm.c()) +
                             " channels, layer expects c_in=" + std::to_string(c_in));
    }
}

std::uint32_t round_up(std::uint32_t n, std::uint32_t m) { return (n + m - 1) / m * m; }

}  // namespace

SimResult simulate_sps(const FeatureMap& ifm, const PpwLayer& layer, const ConvGeometry& geom,
                       bool emit_natural_order)
{
    try {
        layer.validate();
    } catch (const FormatError& e) {
        throw FormatError(std::string("simulate_sps: malformed layer: ") + e.what());
    }
    require_channels(ifm, layer.c_in, "simulate_sps");
    const auto h_out = geom.output_extent(ifm.h(), layer.h_k);
    const auto w_out = geom.output_extent(ifm.w(), layer.w_k);

    const auto P = layer.period;
    const auto KSS = layer.support;
    const auto sys_w = layer.sys_w;
    const auto sys_h = layer.sys_h;
    const auto INC = layer.inc();
    const auto ONC = layer.onc();
    const auto ic_pad = layer.ic_table.padded_size;
    const std::size_t lane_stride = std::size_t(ic_pad) * KSS;  // distance between consecutive oc' rows

    std::vector<std::uint32_t> group_offset(P, 0);
    for (std::uint32_t g = 1; g < P; ++g) {
        group_offset[g] = group_offset[g - 1] + std::uint32_t(layer.oc_table.groups[g - 1].size());
    }

    SimResult res;
    res.mode = SimMode::sps;
    FeatureMap out(layer.c_out, h_out, w_out);
    EventCounters& ev = res.counters;
    Window window(ifm, geom);
    std::vector<std::int32_t> ps(std::size_t(sys_h) * sys_w);
    std::vector<std::int32_t> lane_act(sys_w);

    for (std::uint32_t oh = 0; oh < h_out; ++oh) {
        for (std::uint32_t ow = 0; ow < w_out; ++ow) {
            for (std::uint32_t g = 0; g < P; ++g) {
                const auto& ocs = layer.oc_table.groups[g];
                for (std::uint32_t cc = 0; cc < ONC; ++cc) {
                    std::fill(ps.begin(), ps.end(), 0);
                    for (std::uint32_t kv = 0; kv < P; ++kv) {
                        const auto& ics = layer.ic_table.groups[kv];
                        for (std::uint32_t w = 0; w < KSS; ++w) {
                            const auto s = slot(g, kv, w, KSS, layer.w_num());
                            std::uint32_t y = 0, x = 0;
                            const bool inside = window.locate(oh, ow, layer.kh_buf[s], layer.kw_buf[s], y, x);
                            for (std::uint32_t rr = 0; rr < INC; ++rr) {
                                ++ev.index_reads;
                                // IMU: one activation per input lane, shared down the column.
                                for (std::uint32_t i = 0; i < sys_w; ++i) {
                                    const auto ic_pos = rr * sys_w + i;
                                    lane_act[i] = (inside && ic_pos < ics.size()) ? ifm(ics[ic_pos], y, x) : 0;
                                }
                                ev.act_fetches += sys_w;
                                const auto* wrow =
                                    layer.weights.data() + layer.weight_index(g, kv, cc * sys_h, rr * sys_w, w);
                                for (std::uint32_t i = 0; i < sys_w; ++i) {
                                    const auto a = lane_act[i];
                                    const auto* wp = wrow + std::size_t(i) * KSS;
                                    for (std::uint32_t j = 0; j < sys_h; ++j) {
                                        ps[std::size_t(j) * sys_w + i] += std::int32_t(wp[j * lane_stride]) * a;
                                    }
                                }
                                const auto lanes = std::uint64_t(sys_w) * sys_h;
                                ev.weight_fetches += lanes;
                                ev.mac_ops += lanes;
                                ev.psum_accums += lanes;
                            }
                        }
                    }
                    // Adder tree across the sys_w partial sums of each PE row.
                    for (std::uint32_t j = 0; j < sys_h; ++j) {
                        const auto oc_pos = cc * sys_h + j;
                        if (oc_pos >= ocs.size()) {
                            continue;
                        }
                        std::int32_t sum = 0;
                        for (std::uint32_t i = 0; i < sys_w; ++i) {
                            sum += ps[std::size_t(j) * sys_w + i];
                        }
                        out(group_offset[g] + oc_pos, oh, ow) = sum;
                        ++ev.output_writes;
                    }
                }
            }
        }
    }

    if (emit_natural_order) {
        res.ofm = permute_channels(out, layer.out_perm);
        ev.reorder_moves += out.size();
    } else {
        res.ofm = std::move(out);
    }
    return res;
}

SimResult simulate_dense_baseline(const FeatureMap& ifm, const Tensor4& dense, const ConvGeometry& geom,
                                  std::uint32_t sys_w, std::uint32_t sys_h)
{
    require_channels(ifm, dense.c_in(), "simulate_dense_baseline");
    if (sys_w == 0 || sys_h == 0) {
        throw DimensionError("simulate_dense_baseline: systolic dimensions must be >= 1");
    }
    const auto h_out = geom.output_extent(ifm.h(), dense.h_k());
    const auto w_out = geom.output_extent(ifm.w(), dense.w_k());
    const auto oc_pad = round_up(dense.c_out(), sys_h);
    const auto ic_pad = round_up(dense.c_in(), sys_w);
    const auto ONC = oc_pad / sys_h;
    const auto INC = ic_pad / sys_w;

    SimResult res;
    res.mode = SimMode::dense_baseline;
    FeatureMap out(dense.c_out(), h_out, w_out);
    EventCounters& ev = res.counters;
    Window window(ifm, geom);
    std::vector<std::int32_t> ps(std::size_t(sys_h) * sys_w);
    std::vector<std::int32_t> lane_act(sys_w);

    for (std::uint32_t oh = 0; oh < h_out; ++oh) {
        for (std::uint32_t ow = 0; ow < w_out; ++ow) {
            for (std::uint32_t cc = 0; cc < ONC; ++cc) {
                std::fill(ps.begin(), ps.end(), 0);
                for (std::uint32_t kh = 0; kh < dense.h_k(); ++kh) {
                    for (std::uint32_t kw = 0; kw < dense.w_k(); ++kw) {
                        std::uint32_t y = 0, x = 0;
                        const bool inside = window.locate(oh, ow, kh, kw, y, x);
                        for (std::uint32_t rr = 0; rr < INC; ++rr) {
                            for (std::uint32_t i = 0; i < sys_w; ++i) {
                                const auto ic = rr * sys_w + i;
                                lane_act[i] = (inside && ic < dense.c_in()) ? ifm(ic, y, x) : 0;
                            }
                            ev.act_fetches += sys_w;
                            for (std::uint32_t i = 0; i < sys_w; ++i) {
                                const auto ic = rr * sys_w + i;
                                const auto a = lane_act[i];
                                for (std::uint32_t j = 0; j < sys_h; ++j) {
                                    const auto oc = cc * sys_h + j;
                                    if (oc < dense.c_out() && ic < dense.c_in()) {
                                        ps[std::size_t(j) * sys_w + i] += std::int32_t(dense(oc, ic, kh, kw)) * a;
                                    }
                                }
                            }
                            const auto lanes = std::uint64_t(sys_w) * sys_h;
                            ev.weight_fetches += lanes;
                            ev.mac_ops += lanes;
                            ev.psum_accums += lanes;
                        }
                    }
                }
                for (std::uint32_t j = 0; j < sys_h; ++j) {
                    const auto oc = cc * sys_h + j;
                    if (oc >= dense.c_out()) {
                        continue;
                    }
                    std::int32_t sum = 0;
                    for (std::uint32_t i = 0; i < sys_w; ++i) {
                        sum += ps[std::size_t(j) * sys_w + i];
                    }
                    out(oc, oh, ow) = sum;
                    ++ev.output_writes;
                }
            }
        }
    }
    res.ofm = std::move(out);
    return res;
}

namespace {

struct SparseTap {
    std::uint32_t ic, kh, kw;
    std::int32_t value;
};

// Nonzero taps of one filter in (ic, kh, kw) order: a CSR row.
std::vector<std::vector<SparseTap>> sparse_rows(const Tensor4& t)
{
    std::vector<std::vector<SparseTap>> rows(t.c_out());
    for (std::uint32_t oc = 0; oc < t.c_out(); ++oc) {
        for (std::uint32_t ic = 0; ic < t.c_in(); ++ic) {
            for (std::uint32_t kh = 0; kh < t.h_k(); ++kh) {
                for (std::uint32_t kw = 0; kw < t.w_k(); ++kw) {
                    if (auto v = t(oc, ic, kh, kw); v != 0) {
                        rows[oc].push_back({ic, kh, kw, v});
                    }
                }
            }
        }
    }
    return rows;
}

std::uint64_t retained_kernels(const Tensor4& t, std::uint32_t oc)
{
    std::uint64_t n = 0;
    for (std::uint32_t ic = 0; ic < t.c_in(); ++ic) {
        const auto* k = t.values().data() + t.index(oc, ic, 0, 0);
        if (std::any_of(k, k + t.kernel_area(), [](auto v) { return v != 0; })) {
            ++n;
        }
    }
    return n;
}

}  // namespace

SimResult simulate_format_model(const FeatureMap& ifm, const Tensor4& masked, const ConvGeometry& geom,
                                FormatModel model)
{
    require_channels(ifm, masked.c_in(), "simulate_format_model");
    const auto h_out = geom.output_extent(ifm.h(), masked.h_k());
    const auto w_out = geom.output_extent(ifm.w(), masked.w_k());
    const auto rows = sparse_rows(masked);

    SimResult res;
    res.mode = model == FormatModel::csr ? SimMode::csr_model : SimMode::fkw_model;
    EventCounters& ev = res.counters;

    // Filter execution order: natural for CSR; FKW groups filters by retained-kernel count.
    std::vector<std::uint32_t> order = identity_permutation(masked.c_out());
    std::vector<std::uint64_t> kept(masked.c_out(), 0);
    if (model == FormatModel::fkw) {
        for (std::uint32_t oc = 0; oc < masked.c_out(); ++oc) {
            kept[oc] = retained_kernels(masked, oc);
            ev.index_reads += kept[oc];
        }
        std::stable_sort(order.begin(), order.end(), [&kept](auto a, auto b) { return kept[a] > kept[b]; });
    }

    FeatureMap out(masked.c_out(), h_out, w_out);
    Window window(ifm, geom);
    for (std::uint32_t oh = 0; oh < h_out; ++oh) {
        for (std::uint32_t ow = 0; ow < w_out; ++ow) {
            for (std::uint32_t pos = 0; pos < masked.c_out(); ++pos) {
                const auto oc = order[pos];
                std::int32_t acc = 0;
                for (const auto& tap : rows[oc]) {
                    std::uint32_t y = 0, x = 0;
                    const auto a = window.locate(oh, ow, tap.kh, tap.kw, y, x) ? ifm(tap.ic, y, x) : 0;
                    acc += tap.value * a;
                }
                const auto nnz = std::uint64_t(rows[oc].size());
                ev.weight_fetches += nnz;
                ev.act_fetches += nnz;
                ev.mac_ops += nnz;
                ev.psum_accums += nnz;
                if (model == FormatModel::csr) {
                    ev.index_reads += nnz;
                }
                out(pos, oh, ow) = acc;
                ++ev.output_writes;
            }
        }
    }

    if (model == FormatModel::fkw) {
        res.ofm = permute_channels(out, order);
        ev.reorder_moves += out.size();
    } else {
        res.ofm = std::move(out);
    }
    return res;
}

}  // namespace sps
