// SPDX-License-Identifier: Apache-2.0
#include "sps/ppw.hpp"

#include "sps/detail/bytes.hpp"
#include "sps/error.hpp"

#include <algorithm>
#include <bit>

namespace sps {

namespace {

constexpr std::uint8_t kPpwVersion = 1;

unsigned coord_bits(std::uint32_t h_k, std::uint32_t w_k)
{
    auto m = std::max(h_k, w_k);
    return unsigned(std::bit_width(m - 1));
}

void write_table(detail::ByteWriter& w, const GroupTable& t)
{
    w.u32(t.padded_size);
    for (const auto& g : t.groups) {
        w.u32(std::uint32_t(g.size()));
        for (auto c : g) {
            w.u32(c);
        }
    }
}

GroupTable read_table(detail::ByteReader& r, std::uint32_t period, std::uint32_t n, std::uint32_t lanes)
{
    GroupTable t;
    t.padded_size = r.u32();
    t.group_size = (n + period - 1) / period;
    if (lanes == 0 || t.padded_size < t.group_size || t.padded_size - t.group_size >= lanes) {
        throw FormatError("PPW1: padded group size inconsistent with the array dimension");
    }
    t.groups.resize(period);
    for (auto& g : t.groups) {
        auto count = r.u32();
        if (count > n) {
            throw FormatError("PPW1: group count exceeds channel count");
        }
        g.resize(count);
        for (auto& c : g) {
            c = r.u32();
        }
    }
    return t;
}

std::vector<std::uint8_t> pack_index_buffers(const PpwLayer& layer)
{
    detail::BitPacker bits;
    const auto b = coord_bits(layer.h_k, layer.w_k);
    for (std::size_t s = 0; s < layer.kh_buf.size(); ++s) {
        bits.put(layer.kh_buf[s], b);
        bits.put(layer.kw_buf[s], b);
    }
    return bits.take();
}

}  // namespace

std::uint64_t index_section_bits(const PpwLayer& layer)
{
    return 32 + 8 * std::uint64_t(pack_index_buffers(layer).size());
}

std::vector<std::uint8_t> serialize(const PpwLayer& layer)
{
    layer.validate();
    if (layer.period > 0xFFFF || layer.support > 0xFFFF || layer.h_k > 0xFF || layer.w_k > 0xFF ||
        layer.sys_w > 0xFFFF || layer.sys_h > 0xFFFF) {
        throw FormatError("PPW1: a header field exceeds its encoded width");
    }
    detail::ByteWriter w;
    w.bytes("PPW1");
    w.u8(kPpwVersion);
    w.u16(std::uint16_t(layer.period));
    w.u16(std::uint16_t(layer.support));
    w.u8(std::uint8_t(layer.h_k));
    w.u8(std::uint8_t(layer.w_k));
    w.u32(layer.c_in);
    w.u32(layer.c_out);
    w.u16(std::uint16_t(layer.sys_w));
    w.u16(std::uint16_t(layer.sys_h));
    auto packed = pack_index_buffers(layer);
    w.buffer().insert(w.buffer().end(), packed.begin(), packed.end());
    write_table(w, layer.ic_table);
    write_table(w, layer.oc_table);
    for (auto c : layer.out_perm) {
        w.u32(c);
    }
    for (auto c : layer.in_perm) {
        w.u32(c);
    }
    for (auto v : layer.weights) {
        w.i8(v);
    }
    return w.take();
}

PpwLayer deserialize_ppw(std::span<const std::uint8_t> data)
{
    detail::ByteReader r(data);
    r.expect("PPW1");
    if (auto v = r.u8(); v != kPpwVersion) {
        throw FormatError("PPW1: unsupported version " + std::to_string(v));
    }
    PpwLayer layer;
    layer.period = r.u16();
    layer.support = r.u16();
    layer.h_k = r.u8();
    layer.w_k = r.u8();
    layer.c_in = r.u32();
    layer.c_out = r.u32();
    layer.sys_w = r.u16();
    layer.sys_h = r.u16();
    if (layer.period == 0 || layer.support == 0 || layer.h_k == 0 || layer.w_k == 0 || layer.c_in == 0 ||
        layer.c_out == 0) {
        throw FormatError("PPW1: zero-sized header field");
    }

    const auto b = coord_bits(layer.h_k, layer.w_k);
    const auto w_num = std::size_t(layer.period) * layer.support;
    detail::BitUnpacker bits(r.take((w_num * 2 * b + 7) / 8));
    for (std::size_t s = 0; s < w_num; ++s) {
        layer.kh_buf.push_back(std::uint8_t(bits.get(b)));
        layer.kw_buf.push_back(std::uint8_t(bits.get(b)));
    }

    layer.ic_table = read_table(r, layer.period, layer.c_in, layer.sys_w);
    layer.oc_table = read_table(r, layer.period, layer.c_out, layer.sys_h);
    layer.out_perm.resize(layer.c_out);
    for (auto& c : layer.out_perm) {
        c = r.u32();
    }
    layer.in_perm.resize(layer.c_in);
    for (auto& c : layer.in_perm) {
        c = r.u32();
    }
    auto n = std::size_t(layer.period) * layer.period * layer.oc_table.padded_size * layer.ic_table.padded_size *
             layer.support;
    auto payload = r.take(n);
    layer.weights.assign(payload.begin(), payload.end());
    if (r.remaining() != 0) {
        throw FormatError("PPW1: trailing bytes");
    }
    layer.validate();
    return layer;
}

void save(const std::string& path, const PpwLayer& layer) { detail::write_file(path, serialize(layer)); }

PpwLayer load_ppw(const std::string& path) { return deserialize_ppw(detail::read_file(path)); }

}  // namespace sps
