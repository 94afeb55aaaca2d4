// SPDX-License-Identifier: Apache-2.0
#include "sps/tensor_io.hpp"

#include "sps/detail/bytes.hpp"
#include "sps/error.hpp"

#include <json.hpp>

#include <fstream>
#include <iterator>

namespace sps {

namespace detail {

std::vector<std::uint8_t> read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open " + path);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> data)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ConfigError("cannot write " + path);
    }
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
}

}  // namespace detail

namespace {

constexpr std::uint8_t kVersion = 1;

}  // namespace

std::vector<std::uint8_t> serialize(const Tensor4& t)
{
    detail::ByteWriter w;
    w.bytes("SPT4");
    w.u8(kVersion);
    w.u32(t.c_out());
    w.u32(t.c_in());
    w.u32(t.h_k());
    w.u32(t.w_k());
    for (auto v : t.values()) {
        w.i8(v);
    }
    return w.take();
}

std::vector<std::uint8_t> serialize(const FeatureMap& fm)
{
    detail::ByteWriter w;
    w.bytes("SPFM");
    w.u8(kVersion);
    w.u32(fm.c());
    w.u32(fm.h());
    w.u32(fm.w());
    for (auto v : fm.values()) {
        w.i32(v);
    }
    return w.take();
}

Tensor4 deserialize_tensor4(std::span<const std::uint8_t> data)
{
    detail::ByteReader r(data);
    r.expect("SPT4");
    if (auto v = r.u8(); v != kVersion) {
        throw FormatError("unsupported Tensor4 version " + std::to_string(v));
    }
    auto c_out = r.u32(), c_in = r.u32(), h_k = r.u32(), w_k = r.u32();
    auto n = std::size_t(c_out) * c_in * h_k * w_k;
    auto payload = r.take(n);
    if (r.remaining() != 0) {
        throw FormatError("trailing bytes after Tensor4 payload");
    }
    std::vector<std::int8_t> values(payload.begin(), payload.end());
    return Tensor4(c_out, c_in, h_k, w_k, std::move(values));
}

FeatureMap deserialize_feature_map(std::span<const std::uint8_t> data)
{
    detail::ByteReader r(data);
    r.expect("SPFM");
    if (auto v = r.u8(); v != kVersion) {
        throw FormatError("unsupported FeatureMap version " + std::to_string(v));
    }
    auto c = r.u32(), h = r.u32(), w = r.u32();
    auto n = std::size_t(c) * h * w;
    if (r.remaining() != 4 * n) {
        throw FormatError("FeatureMap payload size mismatch");
    }
    std::vector<std::int32_t> values(n);
    for (auto& v : values) {
        v = r.i32();
    }
    return FeatureMap(c, h, w, std::move(values));
}

std::string to_json(const Tensor4& t)
{
    nlohmann::json j;
    j["kind"] = "tensor4";
    j["dims"] = {t.c_out(), t.c_in(), t.h_k(), t.w_k()};
    j["values"] = std::vector<int>(t.values().begin(), t.values().end());
    return j.dump();
}

std::string to_json(const FeatureMap& fm)
{
    nlohmann::json j;
    j["kind"] = "feature_map";
    j["dims"] = {fm.c(), fm.h(), fm.w()};
    j["values"] = std::vector<std::int32_t>(fm.values().begin(), fm.values().end());
    return j.dump();
}

Tensor4 tensor4_from_json(const std::string& text)
{
    try {
        auto j = nlohmann::json::parse(text);
        if (j.at("kind") != "tensor4") {
            throw FormatError("expected kind \"tensor4\"");
        }
        auto dims = j.at("dims").get<std::vector<std::uint32_t>>();
        if (dims.size() != 4) {
            throw FormatError("tensor4 needs 4 dims");
        }
        std::vector<std::int8_t> values;
        for (int v : j.at("values").get<std::vector<int>>()) {
            if (v < -128 || v > 127) {
                throw FormatError("tensor4 value out of int8 range: " + std::to_string(v));
            }
            values.push_back(std::int8_t(v));
        }
        return Tensor4(dims[0], dims[1], dims[2], dims[3], std::move(values));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("tensor4 json: ") + e.what());
    }
}

FeatureMap feature_map_from_json(const std::string& text)
{
    try {
        auto j = nlohmann::json::parse(text);
        if (j.at("kind") != "feature_map") {
            throw FormatError("expected kind \"feature_map\"");
        }
        auto dims = j.at("dims").get<std::vector<std::uint32_t>>();
        if (dims.size() != 3) {
            throw FormatError("feature_map needs 3 dims");
        }
        return FeatureMap(dims[0], dims[1], dims[2], j.at("values").get<std::vector<std::int32_t>>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("feature_map json: ") + e.what());
    }
}

void save(const std::string& path, const Tensor4& t) { detail::write_file(path, serialize(t)); }
void save(const std::string& path, const FeatureMap& fm) { detail::write_file(path, serialize(fm)); }
Tensor4 load_tensor4(const std::string& path) { return deserialize_tensor4(detail::read_file(path)); }
FeatureMap load_feature_map(const std::string& path) { return deserialize_feature_map(detail::read_file(path)); }

std::uint64_t checksum(const FeatureMap& fm)
{
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint8_t b) {
        h ^= b;
        h *= 1099511628211ull;
    };
    for (auto d : {fm.c(), fm.h(), fm.w()}) {
        for (int i = 0; i < 4; ++i) {
            mix(std::uint8_t(d >> (8 * i)));
        }
    }
    for (auto v : fm.values()) {
        auto u = std::uint32_t(v);
        for (int i = 0; i < 4; ++i) {
            mix(std::uint8_t(u >> (8 * i)));
        }
    }
    return h;
}

}  // namespace sps
