// SPDX-License-Identifier: Apache-2.0
#include "sps/storage.hpp"

#include "sps/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace sps {

std::string to_string(Format f)
{
    switch (f) {
    case Format::dense: return "dense";
    case Format::coo: return "coo";
    case Format::csr: return "csr";
    case Format::csc: return "csc";
    case Format::fkw: return "fkw";
    case Format::ppw: return "ppw";
    }
    return "?";
}

Format parse_format(const std::string& s)
{
    for (auto f : all_formats()) {
        if (to_string(f) == s) {
            return f;
        }
    }
    throw ConfigError("unknown storage format \"" + s + "\"");
}

const std::vector<Format>& all_formats()
{
    static const std::vector<Format> formats{Format::dense, Format::coo, Format::csr,
                                             Format::csc,   Format::fkw, Format::ppw};
    return formats;
}

std::string to_string(BitWidthPreset p)
{
    return p == BitWidthPreset::analytic ? "analytic" : "paper-calibrated";
}

BitWidthPreset parse_preset(const std::string& s)
{
    if (s == "analytic") return BitWidthPreset::analytic;
    if (s == "paper-calibrated" || s == "paper_calibrated" || s == "calibrated") return BitWidthPreset::paper_calibrated;
    throw ConfigError("unknown bit-width preset \"" + s + "\" (expected analytic|paper-calibrated)");
}

std::uint32_t ceil_log2(std::uint64_t n)
{
    return n <= 1 ? 0u : std::uint32_t(std::bit_width(n - 1));
}

BitWidthPolicy BitWidthPolicy::analytic()
{
    BitWidthPolicy p;
    p.preset = BitWidthPreset::analytic;
    p.fkw_pattern_id_bits = ceil_log2(p.fkw_pattern_count);
    return p;
}

BitWidthPolicy BitWidthPolicy::paper_calibrated()
{
    BitWidthPolicy p;
    p.preset = BitWidthPreset::paper_calibrated;
    p.fkw_pattern_id_bits = 8;
    return p;
}

BitWidthPolicy BitWidthPolicy::from_preset(BitWidthPreset p)
{
    return p == BitWidthPreset::analytic ? analytic() : paper_calibrated();
}

LayerShape pps_shape(std::string name, std::uint32_t c_out, std::uint32_t c_in, std::uint32_t h_k,
                     std::uint32_t w_k, std::uint32_t support)
{
    return {std::move(name), c_out, c_in, h_k, w_k, std::uint64_t(c_out) * c_in * support};
}

namespace {

std::uint32_t coo_width(const LayerShape& s, const BitWidthPolicy& p)
{
    if (p.coo_index_bits) {
        return *p.coo_index_bits;
    }
    return ceil_log2(s.c_out) + ceil_log2(s.c_in) + ceil_log2(s.h_k) + ceil_log2(s.w_k);
}

std::uint64_t columns(const LayerShape& s) { return std::uint64_t(s.c_in) * s.h_k * s.w_k; }

std::uint32_t ppw_index_bits(const LayerShape& s, std::uint32_t period, std::uint32_t support)
{
    return 2 * period * support * ceil_log2(std::max(s.h_k, s.w_k)) + 32;
}

double real_ceil_log2(double x) { return x <= 1.0 ? 0.0 : std::ceil(std::log2(x)); }

}  // namespace

FormatStorage storage_dense(const LayerShape& shape, const BitWidthPolicy& policy)
{
    return {Format::dense, std::uint64_t(policy.value_bits) * shape.dense_count(), 0};
}

FormatStorage storage_coo(const LayerShape& shape, const BitWidthPolicy& policy)
{
    return {Format::coo, std::uint64_t(policy.value_bits) * shape.nnz, shape.nnz * coo_width(shape, policy)};
}

FormatStorage storage_csr(const LayerShape& shape, const BitWidthPolicy& policy)
{
    auto index = shape.nnz * ceil_log2(columns(shape)) + (std::uint64_t(shape.c_out) + 1) * ceil_log2(shape.nnz + 1);
    return {Format::csr, std::uint64_t(policy.value_bits) * shape.nnz, index};
}

FormatStorage storage_csc(const LayerShape& shape, const BitWidthPolicy& policy)
{
    auto index = shape.nnz * ceil_log2(shape.c_out) + (columns(shape) + 1) * ceil_log2(shape.nnz + 1);
    return {Format::csc, std::uint64_t(policy.value_bits) * shape.nnz, index};
}

FormatStorage storage_fkw(const LayerShape& shape, const BitWidthPolicy& policy, double keep_ratio,
                          std::uint32_t support)
{
    if (!(keep_ratio > 0.0 && keep_ratio <= 1.0)) {
        throw ConfigError("storage_fkw: connectivity keep ratio must lie in (0, 1], got " +
                          std::to_string(keep_ratio));
    }
    auto retained = std::uint64_t(std::llround(keep_ratio * double(shape.c_out) * double(shape.c_in)));
    auto weight = std::uint64_t(policy.value_bits) * support * retained;
    auto index = retained * (policy.fkw_pattern_id_bits + ceil_log2(shape.c_in)) +
                 std::uint64_t(shape.c_out) * ceil_log2(shape.c_out);
    return {Format::fkw, weight, index};
}

FormatStorage storage_ppw(const LayerShape& shape, std::uint32_t period, std::uint32_t support)
{
    return {Format::ppw, 8ull * shape.c_out * shape.c_in * support, ppw_index_bits(shape, period, support)};
}

double default_fkw_keep_ratio(const LayerShape& shape, std::uint32_t support)
{
    return std::min(1.0, double(shape.h_k) * shape.w_k / (8.0 * support));
}

FormatStorage storage_of(Format f, const LayerShape& shape, const BitWidthPolicy& policy, const StorageParams& params)
{
    switch (f) {
    case Format::dense: return storage_dense(shape, policy);
    case Format::coo: return storage_coo(shape, policy);
    case Format::csr: return storage_csr(shape, policy);
    case Format::csc: return storage_csc(shape, policy);
    case Format::fkw:
        return storage_fkw(shape, policy, params.fkw_keep_ratio.value_or(default_fkw_keep_ratio(shape, params.support)),
                           params.support);
    case Format::ppw: return storage_ppw(shape, params.period, params.support);
    }
    return {};
}

double max_density(Format f, const LayerShape& shape, const StorageParams& params)
{
    if (f == Format::fkw) {
        return std::min(1.0, double(params.support) / double(shape.h_k * shape.w_k));
    }
    return 1.0;
}

std::optional<double> total_bits_at_density(Format f, const LayerShape& shape, double density,
                                            const BitWidthPolicy& policy, const StorageParams& params)
{
    if (density < 0.0 || density > max_density(f, shape, params) * (1.0 + 1e-12)) {
        return std::nullopt;
    }
    const double vb = policy.value_bits;
    const double nnz = density * double(shape.dense_count());
    switch (f) {
    case Format::dense: return vb * double(shape.dense_count());
    case Format::coo: return nnz * (vb + coo_width(shape, policy));
    case Format::csr:
        return nnz * (vb + ceil_log2(columns(shape))) + (double(shape.c_out) + 1.0) * real_ceil_log2(nnz + 1.0);
    case Format::csc:
        return nnz * (vb + ceil_log2(shape.c_out)) + (double(columns(shape)) + 1.0) * real_ceil_log2(nnz + 1.0);
    case Format::fkw: {
        const double retained = nnz / params.support;
        return vb * params.support * retained + retained * (policy.fkw_pattern_id_bits + ceil_log2(shape.c_in)) +
               double(shape.c_out) * ceil_log2(shape.c_out);
    }
    case Format::ppw: return vb * nnz + ppw_index_bits(shape, params.period, params.support);
    }
    return std::nullopt;
}

ThresholdResult effective_sparsity_threshold(double baseline_bits, const std::function<double(double)>& candidate,
                                             double d_max)
{
    ThresholdResult r;
    const double f0 = candidate(0.0);
    if (f0 > baseline_bits) {
        return r;
    }
    r.achievable = true;
    const double f1 = candidate(d_max);
    if (f1 <= baseline_bits) {
        r.density = d_max;
        return r;
    }
    const double fm = candidate(0.5 * d_max);
    if (std::abs(fm - 0.5 * (f0 + f1)) <= 1e-9 * std::max(1.0, std::abs(f1))) {
        r.closed_form = true;
        r.density = d_max * (baseline_bits - f0) / (f1 - f0);
        return r;
    }
    double lo = 0.0, hi = d_max;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (candidate(mid) <= baseline_bits ? lo : hi) = mid;
    }
    r.density = lo;
    return r;
}

ThresholdResult effective_sparsity_threshold(double baseline_bits, Format candidate,
                                             const std::vector<LayerShape>& layers, const BitWidthPolicy& policy,
                                             const StorageParams& params)
{
    double d_max = 1.0;
    for (const auto& l : layers) {
        d_max = std::min(d_max, max_density(candidate, l, params));
    }
    auto total = [&](double d) {
        double sum = 0.0;
        for (const auto& l : layers) {
            sum += *total_bits_at_density(candidate, l, d, policy, params);
        }
        return sum;
    };
    return effective_sparsity_threshold(baseline_bits, total, d_max);
}

std::vector<StorageRow> storage_table(const std::vector<LayerShape>& layers, const BitWidthPolicy& policy,
                                      const StorageParams& params)
{
    std::vector<StorageRow> rows;
    for (const auto& l : layers) {
        for (auto f : all_formats()) {
            rows.push_back({l.name, storage_of(f, l, policy, params)});
        }
    }
    return rows;
}

FormatStorage network_storage(Format f, const std::vector<LayerShape>& layers, const BitWidthPolicy& policy,
                              const StorageParams& params, bool shared_ppw_index)
{
    FormatStorage total{f, 0, 0};
    for (std::size_t k = 0; k < layers.size(); ++k) {
        auto s = storage_of(f, layers[k], policy, params);
        total.weight_bits += s.weight_bits;
        if (f == Format::ppw && shared_ppw_index && k > 0) {
            continue;
        }
        total.index_bits += s.index_bits;
    }
    return total;
}

std::string storage_csv(const std::vector<StorageRow>& rows)
{
    std::ostringstream os;
    os << "layer,format,weight_bits,index_bits,total_bits,percent_index\n";
    os << std::fixed << std::setprecision(4);
    for (const auto& r : rows) {
        os << r.layer << ',' << to_string(r.storage.format) << ',' << r.storage.weight_bits << ','
           << r.storage.index_bits << ',' << r.storage.total_bits() << ',' << r.storage.percent_index() << '\n';
    }
    return os.str();
}

std::string storage_json(const std::vector<StorageRow>& rows)
{
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["layer"] = r.layer;
        j["format"] = to_string(r.storage.format);
        j["weight_bits"] = r.storage.weight_bits;
        j["index_bits"] = r.storage.index_bits;
        j["total_bits"] = r.storage.total_bits();
        j["percent_index"] = r.storage.percent_index();
        arr.push_back(j);
    }
    return arr.dump(2);
}

}  // namespace sps
