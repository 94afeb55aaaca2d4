// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sps {

enum class Format { dense, coo, csr, csc, fkw, ppw };

std::string to_string(Format f);
Format parse_format(const std::string& s);
const std::vector<Format>& all_formats();

struct LayerShape {
    std::string name;
    std::uint32_t c_out = 1, c_in = 1, h_k = 1, w_k = 1;
    std::uint64_t nnz = 0;

    std::uint64_t dense_count() const { return std::uint64_t(c_out) * c_in * h_k * w_k; }
    double density() const { return double(nnz) / double(dense_count()); }
};

/// Shape of a PPS layer: every kernel keeps exactly `support` weights.
LayerShape pps_shape(std::string name, std::uint32_t c_out, std::uint32_t c_in, std::uint32_t h_k,
                     std::uint32_t w_k, std::uint32_t support);

struct FormatStorage {
    Format format = Format::dense;
    std::uint64_t weight_bits = 0;
    std::uint64_t index_bits = 0;

    std::uint64_t total_bits() const { return weight_bits + index_bits; }
    double percent_index() const
    {
        return total_bits() == 0 ? 0.0 : 100.0 * double(index_bits) / double(total_bits());
    }
};

enum class BitWidthPreset { analytic, paper_calibrated };

std::string to_string(BitWidthPreset p);
BitWidthPreset parse_preset(const std::string& s);

/// Index bit widths of the sparse formats.
///
/// analytic: minimal ceil(log2) coordinate widths everywhere; FKW pattern ids
/// use ceil(log2(fkw_pattern_count)) bits.
/// paper_calibrated: as analytic, except an 8-bit FKW pattern id.
/// coo_index_bits, when set, replaces the per-nonzero COO coordinate width.
struct BitWidthPolicy {
    BitWidthPreset preset = BitWidthPreset::analytic;
    std::uint32_t value_bits = 8;
    std::optional<std::uint32_t> coo_index_bits;
    std::uint32_t fkw_pattern_count = 8;
    std::uint32_t fkw_pattern_id_bits = 3;

    static BitWidthPolicy analytic();
    static BitWidthPolicy paper_calibrated();
    static BitWidthPolicy from_preset(BitWidthPreset p);
};

/// ceil(log2(n)); 0 for n <= 1.
std::uint32_t ceil_log2(std::uint64_t n);

FormatStorage storage_dense(const LayerShape& shape, const BitWidthPolicy& policy = {});
FormatStorage storage_coo(const LayerShape& shape, const BitWidthPolicy& policy);
/// Row view: c_out rows by c_in*h_k*w_k columns.
FormatStorage storage_csr(const LayerShape& shape, const BitWidthPolicy& policy);
FormatStorage storage_csc(const LayerShape& shape, const BitWidthPolicy& policy);
/// keep_ratio is the fraction of (oc, ic) kernels kept by connectivity pruning, in (0, 1].
FormatStorage storage_fkw(const LayerShape& shape, const BitWidthPolicy& policy, double keep_ratio,
                          std::uint32_t support);
/// Index buffers depend on P, KSS and the kernel size only.
FormatStorage storage_ppw(const LayerShape& shape, std::uint32_t period, std::uint32_t support);

/// Keep ratio giving 8x weight pruning for FKW at the given support.
double default_fkw_keep_ratio(const LayerShape& shape, std::uint32_t support);

/// Parameters shared by the per-format dispatch below.
struct StorageParams {
    std::uint32_t period = 8;
    std::uint32_t support = 2;
    std::optional<double> fkw_keep_ratio;  // default_fkw_keep_ratio when unset
};

FormatStorage storage_of(Format f, const LayerShape& shape, const BitWidthPolicy& policy, const StorageParams& params);

/// Total bits of a format at weight density d, with nnz treated as a real
/// number (nnz = d * dense_count). FKW keeps d*h_k*w_k/KSS of its kernels;
/// PPW stores d*dense_count weights behind its constant index buffers.
/// Returns nullopt where the format cannot reach that density.
std::optional<double> total_bits_at_density(Format f, const LayerShape& shape, double density,
                                            const BitWidthPolicy& policy, const StorageParams& params);

/// Largest density any format can represent for this shape (FKW: KSS/area).
double max_density(Format f, const LayerShape& shape, const StorageParams& params);

struct ThresholdResult {
    bool achievable = false;
    double density = 0.0;  // largest kept fraction with candidate <= baseline
    bool closed_form = false;
};

/// Largest d in (0, d_max] with candidate(d) <= baseline_bits. candidate must
/// be nondecreasing. Uses the closed form when candidate is affine, bisection
/// otherwise.
ThresholdResult effective_sparsity_threshold(double baseline_bits, const std::function<double(double)>& candidate,
                                             double d_max);

/// Network form: candidate format summed over `layers` at a common density.
ThresholdResult effective_sparsity_threshold(double baseline_bits, Format candidate,
                                             const std::vector<LayerShape>& layers, const BitWidthPolicy& policy,
                                             const StorageParams& params);

struct StorageRow {
    std::string layer;
    FormatStorage storage;
};

/// Per-layer storage of every format, in all_formats() order per layer.
std::vector<StorageRow> storage_table(const std::vector<LayerShape>& layers, const BitWidthPolicy& policy,
                                      const StorageParams& params);

/// Per-format sum over layers. With shared_ppw_index the PPW index buffers are
/// counted once for the whole network instead of once per layer.
FormatStorage network_storage(Format f, const std::vector<LayerShape>& layers, const BitWidthPolicy& policy,
                              const StorageParams& params, bool shared_ppw_index = false);

/// CSV with columns layer,format,weight_bits,index_bits,total_bits,percent_index.
std::string storage_csv(const std::vector<StorageRow>& rows);
std::string storage_json(const std::vector<StorageRow>& rows);

}  // namespace sps
