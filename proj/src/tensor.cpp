// SPDX-License-Identifier: Apache-2.0
#include "sps/tensor.hpp"

#include "sps/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace sps {

namespace {

std::size_t checked_product(std::initializer_list<std::uint32_t> dims, const char* what)
{
    std::size_t n = 1;
    for (auto d : dims) {
        if (d == 0) {
            throw DimensionError(std::string(what) + ": all dimensions must be >= 1");
        }
        n *= d;
    }
    return n;
}

}  // namespace

Tensor4::Tensor4(std::uint32_t c_out, std::uint32_t c_in, std::uint32_t h_k, std::uint32_t w_k)
    : c_out_(c_out), c_in_(c_in), h_k_(h_k), w_k_(w_k),
      values_(checked_product({c_out, c_in, h_k, w_k}, "Tensor4"), 0)
{}

Tensor4::Tensor4(std::uint32_t c_out, std::uint32_t c_in, std::uint32_t h_k, std::uint32_t w_k,
                 std::vector<std::int8_t> values)
    : c_out_(c_out), c_in_(c_in), h_k_(h_k), w_k_(w_k), values_(std::move(values))
{
    auto n = checked_product({c_out, c_in, h_k, w_k}, "Tensor4");
    if (values_.size() != n) {
        throw DimensionError("Tensor4 " + dims_string() + " expects " + std::to_string(n) +
                             " values, got " + std::to_string(values_.size()));
    }
}

std::size_t Tensor4::count_nonzero() const
{
    return std::size_t(std::count_if(values_.begin(), values_.end(), [](auto v) { return v != 0; }));
}

std::string Tensor4::dims_string() const
{
    return std::to_string(c_out_) + "x" + std::to_string(c_in_) + "x" + std::to_string(h_k_) + "x" +
           std::to_string(w_k_);
}

FeatureMap::FeatureMap(std::uint32_t c, std::uint32_t h, std::uint32_t w)
    : c_(c), h_(h), w_(w), values_(checked_product({c, h, w}, "FeatureMap"), 0)
{}

FeatureMap::FeatureMap(std::uint32_t c, std::uint32_t h, std::uint32_t w, std::vector<std::int32_t> values)
    : c_(c), h_(h), w_(w), values_(std::move(values))
{
    auto n = checked_product({c, h, w}, "FeatureMap");
    if (values_.size() != n) {
        throw DimensionError("FeatureMap " + dims_string() + " expects " + std::to_string(n) +
                             " values, got " + std::to_string(values_.size()));
    }
}

std::string FeatureMap::dims_string() const
{
    return std::to_string(c_) + "x" + std::to_string(h_) + "x" + std::to_string(w_);
}

std::uint32_t ConvGeometry::output_extent(std::uint32_t in, std::uint32_t kernel) const
{
    if (stride == 0) {
        throw DimensionError("stride must be positive");
    }
    auto padded = std::int64_t(in) + 2 * std::int64_t(pad) - std::int64_t(kernel);
    if (padded < 0 || padded % stride != 0) {
        throw DimensionError("geometry (in=" + std::to_string(in) + ", kernel=" + std::to_string(kernel) +
                             ", stride=" + std::to_string(stride) + ", pad=" + std::to_string(pad) +
                             ") does not give an integral output extent");
    }
    return std::uint32_t(padded / stride + 1);
}

FeatureMap conv2d_dense(const FeatureMap& ifm, const Tensor4& weights, const ConvGeometry& geom)
{
    if (ifm.c() != weights.c_in()) {
        throw DimensionError("conv2d_dense: ifm " + ifm.dims_string() + " has " + std::to_string(ifm.c()) +
                             " channels but weights " + weights.dims_string() + " expect c_in=" +
                             std::to_string(weights.c_in()));
    }
    const auto h_out = geom.output_extent(ifm.h(), weights.h_k());
    const auto w_out = geom.output_extent(ifm.w(), weights.w_k());
    FeatureMap out(weights.c_out(), h_out, w_out);

    const auto pad = std::int64_t(geom.pad);
    for (std::uint32_t oc = 0; oc < weights.c_out(); ++oc) {
        for (std::uint32_t oh = 0; oh < h_out; ++oh) {
            for (std::uint32_t ow = 0; ow < w_out; ++ow) {
                std::int32_t acc = 0;
                for (std::uint32_t ic = 0; ic < weights.c_in(); ++ic) {
                    for (std::uint32_t kh = 0; kh < weights.h_k(); ++kh) {
                        auto y = std::int64_t(oh) * geom.stride + kh - pad;
                        if (y < 0 || y >= ifm.h()) {
                            continue;
                        }
                        for (std::uint32_t kw = 0; kw < weights.w_k(); ++kw) {
                            auto x = std::int64_t(ow) * geom.stride + kw - pad;
                            if (x < 0 || x >= ifm.w()) {
                                continue;
                            }
                            acc += std::int32_t(weights(oc, ic, kh, kw)) * ifm(ic, std::uint32_t(y), std::uint32_t(x));
                        }
                    }
                }
                out(oc, oh, ow) = acc;
            }
        }
    }
    return out;
}

FeatureMap relu(const FeatureMap& fm)
{
    FeatureMap out = fm;
    for (auto& v : out.values()) {
        v = std::max(v, 0);
    }
    return out;
}

FeatureMap maxpool2(const FeatureMap& fm)
{
    if (fm.h() % 2 != 0 || fm.w() % 2 != 0) {
        throw DimensionError("maxpool2: height and width must be even, got " + fm.dims_string());
    }
    FeatureMap out(fm.c(), fm.h() / 2, fm.w() / 2);
    for (std::uint32_t c = 0; c < fm.c(); ++c) {
        for (std::uint32_t y = 0; y < out.h(); ++y) {
            for (std::uint32_t x = 0; x < out.w(); ++x) {
                out(c, y, x) = std::max({fm(c, 2 * y, 2 * x), fm(c, 2 * y, 2 * x + 1), fm(c, 2 * y + 1, 2 * x),
                                         fm(c, 2 * y + 1, 2 * x + 1)});
            }
        }
    }
    return out;
}

FeatureMap requantize(const FeatureMap& fm, std::uint32_t shift)
{
    FeatureMap out = fm;
    const auto s = std::min<std::uint32_t>(shift, 31);
    for (auto& v : out.values()) {
        v = std::clamp(v >> s, std::int32_t(std::numeric_limits<std::int8_t>::min()),
                       std::int32_t(std::numeric_limits<std::int8_t>::max()));
    }
    return out;
}

bool is_permutation(std::span<const std::uint32_t> perm, std::size_t n)
{
    if (perm.size() != n) {
        return false;
    }
    std::vector<bool> seen(n, false);
    for (auto p : perm) {
        if (p >= n || seen[p]) {
            return false;
        }
        seen[p] = true;
    }
    return true;
}

std::vector<std::uint32_t> invert_permutation(std::span<const std::uint32_t> perm)
{
    if (!is_permutation(perm, perm.size())) {
        throw DimensionError("invert_permutation: not a bijection");
    }
    std::vector<std::uint32_t> inv(perm.size());
    for (std::uint32_t i = 0; i < perm.size(); ++i) {
        inv[perm[i]] = i;
    }
    return inv;
}

std::vector<std::uint32_t> identity_permutation(std::size_t n)
{
    std::vector<std::uint32_t> id(n);
    std::iota(id.begin(), id.end(), 0u);
    return id;
}

FeatureMap permute_channels(const FeatureMap& fm, std::span<const std::uint32_t> perm)
{
    if (!is_permutation(perm, fm.c())) {
        throw DimensionError("permute_channels: perm is not a bijection on [0, " + std::to_string(fm.c()) + ")");
    }
    FeatureMap out(fm.c(), fm.h(), fm.w());
    const auto plane = fm.plane();
    for (std::uint32_t i = 0; i < fm.c(); ++i) {
        std::copy_n(fm.values().begin() + std::ptrdiff_t(i * plane), plane,
                    out.values().begin() + std::ptrdiff_t(perm[i] * plane));
    }
    return out;
}

Tensor4 permute_filters(const Tensor4& t, std::span<const std::uint32_t> perm)
{
    if (!is_permutation(perm, t.c_out())) {
        throw DimensionError("permute_filters: perm is not a bijection on [0, " + std::to_string(t.c_out()) + ")");
    }
    Tensor4 out(t.c_out(), t.c_in(), t.h_k(), t.w_k());
    const auto filter = std::size_t(t.c_in()) * t.kernel_area();
    for (std::uint32_t i = 0; i < t.c_out(); ++i) {
        std::copy_n(t.values().begin() + std::ptrdiff_t(i * filter), filter,
                    out.values().begin() + std::ptrdiff_t(perm[i] * filter));
    }
    return out;
}

Tensor4 permute_input_channels(const Tensor4& t, std::span<const std::uint32_t> perm)
{
    if (!is_permutation(perm, t.c_in())) {
        throw DimensionError("permute_input_channels: perm is not a bijection on [0, " + std::to_string(t.c_in()) +
                             ")");
    }
    Tensor4 out(t.c_out(), t.c_in(), t.h_k(), t.w_k());
    const auto area = t.kernel_area();
    for (std::uint32_t oc = 0; oc < t.c_out(); ++oc) {
        for (std::uint32_t i = 0; i < t.c_in(); ++i) {
            std::copy_n(t.values().begin() + std::ptrdiff_t(t.index(oc, i, 0, 0)), area,
                        out.values().begin() + std::ptrdiff_t(out.index(oc, perm[i], 0, 0)));
        }
    }
    return out;
}

}  // namespace sps
