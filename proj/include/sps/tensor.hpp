// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sps {

/// Convolution weights, row-major [c_out][c_in][h_k][w_k], signed 8-bit.
class Tensor4 {
public:
    Tensor4() = default;
    Tensor4(std::uint32_t c_out, std::uint32_t c_in, std::uint32_t h_k, std::uint32_t w_k);
    Tensor4(std::uint32_t c_out, std::uint32_t c_in, std::uint32_t h_k, std::uint32_t w_k,
            std::vector<std::int8_t> values);

    std::uint32_t c_out() const { return c_out_; }
    std::uint32_t c_in() const { return c_in_; }
    std::uint32_t h_k() const { return h_k_; }
    std::uint32_t w_k() const { return w_k_; }
    std::size_t size() const { return values_.size(); }
    std::size_t kernel_area() const { return std::size_t(h_k_) * w_k_; }

    std::size_t index(std::uint32_t oc, std::uint32_t ic, std::uint32_t kh, std::uint32_t kw) const
    {
        return ((std::size_t(oc) * c_in_ + ic) * h_k_ + kh) * w_k_ + kw;
    }

    std::int8_t operator()(std::uint32_t oc, std::uint32_t ic, std::uint32_t kh, std::uint32_t kw) const
    {
        return values_[index(oc, ic, kh, kw)];
    }
    std::int8_t& operator()(std::uint32_t oc, std::uint32_t ic, std::uint32_t kh, std::uint32_t kw)
    {
        return values_[index(oc, ic, kh, kw)];
    }

    std::span<const std::int8_t> values() const { return values_; }
    std::span<std::int8_t> values() { return values_; }

    std::size_t count_nonzero() const;
    std::string dims_string() const;

    bool operator==(const Tensor4&) const = default;

private:
    std::uint32_t c_out_ = 0, c_in_ = 0, h_k_ = 0, w_k_ = 0;
    std::vector<std::int8_t> values_;
};

/// Activation map, row-major [c][h][w]. Inputs hold 8-bit values, outputs the
/// 32-bit accumulator range.
class FeatureMap {
public:
    FeatureMap() = default;
    FeatureMap(std::uint32_t c, std::uint32_t h, std::uint32_t w);
    FeatureMap(std::uint32_t c, std::uint32_t h, std::uint32_t w, std::vector<std::int32_t> values);

    std::uint32_t c() const { return c_; }
    std::uint32_t h() const { return h_; }
    std::uint32_t w() const { return w_; }
    std::size_t size() const { return values_.size(); }
    std::size_t plane() const { return std::size_t(h_) * w_; }

    std::size_t index(std::uint32_t ch, std::uint32_t y, std::uint32_t x) const
    {
        return (std::size_t(ch) * h_ + y) * w_ + x;
    }

    std::int32_t operator()(std::uint32_t ch, std::uint32_t y, std::uint32_t x) const
    {
        return values_[index(ch, y, x)];
    }
    std::int32_t& operator()(std::uint32_t ch, std::uint32_t y, std::uint32_t x)
    {
        return values_[index(ch, y, x)];
    }

    std::span<const std::int32_t> values() const { return values_; }
    std::span<std::int32_t> values() { return values_; }

    std::string dims_string() const;

    bool operator==(const FeatureMap&) const = default;

private:
    std::uint32_t c_ = 0, h_ = 0, w_ = 0;
    std::vector<std::int32_t> values_;
};

/// Stride and zero-padding border of a convolution.
struct ConvGeometry {
    std::uint32_t stride = 1;
    std::uint32_t pad = 0;

    /// "same" padding for odd kernels at stride 1.
    static ConvGeometry same(std::uint32_t kernel) { return {1, (kernel - 1) / 2}; }

    /// Output extent along one axis; throws DimensionError when not a positive integer.
    std::uint32_t output_extent(std::uint32_t in, std::uint32_t kernel) const;

    bool operator==(const ConvGeometry&) const = default;
};

/// Reference convolution: the plain six-level loop over (c_out, h_out, w_out, c_in, h_k, w_k).
FeatureMap conv2d_dense(const FeatureMap& ifm, const Tensor4& weights, const ConvGeometry& geom);

FeatureMap relu(const FeatureMap& fm);

/// 2x2 max-pooling with stride 2. Odd height or width is rejected.
FeatureMap maxpool2(const FeatureMap& fm);

/// Arithmetic right shift by `shift` then saturation to [-128, 127]; keeps
/// chained layers inside the 8-bit activation range.
FeatureMap requantize(const FeatureMap& fm, std::uint32_t shift);

/// Output channel perm[i] receives input channel i. `perm` must be a bijection on [0, c).
FeatureMap permute_channels(const FeatureMap& fm, std::span<const std::uint32_t> perm);

bool is_permutation(std::span<const std::uint32_t> perm, std::size_t n);
std::vector<std::uint32_t> invert_permutation(std::span<const std::uint32_t> perm);
std::vector<std::uint32_t> identity_permutation(std::size_t n);

/// Permute the filter (c_out) axis: output filter perm[i] is input filter i.
Tensor4 permute_filters(const Tensor4& t, std::span<const std::uint32_t> perm);

/// Permute the input-channel axis: output channel perm[i] is input channel i.
Tensor4 permute_input_channels(const Tensor4& t, std::span<const std::uint32_t> perm);

}  // namespace sps
