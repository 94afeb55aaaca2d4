// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sps/tensor.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sps {

using KernelPos = std::pair<std::uint32_t, std::uint32_t>;  // (kh, kw)

/// A pre-defined kernel pattern: the KSS positions allowed to hold weights,
/// sorted lexicographically.
struct KernelVariant {
    std::vector<KernelPos> positions;

    bool contains(std::uint32_t kh, std::uint32_t kw) const;
    bool operator==(const KernelVariant&) const = default;
    auto operator<=>(const KernelVariant&) const = default;
};

enum class PatternStrategy { magnitude, fixed, random };

std::string to_string(PatternStrategy s);
PatternStrategy parse_strategy(const std::string& s);

/// Periodic pattern configuration. Kernel (oc, ic) uses patterns[kv_of(oc, ic, P)].
struct PpsConfig {
    std::uint32_t period = 1;         // P
    std::uint32_t support = 1;        // KSS
    std::uint32_t h_k = 1, w_k = 1;
    std::vector<KernelVariant> patterns;
    std::uint64_t seed = 0;
    PatternStrategy strategy = PatternStrategy::fixed;

    std::uint32_t w_num() const { return period * support; }

    /// Throws DimensionError on any broken invariant (count, distinctness,
    /// bounds, fixed support, sortedness).
    void validate() const;

    bool operator==(const PpsConfig&) const = default;
};

/// Variant index of kernel (oc, ic): filter oc starts at oc mod P and rotates across channels.
constexpr std::uint32_t kv_of(std::uint32_t oc, std::uint32_t ic, std::uint32_t period)
{
    return (oc + ic) % period;
}

struct PatternSelection {
    std::vector<KernelVariant> patterns;
    std::vector<std::string> warnings;
};

/// Choose P patterns of KSS taps from a dense tensor.
///
/// magnitude: every kernel votes for the set of its KSS largest-|w| taps
/// (ties go to the lower row-major position); the P most voted sets win,
/// equal counts ordered lexicographically. When fewer than P distinct sets
/// exist the list is topped up with the lexicographically smallest unused
/// sets and a warning is recorded.
/// random: P distinct sets drawn uniformly with `seed`.
/// fixed: not accepted here; pass the patterns to PpsConfig directly.
PatternSelection select_patterns(const Tensor4& dense, std::uint32_t period, std::uint32_t support,
                                 PatternStrategy strategy, std::uint64_t seed);

/// Convenience: select patterns and wrap them into a validated config.
PpsConfig make_config(const Tensor4& dense, std::uint32_t period, std::uint32_t support,
                      PatternStrategy strategy, std::uint64_t seed);

/// Zero every weight outside its kernel's assigned pattern.
Tensor4 apply_periodic_mask(const Tensor4& dense, const PpsConfig& cfg);

/// Check whether every nonzero weight lies inside its assigned pattern.
/// Throws ComplianceError naming the first offending weight.
void check_compliance(const Tensor4& masked, const PpsConfig& cfg);

std::string config_to_json(const PpsConfig& cfg);
PpsConfig config_from_json(const std::string& text);
void save_config(const std::string& path, const PpsConfig& cfg);
PpsConfig load_config(const std::string& path);

}  // namespace sps
