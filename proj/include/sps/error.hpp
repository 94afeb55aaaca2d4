// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sps {

/// Shapes or sizes that do not fit together.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A nonzero weight sits outside the pattern its kernel is assigned to.
class ComplianceError : public std::runtime_error {
public:
    ComplianceError(std::uint32_t oc, std::uint32_t ic, std::uint32_t kh, std::uint32_t kw)
        : std::runtime_error("non-compliant weight at (oc=" + std::to_string(oc) + ", ic=" +
                             std::to_string(ic) + ", kh=" + std::to_string(kh) +
                             ", kw=" + std::to_string(kw) + ")"),
          oc(oc), ic(ic), kh(kh), kw(kw)
    {}

    std::uint32_t oc, ic, kh, kw;
};

/// Malformed serialized data or an inconsistent in-memory layer.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A correctness gate failed (CLI exit code 2).
class VerificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sps
