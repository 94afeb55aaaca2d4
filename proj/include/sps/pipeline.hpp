// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sps/energy.hpp"
#include "sps/fixtures.hpp"
#include "sps/storage.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sps {

/// Batch configuration shared by every command. JSON keys mirror the field
/// names; see README for an example.
struct PipelineConfig {
    std::string network = "vgg16";  // fixture name or "custom"
    NetworkFixture custom;          // used when network == "custom"
    std::vector<std::optional<std::string>> weight_files;  // per layer, optional
    bool weights_masked = false;    // weight files are already masked: check, do not re-mask

    std::uint32_t period = 8;
    std::uint32_t support = 2;
    PatternStrategy strategy = PatternStrategy::magnitude;
    std::optional<std::vector<KernelVariant>> patterns;  // required for strategy "fixed"
    std::optional<std::uint32_t> sys_w, sys_h;

    std::optional<std::string> input;  // feature map file; random when unset
    BitWidthPreset preset = BitWidthPreset::paper_calibrated;
    std::optional<double> fkw_keep_ratio;
    std::optional<std::string> coefficients;
    std::string out = "out";
    std::uint64_t seed = 1;
    bool nlr = true;
    bool verify = false;
    bool calibrate = false;  // energy-report: fit coefficients instead of loading them

    /// Throws ConfigError / DimensionError on invalid parameters or missing files.
    void validate() const;
};

/// Relative paths inside the JSON are resolved against base_dir.
PipelineConfig pipeline_config_from_json(const std::string& text, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::string& path);

/// The network described by the config (fixture or custom).
NetworkFixture resolve_fixture(const PipelineConfig& cfg);

/// Weights, patterns and array shapes for every layer, plus the network input.
/// Requantization shifts are calibrated on that input.
struct Materialized {
    NetworkFixture fixture;
    std::vector<NetworkLayer> layers;
    FeatureMap input;
};
Materialized materialize(const PipelineConfig& cfg);

struct CommandResult {
    std::vector<std::string> written;  // files, in write order
    std::string summary;               // one human-readable line per item
};

CommandResult cmd_prune(const PipelineConfig& cfg);
/// Throws ComplianceError for non-compliant pre-masked weights and
/// VerificationError when --verify finds a decode mismatch.
CommandResult cmd_compile(const PipelineConfig& cfg);
/// Throws VerificationError when the SPS output differs from the oracle.
CommandResult cmd_simulate(const PipelineConfig& cfg);
CommandResult cmd_storage_report(const PipelineConfig& cfg);
CommandResult cmd_threshold_bench(const PipelineConfig& cfg);
CommandResult cmd_energy_report(const PipelineConfig& cfg);

/// Savings targets the shipped coefficients are fitted to.
SavingsTargets default_savings_targets();

}  // namespace sps
