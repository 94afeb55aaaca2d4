// SPDX-License-Identifier: Apache-2.0
// spsflow: prune, compile, simulate and report on periodic-pattern sparse CNNs.
#include "sps/error.hpp"
#include "sps/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#ifndef SPS_DEFAULT_COEFFICIENTS
#define SPS_DEFAULT_COEFFICIENTS ""
#endif

namespace {

enum Exit { ok = 0, config_error = 1, verification_failure = 2 };

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Periodic pattern sparsity compiler and systolic simulator"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string preset;
    std::string nlr;
    std::string out;
    bool verify = false;
    bool calibrate = false;
    bool quiet = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Pipeline config (JSON)");
        sub->add_option("--seed", seed, "Seed for weights, patterns and inputs");
        sub->add_option("--preset", preset, "Bit-width preset")->check(CLI::IsMember({"analytic", "paper-calibrated"}));
        sub->add_option("--nlr", nlr, "Next-layer reordering")->check(CLI::IsMember({"on", "off"}));
        sub->add_option("--out", out, "Output directory");
        sub->add_flag("--verify", verify, "Re-check results against the reference");
        sub->add_flag("-q,--quiet", quiet, "Only report errors");
    };
    auto* prune = app.add_subcommand("prune", "Select patterns and write masked weights");
    auto* compile = app.add_subcommand("compile", "Compile masked weights to PPW1 files");
    auto* simulate = app.add_subcommand("simulate", "Run every execution mode and check against the oracle");
    auto* storage = app.add_subcommand("storage-report", "Per-layer storage of every weight format");
    auto* threshold = app.add_subcommand("threshold-bench", "Effective sparsity thresholds between formats");
    auto* energy = app.add_subcommand("energy-report", "Energy and savings of every execution mode");
    for (auto* sub : {prune, compile, simulate, storage, threshold, energy}) add_common(sub);
    energy->add_flag("--calibrate", calibrate, "Fit index/reorder coefficients instead of loading them");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? ok : config_error;
    }

    try {
        sps::PipelineConfig cfg = config_path.empty() ? sps::PipelineConfig{} : sps::load_pipeline_config(config_path);
        if (seed) cfg.seed = *seed;
        if (!preset.empty()) cfg.preset = sps::parse_preset(preset);
        if (!nlr.empty()) cfg.nlr = nlr == "on";
        if (!out.empty()) cfg.out = out;
        if (verify) cfg.verify = true;
        if (calibrate) cfg.calibrate = true;
        if (!cfg.coefficients && !cfg.calibrate && std::filesystem::exists(SPS_DEFAULT_COEFFICIENTS)) {
            cfg.coefficients = SPS_DEFAULT_COEFFICIENTS;
        }

        sps::CommandResult res;
        auto* sub = app.get_subcommands().front();
        if (sub == prune) res = sps::cmd_prune(cfg);
        else if (sub == compile) res = sps::cmd_compile(cfg);
        else if (sub == simulate) res = sps::cmd_simulate(cfg);
        else if (sub == storage) res = sps::cmd_storage_report(cfg);
        else if (sub == threshold) res = sps::cmd_threshold_bench(cfg);
        else res = sps::cmd_energy_report(cfg);

        if (!quiet) {
            std::cout << res.summary;
            for (const auto& f : res.written) std::cout << "wrote " << f << '\n';
        }
        return ok;
    } catch (const sps::VerificationError& e) {
        std::cerr << "verification failed: " << e.what() << '\n';
        return verification_failure;
    } catch (const sps::ComplianceError& e) {
        std::cerr << "verification failed: " << e.what() << '\n';
        return verification_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return config_error;
    }
}
