// SPDX-License-Identifier: Apache-2.0
#include "sps/pipeline.hpp"

#include "sps/detail/bytes.hpp"
#include "sps/error.hpp"
#include "sps/tensor_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <iomanip>
#include <sstream>

namespace sps {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string resolve(const fs::path& base, const std::string& p)
{
    fs::path path(p);
    return (path.is_relative() && !base.empty() ? base / path : path).string();
}

template <class T>
T get_or(const ojson& j, const char* key, T fallback)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config: bad value for \"") + key + "\"");
    }
}

std::vector<KernelVariant> parse_patterns(const ojson& j)
{
    std::vector<KernelVariant> out;
    if (!j.is_array()) throw ConfigError("config: patterns must be a list of tap lists");
    for (const auto& pat : j) {
        KernelVariant kv;
        for (const auto& tap : pat) {
            if (!tap.is_array() || tap.size() != 2) throw ConfigError("config: a tap is [kh, kw]");
            kv.positions.emplace_back(tap[0].get<std::uint32_t>(), tap[1].get<std::uint32_t>());
        }
        std::sort(kv.positions.begin(), kv.positions.end());
        out.push_back(std::move(kv));
    }
    return out;
}

Tensor4 load_weights(const std::string& path)
{
    if (fs::path(path).extension() == ".json") {
        auto bytes = detail::read_file(path);
        return tensor4_from_json(std::string(bytes.begin(), bytes.end()));
    }
    return load_tensor4(path);
}

FeatureMap load_input(const std::string& path)
{
    if (fs::path(path).extension() == ".json") {
        auto bytes = detail::read_file(path);
        return feature_map_from_json(std::string(bytes.begin(), bytes.end()));
    }
    return load_feature_map(path);
}

void write_text(const fs::path& path, const std::string& text, CommandResult& res)
{
    detail::write_file(path.string(), {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
    res.written.push_back(path.string());
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes, CommandResult& res)
{
    detail::write_file(path.string(), bytes);
    res.written.push_back(path.string());
}

fs::path out_dir(const PipelineConfig& cfg, const char* sub)
{
    fs::path d = fs::path(cfg.out) / sub;
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) throw ConfigError("cannot create " + d.string() + ": " + ec.message());
    return d;
}

std::string layer_stem(std::size_t i, const FixtureLayer& l)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02zu_", i + 1);
    return buf + l.name;
}

ojson counters_json(const EventCounters& c)
{
    ojson j;
    j["weight_fetches"] = c.weight_fetches;
    j["mac_ops"] = c.mac_ops;
    j["index_reads"] = c.index_reads;
    j["act_fetches"] = c.act_fetches;
    j["psum_accums"] = c.psum_accums;
    j["reorder_moves"] = c.reorder_moves;
    j["output_writes"] = c.output_writes;
    return j;
}

std::string hex64(std::uint64_t v)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

StorageParams storage_params(const PipelineConfig& cfg)
{
    StorageParams p;
    p.period = cfg.period;
    p.support = cfg.support;
    p.fkw_keep_ratio = cfg.fkw_keep_ratio;
    return p;
}

std::vector<LayerShape> report_shapes(const PipelineConfig& cfg)
{
    auto fx = resolve_fixture(cfg);
    return unique_shapes(fx, cfg.support);
}

/// Compliance-checked masked weights of every layer.
std::vector<Tensor4> masked_weights(const PipelineConfig& cfg, const Materialized& m)
{
    std::vector<Tensor4> out;
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        const auto& l = m.layers[i];
        const bool from_file = i < cfg.weight_files.size() && cfg.weight_files[i].has_value();
        if (cfg.weights_masked && from_file) {
            check_compliance(l.weights, l.cfg);
            out.push_back(l.weights);
        } else {
            out.push_back(apply_periodic_mask(l.weights, l.cfg));
        }
    }
    return out;
}

}  // namespace

void PipelineConfig::validate() const
{
    if (period == 0 || support == 0) throw ConfigError("config: P and KSS must be positive");
    if (sys_w && *sys_w == 0) throw ConfigError("config: sys_w must be positive");
    if (sys_h && *sys_h == 0) throw ConfigError("config: sys_h must be positive");
    if (strategy == PatternStrategy::fixed && !patterns) {
        throw ConfigError("config: strategy \"fixed\" needs \"patterns\"");
    }
    if (fkw_keep_ratio && !(*fkw_keep_ratio > 0.0 && *fkw_keep_ratio <= 1.0)) {
        throw ConfigError("config: fkw_keep_ratio must lie in (0, 1]");
    }
    auto fx = resolve_fixture(*this);
    if (fx.layers.empty()) throw ConfigError("config: network has no layers");
    if (weight_files.size() > fx.layers.size()) throw ConfigError("config: more weight files than layers");
    auto must_exist = [](const std::string& p) {
        if (!fs::exists(p)) throw ConfigError("config: file not found: " + p);
    };
    for (const auto& f : weight_files) {
        if (f) must_exist(*f);
    }
    if (input) must_exist(*input);
    if (coefficients && !calibrate) must_exist(*coefficients);
    for (const auto& l : fx.layers) {
        if (l.c_in == 0 || l.c_out == 0 || l.h_k == 0 || l.w_k == 0) {
            throw ConfigError("config: layer " + l.name + " has a zero dimension");
        }
        if (support > l.h_k * l.w_k) {
            throw ConfigError("config: KSS exceeds the kernel area of layer " + l.name);
        }
    }
    for (std::size_t i = 1; i < fx.layers.size(); ++i) {
        if (fx.layers[i].c_in != fx.layers[i - 1].c_out) {
            throw ConfigError("config: layer " + fx.layers[i].name + " input channels do not match its producer");
        }
    }
    if (fx.layers.front().c_in != fx.in_c) throw ConfigError("config: input channels do not match the first layer");
}

PipelineConfig pipeline_config_from_json(const std::string& text, const fs::path& base_dir)
{
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");

    static const char* known[] = {"network", "layers", "input_shape", "weights_masked", "P", "KSS", "strategy",
                                  "patterns", "sys_w", "sys_h", "input", "preset", "fkw_keep_ratio",
                                  "coefficients", "out", "seed", "nlr", "verify", "calibrate"};
    for (const auto& [key, _] : j.items()) {
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
            std::end(known)) {
            throw ConfigError("config: unknown key \"" + key + "\"");
        }
    }

    PipelineConfig cfg;
    cfg.network = get_or<std::string>(j, "network", cfg.network);
    if (cfg.network == "custom") {
        if (!j.contains("layers") || !j.contains("input_shape")) {
            throw ConfigError("config: a custom network needs \"layers\" and \"input_shape\"");
        }
        auto shape = j["input_shape"].get<std::vector<std::uint32_t>>();
        if (shape.size() != 3) throw ConfigError("config: input_shape is [c, h, w]");
        cfg.custom.name = "custom";
        cfg.custom.in_c = shape[0];
        cfg.custom.in_h = shape[1];
        cfg.custom.in_w = shape[2];
        std::size_t k = 0;
        for (const auto& lj : j["layers"]) {
            FixtureLayer l;
            l.name = get_or<std::string>(lj, "name", "conv" + std::to_string(++k));
            l.c_in = get_or<std::uint32_t>(lj, "c_in", 0);
            l.c_out = get_or<std::uint32_t>(lj, "c_out", 0);
            l.h_k = get_or<std::uint32_t>(lj, "h_k", 3);
            l.w_k = get_or<std::uint32_t>(lj, "w_k", 3);
            l.geom.stride = get_or<std::uint32_t>(lj, "stride", 1);
            l.geom.pad = get_or<std::uint32_t>(lj, "pad", l.h_k / 2);
            l.maxpool = get_or<bool>(lj, "maxpool", false);
            l.sys_w = get_or<std::uint32_t>(lj, "sys_w", 8);
            l.sys_h = get_or<std::uint32_t>(lj, "sys_h", 8);
            if (lj.contains("weights")) {
                cfg.weight_files.resize(cfg.custom.layers.size() + 1);
                cfg.weight_files.back() = resolve(base_dir, lj["weights"].get<std::string>());
            }
            cfg.custom.layers.push_back(l);
        }
        cfg.custom.unique = cfg.custom.layers;
    } else if (j.contains("layers")) {
        throw ConfigError("config: \"layers\" requires \"network\": \"custom\"");
    }
    cfg.weights_masked = get_or<bool>(j, "weights_masked", false);
    cfg.period = get_or<std::uint32_t>(j, "P", cfg.period);
    cfg.support = get_or<std::uint32_t>(j, "KSS", cfg.support);
    if (j.contains("strategy")) cfg.strategy = parse_strategy(get_or<std::string>(j, "strategy", ""));
    if (j.contains("patterns")) {
        cfg.patterns = parse_patterns(j["patterns"]);
        if (!j.contains("strategy")) cfg.strategy = PatternStrategy::fixed;
    }
    if (j.contains("sys_w")) cfg.sys_w = get_or<std::uint32_t>(j, "sys_w", 1);
    if (j.contains("sys_h")) cfg.sys_h = get_or<std::uint32_t>(j, "sys_h", 1);
    if (j.contains("input")) cfg.input = resolve(base_dir, j["input"].get<std::string>());
    if (j.contains("preset")) cfg.preset = parse_preset(get_or<std::string>(j, "preset", ""));
    if (j.contains("fkw_keep_ratio")) cfg.fkw_keep_ratio = get_or<double>(j, "fkw_keep_ratio", 0.0);
    if (j.contains("coefficients")) cfg.coefficients = resolve(base_dir, j["coefficients"].get<std::string>());
    cfg.out = get_or<std::string>(j, "out", cfg.out);
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
    cfg.nlr = get_or<bool>(j, "nlr", cfg.nlr);
    cfg.verify = get_or<bool>(j, "verify", cfg.verify);
    cfg.calibrate = get_or<bool>(j, "calibrate", cfg.calibrate);
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path)
{
    auto bytes = detail::read_file(path);
    return pipeline_config_from_json(std::string(bytes.begin(), bytes.end()), fs::path(path).parent_path());
}

NetworkFixture resolve_fixture(const PipelineConfig& cfg)
{
    if (cfg.network == "custom") return cfg.custom;
    return fixture_by_name(cfg.network);
}

Materialized materialize(const PipelineConfig& cfg)
{
    cfg.validate();
    Materialized m;
    m.fixture = resolve_fixture(cfg);

    NetworkBuildOptions opts;
    opts.period = cfg.period;
    opts.support = cfg.support;
    opts.strategy = cfg.strategy;
    opts.seed = cfg.seed;
    opts.sys_w = cfg.sys_w;
    opts.sys_h = cfg.sys_h;
    opts.patterns = cfg.patterns;
    if (!cfg.weight_files.empty()) {
        opts.weights.resize(m.fixture.layers.size());
        for (std::size_t i = 0; i < cfg.weight_files.size(); ++i) {
            if (cfg.weight_files[i]) opts.weights[i] = load_weights(*cfg.weight_files[i]);
        }
    }
    m.layers = build_network(m.fixture, opts);

    if (cfg.input) {
        m.input = load_input(*cfg.input);
        if (m.input.c() != m.fixture.in_c) throw DimensionError("input has the wrong channel count");
    } else {
        m.input = random_feature_map(m.fixture.in_c, m.fixture.in_h, m.fixture.in_w, cfg.seed ^ 0x5eedF00Dull);
    }
    calibrate_requant_shifts(m.layers, m.input);
    return m;
}

CommandResult cmd_prune(const PipelineConfig& cfg)
{
    auto m = materialize(cfg);
    auto dir = out_dir(cfg, "prune");
    CommandResult res;
    auto masked = masked_weights(cfg, m);

    ojson report;
    report["network"] = m.fixture.name;
    report["P"] = cfg.period;
    report["KSS"] = cfg.support;
    report["strategy"] = to_string(cfg.strategy);
    report["seed"] = cfg.seed;
    report["layers"] = ojson::array();
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        const auto stem = layer_stem(i, m.fixture.layers[i]);
        write_bytes(dir / (stem + ".masked.spt4"), serialize(masked[i]), res);
        write_text(dir / (stem + ".pps.json"), config_to_json(m.layers[i].cfg) + "\n", res);

        ojson lj;
        lj["name"] = m.fixture.layers[i].name;
        lj["dims"] = masked[i].dims_string();
        lj["nnz"] = masked[i].count_nonzero();
        lj["dense_nnz"] = m.layers[i].weights.count_nonzero();
        auto pats = ojson::array();
        for (const auto& kv : m.layers[i].cfg.patterns) {
            auto taps = ojson::array();
            for (auto [kh, kw] : kv.positions) taps.push_back({kh, kw});
            pats.push_back(taps);
        }
        lj["patterns"] = pats;
        if (cfg.strategy == PatternStrategy::magnitude && !cfg.patterns) {
            lj["warnings"] = select_patterns(m.layers[i].weights, cfg.period, cfg.support, cfg.strategy,
                                             m.layers[i].cfg.seed)
                                 .warnings;
        } else {
            lj["warnings"] = ojson::array();
        }
        report["layers"].push_back(lj);
        res.summary += stem + ": " + std::to_string(masked[i].count_nonzero()) + " nonzeros\n";
    }
    write_text(dir / "patterns.json", report.dump(2) + "\n", res);
    return res;
}

CommandResult cmd_compile(const PipelineConfig& cfg)
{
    auto m = materialize(cfg);
    auto masked = masked_weights(cfg, m);
    auto dir = out_dir(cfg, "compile");
    CommandResult res;

    ojson report;
    report["network"] = m.fixture.name;
    report["nlr"] = cfg.nlr;
    report["layers"] = ojson::array();
    std::vector<PpwLayer> compiled;
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        const auto& l = m.layers[i];
        PpwLayer p = (cfg.nlr && i > 0) ? next_layer_reorder(compiled.back(), l.cfg, masked[i], l.sys_w, l.sys_h)
                                        : compile_layer(masked[i], l.cfg, l.sys_w, l.sys_h);
        auto bytes = serialize(p);
        const auto stem = layer_stem(i, m.fixture.layers[i]);
        if (cfg.verify) {
            auto back = decode_ppw_natural(deserialize_ppw(bytes));
            if (!(back == masked[i])) {
                throw VerificationError(stem + ": decoded PPW differs from the masked weights");
            }
        }
        write_bytes(dir / (stem + ".ppw"), bytes, res);

        ojson lj;
        lj["name"] = m.fixture.layers[i].name;
        lj["bytes"] = bytes.size();
        lj["index_section_bits"] = index_section_bits(p);
        lj["sys_w"] = p.sys_w;
        lj["sys_h"] = p.sys_h;
        lj["inc"] = p.inc();
        lj["onc"] = p.onc();
        lj["verified"] = cfg.verify;
        report["layers"].push_back(lj);
        res.summary += stem + ": " + std::to_string(bytes.size()) + " bytes" + (cfg.verify ? ", verified" : "") + "\n";
        compiled.push_back(std::move(p));
    }
    write_text(dir / "compile.json", report.dump(2) + "\n", res);
    return res;
}

CommandResult cmd_simulate(const PipelineConfig& cfg)
{
    auto m = materialize(cfg);
    masked_weights(cfg, m);  // compliance of pre-masked inputs
    auto dir = out_dir(cfg, "simulate");
    CommandResult res;

    const auto oracle = dense_reference_chain(m.layers, m.input);
    const auto oracle_sum = checksum(oracle);

    auto sps_run = simulate_network(m.layers, m.input, SimMode::sps, cfg.nlr);
    if (!(sps_run.ofm == oracle)) {
        throw VerificationError("simulate: SPS output checksum " + hex64(checksum(sps_run.ofm)) +
                                " differs from the dense oracle " + hex64(oracle_sum));
    }
    if (cfg.verify) {
        auto other = simulate_network(m.layers, m.input, SimMode::sps, !cfg.nlr);
        if (!(other.ofm == sps_run.ofm)) throw VerificationError("simulate: NLR on and off outputs differ");
    }

    for (auto mode : {SimMode::sps, SimMode::dense_baseline, SimMode::csr_model, SimMode::fkw_model}) {
        auto r = mode == SimMode::sps ? sps_run : simulate_network(m.layers, m.input, mode, cfg.nlr);
        ojson j;
        j["mode"] = to_string(mode);
        j["network"] = m.fixture.name;
        j["nlr"] = cfg.nlr;
        j["ofm_dims"] = {r.ofm.c(), r.ofm.h(), r.ofm.w()};
        j["checksum"] = hex64(checksum(r.ofm));
        j["oracle_checksum"] = hex64(oracle_sum);
        j["matches_oracle"] = r.ofm == oracle;
        j["counters"] = counters_json(r.counters);
        write_text(dir / (to_string(mode) + ".json"), j.dump(2) + "\n", res);
        res.summary += to_string(mode) + ": checksum " + hex64(checksum(r.ofm)) + "\n";
    }
    return res;
}

CommandResult cmd_storage_report(const PipelineConfig& cfg)
{
    cfg.validate();
    auto shapes = report_shapes(cfg);
    auto policy = BitWidthPolicy::from_preset(cfg.preset);
    auto params = storage_params(cfg);
    auto dir = out_dir(cfg, "storage");
    CommandResult res;

    auto rows = storage_table(shapes, policy, params);
    write_text(dir / "storage.csv", storage_csv(rows), res);
    write_text(dir / "storage.json", storage_json(rows), res);

    const auto ppw_shared = network_storage(Format::ppw, shapes, policy, params, true);
    const auto ppw_layer = network_storage(Format::ppw, shapes, policy, params, false);
    ojson summary;
    summary["network"] = resolve_fixture(cfg).name;
    summary["preset"] = to_string(cfg.preset);
    summary["P"] = cfg.period;
    summary["KSS"] = cfg.support;
    summary["formats"] = ojson::array();
    for (auto f : all_formats()) {
        auto s = network_storage(f, shapes, policy, params, true);
        ojson fj;
        fj["format"] = to_string(f);
        fj["weight_bits"] = s.weight_bits;
        fj["index_bits"] = s.index_bits;
        fj["total_bits"] = s.total_bits();
        fj["percent_index"] = s.percent_index();
        fj["total_vs_ppw"] = double(s.total_bits()) / double(ppw_shared.total_bits());
        fj["index_vs_ppw_shared"] = double(s.index_bits) / double(ppw_shared.index_bits);
        fj["index_vs_ppw_per_layer"] = double(s.index_bits) / double(ppw_layer.index_bits);
        summary["formats"].push_back(fj);
        res.summary += to_string(f) + ": " + std::to_string(s.total_bits()) + " bits\n";
    }
    write_text(dir / "summary.json", summary.dump(2) + "\n", res);
    return res;
}

CommandResult cmd_threshold_bench(const PipelineConfig& cfg)
{
    cfg.validate();
    auto shapes = report_shapes(cfg);
    auto policy = BitWidthPolicy::from_preset(cfg.preset);
    auto params = storage_params(cfg);
    auto dir = out_dir(cfg, "threshold");
    CommandResult res;

    std::ostringstream csv;
    csv << std::setprecision(10) << "baseline,candidate,achievable,kept_fraction,pruned_percent,closed_form\n";
    ojson j;
    j["network"] = resolve_fixture(cfg).name;
    j["preset"] = to_string(cfg.preset);
    j["thresholds"] = ojson::array();
    for (auto base : {Format::dense, Format::ppw}) {
        const double base_bits = double(network_storage(base, shapes, policy, params, true).total_bits());
        for (auto cand : all_formats()) {
            if (cand == base) continue;
            auto t = effective_sparsity_threshold(base_bits, cand, shapes, policy, params);
            csv << to_string(base) << ',' << to_string(cand) << ',' << (t.achievable ? 1 : 0) << ',' << t.density
                << ',' << (t.achievable ? 100.0 * (1.0 - t.density) : 100.0) << ',' << (t.closed_form ? 1 : 0)
                << '\n';
            ojson tj;
            tj["baseline"] = to_string(base);
            tj["candidate"] = to_string(cand);
            tj["achievable"] = t.achievable;
            tj["kept_fraction"] = t.density;
            tj["closed_form"] = t.closed_form;
            j["thresholds"].push_back(tj);
        }
    }
    write_text(dir / "threshold.csv", csv.str(), res);
    write_text(dir / "threshold.json", j.dump(2) + "\n", res);
    res.summary = "thresholds written for " + std::to_string(j["thresholds"].size()) + " format pairs\n";
    return res;
}

SavingsTargets default_savings_targets()
{
    return {{SimMode::sps, 4.49}, {SimMode::fkw_model, 3.1}, {SimMode::csr_model, 1.4}};
}

CommandResult cmd_energy_report(const PipelineConfig& cfg)
{
    if (!cfg.calibrate && !cfg.coefficients) {
        throw ConfigError("energy-report: no coefficient file (set \"coefficients\" or calibrate)");
    }
    auto m = materialize(cfg);
    auto dir = out_dir(cfg, "energy");
    CommandResult res;

    std::map<SimMode, EventCounters> runs;
    for (auto mode : {SimMode::sps, SimMode::dense_baseline, SimMode::csr_model, SimMode::fkw_model}) {
        runs[mode] = simulate_network(m.layers, m.input, mode, cfg.nlr).counters;
    }
    EnergyCoefficients k;
    if (cfg.calibrate) {
        k = calibrate(runs, default_savings_targets(), EnergyCoefficients{});
        save_coefficients((dir / "energy_coefficients.json").string(), k);
        res.written.push_back((dir / "energy_coefficients.json").string());
    } else {
        k = load_coefficients(*cfg.coefficients);
    }
    auto rows = energy_report(runs, k);
    write_text(dir / "energy.csv", energy_csv(rows), res);
    write_text(dir / "energy.json", energy_json(rows, k), res);
    for (const auto& r : rows) {
        std::ostringstream os;
        os << to_string(r.mode) << ": " << std::setprecision(4) << r.savings << "x\n";
        res.summary += os.str();
    }
    return res;
}

}  // namespace sps
