// SPDX-License-Identifier: Apache-2.0
#include "sps/pps.hpp"

#include "sps/detail/bytes.hpp"
#include "sps/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace sps {

bool KernelVariant::contains(std::uint32_t kh, std::uint32_t kw) const
{
    return std::binary_search(positions.begin(), positions.end(), KernelPos{kh, kw});
}

std::string to_string(PatternStrategy s)
{
    switch (s) {
    case PatternStrategy::magnitude: return "magnitude";
    case PatternStrategy::fixed: return "fixed";
    case PatternStrategy::random: return "random";
    }
    return "?";
}

PatternStrategy parse_strategy(const std::string& s)
{
    if (s == "magnitude") return PatternStrategy::magnitude;
    if (s == "fixed") return PatternStrategy::fixed;
    if (s == "random") return PatternStrategy::random;
    throw ConfigError("unknown pattern strategy \"" + s + "\"");
}

void PpsConfig::validate() const
{
    if (period == 0 || support == 0 || h_k == 0 || w_k == 0) {
        throw DimensionError("PpsConfig: P, KSS, h_k, w_k must all be >= 1");
    }
    if (support > h_k * w_k) {
        throw DimensionError("PpsConfig: KSS=" + std::to_string(support) + " exceeds kernel area " +
                             std::to_string(h_k * w_k));
    }
    if (patterns.size() != period) {
        throw DimensionError("PpsConfig: expected " + std::to_string(period) + " patterns, got " +
                             std::to_string(patterns.size()));
    }
    std::set<KernelVariant> distinct;
    for (std::size_t v = 0; v < patterns.size(); ++v) {
        const auto& pos = patterns[v].positions;
        if (pos.size() != support) {
            throw DimensionError("PpsConfig: pattern " + std::to_string(v) + " has " + std::to_string(pos.size()) +
                                 " taps, KSS is " + std::to_string(support));
        }
        for (std::size_t k = 0; k < pos.size(); ++k) {
            if (pos[k].first >= h_k || pos[k].second >= w_k) {
                throw DimensionError("PpsConfig: pattern " + std::to_string(v) + " tap out of kernel bounds");
            }
            if (k > 0 && !(pos[k - 1] < pos[k])) {
                throw DimensionError("PpsConfig: pattern " + std::to_string(v) +
                                     " taps must be distinct and sorted lexicographically");
            }
        }
        if (!distinct.insert(patterns[v]).second) {
            throw DimensionError("PpsConfig: pattern " + std::to_string(v) + " duplicates an earlier pattern");
        }
    }
}

namespace {

// n choose k, saturating.
std::uint64_t choose(std::uint64_t n, std::uint64_t k)
{
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        if (r > UINT64_MAX / (n - k + i)) {
            return UINT64_MAX;
        }
        r = r * (n - k + i) / i;
    }
    return r;
}

KernelVariant from_linear(const std::vector<std::uint32_t>& taps, std::uint32_t w_k)
{
    KernelVariant kv;
    for (auto t : taps) {
        kv.positions.emplace_back(t / w_k, t % w_k);
    }
    std::sort(kv.positions.begin(), kv.positions.end());
    return kv;
}

// Advance a sorted k-combination of [0, n) to its lexicographic successor.
bool next_combination(std::vector<std::uint32_t>& c, std::uint32_t n)
{
    const auto k = c.size();
    for (std::size_t i = k; i-- > 0;) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (auto j = i + 1; j < k; ++j) {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    return false;
}

void fill_lexicographic(std::vector<KernelVariant>& chosen, std::uint32_t period, std::uint32_t support,
                        std::uint32_t h_k, std::uint32_t w_k)
{
    std::set<KernelVariant> used(chosen.begin(), chosen.end());
    std::vector<std::uint32_t> comb(support);
    std::iota(comb.begin(), comb.end(), 0u);
    do {
        if (chosen.size() >= period) {
            break;
        }
        auto kv = from_linear(comb, w_k);
        if (used.insert(kv).second) {
            chosen.push_back(std::move(kv));
        }
    } while (next_combination(comb, h_k * w_k));
}

}  // namespace

PatternSelection select_patterns(const Tensor4& dense, std::uint32_t period, std::uint32_t support,
                                 PatternStrategy strategy, std::uint64_t seed)
{
    const auto area = std::uint32_t(dense.kernel_area());
    if (period == 0 || support == 0) {
        throw DimensionError("select_patterns: P and KSS must be >= 1");
    }
    if (support > area) {
        throw DimensionError("select_patterns: KSS=" + std::to_string(support) + " exceeds kernel area " +
                             std::to_string(area));
    }
    if (choose(area, support) < period) {
        throw DimensionError("select_patterns: only " + std::to_string(choose(area, support)) +
                             " distinct patterns exist for KSS=" + std::to_string(support) + ", P=" +
                             std::to_string(period) + " requested");
    }

    PatternSelection sel;
    switch (strategy) {
    case PatternStrategy::fixed:
        throw ConfigError("select_patterns: strategy \"fixed\" takes patterns from the config");

    case PatternStrategy::random: {
        std::mt19937_64 rng(seed);
        std::set<KernelVariant> seen;
        std::vector<std::uint32_t> idx(area);
        while (sel.patterns.size() < period) {
            std::iota(idx.begin(), idx.end(), 0u);
            // Partial Fisher-Yates; raw engine output keeps this portable.
            for (std::uint32_t i = 0; i < support; ++i) {
                auto j = i + std::uint32_t(rng() % (area - i));
                std::swap(idx[i], idx[j]);
            }
            auto kv = from_linear({idx.begin(), idx.begin() + support}, dense.w_k());
            if (seen.insert(kv).second) {
                sel.patterns.push_back(std::move(kv));
            }
        }
        break;
    }

    case PatternStrategy::magnitude: {
        std::map<KernelVariant, std::uint64_t> votes;
        std::vector<std::uint32_t> order(area);
        for (std::uint32_t oc = 0; oc < dense.c_out(); ++oc) {
            for (std::uint32_t ic = 0; ic < dense.c_in(); ++ic) {
                const auto* k = dense.values().data() + dense.index(oc, ic, 0, 0);
                std::iota(order.begin(), order.end(), 0u);
                std::stable_sort(order.begin(), order.end(),
                                 [k](auto a, auto b) { return std::abs(int(k[a])) > std::abs(int(k[b])); });
                ++votes[from_linear({order.begin(), order.begin() + support}, dense.w_k())];
            }
        }
        std::vector<std::pair<KernelVariant, std::uint64_t>> ranked(votes.begin(), votes.end());
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        for (std::size_t i = 0; i < ranked.size() && i < period; ++i) {
            sel.patterns.push_back(ranked[i].first);
        }
        if (sel.patterns.size() < period) {
            sel.warnings.push_back("only " + std::to_string(sel.patterns.size()) +
                                   " distinct candidate masks for P=" + std::to_string(period) +
                                   "; padded with lexicographically smallest unused masks");
            fill_lexicographic(sel.patterns, period, support, dense.h_k(), dense.w_k());
        }
        break;
    }
    }
    return sel;
}

PpsConfig make_config(const Tensor4& dense, std::uint32_t period, std::uint32_t support,
                      PatternStrategy strategy, std::uint64_t seed)
{
    PpsConfig cfg;
    cfg.period = period;
    cfg.support = support;
    cfg.h_k = dense.h_k();
    cfg.w_k = dense.w_k();
    cfg.seed = seed;
    cfg.strategy = strategy;
    cfg.patterns = select_patterns(dense, period, support, strategy, seed).patterns;
    cfg.validate();
    return cfg;
}

namespace {

void check_dims(const Tensor4& t, const PpsConfig& cfg, const char* who)
{
    cfg.validate();
    if (t.h_k() != cfg.h_k || t.w_k() != cfg.w_k) {
        throw DimensionError(std::string(who) + ": tensor kernel " + std::to_string(t.h_k()) + "x" +
                             std::to_string(t.w_k()) + " does not match config kernel " + std::to_string(cfg.h_k) +
                             "x" + std::to_string(cfg.w_k));
    }
}

}  // namespace

Tensor4 apply_periodic_mask(const Tensor4& dense, const PpsConfig& cfg)
{
    check_dims(dense, cfg, "apply_periodic_mask");
    Tensor4 out(dense.c_out(), dense.c_in(), dense.h_k(), dense.w_k());
    for (std::uint32_t oc = 0; oc < dense.c_out(); ++oc) {
        for (std::uint32_t ic = 0; ic < dense.c_in(); ++ic) {
            for (const auto& [kh, kw] : cfg.patterns[kv_of(oc, ic, cfg.period)].positions) {
                out(oc, ic, kh, kw) = dense(oc, ic, kh, kw);
            }
        }
    }
    return out;
}

void check_compliance(const Tensor4& masked, const PpsConfig& cfg)
{
    check_dims(masked, cfg, "check_compliance");
    for (std::uint32_t oc = 0; oc < masked.c_out(); ++oc) {
        for (std::uint32_t ic = 0; ic < masked.c_in(); ++ic) {
            const auto& kv = cfg.patterns[kv_of(oc, ic, cfg.period)];
            for (std::uint32_t kh = 0; kh < masked.h_k(); ++kh) {
                for (std::uint32_t kw = 0; kw < masked.w_k(); ++kw) {
                    if (masked(oc, ic, kh, kw) != 0 && !kv.contains(kh, kw)) {
                        throw ComplianceError(oc, ic, kh, kw);
                    }
                }
            }
        }
    }
}

std::string config_to_json(const PpsConfig& cfg)
{
    nlohmann::ordered_json j;
    j["P"] = cfg.period;
    j["KSS"] = cfg.support;
    j["h_k"] = cfg.h_k;
    j["w_k"] = cfg.w_k;
    auto pats = nlohmann::ordered_json::array();
    for (const auto& kv : cfg.patterns) {
        auto taps = nlohmann::ordered_json::array();
        for (const auto& [kh, kw] : kv.positions) {
            taps.push_back({kh, kw});
        }
        pats.push_back(taps);
    }
    j["patterns"] = pats;
    j["seed"] = cfg.seed;
    j["strategy"] = to_string(cfg.strategy);
    return j.dump(2);
}

PpsConfig config_from_json(const std::string& text)
{
    try {
        auto j = nlohmann::json::parse(text);
        PpsConfig cfg;
        cfg.period = j.at("P").get<std::uint32_t>();
        cfg.support = j.at("KSS").get<std::uint32_t>();
        cfg.h_k = j.at("h_k").get<std::uint32_t>();
        cfg.w_k = j.at("w_k").get<std::uint32_t>();
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.strategy = parse_strategy(j.value("strategy", std::string("fixed")));
        for (const auto& p : j.at("patterns")) {
            KernelVariant kv;
            for (const auto& tap : p) {
                auto pair = tap.get<std::vector<std::uint32_t>>();
                if (pair.size() != 2) {
                    throw ConfigError("pattern taps must be [kh, kw] pairs");
                }
                kv.positions.emplace_back(pair[0], pair[1]);
            }
            cfg.patterns.push_back(std::move(kv));
        }
        cfg.validate();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("pps config: ") + e.what());
    } catch (const DimensionError& e) {
        throw ConfigError(e.what());
    }
}

void save_config(const std::string& path, const PpsConfig& cfg)
{
    auto s = config_to_json(cfg) + "\n";
    detail::write_file(path, {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

PpsConfig load_config(const std::string& path)
{
    auto bytes = detail::read_file(path);
    return config_from_json(std::string(bytes.begin(), bytes.end()));
}

}  // namespace sps
