// SPDX-License-Identifier: Apache-2.0
#include "sps/energy.hpp"

#include "sps/detail/bytes.hpp"
#include "sps/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace sps {

using nlohmann::json;

EnergyBreakdown breakdown(const EventCounters& c, const EnergyCoefficients& k)
{
    EnergyBreakdown b;
    b.weights = k.e_weight_fetch * double(c.weight_fetches);
    b.macs = k.e_mac * double(c.mac_ops);
    b.index = k.e_index_read * double(c.index_reads);
    b.reorder = k.e_reorder_move * double(c.reorder_moves);
    b.activations = k.e_act_fetch * double(c.act_fetches);
    b.outputs = k.e_output_write * double(c.output_writes);
    return b;
}

double energy(const EventCounters& c, const EnergyCoefficients& k)
{
    return breakdown(c, k).total();
}

double savings(double mode_energy, double dense_energy)
{
    if (!(mode_energy > 0.0)) {
        throw std::domain_error("savings: mode energy must be positive");
    }
    return dense_energy / mode_energy;
}

std::string coefficients_to_json(const EnergyCoefficients& k)
{
    json j;
    j["version"] = k.version;
    j["label"] = k.label;
    j["e_weight_fetch"] = k.e_weight_fetch;
    j["e_mac"] = k.e_mac;
    j["e_index_read"] = k.e_index_read;
    j["e_reorder_move"] = k.e_reorder_move;
    j["e_act_fetch"] = k.e_act_fetch;
    j["e_output_write"] = k.e_output_write;
    return j.dump(2) + "\n";
}

EnergyCoefficients coefficients_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("energy coefficients: ") + e.what());
    }
    EnergyCoefficients k;
    auto get = [&](const char* key, double& dst) {
        if (!j.contains(key)) return;
        if (!j[key].is_number()) throw ConfigError(std::string("energy coefficients: ") + key + " is not a number");
        dst = j[key].get<double>();
        if (dst < 0 || !std::isfinite(dst)) throw ConfigError(std::string("energy coefficients: ") + key + " < 0");
    };
    get("e_weight_fetch", k.e_weight_fetch);
    get("e_mac", k.e_mac);
    get("e_index_read", k.e_index_read);
    get("e_reorder_move", k.e_reorder_move);
    get("e_act_fetch", k.e_act_fetch);
    get("e_output_write", k.e_output_write);
    k.version = j.value("version", 1);
    k.label = j.value("label", std::string("default"));
    return k;
}

void save_coefficients(const std::string& path, const EnergyCoefficients& k)
{
    auto s = coefficients_to_json(k);
    detail::write_file(path, std::vector<std::uint8_t>(s.begin(), s.end()));
}

EnergyCoefficients load_coefficients(const std::string& path)
{
    auto bytes = detail::read_file(path);
    return coefficients_from_json(std::string(bytes.begin(), bytes.end()));
}

namespace {

const EventCounters& dense_of(const std::map<SimMode, EventCounters>& runs)
{
    auto it = runs.find(SimMode::dense_baseline);
    if (it == runs.end()) throw ConfigError("energy: no dense baseline run");
    return it->second;
}

}  // namespace

std::vector<EnergyRow> energy_report(const std::map<SimMode, EventCounters>& runs, const EnergyCoefficients& k)
{
    const double e_dense = energy(dense_of(runs), k);
    std::vector<EnergyRow> rows;
    for (const auto& [mode, c] : runs) {
        EnergyRow r;
        r.mode = mode;
        r.counters = c;
        r.parts = breakdown(c, k);
        r.savings = savings(r.parts.total(), e_dense);
        rows.push_back(r);
    }
    return rows;
}

std::string energy_csv(const std::vector<EnergyRow>& rows)
{
    std::ostringstream os;
    os << std::setprecision(10);
    os << "mode,weight_fetches,mac_ops,index_reads,act_fetches,psum_accums,reorder_moves,output_writes,"
          "e_weights,e_macs,e_index,e_reorder,e_activations,e_outputs,e_total,savings\n";
    for (const auto& r : rows) {
        const auto& c = r.counters;
        os << to_string(r.mode) << ',' << c.weight_fetches << ',' << c.mac_ops << ',' << c.index_reads << ','
           << c.act_fetches << ',' << c.psum_accums << ',' << c.reorder_moves << ',' << c.output_writes << ','
           << r.parts.weights << ',' << r.parts.macs << ',' << r.parts.index << ',' << r.parts.reorder << ','
           << r.parts.activations << ',' << r.parts.outputs << ',' << r.parts.total() << ',' << r.savings << '\n';
    }
    return os.str();
}

std::string energy_json(const std::vector<EnergyRow>& rows, const EnergyCoefficients& k)
{
    json j;
    j["coefficients"] = json::parse(coefficients_to_json(k));
    j["modes"] = json::array();
    for (const auto& r : rows) {
        const auto& c = r.counters;
        j["modes"].push_back({{"mode", to_string(r.mode)},
                              {"counters",
                               {{"weight_fetches", c.weight_fetches},
                                {"mac_ops", c.mac_ops},
                                {"index_reads", c.index_reads},
                                {"act_fetches", c.act_fetches},
                                {"psum_accums", c.psum_accums},
                                {"reorder_moves", c.reorder_moves},
                                {"output_writes", c.output_writes}}},
                              {"energy",
                               {{"weights", r.parts.weights},
                                {"macs", r.parts.macs},
                                {"index", r.parts.index},
                                {"reorder", r.parts.reorder},
                                {"activations", r.parts.activations},
                                {"outputs", r.parts.outputs},
                                {"total", r.parts.total()}}},
                              {"savings", r.savings}});
    }
    return j.dump(2) + "\n";
}

EnergyCoefficients calibrate(const std::map<SimMode, EventCounters>& runs, const SavingsTargets& targets,
                             const EnergyCoefficients& base)
{
    const double e_dense = energy(dense_of(runs), base);

    // residual_m = (b_m + x*I_m + y*R_m) / T_m - 1, with T_m = E_dense / t_m
    struct Row {
        double a, b, c;  // a*x + b*y - c
    };
    std::vector<Row> sys;
    for (const auto& [mode, t] : targets) {
        auto it = runs.find(mode);
        if (it == runs.end()) throw ConfigError("calibrate: no run for mode " + to_string(mode));
        if (!(t > 0)) throw ConfigError("calibrate: targets must be positive");
        EnergyCoefficients k0 = base;
        k0.e_index_read = 0;
        k0.e_reorder_move = 0;
        const double T = e_dense / t;
        sys.push_back({double(it->second.index_reads) / T, double(it->second.reorder_moves) / T,
                       1.0 - energy(it->second, k0) / T});
    }
    if (sys.empty()) throw ConfigError("calibrate: no targets");

    auto sse = [&](double x, double y) {
        double s = 0;
        for (const auto& r : sys) s += std::pow(r.a * x + r.b * y - r.c, 2);
        return s;
    };
    auto fit1 = [&](bool along_x) {
        double num = 0, den = 0;
        for (const auto& r : sys) {
            double a = along_x ? r.a : r.b;
            num += a * r.c;
            den += a * a;
        }
        return den > 0 ? std::max(0.0, num / den) : 0.0;
    };

    double saa = 0, sab = 0, sbb = 0, sac = 0, sbc = 0;
    for (const auto& r : sys) {
        saa += r.a * r.a;
        sab += r.a * r.b;
        sbb += r.b * r.b;
        sac += r.a * r.c;
        sbc += r.b * r.c;
    }
    const double det = saa * sbb - sab * sab;
    double x = 0, y = 0;
    bool interior = false;
    if (std::abs(det) > 1e-12 * std::max(1.0, saa * sbb)) {
        x = (sac * sbb - sbc * sab) / det;
        y = (saa * sbc - sab * sac) / det;
        interior = x >= 0 && y >= 0;
    }
    if (!interior) {
        // best point on the boundary of the non-negative quadrant
        double xb = fit1(true), yb = fit1(false);
        if (sse(xb, 0) <= sse(0, yb)) {
            x = xb;
            y = 0;
        } else {
            x = 0;
            y = yb;
        }
    }

    EnergyCoefficients k = base;
    k.e_index_read = x;
    k.e_reorder_move = y;
    k.label = "calibrated: least-squares fit of e_index_read and e_reorder_move to target savings, not measured";
    return k;
}

std::vector<EnergyCoefficients> perturbation_grid(const EnergyCoefficients& base,
                                                  const std::vector<CoefficientField>& fields,
                                                  const std::vector<double>& factors)
{
    auto field = [](EnergyCoefficients& k, CoefficientField f) -> double& {
        switch (f) {
        case CoefficientField::weight_fetch: return k.e_weight_fetch;
        case CoefficientField::mac: return k.e_mac;
        case CoefficientField::index_read: return k.e_index_read;
        case CoefficientField::reorder_move: return k.e_reorder_move;
        case CoefficientField::act_fetch: return k.e_act_fetch;
        case CoefficientField::output_write: return k.e_output_write;
        }
        throw std::logic_error("bad coefficient field");
    };
    std::vector<EnergyCoefficients> grid{base};
    for (auto f : fields) {
        std::vector<EnergyCoefficients> next;
        for (const auto& k : grid) {
            for (double s : factors) {
                EnergyCoefficients p = k;
                field(p, f) *= s;
                p.label = "perturbed";
                next.push_back(p);
            }
        }
        grid = std::move(next);
    }
    return grid;
}

}  // namespace sps
