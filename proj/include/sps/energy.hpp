// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sps/systolic.hpp"

#include <map>
#include <string>
#include <vector>

namespace sps {

/// Per-event energy in arbitrary units (one weight fetch = 1 by convention).
struct EnergyCoefficients {
    double e_weight_fetch = 1.0;
    double e_mac = 1.0;
    double e_index_read = 0.0;
    double e_reorder_move = 0.0;
    double e_act_fetch = 0.0;
    double e_output_write = 0.0;
    int version = 1;
    std::string label = "default";

    bool operator==(const EnergyCoefficients&) const = default;
};

struct EnergyBreakdown {
    double weights = 0, macs = 0, index = 0, reorder = 0, activations = 0, outputs = 0;
    double total() const { return weights + macs + index + reorder + activations + outputs; }
};

EnergyBreakdown breakdown(const EventCounters& c, const EnergyCoefficients& k);
double energy(const EventCounters& c, const EnergyCoefficients& k);

/// dense / mode. Throws std::domain_error when mode_energy is not positive.
double savings(double mode_energy, double dense_energy);

std::string coefficients_to_json(const EnergyCoefficients& k);
EnergyCoefficients coefficients_from_json(const std::string& text);
void save_coefficients(const std::string& path, const EnergyCoefficients& k);
EnergyCoefficients load_coefficients(const std::string& path);

struct EnergyRow {
    SimMode mode = SimMode::sps;
    EventCounters counters;
    EnergyBreakdown parts;
    double savings = 0;  // vs dense baseline
};

/// One row per mode; `runs` must contain SimMode::dense_baseline.
std::vector<EnergyRow> energy_report(const std::map<SimMode, EventCounters>& runs, const EnergyCoefficients& k);
std::string energy_csv(const std::vector<EnergyRow>& rows);
std::string energy_json(const std::vector<EnergyRow>& rows, const EnergyCoefficients& k);

/// Target savings per sparse mode.
using SavingsTargets = std::map<SimMode, double>;

/// Fit e_index_read and e_reorder_move (the other coefficients fixed as in
/// `base`) by least squares on relative savings errors:
///   sum_m ((E_m - E_dense / t_m) / (E_dense / t_m))^2.
/// Both fitted values are clamped to be non-negative.
EnergyCoefficients calibrate(const std::map<SimMode, EventCounters>& runs, const SavingsTargets& targets,
                             const EnergyCoefficients& base);

enum class CoefficientField { weight_fetch, mac, index_read, reorder_move, act_fetch, output_write };

/// Cartesian grid: each listed field scaled by each factor, others untouched.
std::vector<EnergyCoefficients> perturbation_grid(const EnergyCoefficients& base,
                                                  const std::vector<CoefficientField>& fields,
                                                  const std::vector<double>& factors);

}  // namespace sps
