#pragma once

#include <string>

#include "secest/gains.hpp"
#include "secest/ieee14.hpp"
#include "secest/sim.hpp"
#include "secest/threat.hpp"

namespace secest::io {

/// Parsed system input file. Either a real system plus the requested modal
/// mode, or matrices supplied directly in Jordan form with complex entries.
struct SystemFile {
    std::optional<model::RawSystem> raw;
    std::optional<std::pair<CMat, CMat>> modal_direct; // (A, C), already Jordan
    model::ModalMode mode = model::ModalMode::diagonalize;
    int p = 0;
    double process_bound = 0.0;
    double measurement_bound = 0.0;
    double sample_time = 1.0;
};

SystemFile load_system_file(const std::string& path);
model::SystemModel assemble(const SystemFile& file);

threat::AttackScenario load_scenario(const std::string& path);
void save_scenario(const threat::AttackScenario& sc, const std::string& path);

void save_gains(const std::vector<gains::GainDesign>& designs,
                const gains::DetectorConfig& detector, const std::string& path);
std::pair<std::vector<gains::GainDesign>, gains::DetectorConfig>
load_gains(const std::string& path);

ieee14::Ieee14Params load_ieee14_params(const std::string& path);

/// Analysis report for the `analyze` subcommand: per-sensor observed sets,
/// coverage counts, the sparse-observability index and verification results.
std::string analysis_report_json(const model::SystemModel& sys,
                                 const std::vector<subspace::SensorDecomposition>& decs,
                                 const subspace::CoverageIndex& cov, int s_max,
                                 const std::vector<subspace::CheckReport>& checks,
                                 double modal_condition);

std::string metrics_json(const sim::MetricsReport& report);

} // namespace secest::io
