#pragma once

#include <cstdint>
#include <vector>

#include "secest/subspace.hpp"

namespace secest::gains {

/// Budget knobs for the derivative-free searches. Defaults follow the
/// shipped configuration; all searches are deterministic in `seed`.
struct SearchOptions {
    int starts = 8;            // multi-start count for the spectral minimization
    int evals_per_start = 2000;
    int grid_points = 50;      // outer sqrt(alpha) grid
    int inner_evals = 600;     // per grid point, constrained norm minimization
    std::uint64_t seed = 1;
};

struct SpectralGainResult {
    CVec gain;                // best L found
    double sigma = 0.0;       // sigma_max(A~ - L C~) at `gain`
    double feasibility_bound = 0.0; // 1 / (2 sqrt(n_i) + 1)
    bool feasible = false;    // sigma < feasibility_bound (strict)
};

/// Approximately minimize sigma_max(A~ - L C~) over complex L by
/// multi-start coordinate search. Never throws; the caller decides what an
/// infeasible verdict means.
SpectralGainResult min_spectral_gain(const CMat& reduced_dynamics, const CMat& reduced_output,
                                     const SearchOptions& opts = {});

/// One sensor's observer gain with its certificate numbers.
struct GainDesign {
    CVec gain;          // L_i, n_i entries
    double sigma = 0.0; // sigma_max(A~ - L C~)
    double cost = 0.0;  // (B_w + ||L|| B_v) / (1 - (2 sqrt(n_i)+1) sigma)
    double alpha = 0.0;
    double beta = 0.0;
};

/// Two-stage scheme: outer grid over sqrt(alpha) in (sigma*, 1/(2 sqrt(n_i)+1)),
/// inner norm minimization under the spectral constraint. Throws infeasible
/// when min_spectral_gain cannot certify a feasible sigma.
GainDesign design_gain(const CMat& reduced_dynamics, const CMat& reduced_output,
                       double process_bound, double measurement_bound,
                       const SearchOptions& opts = {});

/// Per-sensor designs; sensors with empty observable subspace get an empty
/// gain with cost = process_bound. Seeds derive from opts.seed and the
/// sensor index, so the result is independent of evaluation order.
std::vector<GainDesign> design_all(const std::vector<subspace::SensorDecomposition>& decs,
                                   double process_bound, double measurement_bound,
                                   const SearchOptions& opts = {});

struct DetectorConfig {
    double gamma = 0.0;
    std::vector<double> thresholds;   // (sqrt(n_i) + 1) gamma
    std::vector<bool> inequality_ok;  // per-sensor verdict at this gamma
};

/// gamma = max_i cost_i, thresholds filled, the gain/threshold inequality
/// re-verified per sensor. Throws inequality_violated on numerical pathology.
DetectorConfig compute_gamma(const std::vector<GainDesign>& designs,
                             const std::vector<subspace::SensorDecomposition>& decs,
                             double process_bound, double measurement_bound);

/// Detector thresholds for an externally chosen gamma; per-sensor verdicts
/// are recorded, not enforced.
DetectorConfig detector_with_gamma(double gamma,
                                   const std::vector<GainDesign>& designs,
                                   const std::vector<subspace::SensorDecomposition>& decs,
                                   double process_bound, double measurement_bound);

/// sigma_max(A~ - L C~) <= (gamma - B_w - ||L|| B_v) / ((2 sqrt(n_i)+1) gamma),
/// with the side condition gamma >= B_w + ||L|| B_v (false when violated).
bool verify_inequality(const CVec& gain, double gamma, const CMat& reduced_dynamics,
                       const CMat& reduced_output, double process_bound,
                       double measurement_bound);

/// Process-noise bound as seen in modal coordinates: ||T w||_2 <= ||T||_2 B_w.
double modal_process_bound(const model::ModalSystem& modal, double process_bound);

} // namespace secest::gains
