#pragma once

#include <random>
#include <string>
#include <vector>

#include "secest/estimator.hpp"
#include "secest/threat.hpp"

namespace secest::sim {

/// Known-input channel: x(k+1) += B_u u, y(k) += D_u u, with u constant
/// over the run. Both estimators receive feedforward compensation.
struct KnownInput {
    Mat state_matrix;  // B_u, n x q
    Mat output_matrix; // D_u, m x q
    Vec input;         // u, q entries

    bool empty() const { return input.size() == 0; }
};

/// Seeded bounded-noise stream: entrywise uniform draws rescaled onto the
/// 2-norm ball when they exceed the bound.
class NoiseSampler {
public:
    NoiseSampler(double process_bound, double measurement_bound, int n, int m,
                 std::uint64_t seed);
    std::pair<Vec, Vec> next();

private:
    double bw_, bv_;
    int n_, m_;
    std::mt19937_64 rng_;
};

Vec bounded_uniform(std::mt19937_64& rng, int dim, double bound);

/// x_next = A x + B_u u + w.
Vec plant_step(const Mat& A, const Vec& x, const Vec& w, const KnownInput* ki = nullptr);

/// y = C x + D_u u + v, then the attack.
Vec measure(const Mat& C, const Vec& x, const Vec& v, const threat::AttackScenario& sc,
            long k, const KnownInput* ki = nullptr);

struct StepRecord {
    Vec x_true;
    Vec x_secure;
    Vec x_luenberger;            // empty when the baseline is disabled
    double err_inf_secure = 0.0;
    double err_inf_luenberger = 0.0;
    double err_modal_secure = 0.0; // max |Re/Im| entry error in modal coordinates
    double imag_residue = 0.0;
    double objective = 0.0;
    Vec residues;                // per sensor, against the fused estimate
    Vec residues_true;           // per sensor, against the true state (diagnostic)
    std::vector<std::uint8_t> triggered;
    std::vector<int> attack_support;
    Vec attack_values;           // aligned with attack_support
};

struct SimulationTrace {
    int n = 0;
    int m = 0;
    double gamma = 0.0;
    std::vector<double> thresholds;
    std::vector<StepRecord> steps; // horizon + 1 records
    bool aborted = false;
    std::string abort_reason;
};

struct SimOptions {
    long horizon = 0;
    std::uint64_t seed = 0;
    Vec x0;            // defaults to zero
    Vec xhat0;         // defaults to x0 + seeded perturbation within gamma
    bool with_luenberger = true;
};

/// Closed-loop run of plant, measurements, attack, secure estimator and the
/// Luenberger baseline. Aborts with a partial trace on non-finite state.
SimulationTrace run(const model::SystemModel& sys,
                    const std::vector<subspace::SensorDecomposition>& decs,
                    const std::vector<gains::GainDesign>& designs, double gamma,
                    const threat::AttackScenario& scenario, const SimOptions& opts,
                    const KnownInput* known_input = nullptr);

struct ResetEvent {
    long k = 0;
    int sensor = 0;
    double before = 0.0;
    double after = 0.0;
    double threshold = 0.0;
};

struct MetricsReport {
    double max_err_secure = 0.0;
    double mean_err_secure = 0.0;
    double max_err_luenberger = 0.0;
    double mean_err_luenberger = 0.0;
    double max_err_modal_secure = 0.0;
    std::vector<long> triggers_attacked; // per sensor; sensor was under attack at k-1
    std::vector<long> triggers_benign;   // per sensor; benign at k-1 (false triggers)
    long false_trigger_count = 0;
    std::vector<ResetEvent> resets;
    double gamma = 0.0;
    std::vector<double> thresholds;
};

MetricsReport metrics(const SimulationTrace& trace);

} // namespace secest::sim
