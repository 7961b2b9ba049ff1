#pragma once

#include <cstdint>
#include <vector>

#include "secest/gains.hpp"

namespace secest::estimator {

using subspace::SensorDecomposition;
using gains::GainDesign;

/// One sensor's running observer state.
struct LocalObserverState {
    CVec eta;               // pre-reset estimate of the projected state
    CVec eta_post;          // value carried into the next step
    double last_residue = 0.0; // ||eta - H x_hat|| at the last detect pass
    bool triggered = false;
};

struct FusedEstimate {
    CVec modal;          // fused modal estimate
    Vec real_state;      // Re(T^{-1} modal)
    double imag_residue = 0.0; // ||Im(T^{-1} modal)||_inf, logged not enforced
    double objective = 0.0;    // sum_i ||eta_i - H_i x_hat||_1 (|Re| + |Im| per entry)
};

struct StepDiagnostics {
    Vec residues;                 // per sensor, against the fused estimate
    std::vector<std::uint8_t> triggered;
};

/// Per-coordinate median fusion (real and imaginary parts independently).
/// Throws empty_coverage when some state index has no covering sensor with
/// nonempty observable subspace.
std::pair<CVec, double> fuse_modal(const std::vector<CVec>& etas,
                                   const std::vector<SensorDecomposition>& decs, int n);

/// One local observer update: (A~ - L C~) eta_post + L y. `feedforward`
/// adds a known-input term already projected onto the sensor's subspace.
CVec observer_step(const CVec& eta_post, double y, const GainDesign& gd,
                   const SensorDecomposition& dec, const CVec& feedforward = CVec());

/// Runtime of the secure estimation loop: decentralized observers, median
/// fusion, detect-and-reset, in that order. One step mutation at a time;
/// callers provide external synchronization.
class EstimatorBank {
public:
    EstimatorBank(std::vector<SensorDecomposition> decs, std::vector<GainDesign> designs,
                  model::ModalSystem modal, double gamma);

    /// eta_post_i(0) = H_i T xhat0.
    void init(const Vec& xhat0);
    void init_modal(const CVec& xhat0_modal);

    /// One cycle consuming the previous step's measurements. Optional known
    /// input: state_ff = T B_u u (modal), output_ft = D_u u (subtracted from y).
    std::pair<FusedEstimate, StepDiagnostics> step(const Vec& y,
                                                   const CVec& state_ff = CVec(),
                                                   const Vec& output_ft = Vec());

    double gamma() const { return gamma_; }
    double threshold(int sensor) const { return thresholds_[sensor]; }
    const std::vector<double>& thresholds() const { return thresholds_; }
    const std::vector<LocalObserverState>& locals() const { return locals_; }
    const std::vector<SensorDecomposition>& decompositions() const { return decs_; }
    const model::ModalSystem& modal() const { return modal_; }

    /// Residues of the current (pre-reset) local states against an arbitrary
    /// modal reference; used to instrument true-state error in simulation.
    Vec residues_against(const CVec& reference_modal) const;

private:
    std::vector<SensorDecomposition> decs_;
    std::vector<GainDesign> designs_;
    model::ModalSystem modal_;
    double gamma_;
    std::vector<double> thresholds_;
    std::vector<CMat> closed_loop_; // A~ - L C~ per sensor
    std::vector<LocalObserverState> locals_;
    int n_;
};

/// Detect-and-reset for one sensor against the fused estimate; strict
/// threshold comparison.
void detect_and_reset(LocalObserverState& st, const CVec& fused_modal,
                      const SensorDecomposition& dec, double gamma);

/// Full-order baseline: x(k+1) = A x + sum_i H_i' L_i (y_i - C_i x), run in
/// modal coordinates with the same gains as the secure scheme.
class LuenbergerObserver {
public:
    LuenbergerObserver(std::vector<SensorDecomposition> decs, std::vector<GainDesign> designs,
                       model::ModalSystem modal);

    void init(const Vec& xhat0);
    Vec step(const Vec& y, const CVec& state_ff = CVec(), const Vec& output_ft = Vec());
    const CVec& state_modal() const { return state_; }
    Vec state_real() const;

private:
    std::vector<SensorDecomposition> decs_;
    std::vector<GainDesign> designs_;
    model::ModalSystem modal_;
    CVec state_;
};

} // namespace secest::estimator
