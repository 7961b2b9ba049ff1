#pragma once

#include <vector>

#include "secest/model.hpp"

namespace secest::subspace {

/// Per-sensor observable-subspace decomposition: the observability matrix,
/// the observed index set, the canonical-row selector and the reduced pair.
struct SensorDecomposition {
    int sensor = 0;
    CMat obs_matrix;            // n x n power stack of the sensor row
    std::vector<int> observed;  // ascending state indices with nonzero columns
    std::vector<int> position;  // state index -> slot in `observed`, -1 otherwise
    Mat selector;               // n_i x n, rows are canonical basis vectors
    CMat reduced_dynamics;      // n_i x n_i
    CMat reduced_output;        // 1 x n_i

    int dim() const { return static_cast<int>(observed.size()); }
    int full_dim() const { return static_cast<int>(selector.cols()); }

    /// Gather the observed entries (exact selector action).
    CVec project(const CVec& x) const;
    /// Scatter back to full dimension; unobserved entries are zero.
    CVec lift(const CVec& z) const;
};

/// For each state index j, which sensors observe it.
struct CoverageIndex {
    std::vector<std::vector<int>> covering; // S_j, ascending sensor indices
    std::vector<int> counts;                // |S_j|
    int redundancy = -1;                    // min_j |S_j| - 1
};

CMat observability_matrix(const CMat& modal_dynamics, const CRow& sensor_row);
std::vector<int> observed_index_set(const CMat& obs_matrix);
Mat selector(const std::vector<int>& observed, int n);

/// Reduced pair (H A H', C_i H'). Throws intertwining_violated when the
/// observed set is not closed under the Jordan block structure.
std::pair<CMat, CMat> reduced_pair(const CMat& modal_dynamics, const CRow& sensor_row,
                                   const Mat& sel);

SensorDecomposition decompose_sensor(const model::ModalSystem& modal, int sensor);
std::vector<SensorDecomposition> decompose_all(const model::ModalSystem& modal);

CoverageIndex coverage(const std::vector<SensorDecomposition>& decs, int n);

/// Largest s such that the system stays observable after removing any s
/// sensors, computed as min_j |S_j| - 1. Throws not_observable when some
/// state is covered by no sensor.
int sparse_observability_index(const CoverageIndex& cov);

/// Exhaustive subset-rank route to the same quantity; exponential in m.
/// Kept for cross-checking systems where the modal construction is in doubt.
int sparse_observability_bruteforce(const CMat& A, const CMat& C);

/// Enforce p <= redundancy for the assembled model.
void check_sparsity_budget(const model::SystemModel& sys, const CoverageIndex& cov);

struct CheckReport {
    bool intertwining = false;   // H A = A~ H
    bool output_identity = false;// C~ H = C_i
    bool projection = false;     // H'H acts as identity on observed support, zero off it
    bool reduced_rank = false;   // rank(O_i H') == n_i
    double max_residual = 0.0;

    bool all() const { return intertwining && output_identity && projection && reduced_rank; }
};

CheckReport verify_decomposition(const SensorDecomposition& dec,
                                 const model::ModalSystem& modal);

} // namespace secest::subspace
