#pragma once

#include <optional>
#include <vector>

#include "secest/linalg.hpp"

namespace secest::model {

/// Plant description in physical coordinates: x(k+1) = A x(k) + w(k),
/// y(k) = C x(k) + v(k) + a(k), with 2-norm noise bounds.
struct RawSystem {
    Mat A;                               // n x n state transition
    Mat C;                               // m x n, one row per sensor
    double process_noise_bound = 0.0;    // bound on ||w||_2
    double measurement_noise_bound = 0.0;// bound on ||v||_2
    double sample_time = 1.0;            // seconds, metadata only

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(C.rows()); }
};

struct EigenvalueInfo {
    cplx value;
    int algebraic = 1;
    int geometric = 1;
};

/// Outcome of structural validation. A report, not an exception: failing
/// systems are rejected by downstream constructors, not here.
struct ValidationReport {
    bool dims_ok = false;
    int n = 0;
    int m = 0;
    int observability_rank = 0;
    bool observable = false;
    std::vector<EigenvalueInfo> eigenvalues; // one entry per distinct eigenvalue
    bool geometric_simple = false;           // all geometric multiplicities equal 1

    bool ok() const { return dims_ok && observable && geometric_simple; }
};

ValidationReport validate(const RawSystem& raw);

enum class ModalMode {
    already_jordan, // input is accepted verbatim after a structural check, T = I
    diagonalize,    // eigendecomposition; requires algebraically simple eigenvalues
};

/// Contiguous Jordan block: states [start, start+size) share one eigenvalue.
struct JordanBlock {
    cplx eigenvalue;
    int start = 0;
    int size = 1;
};

/// The plant in modal (Jordan-form) coordinates x_modal = T x. All
/// decomposition and estimation runs here; physical outputs are recovered
/// through from_modal with an enforced-real postcondition.
struct ModalSystem {
    CMat dynamics;   // n x n, Jordan canonical form (hard-zeroed off blocks)
    CMat output;     // m x n sensor rows in modal coordinates
    CMat to_modal;   // T
    CMat from_modal; // T^{-1}, cached at construction
    std::vector<JordanBlock> blocks;

    int n() const { return static_cast<int>(dynamics.rows()); }
    int m() const { return static_cast<int>(output.rows()); }
};

/// Transform a validated real system into modal coordinates.
ModalSystem to_modal(const RawSystem& raw, ModalMode mode);

/// Build a ModalSystem from matrices supplied directly in Jordan form
/// (possibly complex); T = I. Used by the already_jordan file path and tests.
ModalSystem modal_from_jordan(const CMat& A, const CMat& C);

/// Observability of the modal pair (rank of the full power stack).
bool modal_observable(const ModalSystem& modal);

/// blocks[i] -> index of the conjugate-partner block (itself when the
/// eigenvalue is real). Always an involution.
using PairMap = std::vector<int>;
PairMap conjugate_pairing(const ModalSystem& modal);

/// Validated plant plus its modal form and the attack budget p. `raw` is
/// absent when the system was supplied directly in modal form with complex
/// entries; simulation of the physical plant requires `raw`.
struct SystemModel {
    std::optional<RawSystem> raw;
    ModalSystem modal;
    int max_attack_sparsity = 0; // p

    int n() const { return modal.n(); }
    int m() const { return modal.m(); }
};

/// Validate and assemble. Throws on failed validation. The sparsity budget
/// p is checked against the coverage redundancy by the analysis pipeline
/// (see subspace::check_sparsity_budget), not here.
SystemModel make_system(const RawSystem& raw, ModalMode mode, int p);

} // namespace secest::model
