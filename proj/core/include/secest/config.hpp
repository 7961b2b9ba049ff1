#pragma once

namespace secest {

/// Numerical tolerances shared by the whole pipeline. The zero test is
/// relative: an entry counts as zero when |x| < zero_rel * max(1, scale),
/// where scale is the infinity norm of the enclosing matrix.
struct Tolerances {
    double zero_rel = 1e-9;
    double identity_tol = 1e-10;     // structural identities (selector algebra)
    double condition_limit = 1e8;    // eigenvector matrix conditioning cutoff
    double realness_tol = 1e-6;      // acceptable imaginary residue on real outputs
};

/// Process-global tolerance configuration. Set once at startup (the CLI maps
/// the SECEST_TOL environment variable onto zero_rel); reads are lock-free.
Tolerances& tolerances();

/// Absolute threshold below which an entry of a matrix with the given
/// infinity norm counts as zero.
double zero_threshold(double matrix_inf_norm);

} // namespace secest
