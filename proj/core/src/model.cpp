#include "secest/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "secest/config.hpp"
#include "secest/errors.hpp"

namespace secest::model {

namespace {

// Clusters eigenvalues that coincide within a scale-relative tolerance.
std::vector<EigenvalueInfo> cluster_eigenvalues(const CVec& values, const Mat& A) {
    double scale = std::max(1.0, inf_norm(CMat(A.cast<cplx>())));
    double tol = 1e-7 * scale;
    std::vector<EigenvalueInfo> out;
    std::vector<bool> used(values.size(), false);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (used[i]) continue;
        EigenvalueInfo info;
        info.value = values(i);
        info.algebraic = 1;
        used[i] = true;
        for (Eigen::Index j = i + 1; j < values.size(); ++j) {
            if (!used[j] && std::abs(values(j) - values(i)) <= tol) {
                used[j] = true;
                ++info.algebraic;
            }
        }
        CMat shifted = A.cast<cplx>();
        shifted.diagonal().array() -= info.value;
        int n = static_cast<int>(A.rows());
        info.geometric = n - static_cast<int>(rank_svd(shifted, 1e-7));
        info.geometric = std::max(info.geometric, 1);
        out.push_back(info);
    }
    return out;
}

Eigen::Index observability_rank(const CMat& A, const CMat& C) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = C.rows();
    CMat stack(m * n, n);
    CMat rows = C;
    for (Eigen::Index k = 0; k < n; ++k) {
        stack.middleRows(k * m, m) = rows;
        rows = rows * A;
    }
    return rank_svd(stack, tolerances().zero_rel);
}

// Sort key for modal ordering: descending modulus, then ascending
// representative phase (|arg| of the pair), conjugate partners adjacent with
// the negative-phase member first.
struct ModeUnit {
    std::vector<int> members; // indices into the unsorted eigenvalue list
    double modulus;
    double rep_phase;
};

} // namespace

ValidationReport validate(const RawSystem& raw) {
    ValidationReport rep;
    rep.n = raw.n();
    rep.m = raw.m();
    rep.dims_ok = raw.A.rows() == raw.A.cols() && raw.A.rows() >= 1 && raw.C.rows() >= 1 &&
                  raw.C.cols() == raw.A.rows() && raw.process_noise_bound >= 0.0 &&
                  raw.measurement_noise_bound >= 0.0;
    if (!rep.dims_ok) return rep;

    rep.observability_rank =
        static_cast<int>(observability_rank(raw.A.cast<cplx>(), raw.C.cast<cplx>()));
    rep.observable = rep.observability_rank == rep.n;

    Eigen::EigenSolver<Mat> es(raw.A);
    rep.eigenvalues = cluster_eigenvalues(es.eigenvalues(), raw.A);
    rep.geometric_simple = std::all_of(rep.eigenvalues.begin(), rep.eigenvalues.end(),
                                       [](const EigenvalueInfo& e) { return e.geometric == 1; });
    return rep;
}

namespace {

ModalSystem diagonalize(const RawSystem& raw) {
    const int n = raw.n();
    Eigen::EigenSolver<Mat> es(raw.A);
    if (es.info() != Eigen::Success)
        raise(Errc::defective_matrix, "eigendecomposition failed to converge");
    CVec values = es.eigenvalues();
    CMat vectors = es.eigenvectors();

    double scale = std::max(1.0, inf_norm(CMat(raw.A.cast<cplx>())));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(values(i) - values(j)) <= 1e-7 * scale)
                raise(Errc::defective_matrix,
                      "repeated eigenvalue under diagonalize mode (algebraic multiplicity > 1)");

    // Normalize each eigenvector: unit norm, largest-modulus entry real positive.
    for (int j = 0; j < n; ++j) {
        CVec v = vectors.col(j);
        Eigen::Index top = 0;
        v.cwiseAbs().maxCoeff(&top);
        cplx pivot = v(top);
        v *= std::conj(pivot) / std::abs(pivot);
        v.normalize();
        vectors.col(j) = v;
    }

    // Group conjugate partners, then order units by descending modulus with
    // ascending representative phase.
    double imag_tol = 1e-10 * scale;
    std::vector<ModeUnit> units;
    std::vector<bool> used(n, false);
    for (int i = 0; i < n; ++i) {
        if (used[i]) continue;
        used[i] = true;
        ModeUnit u;
        u.modulus = std::abs(values(i));
        if (std::abs(values(i).imag()) <= imag_tol) {
            u.members = {i};
            u.rep_phase = values(i).real() >= 0.0 ? 0.0 : M_PI;
        } else {
            int partner = -1;
            for (int j = i + 1; j < n; ++j) {
                if (!used[j] && std::abs(values(j) - std::conj(values(i))) <= 1e-7 * scale) {
                    partner = j;
                    break;
                }
            }
            if (partner < 0)
                raise(Errc::defective_matrix, "complex eigenvalue without a conjugate partner");
            used[partner] = true;
            int neg = values(i).imag() < 0.0 ? i : partner;
            int pos = neg == i ? partner : i;
            u.members = {neg, pos};
            u.rep_phase = std::abs(std::arg(values(pos)));
        }
        units.push_back(std::move(u));
    }
    std::sort(units.begin(), units.end(), [](const ModeUnit& a, const ModeUnit& b) {
        if (a.modulus != b.modulus) return a.modulus > b.modulus;
        return a.rep_phase < b.rep_phase;
    });

    std::vector<int> order;
    order.reserve(n);
    for (const auto& u : units)
        for (int idx : u.members) order.push_back(idx);

    ModalSystem modal;
    modal.dynamics = CMat::Zero(n, n);
    CMat V(n, n);
    int col = 0;
    for (const auto& u : units) {
        if (u.members.size() == 1) {
            int idx = u.members[0];
            cplx lam = values(idx);
            if (std::abs(lam.imag()) <= imag_tol) lam = cplx(lam.real(), 0.0);
            modal.dynamics(col, col) = lam;
            CVec v = vectors.col(idx);
            if (v.imag().cwiseAbs().maxCoeff() <= 1e-9) v = v.real().cast<cplx>();
            V.col(col) = v;
            modal.blocks.push_back({lam, col, 1});
            ++col;
        } else {
            // Conjugate pair: negative-imaginary member first, partner forced
            // to the exact conjugate.
            int neg = u.members[0];
            cplx lam = values(neg);
            modal.dynamics(col, col) = lam;
            modal.dynamics(col + 1, col + 1) = std::conj(lam);
            V.col(col) = vectors.col(neg);
            V.col(col + 1) = vectors.col(neg).conjugate();
            modal.blocks.push_back({lam, col, 1});
            modal.blocks.push_back({std::conj(lam), col + 1, 1});
            col += 2;
        }
    }

    double cond = cond2(V);
    if (!(cond <= tolerances().condition_limit)) {
        std::ostringstream os;
        os << "eigenvector matrix condition number " << cond << " exceeds limit "
           << tolerances().condition_limit;
        raise(Errc::ill_conditioned, os.str());
    }

    modal.to_modal = V.partialPivLu().inverse();
    modal.from_modal = V;
    modal.output = raw.C.cast<cplx>() * V;
    return modal;
}

} // namespace

ModalSystem modal_from_jordan(const CMat& A, const CMat& C) {
    const int n = static_cast<int>(A.rows());
    if (A.rows() != A.cols() || C.cols() != A.rows() || C.rows() < 1)
        raise(Errc::dimension_mismatch, "Jordan input matrices have inconsistent dimensions");

    double scale = std::max(1.0, inf_norm(A));
    double tol = zero_threshold(scale);

    // Off-diagonal entries other than the superdiagonal must vanish.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j || j == i + 1) continue;
            if (std::abs(A(i, j)) > tol)
                raise(Errc::not_jordan_form, "nonzero entry outside the Jordan bidiagonal at (" +
                                                 std::to_string(i) + "," + std::to_string(j) + ")");
        }

    // Superdiagonal entries are 0 or 1; chained diagonal entries must agree.
    std::vector<bool> chained(std::max(n - 1, 0), false);
    for (int i = 0; i + 1 < n; ++i) {
        double mag = std::abs(A(i, i + 1));
        if (mag <= tol) continue;
        if (std::abs(A(i, i + 1) - cplx(1.0, 0.0)) > tol)
            raise(Errc::not_jordan_form,
                  "superdiagonal entry at (" + std::to_string(i) + "," + std::to_string(i + 1) +
                      ") is neither 0 nor 1");
        if (std::abs(A(i, i) - A(i + 1, i + 1)) > 1e-7 * scale)
            raise(Errc::not_jordan_form, "superdiagonal chain spans distinct eigenvalues at index " +
                                             std::to_string(i));
        chained[i] = true;
    }

    ModalSystem modal;
    modal.dynamics = CMat::Zero(n, n);
    int start = 0;
    while (start < n) {
        int end = start;
        while (end + 1 < n && chained[end]) ++end;
        int size = end - start + 1;
        cplx lam(0.0, 0.0);
        for (int i = start; i <= end; ++i) lam += A(i, i);
        lam /= static_cast<double>(size);
        if (std::abs(lam.imag()) <= tol) lam = cplx(lam.real(), 0.0);
        for (int i = start; i <= end; ++i) {
            modal.dynamics(i, i) = lam;
            if (i < end) modal.dynamics(i, i + 1) = cplx(1.0, 0.0);
        }
        modal.blocks.push_back({lam, start, size});
        start = end + 1;
    }

    // Geometric multiplicity 1: one block per eigenvalue.
    for (size_t a = 0; a < modal.blocks.size(); ++a)
        for (size_t b = a + 1; b < modal.blocks.size(); ++b)
            if (std::abs(modal.blocks[a].eigenvalue - modal.blocks[b].eigenvalue) <= 1e-7 * scale)
                raise(Errc::not_jordan_form,
                      "eigenvalue appears in more than one block (geometric multiplicity > 1)");

    modal.to_modal = CMat::Identity(n, n);
    modal.from_modal = CMat::Identity(n, n);
    modal.output = C;
    return modal;
}

ModalSystem to_modal(const RawSystem& raw, ModalMode mode) {
    if (raw.A.rows() != raw.A.cols() || raw.C.cols() != raw.A.rows())
        raise(Errc::dimension_mismatch, "system matrices have inconsistent dimensions");
    switch (mode) {
    case ModalMode::already_jordan:
        return modal_from_jordan(raw.A.cast<cplx>(), raw.C.cast<cplx>());
    case ModalMode::diagonalize:
        return diagonalize(raw);
    }
    raise(Errc::invalid_parameter, "unknown modal mode");
}

bool modal_observable(const ModalSystem& modal) {
    return observability_rank(modal.dynamics, modal.output) == modal.n();
}

PairMap conjugate_pairing(const ModalSystem& modal) {
    const double scale = std::max(1.0, inf_norm(modal.dynamics));
    const double tol = 1e-7 * scale;
    const int nb = static_cast<int>(modal.blocks.size());
    PairMap pairing(nb, -1);
    for (int i = 0; i < nb; ++i) {
        const auto& bi = modal.blocks[i];
        if (std::abs(bi.eigenvalue.imag()) <= tol) {
            pairing[i] = i;
            continue;
        }
        for (int j = 0; j < nb; ++j) {
            if (j == i) continue;
            const auto& bj = modal.blocks[j];
            if (bj.size == bi.size &&
                std::abs(bj.eigenvalue - std::conj(bi.eigenvalue)) <= tol) {
                pairing[i] = j;
                break;
            }
        }
        if (pairing[i] < 0)
            raise(Errc::unpaired_complex_block,
                  "block " + std::to_string(i) + " has no conjugate partner");
    }
    // Involution check; a mismatch means the block list itself is corrupted.
    for (int i = 0; i < nb; ++i)
        if (pairing[pairing[i]] != i)
            raise(Errc::unpaired_complex_block, "conjugate pairing is not an involution");
    return pairing;
}

SystemModel make_system(const RawSystem& raw, ModalMode mode, int p) {
    if (p < 0) raise(Errc::invalid_parameter, "attack sparsity must be nonnegative");
    ValidationReport rep = validate(raw);
    if (!rep.dims_ok) raise(Errc::dimension_mismatch, "system matrices have inconsistent dimensions");
    if (!rep.observable)
        raise(Errc::not_observable, "the pair (A, C) is not observable (rank " +
                                        std::to_string(rep.observability_rank) + " of " +
                                        std::to_string(rep.n) + ")");
    if (!rep.geometric_simple)
        raise(Errc::defective_matrix, "an eigenvalue of A has geometric multiplicity above 1");
    SystemModel sys;
    sys.raw = raw;
    sys.modal = to_modal(raw, mode);
    sys.max_attack_sparsity = p;
    return sys;
}

} // namespace secest::model
