#include "secest/subspace.hpp"

#include <algorithm>
#include <numeric>

#include "secest/config.hpp"
#include "secest/errors.hpp"

namespace secest::subspace {

CVec SensorDecomposition::project(const CVec& x) const {
    CVec out(dim());
    for (int k = 0; k < dim(); ++k) out(k) = x(observed[k]);
    return out;
}

CVec SensorDecomposition::lift(const CVec& z) const {
    CVec out = CVec::Zero(full_dim());
    for (int k = 0; k < dim(); ++k) out(observed[k]) = z(k);
    return out;
}

CMat observability_matrix(const CMat& modal_dynamics, const CRow& sensor_row) {
    const Eigen::Index n = modal_dynamics.rows();
    if (sensor_row.cols() != n)
        raise(Errc::dimension_mismatch, "sensor row length does not match state dimension");
    CMat obs(n, n);
    CRow row = sensor_row;
    for (Eigen::Index k = 0; k < n; ++k) {
        obs.row(k) = row;
        row = row * modal_dynamics;
    }
    return obs;
}

std::vector<int> observed_index_set(const CMat& obs_matrix) {
    double cut = zero_threshold(inf_norm(obs_matrix));
    std::vector<int> observed;
    for (Eigen::Index j = 0; j < obs_matrix.cols(); ++j)
        if (obs_matrix.col(j).cwiseAbs().maxCoeff() > cut)
            observed.push_back(static_cast<int>(j));
    return observed;
}

Mat selector(const std::vector<int>& observed, int n) {
    Mat sel = Mat::Zero(static_cast<Eigen::Index>(observed.size()), n);
    for (size_t k = 0; k < observed.size(); ++k) {
        if (observed[k] < 0 || observed[k] >= n)
            raise(Errc::invalid_parameter, "observed index out of range");
        if (k > 0 && observed[k] <= observed[k - 1])
            raise(Errc::invalid_parameter, "observed indices must be strictly ascending");
        sel(static_cast<Eigen::Index>(k), observed[k]) = 1.0;
    }
    return sel;
}

std::pair<CMat, CMat> reduced_pair(const CMat& modal_dynamics, const CRow& sensor_row,
                                   const Mat& sel) {
    CMat sel_c = sel.cast<cplx>();
    CMat reduced_dyn = sel_c * modal_dynamics * sel_c.transpose();
    CMat reduced_out = sensor_row * sel_c.transpose();

    // Lemma-level identity: the reduced dynamics must intertwine with the
    // selector. A violation means the observed set is not closed under the
    // Jordan block structure, i.e. the modal form is invalid.
    CMat residual = reduced_dyn * sel_c - sel_c * modal_dynamics;
    double tol = zero_threshold(std::max(1.0, inf_norm(modal_dynamics)));
    if (inf_norm(residual) > std::max(tol, tolerances().identity_tol))
        raise(Errc::intertwining_violated,
              "reduced dynamics do not intertwine with the selector (residual " +
                  std::to_string(inf_norm(residual)) + ")");
    return {reduced_dyn, reduced_out};
}

SensorDecomposition decompose_sensor(const model::ModalSystem& modal, int sensor) {
    if (sensor < 0 || sensor >= modal.m())
        raise(Errc::invalid_parameter, "sensor index out of range");
    SensorDecomposition dec;
    dec.sensor = sensor;
    dec.obs_matrix = observability_matrix(modal.dynamics, modal.output.row(sensor));
    dec.observed = observed_index_set(dec.obs_matrix);
    dec.selector = selector(dec.observed, modal.n());
    dec.position.assign(modal.n(), -1);
    for (size_t k = 0; k < dec.observed.size(); ++k)
        dec.position[dec.observed[k]] = static_cast<int>(k);
    auto [rd, ro] = reduced_pair(modal.dynamics, modal.output.row(sensor), dec.selector);
    dec.reduced_dynamics = std::move(rd);
    dec.reduced_output = std::move(ro);
    return dec;
}

std::vector<SensorDecomposition> decompose_all(const model::ModalSystem& modal) {
    std::vector<SensorDecomposition> decs;
    decs.reserve(modal.m());
    for (int i = 0; i < modal.m(); ++i) decs.push_back(decompose_sensor(modal, i));
    return decs;
}

CoverageIndex coverage(const std::vector<SensorDecomposition>& decs, int n) {
    CoverageIndex cov;
    cov.covering.assign(n, {});
    for (const auto& dec : decs)
        for (int j : dec.observed) cov.covering[j].push_back(dec.sensor);
    cov.counts.resize(n);
    for (int j = 0; j < n; ++j) cov.counts[j] = static_cast<int>(cov.covering[j].size());
    cov.redundancy = n == 0 ? -1 : *std::min_element(cov.counts.begin(), cov.counts.end()) - 1;
    return cov;
}

int sparse_observability_index(const CoverageIndex& cov) {
    for (size_t j = 0; j < cov.counts.size(); ++j)
        if (cov.counts[j] == 0)
            raise(Errc::not_observable,
                  "state index " + std::to_string(j) + " is covered by no sensor");
    return cov.redundancy;
}

namespace {

Eigen::Index subset_observability_rank(const CMat& A, const CMat& C,
                                       const std::vector<int>& keep) {
    const Eigen::Index n = A.rows();
    const Eigen::Index rows = static_cast<Eigen::Index>(keep.size());
    if (rows == 0) return 0;
    CMat sub(rows, n);
    for (Eigen::Index r = 0; r < rows; ++r) sub.row(r) = C.row(keep[r]);
    CMat stack(rows * n, n);
    CMat cur = sub;
    for (Eigen::Index k = 0; k < n; ++k) {
        stack.middleRows(k * rows, rows) = cur;
        cur = cur * A;
    }
    return rank_svd(stack, tolerances().zero_rel);
}

// Enumerates all size-r subsets of {0..m-1}, calling fn with the complement.
bool all_removals_observable(const CMat& A, const CMat& C, int r) {
    const int m = static_cast<int>(C.rows());
    const Eigen::Index n = A.rows();
    std::vector<int> pick(r);
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
        std::vector<int> keep;
        keep.reserve(m - r);
        for (int i = 0, p = 0; i < m; ++i) {
            if (p < r && pick[p] == i) { ++p; continue; }
            keep.push_back(i);
        }
        if (subset_observability_rank(A, C, keep) != n) return false;
        // next combination
        int i = r - 1;
        while (i >= 0 && pick[i] == m - r + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (int j = i + 1; j < r; ++j) pick[j] = pick[j - 1] + 1;
    }
    return true;
}

} // namespace

int sparse_observability_bruteforce(const CMat& A, const CMat& C) {
    const int m = static_cast<int>(C.rows());
    std::vector<int> all(m);
    std::iota(all.begin(), all.end(), 0);
    if (subset_observability_rank(A, C, all) != A.rows())
        raise(Errc::not_observable, "the full sensor set is not observable");
    int s = 0;
    while (s + 1 < m && all_removals_observable(A, C, s + 1)) ++s;
    // s = m-1 would leave an empty sensor set unchecked; removing all but
    // one sensor is the strongest verifiable claim.
    return s;
}

void check_sparsity_budget(const model::SystemModel& sys, const CoverageIndex& cov) {
    int s_max = sparse_observability_index(cov);
    if (sys.max_attack_sparsity > s_max)
        raise(Errc::invalid_parameter,
              "attack sparsity p = " + std::to_string(sys.max_attack_sparsity) +
                  " exceeds the redundancy index " + std::to_string(s_max));
}

CheckReport verify_decomposition(const SensorDecomposition& dec,
                                 const model::ModalSystem& modal) {
    CheckReport rep;
    const int n = modal.n();
    CMat sel = dec.selector.cast<cplx>();
    double tol = std::max(zero_threshold(inf_norm(modal.dynamics)), 1e-8);

    double r1 = inf_norm(CMat(dec.reduced_dynamics * sel - sel * modal.dynamics));
    rep.intertwining = r1 <= tol;

    double r2 = inf_norm(CMat(dec.reduced_output * sel - modal.output.row(dec.sensor)));
    rep.output_identity = r2 <= std::max(zero_threshold(inf_norm(modal.output)), 1e-8);

    // Projection property of H'H on observed-support and complement-support
    // vectors; exact by construction of the canonical selector.
    CMat proj = sel.transpose() * sel;
    double r3 = 0.0;
    for (int j = 0; j < n; ++j) {
        CVec e = CVec::Zero(n);
        e(j) = cplx(1.0, 0.0);
        CVec image = proj * e;
        CVec expected = dec.position[j] >= 0 ? e : CVec(CVec::Zero(n));
        r3 = std::max(r3, (image - expected).cwiseAbs().maxCoeff());
    }
    rep.projection = r3 <= tolerances().identity_tol;

    Eigen::Index reduced_rank = rank_svd(CMat(dec.obs_matrix * sel.transpose()), 1e-8);
    rep.reduced_rank = reduced_rank == dec.dim();

    rep.max_residual = std::max({r1, r2, r3});
    return rep;
}

} // namespace secest::subspace
