#pragma once

#include <Eigen/Dense>
#include <complex>

namespace secest {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using CRow = Eigen::RowVectorXcd;
using cplx = std::complex<double>;

/// Largest singular value.
inline double sigma_max(const CMat& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<CMat> es(a.adjoint() * a, Eigen::EigenvaluesOnly);
    double top = es.eigenvalues().maxCoeff();
    return top > 0.0 ? std::sqrt(top) : 0.0;
}

/// Smallest singular value.
inline double sigma_min(const CMat& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    Eigen::JacobiSVD<CMat> svd(a);
    return svd.singularValues().minCoeff();
}

/// 2-norm condition number; +inf when singular to working precision.
inline double cond2(const CMat& a) {
    Eigen::JacobiSVD<CMat> svd(a);
    double lo = svd.singularValues().minCoeff();
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return svd.singularValues().maxCoeff() / lo;
}

/// Infinity norm (max absolute row sum); entrywise modulus for complex.
inline double inf_norm(const CMat& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    return a.cwiseAbs().rowwise().sum().maxCoeff();
}

inline double inf_norm(const Mat& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    return a.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Numerical rank by singular-value threshold relative to the matrix scale.
inline Eigen::Index rank_svd(const CMat& a, double rel_tol) {
    if (a.rows() == 0 || a.cols() == 0) return 0;
    Eigen::JacobiSVD<CMat> svd(a);
    const auto& sv = svd.singularValues();
    double cut = rel_tol * std::max(1.0, sv(0));
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++r;
    return r;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const CVec& v) { return v.allFinite(); }

} // namespace secest
