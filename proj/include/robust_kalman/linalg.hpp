#pragma once

#include <Eigen/Dense>
#include <string>

#include "robust_kalman/errors.hpp"

namespace robust_kalman {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Condition number above which a matrix is treated as singular.
inline constexpr double kConditionLimit = 1e12;

/// Relative tolerance for symmetry checks on covariance inputs.
inline constexpr double kSymmetryTol = 1e-12;

/// Eigenvalues of a PSD matrix may dip below zero by this fraction of the
/// trace before the matrix is rejected.
inline constexpr double kPsdEigenTol = 1e-10;

inline MatrixXd symmetrized(const MatrixXd& a) {
    return 0.5 * (a + a.transpose());
}

inline void symmetrize_in_place(MatrixXd& a) {
    a = symmetrized(a).eval();
}

/// Max |a - a^T| entry relative to the largest |a| entry (0 for empty/scalar).
double asymmetry(const MatrixXd& a);

bool is_symmetric(const MatrixXd& a, double rel_tol = kSymmetryTol);

/// Symmetric to rel_tol and eigenvalues >= -eig_tol * trace.
bool is_symmetric_psd(const MatrixXd& a, double rel_tol = kSymmetryTol,
                      double eig_tol = kPsdEigenTol);

/// Throws ContractViolation naming `what` if `a` is not square/symmetric/PSD.
void require_symmetric_psd(const MatrixXd& a, const std::string& what);

/// Inverse of a symmetric positive definite matrix via eigendecomposition.
/// Throws SingularMatrixError naming `what` when the eigenvalue spread
/// exceeds kConditionLimit or the matrix is not positive definite.
MatrixXd spd_inverse(const MatrixXd& a, const std::string& what);

/// Symmetric PSD square root: a = s * s with s symmetric. Small negative
/// eigenvalues (within tolerance) are clamped to zero.
MatrixXd symmetric_sqrt(const MatrixXd& a, const std::string& what);

/// Determinant of a small symmetric matrix via eigenvalues.
double symmetric_determinant(const MatrixXd& a);

/// Smallest eigenvalue divided by trace; used by PSD audits.
double min_eigenvalue_over_trace(const MatrixXd& a);

}  // namespace robust_kalman
