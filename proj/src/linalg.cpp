#include "robust_kalman/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace robust_kalman {

double asymmetry(const MatrixXd& a) {
    if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

bool is_symmetric(const MatrixXd& a, double rel_tol) {
    return a.rows() == a.cols() && asymmetry(a) <= rel_tol;
}

bool is_symmetric_psd(const MatrixXd& a, double rel_tol, double eig_tol) {
    if (!is_symmetric(a, rel_tol)) return false;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(a), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) return false;
    const double floor = -eig_tol * std::abs(a.trace());
    return es.eigenvalues().minCoeff() >= floor;
}

void require_symmetric_psd(const MatrixXd& a, const std::string& what) {
    if (a.rows() != a.cols())
        throw ContractViolation(what + " must be square, got " + std::to_string(a.rows()) +
                                "x" + std::to_string(a.cols()));
    if (!is_symmetric(a))
        throw ContractViolation(what + " is not symmetric");
    if (!is_symmetric_psd(a))
        throw ContractViolation(what + " is not positive semidefinite");
}

MatrixXd spd_inverse(const MatrixXd& a, const std::string& what) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(a));
    if (es.info() != Eigen::Success)
        throw SingularMatrixError(what + ": eigendecomposition failed");
    const VectorXd& ev = es.eigenvalues();
    const double emax = ev.maxCoeff();
    const double emin = ev.minCoeff();
    if (emax <= 0.0 || emin <= 0.0 || emax / emin > kConditionLimit)
        throw SingularMatrixError(what + " is numerically singular (condition number > 1e12)");
    return es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd symmetric_sqrt(const MatrixXd& a, const std::string& what) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(a));
    if (es.info() != Eigen::Success)
        throw SingularMatrixError(what + ": eigendecomposition failed");
    VectorXd ev = es.eigenvalues();
    const double floor = -kPsdEigenTol * std::abs(a.trace());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < floor)
            throw ContractViolation(what + " is not positive semidefinite");
        ev[i] = ev[i] > 0.0 ? std::sqrt(ev[i]) : 0.0;
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double symmetric_determinant(const MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues().prod();
}

double min_eigenvalue_over_trace(const MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(a), Eigen::EigenvaluesOnly);
    const double tr = std::abs(a.trace());
    if (tr == 0.0) return es.eigenvalues().minCoeff();
    return es.eigenvalues().minCoeff() / tr;
}

}  // namespace robust_kalman
