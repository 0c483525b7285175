#pragma once

#include <optional>

#include "robust_kalman/linalg.hpp"

namespace robust_kalman {

/// Linear state-space model: x_k = f x_{k-1} (+ control) + w,  z_k = h x_k + v,
/// with process covariance q and nominal measurement covariance r_nominal.
struct StateSpaceModel {
    MatrixXd f;          // n x n state transition
    MatrixXd h;          // m x n observation
    MatrixXd q;          // n x n process noise covariance
    MatrixXd r_nominal;  // m x m measurement noise covariance
    std::optional<VectorXd> control;  // known additive state offset per step

    Eigen::Index state_dim() const { return f.rows(); }
    Eigen::Index meas_dim() const { return h.rows(); }

    /// Throws ContractViolation on inconsistent dimensions or a
    /// non-symmetric / non-PSD q or r_nominal.
    void validate() const;
};

/// State mean and covariance pair; the value that flows through every filter.
struct GaussianBelief {
    VectorXd mean;
    MatrixXd cov;

    void validate(Eigen::Index n) const;
};

/// Weights splitting the posterior mean between prior and measurement:
/// posterior = a_p * prior + a_r * z, with a_p + a_r * h = I.
struct WeightPair {
    MatrixXd a_p;  // n x n
    MatrixXd a_r;  // n x m
};

/// One step of the covariance-form prediction: mean = f*mean (+ control),
/// cov = f*cov*f' + q, re-symmetrized.
GaussianBelief kf_predict(const StateSpaceModel& model, const GaussianBelief& posterior);

/// Covariance-form measurement update. Throws SingularMatrixError when the
/// innovation covariance h*p*h' + r is numerically singular.
GaussianBelief kf_update(const StateSpaceModel& model, const GaussianBelief& prior,
                         const VectorXd& z);

/// kf_update against an explicit measurement covariance instead of
/// model.r_nominal.
GaussianBelief kf_update_with_r(const StateSpaceModel& model, const GaussianBelief& prior,
                                const VectorXd& z, const MatrixXd& r);

/// Information-form confidence weights:
///   a_p = [P^-1 + H'R^-1H]^-1 P^-1,   a_r = [P^-1 + H'R^-1H]^-1 H'R^-1.
WeightPair information_weights(const StateSpaceModel& model, const MatrixXd& prior_cov,
                               const MatrixXd& r);

/// a_p * prior_mean + a_r * z.
VectorXd combine_weighted(const WeightPair& weights, const VectorXd& prior_mean,
                          const VectorXd& z);

}  // namespace robust_kalman
