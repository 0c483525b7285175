#pragma once

#include <vector>

#include "robust_kalman/mixture.hpp"
#include "robust_kalman/state_space.hpp"

namespace robust_kalman {

/// Fixed-point controls of the variational Student's-t measurement update.
struct TkfConfig {
    double omega = 5.0;  // process degrees of freedom
    double nu = 5.0;     // measurement degrees of freedom
    double tau = 5.0;    // scale-matrix tuning parameter
    int n_iters = 3;     // fixed-point iterations per step

    void validate() const;
};

/// Quantities produced by one fixed-point iteration, exposed for diagnostics
/// and the property tests. x_change is the relative movement of the posterior
/// mean in this iteration; it is recorded but never alters control flow.
struct VariationalIterate {
    VectorXd x_post;
    MatrixXd p_post;
    MatrixXd e_sigma_inv;  // E[Sigma^-1]
    MatrixXd u_mat;        // the updated scale matrix
    double u_hat = 0.0;
    double e_xi = 0.0;
    double e_lambda = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
    double x_change = 0.0;
};

/// E[lambda] = (m + nu) / (nu + tr(residual_outer * r_effective^-1)); the
/// measurement mixing weight whose supremum (m + nu)/nu is the adjustment
/// limit.
double lambda_expectation(const MatrixXd& residual_outer, const MatrixXd& r_effective,
                          const TkfConfig& config);

/// The variational measurement update (initialization plus n_iters fixed-point
/// iterations) applied to an explicit prior belief.
GaussianBelief tkf_measurement_update(const StateSpaceModel& model, const GaussianBelief& prior,
                                      const VectorXd& z, const MatrixXd& r_effective,
                                      const TkfConfig& config,
                                      std::vector<VariationalIterate>* trace = nullptr);

/// One full time step of the Student's-t Kalman filter: time update followed
/// by the variational measurement update against r_effective.
GaussianBelief tkf_step(const StateSpaceModel& model, const GaussianBelief& posterior_prev,
                        const VectorXd& z, const MatrixXd& r_effective, const TkfConfig& config,
                        std::vector<VariationalIterate>* trace = nullptr);

/// The covariance-adaptive variant: identical to tkf_step with
/// r_effective = effective_covariance(mixture).
GaussianBelief tgkf_step(const StateSpaceModel& model, const GaussianBelief& posterior_prev,
                         const VectorXd& z, const NoiseMixtureEstimate& mixture,
                         const TkfConfig& config,
                         std::vector<VariationalIterate>* trace = nullptr);

}  // namespace robust_kalman
