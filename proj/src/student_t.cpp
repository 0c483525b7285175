#include "robust_kalman/student_t.hpp"

#include <cmath>

namespace robust_kalman {

void TkfConfig::validate() const {
    if (!(omega > 0.0)) throw ContractViolation("omega must be positive");
    if (!(nu > 0.0)) throw ContractViolation("nu must be positive");
    if (!(tau > 0.0)) throw ContractViolation("tau must be positive");
    if (n_iters < 1) throw ContractViolation("n_iters must be >= 1");
}

double lambda_expectation(const MatrixXd& residual_outer, const MatrixXd& r_effective,
                          const TkfConfig& config) {
    config.validate();
    const double m = static_cast<double>(r_effective.rows());
    if (residual_outer.rows() != r_effective.rows() ||
        residual_outer.cols() != r_effective.cols())
        throw ContractViolation("residual outer product must match the measurement dimension");
    const MatrixXd r_inv = spd_inverse(r_effective, "effective measurement covariance");
    return (m + config.nu) / (config.nu + (residual_outer * r_inv).trace());
}

GaussianBelief tkf_measurement_update(const StateSpaceModel& model, const GaussianBelief& prior,
                                      const VectorXd& z, const MatrixXd& r_effective,
                                      const TkfConfig& config,
                                      std::vector<VariationalIterate>* trace) {
    config.validate();
    const Eigen::Index n = model.state_dim();
    const Eigen::Index m = model.meas_dim();
    if (z.size() != m) throw ContractViolation("measurement has wrong dimension");
    if (prior.mean.size() != n || prior.cov.rows() != n)
        throw ContractViolation("prior dimensions do not match the model");
    if (r_effective.rows() != m || r_effective.cols() != m || !is_symmetric(r_effective))
        throw ContractViolation("effective measurement covariance must be symmetric m x m");
    const MatrixXd r_inv = spd_inverse(r_effective, "effective measurement covariance");

    const VectorXd& x_pred = prior.mean;
    const MatrixXd& p_pred = prior.cov;
    const double nd = static_cast<double>(n);
    const double md = static_cast<double>(m);

    const double u_k = nd + config.tau + 1.0;
    const MatrixXd u_mat0 = config.tau * p_pred;
    VectorXd x_iter = x_pred;
    MatrixXd p_iter = p_pred;
    MatrixXd e_sigma_inv = (u_k - nd - 1.0) * spd_inverse(u_mat0, "initial scale matrix");

    if (trace) trace->clear();
    for (int i = 0; i < config.n_iters; ++i) {
        const VectorXd diff = x_iter - x_pred;
        const MatrixXd d_mat = symmetrized(p_iter + diff * diff.transpose());
        const double alpha = 0.5 * (nd + config.omega);
        const double beta = 0.5 * (config.omega + (d_mat * e_sigma_inv).trace());
        const double e_xi = alpha / beta;

        const VectorXd resid = z - model.h * x_iter;
        const MatrixXd e_mat = symmetrized(resid * resid.transpose() +
                                           model.h * p_iter * model.h.transpose());
        const double gamma = 0.5 * (md + config.nu);
        const double delta = 0.5 * (config.nu + (e_mat * r_inv).trace());
        const double e_lambda = gamma / delta;

        const double u_hat = u_k + 1.0;
        const MatrixXd u_hat_mat = symmetrized(u_mat0 + e_xi * d_mat);
        e_sigma_inv = (u_hat - nd - 1.0) * spd_inverse(u_hat_mat, "scale matrix");

        const MatrixXd r_tilde = r_effective / e_lambda;
        const MatrixXd p_tilde = symmetrized(u_hat_mat / ((u_hat - nd - 1.0) * e_xi));

        const MatrixXd s = symmetrized(model.h * p_tilde * model.h.transpose() + r_tilde);
        const MatrixXd gain =
            p_tilde * model.h.transpose() * spd_inverse(s, "innovation covariance");
        const VectorXd x_next = x_pred + gain * (z - model.h * x_pred);
        const MatrixXd p_next = symmetrized(p_tilde - gain * model.h * p_tilde);

        if (!x_next.allFinite() || !p_next.allFinite())
            throw DivergenceError("non-finite iterate at fixed-point iteration " +
                                  std::to_string(i));

        const double x_change =
            (x_next - x_iter).norm() / std::max(1.0, x_iter.norm());
        x_iter = x_next;
        p_iter = p_next;
        if (trace) {
            VariationalIterate it;
            it.x_post = x_iter;
            it.p_post = p_iter;
            it.e_sigma_inv = e_sigma_inv;
            it.u_mat = u_hat_mat;
            it.u_hat = u_hat;
            it.e_xi = e_xi;
            it.e_lambda = e_lambda;
            it.alpha = alpha;
            it.beta = beta;
            it.gamma = gamma;
            it.delta = delta;
            it.x_change = x_change;
            trace->push_back(std::move(it));
        }
    }
    return GaussianBelief{x_iter, p_iter};
}

GaussianBelief tkf_step(const StateSpaceModel& model, const GaussianBelief& posterior_prev,
                        const VectorXd& z, const MatrixXd& r_effective, const TkfConfig& config,
                        std::vector<VariationalIterate>* trace) {
    const GaussianBelief prior = kf_predict(model, posterior_prev);
    return tkf_measurement_update(model, prior, z, r_effective, config, trace);
}

GaussianBelief tgkf_step(const StateSpaceModel& model, const GaussianBelief& posterior_prev,
                         const VectorXd& z, const NoiseMixtureEstimate& mixture,
                         const TkfConfig& config, std::vector<VariationalIterate>* trace) {
    mixture.validate();
    return tkf_step(model, posterior_prev, z, effective_covariance(mixture), config, trace);
}

}  // namespace robust_kalman
