#include "robust_kalman/state_space.hpp"

namespace robust_kalman {

void StateSpaceModel::validate() const {
    const Eigen::Index n = f.rows();
    const Eigen::Index m = h.rows();
    if (f.cols() != n) throw ContractViolation("state transition matrix f must be square");
    if (h.cols() != n)
        throw ContractViolation("observation matrix h has " + std::to_string(h.cols()) +
                                " columns, state dimension is " + std::to_string(n));
    if (q.rows() != n || q.cols() != n)
        throw ContractViolation("process covariance q must be n x n");
    if (r_nominal.rows() != m || r_nominal.cols() != m)
        throw ContractViolation("measurement covariance r must be m x m");
    require_symmetric_psd(q, "process covariance q");
    require_symmetric_psd(r_nominal, "measurement covariance r");
    if (control && control->size() != n)
        throw ContractViolation("control offset must have state dimension");
}

void GaussianBelief::validate(Eigen::Index n) const {
    if (mean.size() != n) throw ContractViolation("belief mean has wrong dimension");
    if (cov.rows() != n || cov.cols() != n)
        throw ContractViolation("belief covariance has wrong dimension");
    require_symmetric_psd(cov, "belief covariance");
}

GaussianBelief kf_predict(const StateSpaceModel& model, const GaussianBelief& posterior) {
    const Eigen::Index n = model.state_dim();
    if (posterior.mean.size() != n || posterior.cov.rows() != n || posterior.cov.cols() != n)
        throw ContractViolation("posterior dimensions do not match the model");
    GaussianBelief out;
    out.mean = model.f * posterior.mean;
    if (model.control) out.mean += *model.control;
    out.cov = symmetrized(model.f * posterior.cov * model.f.transpose() + model.q);
    return out;
}

GaussianBelief kf_update_with_r(const StateSpaceModel& model, const GaussianBelief& prior,
                                const VectorXd& z, const MatrixXd& r) {
    const Eigen::Index n = model.state_dim();
    const Eigen::Index m = model.meas_dim();
    if (z.size() != m) throw ContractViolation("measurement has wrong dimension");
    if (prior.mean.size() != n || prior.cov.rows() != n)
        throw ContractViolation("prior dimensions do not match the model");
    const MatrixXd s = symmetrized(model.h * prior.cov * model.h.transpose() + r);
    const MatrixXd gain = prior.cov * model.h.transpose() * spd_inverse(s, "innovation covariance");
    GaussianBelief out;
    out.mean = prior.mean + gain * (z - model.h * prior.mean);
    out.cov = symmetrized(prior.cov - gain * model.h * prior.cov);
    return out;
}

GaussianBelief kf_update(const StateSpaceModel& model, const GaussianBelief& prior,
                         const VectorXd& z) {
    return kf_update_with_r(model, prior, z, model.r_nominal);
}

WeightPair information_weights(const StateSpaceModel& model, const MatrixXd& prior_cov,
                               const MatrixXd& r) {
    const MatrixXd p_inv = spd_inverse(prior_cov, "prior covariance");
    const MatrixXd r_inv = spd_inverse(r, "measurement covariance");
    const MatrixXd core =
        spd_inverse(symmetrized(p_inv + model.h.transpose() * r_inv * model.h),
                    "information matrix");
    WeightPair w;
    w.a_p = core * p_inv;
    w.a_r = core * model.h.transpose() * r_inv;
    return w;
}

VectorXd combine_weighted(const WeightPair& weights, const VectorXd& prior_mean,
                          const VectorXd& z) {
    if (weights.a_p.cols() != prior_mean.size() || weights.a_r.cols() != z.size())
        throw ContractViolation("weight dimensions do not match the inputs");
    return weights.a_p * prior_mean + weights.a_r * z;
}

}  // namespace robust_kalman
