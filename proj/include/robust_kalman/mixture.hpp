#pragma once

#include <cstdint>
#include <vector>

#include "robust_kalman/linalg.hpp"

namespace robust_kalman {

/// Result of the two-component Gaussian mixture fit. Components are labeled
/// by spread: det(cov_s) <= det(cov_b). weight_s is the Gaussian proportion P.
struct NoiseMixtureEstimate {
    double weight_s = 0.0;
    double weight_b = 0.0;
    VectorXd mean_s;
    VectorXd mean_b;
    MatrixXd cov_s;
    MatrixXd cov_b;
    double log_likelihood = 0.0;

    Eigen::Index dim() const { return cov_s.rows(); }

    /// Throws ContractViolation unless weights sum to one, covariances are
    /// symmetric PSD and det(cov_s) <= det(cov_b).
    void validate() const;
};

/// EM controls. The paper leaves the fitting procedure unspecified; these are
/// plain engineering knobs.
struct EmSettings {
    int max_iters = 200;
    double tol = 1e-9;        // relative log-likelihood change
    int n_restarts = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Per-restart EM diagnostics (log-likelihood trajectory per iteration).
struct EmTrace {
    struct Restart {
        std::vector<double> log_likelihoods;
        bool degenerate = false;
    };
    std::vector<Restart> restarts;
    int chosen = -1;
};

/// Mixture density: weight_s*phi(u; mean_s, cov_s) + weight_b*phi(u; mean_b, cov_b).
double gmm_pdf(const VectorXd& u, const NoiseMixtureEstimate& estimate);

/// Two-component EM fit: k-means++-style seeding on sample norms, E/M
/// iterations until relative log-likelihood change < tol, best of n_restarts
/// by final log-likelihood (ties break to the lowest restart index). Requires
/// at least 10*m samples. Throws DegenerateFitError when every restart
/// collapses onto a single component.
NoiseMixtureEstimate fit_gmm2(const std::vector<VectorXd>& samples, const EmSettings& settings,
                              EmTrace* trace = nullptr);

/// Adjustment factor: 4*sqrt(det(cov_b * cov_s^-1)) / (3 + exp(10*P)) with
/// P = weight_s.
double tg_factor(const NoiseMixtureEstimate& estimate);

/// tg_factor(estimate) * cov_s, symmetrized.
MatrixXd effective_covariance(const NoiseMixtureEstimate& estimate);

/// Mean-subtracted covariance of a sample sequence (1/n normalization); the
/// blended measurement covariance fed to the non-adaptive filters.
MatrixXd sample_covariance(const std::vector<VectorXd>& samples);

}  // namespace robust_kalman
