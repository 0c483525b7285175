#pragma once

#include <cstdint>
#include <vector>

#include "robust_kalman/linalg.hpp"
#include "robust_kalman/rng.hpp"

namespace robust_kalman {

/// Two-component Gaussian mixture noise: cov_small with probability p_gauss,
/// cov_big otherwise.
struct MixtureNoiseSpec {
    double p_gauss = 0.9;
    MatrixXd cov_small;
    MatrixXd cov_big;
    VectorXd mean;  // defaults to zero when empty

    void validate() const;
};

/// Symmetric alpha-stable noise (beta fixed at 0).
struct AlphaStableSpec {
    double alpha = 2.0;   // stability index in (0, 2]
    double scale = 1.0;   // > 0
    double location = 0.0;

    void validate() const;
};

enum class MixtureComponent : std::uint8_t { small = 0, big = 1 };

struct MixtureSamples {
    std::vector<VectorXd> values;
    std::vector<MixtureComponent> labels;  // truth labels, for validation only
};

/// Draws from the two-component mixture; each draw consumes a fixed number of
/// uniforms so sample i is a pure function of (spec, seed, stream_id, i).
MixtureSamples sample_mixture(const MixtureNoiseSpec& spec, std::size_t count,
                              RandomStream& stream);

/// Symmetric alpha-stable draws via the Chambers-Mallows-Stuck transform.
std::vector<double> sample_alpha_stable(const AlphaStableSpec& spec, std::size_t count,
                                        RandomStream& stream);

/// Single Chambers-Mallows-Stuck draw from the stream.
double alpha_stable_draw(const AlphaStableSpec& spec, RandomStream& stream);

/// Zero-mean multivariate normal draws through a symmetric square root of cov.
std::vector<VectorXd> sample_gaussian(const MatrixXd& cov, std::size_t count,
                                      RandomStream& stream);

/// Precomputed sampler for repeated multivariate normal draws from one
/// covariance (caches the symmetric square root).
class GaussianSampler {
public:
    explicit GaussianSampler(const MatrixXd& cov);
    VectorXd draw(RandomStream& stream) const;
    Eigen::Index dim() const { return root_.rows(); }

private:
    MatrixXd root_;
};

}  // namespace robust_kalman
