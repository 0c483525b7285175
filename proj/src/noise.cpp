#include "robust_kalman/noise.hpp"

#include <cmath>
#include <numbers>

namespace robust_kalman {

void MixtureNoiseSpec::validate() const {
    if (!(p_gauss >= 0.0 && p_gauss <= 1.0))
        throw ContractViolation("p_gauss must lie in [0, 1]");
    require_symmetric_psd(cov_small, "mixture small covariance");
    require_symmetric_psd(cov_big, "mixture big covariance");
    if (cov_small.rows() != cov_big.rows())
        throw ContractViolation("mixture components must share a dimension");
    if (symmetric_determinant(cov_small) > symmetric_determinant(cov_big))
        throw ContractViolation("mixture small component must not out-spread the big one");
    if (mean.size() != 0 && mean.size() != cov_small.rows())
        throw ContractViolation("mixture mean has wrong dimension");
}

void AlphaStableSpec::validate() const {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw ContractViolation("alpha must lie in (0, 2]");
    if (!(scale > 0.0)) throw ContractViolation("alpha-stable scale must be positive");
}

GaussianSampler::GaussianSampler(const MatrixXd& cov)
    : root_(symmetric_sqrt(cov, "gaussian sampling covariance")) {}

VectorXd GaussianSampler::draw(RandomStream& stream) const {
    VectorXd z(root_.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = stream.normal();
    return root_ * z;
}

MixtureSamples sample_mixture(const MixtureNoiseSpec& spec, std::size_t count,
                              RandomStream& stream) {
    spec.validate();
    const Eigen::Index m = spec.cov_small.rows();
    const GaussianSampler small(spec.cov_small);
    const GaussianSampler big(spec.cov_big);
    const VectorXd mean = spec.mean.size() ? spec.mean : VectorXd::Zero(m);
    MixtureSamples out;
    out.values.reserve(count);
    out.labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const bool pick_small = stream.uniform() < spec.p_gauss;
        const GaussianSampler& comp = pick_small ? small : big;
        out.values.push_back(mean + comp.draw(stream));
        out.labels.push_back(pick_small ? MixtureComponent::small : MixtureComponent::big);
    }
    return out;
}

double alpha_stable_draw(const AlphaStableSpec& spec, RandomStream& stream) {
    const double v = std::numbers::pi * (stream.uniform() - 0.5);
    const double w = stream.exponential();
    double s;
    if (spec.alpha == 1.0) {
        s = std::tan(v);
    } else {
        const double a = spec.alpha;
        s = std::sin(a * v) / std::pow(std::cos(v), 1.0 / a) *
            std::pow(std::cos(v - a * v) / w, (1.0 - a) / a);
    }
    return spec.location + spec.scale * s;
}

std::vector<double> sample_alpha_stable(const AlphaStableSpec& spec, std::size_t count,
                                        RandomStream& stream) {
    spec.validate();
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(alpha_stable_draw(spec, stream));
    return out;
}

std::vector<VectorXd> sample_gaussian(const MatrixXd& cov, std::size_t count,
                                      RandomStream& stream) {
    require_symmetric_psd(cov, "gaussian sampling covariance");
    const GaussianSampler sampler(cov);
    std::vector<VectorXd> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(sampler.draw(stream));
    return out;
}

}  // namespace robust_kalman
