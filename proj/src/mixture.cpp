#include "robust_kalman/mixture.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

#include "robust_kalman/kernels.hpp"
#include "robust_kalman/rng.hpp"

namespace robust_kalman {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

struct Component {
    double weight;
    VectorXd mean;
    MatrixXd cov;
};

/// Dense sample view; the m == 2 case keeps structure-of-arrays copies so the
/// batch kernels can run over them.
struct SampleBlock {
    Eigen::MatrixXd data;  // n x m, row per sample
    std::vector<double> xs, ys;

    explicit SampleBlock(const std::vector<VectorXd>& samples) {
        const Eigen::Index n = static_cast<Eigen::Index>(samples.size());
        const Eigen::Index m = samples.front().size();
        data.resize(n, m);
        for (Eigen::Index i = 0; i < n; ++i) data.row(i) = samples[i].transpose();
        if (m == 2) {
            xs.resize(samples.size());
            ys.resize(samples.size());
            for (Eigen::Index i = 0; i < n; ++i) {
                xs[i] = data(i, 0);
                ys[i] = data(i, 1);
            }
        }
    }

    Eigen::Index count() const { return data.rows(); }
    Eigen::Index dim() const { return data.cols(); }
};

/// log N(u_i; mean, cov) for every sample. Returns false when cov is not
/// positive definite (the restart is then abandoned as degenerate).
bool log_density_batch(const SampleBlock& block, const Component& comp,
                       std::vector<double>& out) {
    const Eigen::Index n = block.count();
    const Eigen::Index m = block.dim();
    out.resize(static_cast<std::size_t>(n));
    if (m == 2) {
        const double a = comp.cov(0, 0), b = comp.cov(0, 1), c = comp.cov(1, 1);
        const double det = a * c - b * b;
        if (!(det > 0.0) || !(a > 0.0)) return false;
        const double inv_det = 1.0 / det;
        kernels::active().quadform2(block.xs.data(), block.ys.data(),
                                    static_cast<std::size_t>(n), comp.mean[0], comp.mean[1],
                                    c * inv_det, -b * inv_det, a * inv_det, out.data());
        const double norm = -0.5 * (2.0 * kLog2Pi + std::log(det));
        for (double& v : out) v = norm - 0.5 * v;
        return true;
    }
    Eigen::LLT<MatrixXd> llt(comp.cov);
    if (llt.info() != Eigen::Success) return false;
    const double logdet =
        2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double norm = -0.5 * (static_cast<double>(m) * kLog2Pi + logdet);
    for (Eigen::Index i = 0; i < n; ++i) {
        const VectorXd d = block.data.row(i).transpose() - comp.mean;
        out[static_cast<std::size_t>(i)] =
            norm - 0.5 * llt.matrixL().solve(d).squaredNorm();
    }
    return true;
}

/// Weighted mean and covariance for one component given its responsibilities.
void weighted_moments(const SampleBlock& block, const std::vector<double>& resp,
                      double& count, VectorXd& mean, MatrixXd& cov) {
    const Eigen::Index n = block.count();
    const Eigen::Index m = block.dim();
    if (m == 2) {
        double sums[3];
        kernels::active().weighted_sums2(block.xs.data(), block.ys.data(), resp.data(),
                                         static_cast<std::size_t>(n), sums);
        count = sums[0];
        mean.resize(2);
        if (count > 0.0) {
            mean[0] = sums[1] / count;
            mean[1] = sums[2] / count;
        } else {
            mean.setZero();
        }
        double scatter[3];
        kernels::active().weighted_scatter2(block.xs.data(), block.ys.data(), resp.data(),
                                            static_cast<std::size_t>(n), mean[0], mean[1],
                                            scatter);
        cov.resize(2, 2);
        const double inv = count > 0.0 ? 1.0 / count : 0.0;
        cov(0, 0) = scatter[0] * inv;
        cov(0, 1) = cov(1, 0) = scatter[1] * inv;
        cov(1, 1) = scatter[2] * inv;
        return;
    }
    count = 0.0;
    mean = VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < n; ++i) {
        count += resp[static_cast<std::size_t>(i)];
        mean += resp[static_cast<std::size_t>(i)] * block.data.row(i).transpose();
    }
    if (count > 0.0) mean /= count;
    cov = MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const VectorXd d = block.data.row(i).transpose() - mean;
        cov += resp[static_cast<std::size_t>(i)] * (d * d.transpose());
    }
    if (count > 0.0) cov /= count;
}

struct RestartResult {
    bool degenerate = true;
    double log_likelihood = 0.0;
    Component comps[2];
};

RestartResult run_restart(const SampleBlock& block, const EmSettings& settings,
                          std::uint64_t restart_index, const MatrixXd& floor,
                          EmTrace::Restart* trace) {
    RestartResult result;
    if (trace) trace->degenerate = true;
    const Eigen::Index n = block.count();
    const Eigen::Index m = block.dim();
    RandomStream rng(settings.seed, restart_index);

    // k-means++-style seeding on sample norms
    std::vector<double> norms(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        norms[static_cast<std::size_t>(i)] = block.data.row(i).norm();
    const std::size_t nn = norms.size();
    std::size_t idx0 = std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(nn)),
                                nn - 1);
    const double c0 = norms[idx0];
    double total = 0.0;
    for (double v : norms) total += (v - c0) * (v - c0);
    std::size_t idx1;
    if (total > 0.0) {
        const double target = rng.uniform() * total;
        double cum = 0.0;
        idx1 = nn - 1;
        for (std::size_t i = 0; i < nn; ++i) {
            cum += (norms[i] - c0) * (norms[i] - c0);
            if (cum > target) {
                idx1 = i;
                break;
            }
        }
    } else {
        idx1 = (idx0 + 1) % nn;
    }
    const double c1 = norms[idx1];

    std::vector<int> group(nn);
    std::size_t count1 = 0;
    for (std::size_t i = 0; i < nn; ++i) {
        group[i] = std::abs(norms[i] - c1) < std::abs(norms[i] - c0) ? 1 : 0;
        count1 += static_cast<std::size_t>(group[i]);
    }
    if (count1 == 0 || count1 == nn) {
        for (std::size_t i = 0; i < nn; ++i) group[i] = static_cast<int>(i % 2);
    }

    Component comps[2];
    std::vector<double> resp[2];
    for (int k = 0; k < 2; ++k) {
        resp[k].resize(nn);
        for (std::size_t i = 0; i < nn; ++i) resp[k][i] = group[i] == k ? 1.0 : 0.0;
        double count;
        weighted_moments(block, resp[k], count, comps[k].mean, comps[k].cov);
        comps[k].weight = count / static_cast<double>(nn);
        comps[k].cov += floor;
    }

    std::vector<double> lp[2];
    std::vector<double> ll_trace;
    bool converged = false;
    double prev_ll = 0.0;
    bool have_prev = false;
    for (int iter = 0; iter < settings.max_iters; ++iter) {
        for (int k = 0; k < 2; ++k) {
            if (!log_density_batch(block, comps[k], lp[k])) return result;
            const double lw = std::log(std::max(comps[k].weight, 1e-300));
            for (double& v : lp[k]) v += lw;
        }
        double ll = 0.0;
        for (std::size_t i = 0; i < nn; ++i) {
            const double a = std::max(lp[0][i], lp[1][i]);
            const double l = a + std::log(std::exp(lp[0][i] - a) + std::exp(lp[1][i] - a));
            ll += l;
            resp[0][i] = std::exp(lp[0][i] - l);
            resp[1][i] = std::exp(lp[1][i] - l);
        }
        ll_trace.push_back(ll);
        if (have_prev && std::abs(ll - prev_ll) <= settings.tol * std::max(1.0, std::abs(ll))) {
            converged = true;
            break;
        }
        have_prev = true;
        prev_ll = ll;

        // a component carried by fewer than m + 1 effective samples cannot
        // support a covariance; treat the restart as collapsed
        const double min_count = static_cast<double>(m) + 1.0;
        bool collapsed = false;
        for (int k = 0; k < 2; ++k) {
            double count;
            Component next;
            weighted_moments(block, resp[k], count, next.mean, next.cov);
            if (count < min_count) {
                collapsed = true;
                break;
            }
            next.weight = count / static_cast<double>(nn);
            next.cov += floor;
            comps[k] = std::move(next);
        }
        if (collapsed) {
            if (trace) trace->log_likelihoods = ll_trace;
            return result;
        }
    }
    if (!converged) {
        // one more evaluation so the reported likelihood matches the
        // reported parameters
        double ll = 0.0;
        for (int k = 0; k < 2; ++k) {
            if (!log_density_batch(block, comps[k], lp[k])) return result;
            const double lw = std::log(std::max(comps[k].weight, 1e-300));
            for (double& v : lp[k]) v += lw;
        }
        for (std::size_t i = 0; i < nn; ++i) {
            const double a = std::max(lp[0][i], lp[1][i]);
            ll += a + std::log(std::exp(lp[0][i] - a) + std::exp(lp[1][i] - a));
        }
        ll_trace.push_back(ll);
    }
    if (trace) {
        trace->log_likelihoods = ll_trace;
        trace->degenerate = false;
    }
    result.degenerate = false;
    result.log_likelihood = ll_trace.back();
    result.comps[0] = comps[0];
    result.comps[1] = comps[1];
    return result;
}

}  // namespace

void NoiseMixtureEstimate::validate() const {
    if (std::abs(weight_s + weight_b - 1.0) > 1e-9)
        throw ContractViolation("mixture weights must sum to one");
    if (weight_s < -1e-12 || weight_b < -1e-12)
        throw ContractViolation("mixture weights must be nonnegative");
    require_symmetric_psd(cov_s, "mixture small covariance");
    require_symmetric_psd(cov_b, "mixture big covariance");
    if (symmetric_determinant(cov_s) > symmetric_determinant(cov_b) * (1.0 + 1e-12))
        throw ContractViolation("mixture labeling violated: det(cov_s) > det(cov_b)");
}

void EmSettings::validate() const {
    if (max_iters < 1) throw ContractViolation("max_iters must be >= 1");
    if (!(tol > 0.0)) throw ContractViolation("tol must be positive");
    if (n_restarts < 1) throw ContractViolation("n_restarts must be >= 1");
}

double gmm_pdf(const VectorXd& u, const NoiseMixtureEstimate& estimate) {
    const Eigen::Index m = u.size();
    if (estimate.cov_s.rows() != m || estimate.cov_b.rows() != m)
        throw ContractViolation("gmm_pdf point has wrong dimension");
    auto component_pdf = [&](const VectorXd& mean, const MatrixXd& cov, const char* what) {
        Eigen::LLT<MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success)
            throw SingularMatrixError(std::string(what) + " is singular");
        const double logdet =
            2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        const double qf = llt.matrixL().solve(u - mean).squaredNorm();
        return std::exp(-0.5 * (static_cast<double>(m) * kLog2Pi + logdet + qf));
    };
    return estimate.weight_s * component_pdf(estimate.mean_s, estimate.cov_s,
                                             "mixture small covariance") +
           estimate.weight_b * component_pdf(estimate.mean_b, estimate.cov_b,
                                             "mixture big covariance");
}

MatrixXd sample_covariance(const std::vector<VectorXd>& samples) {
    if (samples.empty()) throw ContractViolation("sample covariance of an empty sequence");
    const Eigen::Index m = samples.front().size();
    VectorXd mean = VectorXd::Zero(m);
    for (const auto& s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    MatrixXd cov = MatrixXd::Zero(m, m);
    for (const auto& s : samples) {
        const VectorXd d = s - mean;
        cov += d * d.transpose();
    }
    return symmetrized(cov / static_cast<double>(samples.size()));
}

NoiseMixtureEstimate fit_gmm2(const std::vector<VectorXd>& samples, const EmSettings& settings,
                              EmTrace* trace) {
    settings.validate();
    if (samples.empty()) throw InsufficientDataError("no samples");
    const Eigen::Index m = samples.front().size();
    if (static_cast<Eigen::Index>(samples.size()) < 10 * m)
        throw InsufficientDataError("need at least " + std::to_string(10 * m) +
                                    " samples for a " + std::to_string(m) +
                                    "-dimensional mixture fit, got " +
                                    std::to_string(samples.size()));
    for (const auto& s : samples) {
        if (s.size() != m) throw ContractViolation("samples must share a dimension");
        if (!s.allFinite()) throw ContractViolation("samples must be finite");
    }

    const SampleBlock block(samples);
    const MatrixXd base_cov = sample_covariance(samples);
    const double floor_scale =
        std::max(base_cov.trace() / static_cast<double>(m), 1e-12);
    const MatrixXd floor = 1e-8 * floor_scale * MatrixXd::Identity(m, m);

    if (trace) {
        trace->restarts.assign(static_cast<std::size_t>(settings.n_restarts), {});
        trace->chosen = -1;
    }

    bool have_best = false;
    RestartResult best;
    int best_index = -1;
    for (int r = 0; r < settings.n_restarts; ++r) {
        EmTrace::Restart* rt = trace ? &trace->restarts[static_cast<std::size_t>(r)] : nullptr;
        RestartResult candidate =
            run_restart(block, settings, static_cast<std::uint64_t>(r), floor, rt);
        if (candidate.degenerate) continue;
        if (!have_best || candidate.log_likelihood > best.log_likelihood) {
            best = candidate;
            best_index = r;
            have_best = true;
        }
    }
    if (!have_best)
        throw DegenerateFitError("every EM restart collapsed onto a single component");
    if (trace) trace->chosen = best_index;

    const double det0 = symmetric_determinant(best.comps[0].cov);
    const double det1 = symmetric_determinant(best.comps[1].cov);
    const int s = det0 <= det1 ? 0 : 1;
    const int b = 1 - s;
    NoiseMixtureEstimate out;
    out.weight_s = best.comps[s].weight;
    out.weight_b = best.comps[b].weight;
    out.mean_s = best.comps[s].mean;
    out.mean_b = best.comps[b].mean;
    out.cov_s = symmetrized(best.comps[s].cov);
    out.cov_b = symmetrized(best.comps[b].cov);
    out.log_likelihood = best.log_likelihood;
    return out;
}

double tg_factor(const NoiseMixtureEstimate& estimate) {
    if (!(estimate.weight_s >= 0.0 && estimate.weight_s <= 1.0))
        throw ContractViolation("Gaussian proportion must lie in [0, 1]");
    const double det_s = symmetric_determinant(estimate.cov_s);
    const double det_b = symmetric_determinant(estimate.cov_b);
    if (!(det_s > 0.0))
        throw SingularMatrixError("small-component covariance is singular");
    return 4.0 * std::sqrt(det_b / det_s) / (3.0 + std::exp(10.0 * estimate.weight_s));
}

MatrixXd effective_covariance(const NoiseMixtureEstimate& estimate) {
    return symmetrized(tg_factor(estimate) * estimate.cov_s);
}

}  // namespace robust_kalman
