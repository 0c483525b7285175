#include "robust_kalman/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "robust_kalman/kernels.hpp"

namespace robust_kalman {

namespace {
constexpr double kDivergenceTraceLimit = 1e12;
constexpr std::uint64_t kPointStride = 1000003;
}  // namespace

const char* filter_name(FilterKind kind) {
    switch (kind) {
        case FilterKind::kf: return "kf";
        case FilterKind::tkf: return "tkf";
        case FilterKind::tgkf: return "tgkf";
    }
    return "unknown";
}

CvModelSpec::CvModelSpec() {
    x0_true = (VectorXd(4) << 0.0, 0.0, 15.0, 15.0).finished();
    x0_est = (VectorXd(4) << 15.0, 15.0, 15.0, 15.0).finished();
    p0 = MatrixXd::Identity(4, 4);
}

void CvModelSpec::validate() const {
    if (!(dt > 0.0)) throw ContractViolation("dt must be positive");
    if (steps < 1) throw ContractViolation("steps must be >= 1");
    if (x0_true.size() != 4 || x0_est.size() != 4)
        throw ContractViolation("CV state vectors must have dimension 4");
    require_symmetric_psd(p0, "initial covariance p0");
}

StateSpaceModel build_cv_model(const CvModelSpec& spec) {
    spec.validate();
    const double t = spec.dt;
    StateSpaceModel model;
    model.f = MatrixXd::Identity(4, 4);
    model.f(0, 2) = t;
    model.f(1, 3) = t;
    model.h = MatrixXd::Zero(2, 4);
    if (spec.printed_h) {
        model.h(0, 0) = 1.0;
        model.h(1, 3) = 1.0;
    } else {
        model.h(0, 0) = 1.0;
        model.h(1, 1) = 1.0;
    }
    const double t2 = t * t;
    const double t3 = t2 * t;
    MatrixXd q = MatrixXd::Zero(4, 4);
    q(0, 0) = q(1, 1) = t3 / 3.0;
    q(2, 2) = q(3, 3) = t2;
    q(0, 2) = q(2, 0) = t2 / 2.0;
    q(1, 3) = q(3, 1) = t2 / 2.0;
    model.q = q;
    model.r_nominal = MatrixXd::Identity(2, 2);
    model.validate();
    return model;
}

NoiseModel NoiseModel::make_mixture(double p_gauss, double var_small, double var_big,
                                    Eigen::Index m) {
    NoiseModel out;
    out.kind = Kind::mixture;
    out.mixture.p_gauss = p_gauss;
    out.mixture.cov_small = var_small * MatrixXd::Identity(m, m);
    out.mixture.cov_big = var_big * MatrixXd::Identity(m, m);
    out.mixture.validate();
    return out;
}

NoiseModel NoiseModel::make_alpha_stable(double alpha, double scale) {
    NoiseModel out;
    out.kind = Kind::alpha_stable;
    out.stable.alpha = alpha;
    out.stable.scale = scale;
    out.stable.validate();
    return out;
}

TrajectoryData simulate_truth(const StateSpaceModel& model, const CvModelSpec& spec,
                              const NoiseModel& noise, RandomStream& process_stream,
                              RandomStream& measurement_stream) {
    spec.validate();
    const std::size_t steps = static_cast<std::size_t>(spec.steps);
    TrajectoryData out;
    out.truth.reserve(steps);
    out.measurements.reserve(steps);

    if (noise.kind == NoiseModel::Kind::mixture) {
        out.noise = sample_mixture(noise.mixture, steps, measurement_stream).values;
    } else {
        const Eigen::Index m = model.meas_dim();
        out.noise.reserve(steps);
        for (std::size_t k = 0; k < steps; ++k) {
            VectorXd v(m);
            for (Eigen::Index j = 0; j < m; ++j)
                v[j] = alpha_stable_draw(noise.stable, measurement_stream);
            out.noise.push_back(std::move(v));
        }
    }

    const GaussianSampler process(model.q);
    VectorXd x = spec.x0_true;
    for (std::size_t k = 0; k < steps; ++k) {
        x = model.f * x + process.draw(process_stream);
        out.truth.push_back(x);
        out.measurements.push_back(model.h * x + out.noise[k]);
    }
    return out;
}

double RmseSeries::time_average() const {
    if (rmse.empty()) return 0.0;
    double sum = 0.0;
    for (double v : rmse) sum += v;
    return sum / static_cast<double>(rmse.size());
}

RmseSeries rmse_curve(const std::vector<RunResult>& results, FilterKind filter) {
    RmseSeries out;
    out.n_runs = static_cast<int>(results.size());
    if (results.empty()) return out;
    const std::size_t steps = results.front().trajectory.truth.size();
    std::vector<double> acc(steps, 0.0);
    for (const auto& run : results) {
        const auto it = run.filters.find(filter);
        if (it == run.filters.end())
            throw ContractViolation(std::string("filter ") + filter_name(filter) +
                                    " missing from a run");
        if (it->second.err_x.size() != steps)
            throw ContractViolation("runs have mismatched lengths");
        if (it->second.diverged) {
            ++out.n_diverged;
            continue;
        }
        kernels::active().accumulate_sq_err2(it->second.err_x.data(), it->second.err_y.data(),
                                             steps, acc.data());
        ++out.n_used;
    }
    out.rmse.resize(steps);
    const double denom = std::max(out.n_used, 1);
    for (std::size_t k = 0; k < steps; ++k) out.rmse[k] = std::sqrt(acc[k] / denom);
    return out;
}

void BenchConfig::validate() const {
    cv.validate();
    tkf.validate();
    if (runs < 1) throw ContractViolation("runs must be >= 1");
    if (filters.empty()) throw ContractViolation("at least one filter must be selected");
    if (em_restarts < 1) throw ContractViolation("em_restarts must be >= 1");
}

std::uint64_t run_stream_id(std::uint64_t point, std::uint64_t run, std::uint64_t channel) {
    return ((point * kPointStride + run) << 4) | channel;
}

std::uint64_t derive_em_seed(std::uint64_t master_seed, std::uint64_t point,
                             std::uint64_t run) {
    return mix64(master_seed ^ mix64(run_stream_id(point, run, 2)));
}

namespace {

struct StepAudit {
    double min_eig_over_trace = std::numeric_limits<double>::infinity();
    double max_asymmetry = 0.0;

    void observe(const MatrixXd& cov) {
        min_eig_over_trace = std::min(min_eig_over_trace, min_eigenvalue_over_trace(cov));
        max_asymmetry = std::max(max_asymmetry, asymmetry(cov));
    }
};

bool diverged(const GaussianBelief& belief) {
    return !belief.mean.allFinite() || !belief.cov.allFinite() ||
           belief.cov.trace() > kDivergenceTraceLimit;
}

}  // namespace

RunResult run_single(const BenchConfig& config, const NoiseModel& noise, std::uint64_t point,
                     std::uint64_t run) {
    const StateSpaceModel model = build_cv_model(config.cv);
    RandomStream process_stream(config.master_seed, run_stream_id(point, run, 0));
    RandomStream measurement_stream(config.master_seed, run_stream_id(point, run, 1));

    RunResult out;
    out.trajectory = simulate_truth(model, config.cv, noise, process_stream,
                                    measurement_stream);
    const std::size_t steps = out.trajectory.truth.size();

    const MatrixXd r_nominal = sample_covariance(out.trajectory.noise);

    const bool wants_tgkf =
        std::find(config.filters.begin(), config.filters.end(), FilterKind::tgkf) !=
        config.filters.end();
    MatrixXd r_tgkf;
    bool tgkf_fallback = false;
    if (wants_tgkf) {
        EmSettings em;
        em.max_iters = config.em_max_iters;
        em.tol = config.em_tol;
        em.n_restarts = config.em_restarts;
        em.seed = derive_em_seed(config.master_seed, point, run);
        try {
            r_tgkf = effective_covariance(fit_gmm2(out.trajectory.noise, em));
        } catch (const DegenerateFitError&) {
            r_tgkf = r_nominal;
            tgkf_fallback = true;
        }
    }

    for (FilterKind kind : config.filters) {
        FilterRun fr;
        fr.estimates.reserve(steps);
        fr.err_x.reserve(steps);
        fr.err_y.reserve(steps);
        fr.squared_errors.reserve(steps);
        fr.gmm_fallback = kind == FilterKind::tgkf && tgkf_fallback;
        const MatrixXd& r_eff = kind == FilterKind::tgkf ? r_tgkf : r_nominal;

        GaussianBelief belief{config.cv.x0_est, config.cv.p0};
        StepAudit audit;
        for (std::size_t k = 0; k < steps; ++k) {
            const VectorXd& z = out.trajectory.measurements[k];
            GaussianBelief next;
            try {
                // x0_est/p0 describe the state at the first measurement, so
                // step one skips the time update.
                if (kind == FilterKind::kf) {
                    const GaussianBelief prior =
                        k == 0 ? belief : kf_predict(model, belief);
                    next = kf_update_with_r(model, prior, z, r_eff);
                } else {
                    if (k == 0) {
                        next = tkf_measurement_update(model, belief, z, r_eff, config.tkf);
                    } else {
                        next = tkf_step(model, belief, z, r_eff, config.tkf);
                    }
                }
            } catch (const Error&) {
                fr.diverged = true;
                fr.diverged_at_step = static_cast<int>(k);
            }
            if (!fr.diverged && diverged(next)) {
                fr.diverged = true;
                fr.diverged_at_step = static_cast<int>(k);
            }
            if (fr.diverged) {
                // keep the sequences rectangular for RunResult's invariant
                fr.estimates.push_back(belief.mean);
                fr.err_x.push_back(0.0);
                fr.err_y.push_back(0.0);
                fr.squared_errors.push_back(0.0);
                continue;
            }
            belief = next;
            audit.observe(belief.cov);
            fr.estimates.push_back(belief.mean);
            const double ex = out.trajectory.truth[k][0] - belief.mean[0];
            const double ey = out.trajectory.truth[k][1] - belief.mean[1];
            fr.err_x.push_back(ex);
            fr.err_y.push_back(ey);
            fr.squared_errors.push_back(ex * ex + ey * ey);
        }
        fr.min_eig_over_trace = audit.min_eig_over_trace;
        fr.max_asymmetry = audit.max_asymmetry;
        out.filters.emplace(kind, std::move(fr));
    }
    return out;
}

std::vector<RunResult> run_batch(const BenchConfig& config, const NoiseModel& noise,
                                 std::uint64_t point) {
    config.validate();
    const std::size_t runs = static_cast<std::size_t>(config.runs);
    std::vector<RunResult> results(runs);
    unsigned jobs = config.jobs > 0 ? static_cast<unsigned>(config.jobs)
                                    : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(runs));
    if (jobs <= 1) {
        for (std::size_t s = 0; s < runs; ++s) results[s] = run_single(config, noise, point, s);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t s = next.fetch_add(1);
            if (s >= runs) return;
            try {
                results[s] = run_single(config, noise, point, s);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

namespace {

SweepPoint summarize_point(const BenchConfig& config, const std::vector<RunResult>& results,
                           double x) {
    SweepPoint point;
    point.x = x;
    for (FilterKind kind : config.filters) {
        const RmseSeries series = rmse_curve(results, kind);
        point.avg_rmse[kind] = series.time_average();
        point.diverged[kind] = series.n_diverged;
    }
    for (const auto& run : results) {
        const auto it = run.filters.find(FilterKind::tgkf);
        if (it != run.filters.end() && it->second.gmm_fallback) ++point.gmm_fallbacks;
    }
    return point;
}

}  // namespace

std::vector<SweepPoint> sweep_gauss_pct(const BenchConfig& config,
                                        const std::vector<double>& grid, double var_small,
                                        double var_big) {
    std::vector<SweepPoint> out;
    out.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const NoiseModel noise = NoiseModel::make_mixture(grid[i], var_small, var_big);
        out.push_back(summarize_point(config, run_batch(config, noise, i), grid[i]));
    }
    return out;
}

std::vector<SweepPoint> sweep_stddev(const BenchConfig& config,
                                     const std::vector<double>& sigma_grid, double p_gauss,
                                     double var_small) {
    std::vector<SweepPoint> out;
    out.reserve(sigma_grid.size());
    for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
        const double sigma = sigma_grid[i];
        const NoiseModel noise =
            NoiseModel::make_mixture(p_gauss, var_small, sigma * sigma);
        out.push_back(summarize_point(config, run_batch(config, noise, i), sigma));
    }
    return out;
}

std::vector<SweepPoint> sweep_alpha_stable(const BenchConfig& config,
                                           const std::vector<double>& alpha_grid,
                                           double scale) {
    std::vector<SweepPoint> out;
    out.reserve(alpha_grid.size());
    for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
        const NoiseModel noise = NoiseModel::make_alpha_stable(alpha_grid[i], scale);
        out.push_back(summarize_point(config, run_batch(config, noise, i), alpha_grid[i]));
    }
    return out;
}

WeightDemoResult run_weight_demo(const WeightDemoConfig& config) {
    if (config.gauss_steps < 1 || config.impulse_steps < 1)
        throw ContractViolation("weight demo needs both segments");
    if (config.window < 1) throw ContractViolation("window must be >= 1");

    StateSpaceModel model;
    model.f = MatrixXd::Identity(1, 1);
    model.h = MatrixXd::Identity(1, 1);
    model.q = config.process_var * MatrixXd::Identity(1, 1);
    model.r_nominal = MatrixXd::Identity(1, 1);
    model.control = VectorXd::Ones(1);
    model.validate();

    RandomStream process_stream(config.seed, 0);
    RandomStream measurement_stream(config.seed, 1);

    const int steps = config.gauss_steps + config.impulse_steps;
    WeightDemoResult out;
    out.a_p.reserve(steps);
    out.a_r.reserve(steps);
    out.noise.reserve(steps);

    const double sd_gauss = std::sqrt(config.gauss_var);
    const double sd_impulse = std::sqrt(config.impulse_var);
    const double sd_process = std::sqrt(config.process_var);

    double truth = 0.0;
    GaussianBelief belief{VectorXd::Zero(1), MatrixXd::Identity(1, 1)};
    std::vector<double> window;
    window.reserve(static_cast<std::size_t>(config.window));
    for (int k = 0; k < steps; ++k) {
        const double sd = k < config.gauss_steps ? sd_gauss : sd_impulse;
        const double v = sd * measurement_stream.normal();
        out.noise.push_back(v);
        truth += 1.0 + sd_process * process_stream.normal();
        const double z = truth + v;

        if (static_cast<int>(window.size()) == config.window)
            window.erase(window.begin());
        window.push_back(v * v);
        double r_k = 0.0;
        for (double w : window) r_k += w;
        r_k = std::max(r_k / static_cast<double>(window.size()), 1e-6);
        const MatrixXd r = r_k * MatrixXd::Identity(1, 1);

        const GaussianBelief prior = kf_predict(model, belief);
        const WeightPair weights = information_weights(model, prior.cov, r);
        out.a_p.push_back(weights.a_p(0, 0));
        out.a_r.push_back(weights.a_r(0, 0));
        belief = kf_update_with_r(model, prior, (VectorXd(1) << z).finished(), r);
    }

    double mean = 0.0;
    for (int k = 0; k < config.gauss_steps; ++k) mean += out.a_p[static_cast<std::size_t>(k)];
    out.mean_a_p_gauss = mean / config.gauss_steps;
    std::vector<double> tail(out.a_p.begin() + config.gauss_steps, out.a_p.end());
    std::sort(tail.begin(), tail.end());
    const std::size_t mid = tail.size() / 2;
    out.median_a_p_impulse =
        tail.size() % 2 == 1 ? tail[mid] : 0.5 * (tail[mid - 1] + tail[mid]);
    return out;
}

}  // namespace robust_kalman
