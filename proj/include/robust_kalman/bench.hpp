#pragma once

#include <map>
#include <string>
#include <vector>

#include "robust_kalman/mixture.hpp"
#include "robust_kalman/noise.hpp"
#include "robust_kalman/state_space.hpp"
#include "robust_kalman/student_t.hpp"

namespace robust_kalman {

enum class FilterKind { kf, tkf, tgkf };

const char* filter_name(FilterKind kind);

/// Constant-velocity benchmark geometry: the object starts at x0_true and the
/// filters start from x0_est/p0, which is consumed as the prior of the first
/// measurement update (it is already a one-step prediction of the true state).
struct CvModelSpec {
    double dt = 1.0;
    VectorXd x0_true;  // defaults to [0, 0, 15, 15]
    VectorXd x0_est;   // defaults to [15, 15, 15, 15]
    MatrixXd p0;       // defaults to I4
    int steps = 100;
    bool printed_h = false;  // verbatim observation matrix (X position, Y velocity)

    CvModelSpec();
    void validate() const;
};

/// 4-state constant-velocity model: position measurement H and the symmetric
/// white-noise-acceleration process covariance built from dt.
StateSpaceModel build_cv_model(const CvModelSpec& spec);

/// Measurement-noise regime for a benchmark run.
struct NoiseModel {
    enum class Kind { mixture, alpha_stable };
    Kind kind = Kind::mixture;
    MixtureNoiseSpec mixture;
    AlphaStableSpec stable;  // applied independently per measurement coordinate

    static NoiseModel make_mixture(double p_gauss, double var_small, double var_big,
                                   Eigen::Index m = 2);
    static NoiseModel make_alpha_stable(double alpha, double scale);
};

struct TrajectoryData {
    std::vector<VectorXd> truth;
    std::vector<VectorXd> measurements;
    std::vector<VectorXd> noise;
};

/// Evolves the truth through the model dynamics with process noise drawn from
/// model.q and adds the supplied measurement noise regime.
TrajectoryData simulate_truth(const StateSpaceModel& model, const CvModelSpec& spec,
                              const NoiseModel& noise, RandomStream& process_stream,
                              RandomStream& measurement_stream);

struct FilterRun {
    std::vector<VectorXd> estimates;
    std::vector<double> err_x;            // truth minus estimate, X position
    std::vector<double> err_y;            // truth minus estimate, Y position
    std::vector<double> squared_errors;   // err_x^2 + err_y^2 per step
    bool diverged = false;
    int diverged_at_step = -1;
    bool gmm_fallback = false;            // degenerate fit; nominal covariance used
    double min_eig_over_trace = 0.0;      // PSD audit over posterior covariances
    double max_asymmetry = 0.0;
};

struct RunResult {
    TrajectoryData trajectory;
    std::map<FilterKind, FilterRun> filters;
};

struct RmseSeries {
    std::vector<double> rmse;  // per step
    int n_runs = 0;
    int n_used = 0;
    int n_diverged = 0;

    double time_average() const;
};

/// Eq.-(22)-style per-step RMSE over the Monte Carlo runs; diverged runs are
/// excluded from the mean and counted in n_diverged.
RmseSeries rmse_curve(const std::vector<RunResult>& results, FilterKind filter);

struct BenchConfig {
    CvModelSpec cv;
    TkfConfig tkf;
    int runs = 500;
    std::uint64_t master_seed = 1;
    std::vector<FilterKind> filters = {FilterKind::kf, FilterKind::tkf, FilterKind::tgkf};
    int em_restarts = 5;
    int em_max_iters = 200;
    double em_tol = 1e-9;
    int jobs = 0;  // 0 = hardware concurrency

    void validate() const;
};

/// Stream-id layout: runs are keyed by (sweep point, run index, channel) so a
/// run's randomness never depends on scheduling. Channels: 0 process noise,
/// 1 measurement noise, 2 EM seeding.
std::uint64_t run_stream_id(std::uint64_t point, std::uint64_t run, std::uint64_t channel);
std::uint64_t derive_em_seed(std::uint64_t master_seed, std::uint64_t point,
                             std::uint64_t run);

/// Simulates and filters one Monte Carlo run.
RunResult run_single(const BenchConfig& config, const NoiseModel& noise, std::uint64_t point,
                     std::uint64_t run);

/// All Monte Carlo runs of one experiment point, executed on a small worker
/// pool; the result is identical for any job count.
std::vector<RunResult> run_batch(const BenchConfig& config, const NoiseModel& noise,
                                 std::uint64_t point);

struct SweepPoint {
    double x = 0.0;  // grid value (p_gauss, sigma_b or alpha)
    std::map<FilterKind, double> avg_rmse;
    std::map<FilterKind, int> diverged;
    int gmm_fallbacks = 0;
};

std::vector<SweepPoint> sweep_gauss_pct(const BenchConfig& config,
                                        const std::vector<double>& grid, double var_small,
                                        double var_big);
std::vector<SweepPoint> sweep_stddev(const BenchConfig& config,
                                     const std::vector<double>& sigma_grid, double p_gauss,
                                     double var_small);
std::vector<SweepPoint> sweep_alpha_stable(const BenchConfig& config,
                                           const std::vector<double>& alpha_grid, double scale);

/// Confidence-weight demonstration on the scalar drift model x = x + 1: a
/// Gaussian noise segment followed by an impulsive segment, the filter's
/// per-step measurement variance taken from a sliding window of recent noise
/// samples.
struct WeightDemoConfig {
    int gauss_steps = 100;
    int impulse_steps = 100;
    double gauss_var = 1.0;
    double impulse_var = 100.0;
    double process_var = 0.5;
    int window = 15;
    std::uint64_t seed = 1;
};

struct WeightDemoResult {
    std::vector<double> a_p;
    std::vector<double> a_r;
    std::vector<double> noise;
    double mean_a_p_gauss = 0.0;    // mean over the Gaussian segment
    double median_a_p_impulse = 0.0;  // median over the impulsive segment
};

WeightDemoResult run_weight_demo(const WeightDemoConfig& config);

}  // namespace robust_kalman
