// robust-kalman: state-estimation benchmarks for heavy-tailed measurement
// noise. Subcommands reproduce the simulation studies (weight-demo, track,
// sweep-gauss-pct, sweep-stddev, alpha-stable) and expose the GMM noise
// decomposition (gmm-fit).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <unistd.h>
#include <vector>

#include "robust_kalman/bench.hpp"
#include "robust_kalman/table.hpp"
#include "robust_kalman/version.hpp"

namespace rk = robust_kalman;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::uint64_t seed = 1;
    std::string out = "-";
    std::string format = "csv";
    std::string config;
    int jobs = 0;
    bool quiet = false;
};

struct BenchOpts {
    int runs = 500;
    int steps = 100;
    std::string filters = "kf,tkf,tgkf";
    int iters = 3;
    double omega = 5.0;
    double nu = 5.0;
    double tau = 5.0;
    int restarts = 5;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    cmd->add_option("--seed", o.seed, "master seed, 64-bit unsigned")
        ->capture_default_str();
    cmd->add_option("--out", o.out, "output path ('-' for stdout)")->capture_default_str();
    cmd->add_option("--format", o.format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--config", o.config, "JSON config file; flags override its values");
    cmd->add_option("--jobs", o.jobs, "worker threads, 0 = all cores")->capture_default_str();
    cmd->add_flag("--quiet", o.quiet, "suppress the run summary on stderr");
}

void add_bench(CLI::App* cmd, BenchOpts& o) {
    cmd->add_option("--runs", o.runs, "Monte Carlo runs M")->capture_default_str();
    cmd->add_option("--steps", o.steps, "trajectory length, steps")->capture_default_str();
    cmd->add_option("--filters", o.filters, "comma list from {kf,tkf,tgkf}")
        ->capture_default_str();
    cmd->add_option("--iters", o.iters, "fixed-point iterations N per step")
        ->capture_default_str();
    cmd->add_option("--omega", o.omega, "process degrees of freedom")->capture_default_str();
    cmd->add_option("--nu", o.nu, "measurement degrees of freedom")->capture_default_str();
    cmd->add_option("--tau", o.tau, "scale-matrix tuning parameter")->capture_default_str();
    cmd->add_option("--restarts", o.restarts, "EM restarts for the per-run GMM fit")
        ->capture_default_str();
}

std::vector<rk::FilterKind> parse_filters(const std::string& csv) {
    std::vector<rk::FilterKind> selected;
    std::stringstream ss(csv);
    std::string item;
    bool want[3] = {false, false, false};
    while (std::getline(ss, item, ',')) {
        if (item == "kf") want[0] = true;
        else if (item == "tkf") want[1] = true;
        else if (item == "tgkf") want[2] = true;
        else throw CLI::ValidationError("--filters", "unknown filter '" + item + "'");
    }
    if (want[0]) selected.push_back(rk::FilterKind::kf);
    if (want[1]) selected.push_back(rk::FilterKind::tkf);
    if (want[2]) selected.push_back(rk::FilterKind::tgkf);
    if (selected.empty())
        throw CLI::ValidationError("--filters", "at least one filter is required");
    return selected;
}

std::vector<double> parse_grid(const std::string& text, const char* flag) {
    std::vector<double> grid;
    const auto fail = [&](const std::string& why) {
        throw CLI::ValidationError(flag, why + ": '" + text + "'");
    };
    if (text.find(':') != std::string::npos) {
        double a = 0, b = 0, step = 0;
        char extra = 0;
        if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &a, &b, &step, &extra) != 3)
            fail("expected start:stop:step");
        if (!(step > 0.0) || b < a) fail("need step > 0 and stop >= start");
        for (double v = a; v <= b + 1e-12; v += step) grid.push_back(v);
    } else {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                grid.push_back(std::stod(item));
            } catch (const std::exception&) {
                fail("bad number '" + item + "'");
            }
        }
    }
    if (grid.empty()) fail("empty grid");
    return grid;
}

rk::BenchConfig make_bench_config(const CommonOpts& c, const BenchOpts& b) {
    rk::BenchConfig config;
    config.cv.steps = b.steps;
    config.tkf.omega = b.omega;
    config.tkf.nu = b.nu;
    config.tkf.tau = b.tau;
    config.tkf.n_iters = b.iters;
    config.runs = b.runs;
    config.master_seed = c.seed;
    config.filters = parse_filters(b.filters);
    config.em_restarts = b.restarts;
    config.jobs = c.jobs;
    config.validate();
    return config;
}

json bench_params_json(const CommonOpts& c, const BenchOpts& b) {
    return json{{"runs", b.runs},     {"steps", b.steps}, {"filters", b.filters},
                {"iters", b.iters},   {"omega", b.omega}, {"nu", b.nu},
                {"tau", b.tau},       {"restarts", b.restarts},
                {"seed", c.seed}};
}

json table_json(const rk::Table& table) {
    json data;
    data["columns"] = table.columns;
    data["rows"] = table.rows;
    return data;
}

void emit_table(const CommonOpts& c, const std::string& subcommand, json params,
                const rk::Table& table) {
    if (c.format == "json") {
        json doc;
        doc["experiment"] = {{"subcommand", subcommand},
                             {"version", rk::kVersion},
                             {"parameters", std::move(params)}};
        doc["data"] = table_json(table);
        rk::write_text_file(c.out, doc.dump(2) + "\n");
    } else {
        rk::write_text_file(c.out, rk::to_csv(table));
    }
}

void print_summary(const CommonOpts& c, const std::string& text) {
    if (c.quiet || text.empty()) return;
    std::cerr << text;
}

std::string divergence_summary(const std::vector<rk::SweepPoint>& points) {
    std::map<rk::FilterKind, int> total;
    int fallbacks = 0;
    for (const auto& p : points) {
        for (const auto& [kind, n] : p.diverged) total[kind] += n;
        fallbacks += p.gmm_fallbacks;
    }
    std::string out;
    for (const auto& [kind, n] : total)
        if (n > 0)
            out += std::string(rk::filter_name(kind)) + ": " + std::to_string(n) +
                   " diverged run(s) excluded from the mean\n";
    if (fallbacks > 0)
        out += "tgkf: " + std::to_string(fallbacks) +
               " run(s) fell back to the nominal covariance (degenerate GMM fit)\n";
    return out;
}

// ---- subcommand drivers ----

int run_track(const CommonOpts& c, const BenchOpts& b, double p_gauss, double var_small,
              double var_big, const std::string& trajectory_out) {
    rk::BenchConfig config = make_bench_config(c, b);
    const rk::NoiseModel noise = rk::NoiseModel::make_mixture(p_gauss, var_small, var_big);
    const std::vector<rk::RunResult> results = rk::run_batch(config, noise, 0);

    rk::Table table;
    table.columns.push_back("step");
    std::vector<std::pair<rk::FilterKind, rk::RmseSeries>> series;
    for (rk::FilterKind kind : config.filters) {
        table.columns.push_back(std::string("rmse_") + rk::filter_name(kind));
        series.emplace_back(kind, rk::rmse_curve(results, kind));
    }
    for (int k = 0; k < b.steps; ++k) {
        std::vector<double> row{static_cast<double>(k + 1)};
        for (const auto& [kind, s] : series) row.push_back(s.rmse[static_cast<std::size_t>(k)]);
        table.add_row(std::move(row));
    }

    json params = bench_params_json(c, b);
    params["p_gauss"] = p_gauss;
    params["var_small"] = var_small;
    params["var_big"] = var_big;
    emit_table(c, "track", params, table);

    if (!trajectory_out.empty()) {
        rk::Table traj;
        traj.columns = {"step", "truth_x", "truth_y", "meas_x", "meas_y"};
        for (rk::FilterKind kind : config.filters) {
            traj.columns.push_back(std::string(rk::filter_name(kind)) + "_x");
            traj.columns.push_back(std::string(rk::filter_name(kind)) + "_y");
        }
        const rk::RunResult& run0 = results.front();
        for (int k = 0; k < b.steps; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            std::vector<double> row{static_cast<double>(k + 1),
                                    run0.trajectory.truth[ks][0], run0.trajectory.truth[ks][1],
                                    run0.trajectory.measurements[ks][0],
                                    run0.trajectory.measurements[ks][1]};
            for (rk::FilterKind kind : config.filters) {
                const auto& est = run0.filters.at(kind).estimates[ks];
                row.push_back(est[0]);
                row.push_back(est[1]);
            }
            traj.add_row(std::move(row));
        }
        rk::write_text_file(trajectory_out, rk::to_csv(traj));
    }

    std::string summary;
    int fallbacks = 0;
    for (const auto& [kind, s] : series) {
        summary += std::string("rmse_") + rk::filter_name(kind) + " time-avg " +
                   rk::format_double(s.time_average());
        if (s.n_diverged > 0)
            summary += " (" + std::to_string(s.n_diverged) + " diverged run(s) excluded)";
        summary += "\n";
    }
    for (const auto& run : results)
        if (run.filters.count(rk::FilterKind::tgkf) &&
            run.filters.at(rk::FilterKind::tgkf).gmm_fallback)
            ++fallbacks;
    if (fallbacks > 0)
        summary += "tgkf: " + std::to_string(fallbacks) +
                   " run(s) fell back to the nominal covariance (degenerate GMM fit)\n";
    print_summary(c, summary);
    return 0;
}

int run_sweep(const CommonOpts& c, const BenchOpts& b, const std::string& subcommand,
              const std::string& axis, const std::vector<rk::SweepPoint>& points,
              json params) {
    rk::Table table;
    table.columns.push_back(axis);
    const std::vector<rk::FilterKind> filters =
        parse_filters(b.filters);
    for (rk::FilterKind kind : filters)
        table.columns.push_back(std::string("rmse_") + rk::filter_name(kind));
    for (const auto& p : points) {
        std::vector<double> row{p.x};
        for (rk::FilterKind kind : filters) row.push_back(p.avg_rmse.at(kind));
        table.add_row(std::move(row));
    }
    emit_table(c, subcommand, std::move(params), table);
    print_summary(c, divergence_summary(points));
    return 0;
}

int run_weight_demo_cmd(const CommonOpts& c, const rk::WeightDemoConfig& demo) {
    const rk::WeightDemoResult result = rk::run_weight_demo(demo);
    rk::Table table;
    table.columns = {"step", "a_p", "a_r"};
    for (std::size_t k = 0; k < result.a_p.size(); ++k)
        table.add_row({static_cast<double>(k + 1), result.a_p[k], result.a_r[k]});
    json params{{"seed", demo.seed},
                {"gauss_steps", demo.gauss_steps},
                {"impulse_steps", demo.impulse_steps},
                {"gauss_var", demo.gauss_var},
                {"impulse_var", demo.impulse_var},
                {"process_var", demo.process_var},
                {"window", demo.window}};
    emit_table(c, "weight-demo", params, table);
    print_summary(c, "mean a_p (gaussian segment) " +
                         rk::format_double(result.mean_a_p_gauss) +
                         "\nmedian a_p (impulsive segment) " +
                         rk::format_double(result.median_a_p_impulse) + "\n");
    return 0;
}

json matrix_json(const rk::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const rk::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

int run_gmm_fit(const CommonOpts& c, const std::string& input, int restarts, int max_iters,
                double tol) {
    if (c.format == "csv")
        throw CLI::ValidationError("--format", "gmm-fit emits a JSON document");
    const std::vector<rk::VectorXd> samples = rk::read_vectors_csv(input);
    rk::EmSettings settings;
    settings.max_iters = max_iters;
    settings.tol = tol;
    settings.n_restarts = restarts;
    settings.seed = c.seed;
    const rk::NoiseMixtureEstimate estimate = rk::fit_gmm2(samples, settings);

    json doc;
    doc["weight_s"] = estimate.weight_s;
    doc["weight_b"] = estimate.weight_b;
    doc["mean_s"] = vector_json(estimate.mean_s);
    doc["mean_b"] = vector_json(estimate.mean_b);
    doc["cov_s"] = matrix_json(estimate.cov_s);
    doc["cov_b"] = matrix_json(estimate.cov_b);
    doc["tg"] = rk::tg_factor(estimate);
    doc["r_effective"] = matrix_json(rk::effective_covariance(estimate));
    doc["log_likelihood"] = estimate.log_likelihood;
    doc["n_samples"] = samples.size();
    doc["seed"] = c.seed;
    doc["version"] = rk::kVersion;
    rk::write_text_file(c.out, doc.dump(2) + "\n");
    return 0;
}

// Rewrites argv so values from --config become flags placed before the
// explicit ones; explicit flags then take precedence (TakeLast policy).
std::vector<std::string> apply_config_file(CLI::App& app,
                                           const std::vector<std::string>& args) {
    std::string subcommand;
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (subcommand.empty() && !args[i].empty() && args[i][0] != '-') {
            subcommand = args[i];
            continue;
        }
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (config_path.empty() || subcommand.empty()) return args;

    CLI::App* sub = app.get_subcommand_no_throw(subcommand);
    if (sub == nullptr) return args;  // let CLI11 report the unknown subcommand

    std::ifstream file(config_path);
    if (!file) throw CLI::FileError("cannot read config file: " + config_path);
    json doc;
    try {
        doc = json::parse(file);
    } catch (const json::exception& e) {
        throw CLI::FileError(config_path + ": " + e.what());
    }
    if (!doc.is_object()) throw CLI::FileError(config_path + ": expected a JSON object");

    std::vector<std::string> tokens;
    for (const auto& [key, value] : doc.items()) {
        if (key == "config")
            throw CLI::FileError(config_path + ": 'config' cannot be set from a config file");
        const std::string flag = "--" + key;
        const CLI::Option* opt = nullptr;
        try {
            opt = sub->get_option(flag);
        } catch (const CLI::OptionNotFound&) {
            throw CLI::FileError(config_path + ": unknown key '" + key + "' for subcommand " +
                                 subcommand);
        }
        if (opt->get_expected_min() == 0) {  // flag, e.g. quiet
            if (value.is_boolean() && value.get<bool>()) tokens.push_back(flag);
            else if (!value.is_boolean())
                throw CLI::FileError(config_path + ": key '" + key + "' expects a boolean");
            continue;
        }
        tokens.push_back(flag);
        if (value.is_string()) tokens.push_back(value.get<std::string>());
        else tokens.push_back(value.dump());
    }

    std::vector<std::string> out;
    bool inserted = false;
    for (const auto& arg : args) {
        out.push_back(arg);
        if (!inserted && arg == subcommand) {
            out.insert(out.end(), tokens.begin(), tokens.end());
            inserted = true;
        }
    }
    return out;
}

std::string error_prefix() {
    const bool color = isatty(fileno(stderr)) && std::getenv("NO_COLOR") == nullptr;
    return color ? "\033[31merror:\033[0m " : "error: ";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust-kalman: KF / TKF / TGKF state-estimation benchmarks"};
    app.require_subcommand(1);

    // track
    CommonOpts track_common;
    BenchOpts track_bench;
    double track_p_gauss = 0.9, track_var_small = 0.1, track_var_big = 10.0;
    std::string track_trajectory_out;
    CLI::App* track = app.add_subcommand(
        "track", "per-step RMSE of the selected filters under mixture noise");
    add_common(track, track_common);
    add_bench(track, track_bench);
    track->add_option("--p-gauss", track_p_gauss, "probability of the nominal component")
        ->capture_default_str();
    track->add_option("--var-small", track_var_small,
                      "nominal component variance (units^2, times I2)")
        ->capture_default_str();
    track->add_option("--var-big", track_var_big,
                      "impulsive component variance (units^2, times I2)")
        ->capture_default_str();
    track->add_option("--trajectory-out", track_trajectory_out,
                      "also write the first run's trajectory CSV here");

    // weight-demo
    CommonOpts demo_common;
    rk::WeightDemoConfig demo;
    CLI::App* wd = app.add_subcommand(
        "weight-demo", "confidence weights of the scalar KF across a noise regime change");
    add_common(wd, demo_common);
    wd->add_option("--gauss-steps", demo.gauss_steps, "length of the Gaussian segment")
        ->capture_default_str();
    wd->add_option("--impulse-steps", demo.impulse_steps, "length of the impulsive segment")
        ->capture_default_str();
    wd->add_option("--gauss-var", demo.gauss_var, "Gaussian segment variance (units^2)")
        ->capture_default_str();
    wd->add_option("--impulse-var", demo.impulse_var, "impulsive segment variance (units^2)")
        ->capture_default_str();
    wd->add_option("--process-var", demo.process_var, "process noise variance (units^2)")
        ->capture_default_str();
    wd->add_option("--window", demo.window, "sliding window for the noise variance estimate")
        ->capture_default_str();

    // sweep-gauss-pct
    CommonOpts sg_common;
    BenchOpts sg_bench;
    std::string sg_grid = "0.1:0.9:0.1";
    double sg_var_small = 0.1, sg_var_big = 10.0;
    CLI::App* sg = app.add_subcommand("sweep-gauss-pct",
                                      "time-averaged RMSE versus the Gaussian proportion");
    add_common(sg, sg_common);
    add_bench(sg, sg_bench);
    sg->add_option("--grid", sg_grid, "p_gauss grid: start:stop:step or comma list")
        ->capture_default_str();
    sg->add_option("--var-small", sg_var_small, "nominal component variance (units^2)")
        ->capture_default_str();
    sg->add_option("--var-big", sg_var_big, "impulsive component variance (units^2)")
        ->capture_default_str();

    // sweep-stddev
    CommonOpts sd_common;
    BenchOpts sd_bench;
    std::string sd_grid = "1,2,4,6,8,10";
    double sd_p_gauss = 0.9, sd_var_small = 0.1;
    CLI::App* sd = app.add_subcommand(
        "sweep-stddev", "time-averaged RMSE versus the impulsive component's std dev");
    add_common(sd, sd_common);
    add_bench(sd, sd_bench);
    sd->add_option("--sigma-grid", sd_grid, "impulsive std-dev grid (units)")
        ->capture_default_str();
    sd->add_option("--p-gauss", sd_p_gauss, "probability of the nominal component")
        ->capture_default_str();
    sd->add_option("--var-small", sd_var_small, "nominal component variance (units^2)")
        ->capture_default_str();

    // alpha-stable
    CommonOpts as_common;
    BenchOpts as_bench;
    std::string as_grid = "1.2,1.4,1.6,1.8,2.0";
    double as_scale = 0.5;
    CLI::App* as = app.add_subcommand("alpha-stable",
                                      "time-averaged RMSE under symmetric alpha-stable noise");
    add_common(as, as_common);
    add_bench(as, as_bench);
    as->add_option("--alpha-grid", as_grid, "stability index grid, each in (0,2]")
        ->capture_default_str();
    as->add_option("--stable-scale", as_scale, "per-coordinate scale (units)")
        ->capture_default_str();

    // gmm-fit
    CommonOpts gf_common;
    gf_common.format = "json";
    std::string gf_input;
    int gf_restarts = 5, gf_max_iters = 200;
    double gf_tol = 1e-9;
    CLI::App* gf = app.add_subcommand(
        "gmm-fit", "fit the two-component noise mixture to a CSV of samples");
    add_common(gf, gf_common);
    gf->add_option("--input", gf_input, "CSV of noise samples, one vector per row")
        ->required();
    gf->add_option("--restarts", gf_restarts, "EM restarts")->capture_default_str();
    gf->add_option("--max-iters", gf_max_iters, "EM iteration cap")->capture_default_str();
    gf->add_option("--tol", gf_tol, "relative log-likelihood convergence threshold")
        ->capture_default_str();

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = apply_config_file(app, args);
        // CLI11 parses right-to-left over a reversed vector
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << error_prefix() << e.what() << "\n";
        return 1;
    }

    try {
        if (track->parsed()) {
            if (!(track_p_gauss >= 0.0 && track_p_gauss <= 1.0))
                throw CLI::ValidationError("--p-gauss", "must lie in [0,1]");
            return run_track(track_common, track_bench, track_p_gauss, track_var_small,
                             track_var_big, track_trajectory_out);
        }
        if (wd->parsed()) {
            demo.seed = demo_common.seed;
            return run_weight_demo_cmd(demo_common, demo);
        }
        if (sg->parsed()) {
            const std::vector<double> grid = parse_grid(sg_grid, "--grid");
            for (double p : grid)
                if (!(p >= 0.0 && p <= 1.0))
                    throw CLI::ValidationError("--grid", "p_gauss values must lie in [0,1]");
            rk::BenchConfig config = make_bench_config(sg_common, sg_bench);
            json params = bench_params_json(sg_common, sg_bench);
            params["grid"] = sg_grid;
            params["var_small"] = sg_var_small;
            params["var_big"] = sg_var_big;
            return run_sweep(sg_common, sg_bench, "sweep-gauss-pct", "p_gauss",
                             rk::sweep_gauss_pct(config, grid, sg_var_small, sg_var_big),
                             std::move(params));
        }
        if (sd->parsed()) {
            const std::vector<double> grid = parse_grid(sd_grid, "--sigma-grid");
            for (double s : grid)
                if (!(s > 0.0))
                    throw CLI::ValidationError("--sigma-grid", "std devs must be positive");
            rk::BenchConfig config = make_bench_config(sd_common, sd_bench);
            json params = bench_params_json(sd_common, sd_bench);
            params["sigma_grid"] = sd_grid;
            params["p_gauss"] = sd_p_gauss;
            params["var_small"] = sd_var_small;
            return run_sweep(sd_common, sd_bench, "sweep-stddev", "sigma_b",
                             rk::sweep_stddev(config, grid, sd_p_gauss, sd_var_small),
                             std::move(params));
        }
        if (as->parsed()) {
            const std::vector<double> grid = parse_grid(as_grid, "--alpha-grid");
            for (double a : grid)
                if (!(a > 0.0 && a <= 2.0))
                    throw CLI::ValidationError("--alpha-grid", "alpha must lie in (0,2]");
            if (!(as_scale > 0.0))
                throw CLI::ValidationError("--stable-scale", "must be positive");
            rk::BenchConfig config = make_bench_config(as_common, as_bench);
            json params = bench_params_json(as_common, as_bench);
            params["alpha_grid"] = as_grid;
            params["stable_scale"] = as_scale;
            return run_sweep(as_common, as_bench, "alpha-stable", "alpha",
                             rk::sweep_alpha_stable(config, grid, as_scale),
                             std::move(params));
        }
        if (gf->parsed()) {
            return run_gmm_fit(gf_common, gf_input, gf_restarts, gf_max_iters, gf_tol);
        }
    } catch (const CLI::Error& e) {
        std::cerr << error_prefix() << e.what() << "\n";
        return 1;
    } catch (const rk::Error& e) {
        std::cerr << error_prefix() << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << error_prefix() << e.what() << "\n";
        return 2;
    }
    return 0;
}
