// Experiment runner: `run` executes a config, `table1` reproduces the
// benchmark grid, `verify` runs the invariant suites, `oracle` prints the
// deterministic ground-truth derivative for a config.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "leibniz/config.hpp"
#include "leibniz/errors.hpp"
#include "leibniz/oracle.hpp"
#include "leibniz/report.hpp"
#include "leibniz/verify.hpp"

namespace {

using namespace leibniz;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitEstimator = 3;
constexpr int kExitNoOracle = 4;

std::uint64_t effective_seed(std::uint64_t from_config, bool seed_flag_set,
                             std::uint64_t seed_flag) {
    std::uint64_t seed = from_config;
    if (seed_flag_set) seed = seed_flag;
    if (const char* env = std::getenv("LEIBNIZ_SEED")) seed = std::strtoull(env, nullptr, 10);
    return seed;
}

EstimatorConfig estimator_config(const RunConfig& cfg) {
    EstimatorConfig e;
    e.fd_delta = cfg.fd_delta;
    e.n_reps = cfg.n_reps;
    e.surface_reps = cfg.surface_reps;
    e.seed = cfg.seed;
    e.crn = cfg.crn;
    e.workers = cfg.workers;
    return e;
}

std::optional<double> oracle_value(const RunConfig& cfg) {
    const std::string& n = cfg.model.name;
    if (n == "log_inventory")
        return truth_log_inventory(build_joint(cfg.model.distribution), cfg.model.q, cfg.theta);
    if (n == "max_threshold")
        return truth_max_threshold(build_joint(cfg.model.distribution), cfg.theta);
    if (n == "american_option" && static_cast<int>(cfg.model.option.dates.size()) == 2)
        return truth_option_2period(build_option(cfg.model.option));
    return std::nullopt;
}

DerivativeEstimate dispatch(const RunConfig& cfg, const std::string& est) {
    const EstimatorConfig ec = estimator_config(cfg);
    const std::string& n = cfg.model.name;
    if (n == "american_option") {
        const AmericanOptionModel m = build_option(cfg.model.option);
        if (est == "fd") return option_fd_estimate(m, cfg.model.option.k_index, ec);
        return option_threshold_derivative(m, cfg.model.option.k_index, ec);
    }
    if (n == "gg1") {
        const GG1Model m = build_gg1(cfg.model.gg1);
        if (est == "fd") return gg1_fd_estimate(m, cfg.theta, ec);
        return dpa_derivative(m, cfg.theta, ec);
    }
    const Model m = build_model(cfg.model);
    if (est == "fd") return fd_estimate(m, cfg.theta, ec);
    if (est == "leibniz_divergence") return leibniz_divergence_estimate(m, cfg.theta, ec);
    if (est == "leibniz_integral") return leibniz_integral_estimate(m, cfg.theta, ec);
    if (est == "ipa_lr") return ipa_lr_estimate(m, cfg.theta, ec);
    throw ConfigError("estimators: unknown estimator '" + est + "'");
}

std::string model_label(const RunConfig& cfg) { return cfg.model.name; }

std::string distribution_for_row(const RunConfig& cfg) {
    const std::string& n = cfg.model.name;
    if (n == "american_option") return "gbm";
    if (n == "gg1") return cfg.model.gg1.interarrival_kind + "_arrivals";
    if (n == "san") return "independent_edges";
    return distribution_label(cfg.model.distribution);
}

void write_output(const RunConfig& cfg, const std::vector<ResultRow>& rows) {
    if (cfg.output_path.empty()) return;
    std::ofstream out(cfg.output_path, std::ios::binary);
    if (!out) throw ConfigError("output_path: cannot open '" + cfg.output_path + "'");
    out << (cfg.format == "json" ? to_json(rows) : to_csv(rows));
}

int cmd_run(RunConfig cfg) {
    std::vector<ResultRow> rows;
    std::vector<double> runtimes;
    std::optional<double> oracle;
    if (cfg.with_oracle) {
        try {
            oracle = oracle_value(cfg);
        } catch (const std::exception& e) {
            std::cerr << "oracle unavailable: " << e.what() << "\n";
        }
    }
    for (const auto& est : cfg.estimators) {
        DerivativeEstimate de;
        try {
            de = dispatch(cfg, est);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            std::cerr << "estimator '" << est << "' failed: " << e.what() << "\n";
            return kExitEstimator;
        }
        ResultRow r;
        r.model = model_label(cfg);
        r.distribution = distribution_for_row(cfg);
        r.estimator = de.estimator_id;
        r.theta = cfg.theta;
        r.mean = de.mean;
        r.std_error = de.std_error;
        r.n_reps = de.n_reps;
        r.runtime_s = 0.0;  // machine outputs stay byte-reproducible
        r.unstable = de.unstable;
        r.rejected = de.rejected_samples;
        r.oracle = oracle;
        r.seed = cfg.seed;
        rows.push_back(r);
        runtimes.push_back(de.runtime_s);
    }
    write_output(cfg, rows);
    std::cout << summary_table(rows, runtimes);
    return kExitOk;
}

RunConfig table1_config(int which, std::uint64_t seed, long reps) {
    RunConfig cfg;
    cfg.model.name = "log_inventory";
    cfg.model.q = 0.5;
    cfg.theta = 1.0;
    cfg.estimators = {"fd", "leibniz_integral", "leibniz_divergence"};
    cfg.n_reps = reps;
    cfg.surface_reps = reps;
    cfg.seed = seed;
    cfg.with_oracle = true;
    DistributionConfig& d = cfg.model.distribution;
    auto expm = [] {
        MarginalConfig m;
        m.kind = "exponential";
        m.rate = 1.0;
        return m;
    };
    auto gam = [](double shape) {
        MarginalConfig m;
        m.kind = "gamma";
        m.shape = shape;
        return m;
    };
    switch (which) {
        case 0:
            d.copula = "independence";
            d.marginals = {expm(), expm()};
            break;
        case 1:
            d.copula = "fgm";
            d.alpha = 1.0;
            d.marginals = {expm(), expm()};
            break;
        case 2:
            d.bivariate_lognormal = true;
            d.rho = 0.1;
            break;
        case 3:
            d.bivariate_lognormal = true;
            d.rho = 0.9;
            break;
        case 4:
            d.copula = "clayton";
            d.alpha = 1.0;
            d.marginals = {gam(0.5), gam(0.5)};
            break;
        case 5:
            d.copula = "clayton";
            d.alpha = 1.0;
            d.marginals = {gam(1.0), gam(1.0)};
            break;
        case 6:
            d.copula = "clayton";
            d.alpha = 1.0;
            d.marginals = {gam(2.0), gam(2.0)};
            break;
    }
    return cfg;
}

int cmd_table1(std::uint64_t seed, long reps, const std::string& out_path, int workers) {
    std::vector<ResultRow> rows;
    std::vector<double> runtimes;
    const auto t0 = std::chrono::steady_clock::now();
    for (int which = 0; which < 7; ++which) {
        RunConfig cfg = table1_config(which, seed, reps);
        cfg.workers = workers;
        double oracle = 0.0;
        try {
            oracle = truth_log_inventory(build_joint(cfg.model.distribution), cfg.model.q,
                                         cfg.theta);
        } catch (const std::exception& e) {
            std::cerr << "oracle failed: " << e.what() << "\n";
            return kExitEstimator;
        }
        for (const auto& est : cfg.estimators) {
            DerivativeEstimate de;
            try {
                de = dispatch(cfg, est);
            } catch (const std::exception& e) {
                std::cerr << "estimator '" << est << "' failed: " << e.what() << "\n";
                return kExitEstimator;
            }
            ResultRow r;
            r.model = "log_inventory";
            r.distribution = distribution_for_row(cfg);
            r.estimator = de.estimator_id;
            r.theta = cfg.theta;
            r.mean = de.mean;
            r.std_error = de.std_error;
            r.n_reps = de.n_reps;
            r.unstable = de.unstable;
            r.rejected = de.rejected_samples;
            r.oracle = oracle;
            r.seed = seed;
            rows.push_back(r);
            runtimes.push_back(de.runtime_s);
        }
    }
    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            std::cerr << "cannot open '" << out_path << "'\n";
            return kExitConfig;
        }
        out << to_csv(rows);
    }
    std::cout << summary_table(rows, runtimes);
    std::cout << "full grid runtime: " << total << " s\n";
    return kExitOk;
}

int cmd_verify(bool verbose, std::uint64_t seed) {
    const auto results = run_verification(seed);
    bool all = true;
    for (const auto& r : results) {
        all = all && r.pass;
        if (verbose || !r.pass)
            std::cout << (r.pass ? "[ ok ] " : "[FAIL] ") << r.name << "  max_err=" << r.max_err
                      << "  " << r.detail << "\n";
    }
    std::cout << verification_report_json(results);
    std::cout << (all ? "verify: all invariants hold\n" : "verify: FAILURES present\n");
    return all ? kExitOk : kExitVerifyFailed;
}

int cmd_oracle(const RunConfig& cfg) {
    const std::string& n = cfg.model.name;
    try {
        if (n == "log_inventory") {
            const auto rep =
                truth_log_inventory_report(build_joint(cfg.model.distribution), cfg.model.q,
                                           cfg.theta);
            std::cout << "derivative " << format_double(rep.derivative) << "\n"
                      << "quadrature backend gap " << format_double(rep.backend_gap)
                      << " (Gauss-Legendre vs adaptive Simpson)\n"
                      << "fd delta " << rep.fd_delta << ", E(psi) at theta+-delta: "
                      << format_double(rep.value_plus) << " / "
                      << format_double(rep.value_minus) << "\n";
            return kExitOk;
        }
        if (n == "max_threshold") {
            std::cout << "derivative "
                      << format_double(
                             truth_max_threshold(build_joint(cfg.model.distribution), cfg.theta))
                      << "\n";
            return kExitOk;
        }
        if (n == "american_option") {
            if (static_cast<int>(cfg.model.option.dates.size()) != 2) {
                std::cerr << "oracle: only the two-period option oracle ships\n";
                return kExitNoOracle;
            }
            std::cout << "derivative "
                      << format_double(truth_option_2period(build_option(cfg.model.option)))
                      << "\n";
            return kExitOk;
        }
    } catch (const NonConvergent& e) {
        std::cerr << "oracle did not converge: " << e.what() << "\n";
        return kExitEstimator;
    }
    std::cerr << "oracle: no deterministic oracle for model '" << n << "'\n";
    return kExitNoOracle;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic derivative estimation for discontinuous sample performances"};
    app.require_subcommand(1);

    std::string config_path, out_path, format;
    std::uint64_t seed_flag = 0;
    bool seed_set = false;
    long reps_flag = 0;
    int workers = 0;
    bool verbose = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed_flag, "seed override")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--reps", reps_flag, "replication override");
        sub->add_option("--workers", workers, "worker threads (0 = hardware)");
        sub->add_option("--out", out_path, "output path");
    };

    CLI::App* run = app.add_subcommand("run", "run estimators from a config file");
    run->add_option("--config", config_path, "config file (JSON)")->required();
    run->add_option("--format", format, "csv|json override");
    add_common(run);

    CLI::App* table1 = app.add_subcommand("table1", "reproduce the benchmark grid");
    add_common(table1);

    CLI::App* verify = app.add_subcommand("verify", "run every invariant suite");
    verify->add_flag("-v,--verbose", verbose, "print every invariant");
    add_common(verify);

    CLI::App* oracle = app.add_subcommand("oracle", "print the ground-truth derivative");
    oracle->add_option("--config", config_path, "config file (JSON)")->required();
    add_common(oracle);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            RunConfig cfg = load_run_config(config_path);
            if (seed_set) cfg.seed = seed_flag;
            cfg.seed = effective_seed(cfg.seed, false, 0);
            if (reps_flag > 0) cfg.n_reps = reps_flag;
            if (workers > 0) cfg.workers = workers;
            if (!out_path.empty()) cfg.output_path = out_path;
            if (!format.empty()) {
                if (format != "csv" && format != "json") {
                    std::cerr << "format: must be 'csv' or 'json'\n";
                    return kExitConfig;
                }
                cfg.format = format;
            }
            return cmd_run(std::move(cfg));
        }
        if (table1->parsed()) {
            const std::uint64_t seed = effective_seed(seed_set ? seed_flag : 123456789ULL,
                                                      false, 0);
            return cmd_table1(seed, reps_flag > 0 ? reps_flag : 10000, out_path, workers);
        }
        if (verify->parsed()) {
            const std::uint64_t seed = effective_seed(seed_set ? seed_flag : 20240501ULL,
                                                      false, 0);
            return cmd_verify(verbose, seed);
        }
        if (oracle->parsed()) {
            RunConfig cfg = load_run_config(config_path);
            return cmd_oracle(cfg);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEstimator;
    }
    return kExitOk;
}
