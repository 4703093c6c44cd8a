#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "leibniz/estimators.hpp"
#include "leibniz/models.hpp"

namespace leibniz {

struct MarginalConfig {
    std::string kind;  // exponential | gamma | lognormal | uniform01 | normal | ramp
    double rate = 1.0;
    double shape = 1.0;
    double mu = 0.0;
    double sigma = 1.0;
};

struct DistributionConfig {
    std::string copula = "independence";  // independence | clayton | fgm | gaussian
    double alpha = 1.0;                   // clayton / fgm parameter
    double rho = 0.0;                     // gaussian parameter
    std::vector<MarginalConfig> marginals;
    bool bivariate_lognormal = false;  // shorthand: gaussian copula + lognormal(0,1)
};

struct OptionConfig {
    double s0 = 100.0, strike = 100.0, rate = 0.05, sigma = 0.2;
    std::vector<double> dividends, dates, thresholds;
    int k_index = 1;  // which threshold the derivative targets (1-based)
};

struct GG1Config {
    int n_customers = 5;
    // service presets: const(value) or affine(a + b*x + c*theta)
    std::string plus_kind = "affine", minus_kind = "affine";
    double plus_a = 0.6, plus_b = 0.2, plus_c = 0.2;
    double minus_a = 0.4, minus_b = 0.1, minus_c = -0.1;
    std::string interarrival_kind = "exponential";  // exponential | deterministic
    double interarrival_param = 1.0;
    std::string performance = "mean_wait";  // mean_wait | total_wait | mean_system_time
};

struct ModelConfig {
    std::string name;  // max_threshold | log_inventory | smooth_sum_log | san | american_option | gg1
    double q = 0.5;
    DistributionConfig distribution;
    // SAN
    std::vector<MarginalConfig> edges;
    std::vector<std::vector<int>> incidence;
    std::vector<int> transform_edges;
    bool san_default_bridge = true;
    OptionConfig option;
    GG1Config gg1;
};

struct RunConfig {
    ModelConfig model;
    double theta = 1.0;
    std::vector<std::string> estimators;
    long n_reps = 10000;
    long surface_reps = -1;
    double fd_delta = 0.02;
    bool crn = true;
    std::uint64_t seed = 123456789;
    int workers = 0;
    std::string output_path;
    std::string format = "csv";  // csv | json
    bool with_oracle = false;
};

// Parse + validate; throws ConfigError naming the offending field.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string serialize_run_config(const RunConfig& cfg);

// Construction from validated configs.
Marginal build_marginal(const MarginalConfig& c);
JointDensity2 build_joint(const DistributionConfig& c);
Model build_model(const ModelConfig& c);  // 2D models and SAN
AmericanOptionModel build_option(const OptionConfig& c);
GG1Model build_gg1(const GG1Config& c);

// Rejects unsupported model/estimator pairs with a ConfigError.
void validate_pairing(const ModelConfig& m, const std::string& estimator);

std::string distribution_label(const DistributionConfig& c);

}  // namespace leibniz
