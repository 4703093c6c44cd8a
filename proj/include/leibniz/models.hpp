#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "leibniz/distributions.hpp"
#include "leibniz/transforms.hpp"

namespace leibniz {

// Benchmark problem: input law, change of variables, domain chart, outer
// performance and the admissible theta interval, bundled for the estimators.
struct Model {
    std::string name;
    std::string distribution_id;
    int dim = 2;

    std::optional<JointDensity2> joint;      // bivariate models
    std::vector<Marginal> product_marginals;  // SAN edges (independent)

    std::function<Vec(RandomStream&)> sample;
    std::function<Vec(const Vec&)> score_x;

    std::optional<Transform> transform;  // integral-estimator route
    std::optional<DomainChart> chart;    // divergence-estimator route

    // Indicator map and box used for chart/indicator equivalence checks.
    std::function<Vec(const Vec&, double)> indicator_g;
    RegionU region;

    std::function<double(const Vec&, double)> performance;  // psi(x, theta)

    // Outer function phi on y = g(x, theta). For indicator models phi is the
    // box indicator; smooth models carry a gradient.
    std::function<double(const Vec&)> phi_y;
    bool phi_smooth = false;
    std::function<Vec(const Vec&)> phi_grad_y;

    // Inner smooth factor of Theorem-1-style performances; identically one
    // for every built-in.
    std::function<double(const Vec&, double)> varphi;
    std::function<double(const Vec&, double)> dtheta_varphi;
    std::function<Vec(const Vec&, double)> gradx_varphi;

    Interval theta_range;
    double q = 0.0;
    bool density_theta_free = true;

    // Finite faces of the support over the transformed coordinates.
    struct Face {
        int coord = 0;
        bool upper = false;
        double endpoint = 0.0;
    };
    std::vector<Face> finite_faces;
};

Model model_max_threshold(JointDensity2 d);
Model model_log_inventory(JointDensity2 d, double q);
// Smooth-phi companion of the log-shift transform: psi = g1 + g2, no
// indicator. Used by the IPA-LR identity checks and the ipa_lr estimator.
Model model_smooth_sum_log(JointDensity2 d);

struct SanSpec {
    std::vector<Marginal> edges;
    std::vector<std::vector<int>> incidence;  // one row per path, 0/1 entries
    std::vector<int> transform_edges;         // square sub-incidence columns
};

// psi = prod_i 1{0 <= sum_k a_{ik} x_k <= theta} with the square transform
// g_i = p_i(x)/theta on the chosen edges. Throws RankDeficientIncidence.
Model model_san(const SanSpec& spec);
SanSpec san_bridge_default();  // 5 edges, 3 source-sink paths

// American call paying fixed cash dividends, threshold early exercise.
struct AmericanOptionModel {
    double s0 = 100.0;
    double strike = 100.0;
    double rate = 0.05;
    double sigma = 0.2;
    std::vector<double> dividends;   // D_i at t_i, i = 1..n-1
    std::vector<double> dates;       // t_1 < ... < t_n = T
    std::vector<double> thresholds;  // s_i, i = 1..n-1

    int n_periods() const { return static_cast<int>(dates.size()); }
    void validate() const;  // throws InvalidThresholds
};

// GBM step and its inverse/derivative in the innovation argument.
double gbm_step(const AmericanOptionModel& m, double x, double s, double dt);
double gbm_step_inverse(const AmericanOptionModel& m, double y, double s, double dt);
double gbm_step_dx(const AmericanOptionModel& m, double x, double s, double dt);

// Present value at t_i of the dividends not yet paid (including D_i).
double option_pv_dividends(const AmericanOptionModel& m, int i);

struct OptionBranch {
    int date = 0;            // 1-based exercise date index
    double s_tilde = 0.0;    // overrides the post-dividend clean price at `date`
    bool exercised = false;  // force exercise (true) or continuation (false)
};

// Discounted payoff J_T from the innovation vector; `branch` optionally
// overrides the path at one date. Branching at the true sampled clean price
// reproduces the unbranched payoff bit for bit.
double option_payoff(const AmericanOptionModel& m, const std::vector<double>& x,
                     const OptionBranch* branch = nullptr);

// Single-server queue with admission-controlled service law.
struct GG1Model {
    int n_customers = 5;
    // service S(theta, x) switches between the two branches at x = theta
    std::function<double(double, double)> service_plus, service_minus;
    std::function<double(double, double)> dtheta_service_plus, dtheta_service_minus;
    std::function<double(RandomStream&)> interarrival;
    std::string interarrival_id;
    enum class Perf { MeanWait, TotalWait, MeanSystemTime } perf = Perf::MeanWait;
};

// Lindley recursion over the first n customers. `force_admit` >= 0 pins the
// admission branch of that customer (with x overridden to theta).
double gg1_performance(const GG1Model& m, double theta, const std::vector<double>& x,
                       const std::vector<double>& y, int override_customer = -1,
                       bool override_admit = false);

// Pathwise derivative of the performance in theta (service branches fixed).
double gg1_ipa_term(const GG1Model& m, double theta, const std::vector<double>& x,
                    const std::vector<double>& y);

}  // namespace leibniz
