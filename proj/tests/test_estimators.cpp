#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "leibniz/estimators.hpp"
#include "leibniz/oracle.hpp"

using namespace leibniz;

namespace {

Model indep_exp_inventory(double q = 0.5) {
    return model_log_inventory(
        make_joint(make_independence(), make_exponential(1.0), make_exponential(1.0)), q);
}

constexpr double kTruthIndepExp = -0.7157505194331503;  // independent quadrature
constexpr double kSurfaceIndepExp = -0.954572482030331;  // -2 (1 - e^{-(sqrt(e)-1)})

}  // namespace

TEST_CASE("replicate: constant path") {
    const auto est = replicate([](long, RandomStream&) { return 4.25; }, 100, 9, 0, "const");
    CHECK(est.mean == 4.25);
    CHECK(est.std_error == 0.0);
    CHECK(est.n_reps == 100);
}

TEST_CASE("replicate: bit-identical across reruns and worker counts") {
    auto path = [](long, RandomStream& rng) { return rng.normal() + rng.uniform(); };
    const auto a = replicate(path, 50000, 1234, 1, "p");
    const auto b = replicate(path, 50000, 1234, 8, "p");
    const auto c = replicate(path, 50000, 1234, 3, "p");
    CHECK(a.mean == b.mean);
    CHECK(a.mean == c.mean);
    CHECK(a.std_error == b.std_error);
    const auto a2 = replicate(path, 50000, 1234, 1, "p");
    CHECK(a.mean == a2.mean);
}

TEST_CASE("fd_estimate: theta-free performance differentiates to zero") {
    // q so large the indicator is one on every reachable draw
    const Model m = indep_exp_inventory(1e9);
    EstimatorConfig cfg;
    cfg.n_reps = 500;
    const auto est = fd_estimate(m, 1.0, cfg);
    CHECK(est.mean == 0.0);
    CHECK(est.std_error == 0.0);
}

TEST_CASE("fd_estimate: max threshold with uniform inputs") {
    const Model m = model_max_threshold(
        make_joint(make_independence(), make_uniform01(), make_uniform01()));
    EstimatorConfig cfg;
    cfg.n_reps = 10000;
    cfg.seed = 5150;
    const auto est = fd_estimate(m, 0.5, cfg);
    CHECK(std::abs(est.mean - 1.0) < 3.0 * est.std_error);
    CHECK_THROWS_AS(fd_estimate(m, 0.999, cfg), ThetaOutOfRange);
}

TEST_CASE("fd_estimate: crn off still unbiased") {
    const Model m = model_max_threshold(
        make_joint(make_independence(), make_uniform01(), make_uniform01()));
    EstimatorConfig cfg;
    cfg.n_reps = 40000;
    cfg.seed = 5151;
    cfg.crn = false;
    const auto est = fd_estimate(m, 0.5, cfg);
    CHECK(std::abs(est.mean - 1.0) < 3.0 * est.std_error);
    // independent draws at theta +- delta cost variance; CRN must beat them
    EstimatorConfig crn = cfg;
    crn.crn = true;
    CHECK(fd_estimate(m, 0.5, crn).std_error < est.std_error);
}

TEST_CASE("leibniz_volume_path closed form under independent exponentials") {
    const Model m = indep_exp_inventory();
    CHECK(leibniz_volume_path(m, Vec{0.1, 0.2}, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(leibniz_volume_path(m, Vec{3.0, 3.0}, 1.0) == 0.0);  // off-region draw
}

TEST_CASE("surface_term: lognormal faces vanish, no draws") {
    const Model m = model_log_inventory(make_bivariate_lognormal(0.9), 0.5);
    EstimatorConfig cfg;
    cfg.n_reps = 100;
    cfg.surface_reps = 100;
    const auto s = surface_term(m, 1.0, cfg);
    CHECK(s.value == 0.0);
    CHECK(s.std_error == 0.0);
    CHECK(s.conditional_draws == 0);
    for (const auto& f : s.faces) CHECK(f.kind == "vanishing");
}

TEST_CASE("surface_term: independent exponentials match the closed form") {
    const Model m = indep_exp_inventory();
    EstimatorConfig cfg;
    cfg.surface_reps = 20000;
    cfg.seed = 808;
    const auto s = surface_term(m, 1.0, cfg);
    CHECK(s.conditional_draws == 0);
    CHECK(std::abs(s.value - kSurfaceIndepExp) < 3.0 * s.std_error);
}

TEST_CASE("surface_term: Clayton point mass is deterministic") {
    const Model m = model_log_inventory(
        make_joint(make_clayton(1.0), make_gamma(1.0), make_gamma(1.0)), 0.5);
    EstimatorConfig cfg;
    cfg.surface_reps = 50;
    const auto s = surface_term(m, 1.0, cfg);
    // psi(0,0) = 1, s . e_i = 1, f_i(0) = 1, sign minus on both lower faces
    CHECK(s.value == -2.0);
    CHECK(s.std_error == 0.0);
    CHECK(s.conditional_draws == 0);
}

TEST_CASE("surface_term: FGM draws exactly 2 x surface_reps conditionals") {
    const Model m = model_log_inventory(
        make_joint(make_fgm(1.0), make_exponential(1.0), make_exponential(1.0)), 0.5);
    EstimatorConfig cfg;
    cfg.surface_reps = 1234;
    const auto s = surface_term(m, 1.0, cfg);
    CHECK(s.conditional_draws == 2 * 1234);
    CHECK(s.value < 0.0);
}

TEST_CASE("leibniz_integral_estimate: unbiased under independent exponentials") {
    const Model m = indep_exp_inventory();
    EstimatorConfig cfg;
    cfg.n_reps = 20000;
    cfg.seed = 90210;
    const auto est = leibniz_integral_estimate(m, 1.0, cfg);
    CHECK(std::abs(est.mean - kTruthIndepExp) < 3.0 * est.std_error);
    CHECK_FALSE(est.unstable);
    CHECK(est.conditional_draws == 0);
}

TEST_CASE("divergence and integral estimators agree") {
    const Model m = model_log_inventory(
        make_joint(make_fgm(1.0), make_exponential(1.0), make_exponential(1.0)), 0.5);
    EstimatorConfig cfg;
    cfg.n_reps = 20000;
    cfg.seed = 4;
    const auto a = leibniz_integral_estimate(m, 1.0, cfg);
    const auto b = leibniz_divergence_estimate(m, 1.0, cfg);
    CHECK(std::abs(a.mean - b.mean) < 3.0 * (a.std_error + b.std_error));
}

TEST_CASE("ipa_lr: smooth log-sum performance") {
    const Model m = model_smooth_sum_log(
        make_joint(make_independence(), make_exponential(1.0), make_exponential(1.0)));
    const Vec x{0.5, 2.0};
    const double th = 1.25;
    CHECK(ipa_lr_path(m, x, th) ==
          doctest::Approx(1.0 / (x[0] + th) + 1.0 / (x[1] + th)).epsilon(1e-14));

    Model constant = m;
    constant.phi_y = [](const Vec&) { return 7.0; };
    constant.phi_grad_y = [](const Vec&) { return Vec{0.0, 0.0}; };
    CHECK(ipa_lr_path(constant, x, th) == 0.0);

    const Model indicator = indep_exp_inventory();
    CHECK_THROWS_AS(ipa_lr_path(indicator, x, th), NotDifferentiable);
    EstimatorConfig cfg;
    CHECK_THROWS_AS(ipa_lr_estimate(indicator, 1.0, cfg), NotDifferentiable);
}

TEST_CASE("ipa_lr estimate matches the smooth-model oracle") {
    // E(log(X1+theta) + log(X2+theta)) differentiates under the integral
    const Model m = model_smooth_sum_log(
        make_joint(make_independence(), make_exponential(1.0), make_exponential(1.0)));
    EstimatorConfig cfg;
    cfg.n_reps = 40000;
    cfg.seed = 246;
    const double theta = 1.5;
    const auto est = ipa_lr_estimate(m, theta, cfg);
    // truth = 2 E(1/(X+theta)) for exp(1), by adaptive quadrature
    const double truth = 2.0 * adaptive_simpson(
                                   [theta](double x) { return std::exp(-x) / (x + theta); }, 0.0,
                                   60.0, 1e-12, 40);
    CHECK(std::abs(est.mean - truth) < 3.0 * est.std_error);
}

TEST_CASE("pointwise IPA-LR identity") {
    const Model linear = model_smooth_sum_log(
        make_joint(make_independence(), make_exponential(1.0), make_exponential(1.0)));
    CHECK(verify_identity_ipalr(linear, 500, 99) < 1e-5);

    Model quadratic = linear;
    quadratic.phi_y = [](const Vec& y) { return (y[0] + y[1]) * (y[0] + y[1]); };
    quadratic.phi_grad_y = [](const Vec& y) {
        return Vec{2.0 * (y[0] + y[1]), 2.0 * (y[0] + y[1])};
    };
    CHECK(verify_identity_ipalr(quadratic, 500, 99) < 1e-5);

    Model constant = linear;
    constant.phi_y = [](const Vec&) { return 3.0; };
    constant.phi_grad_y = [](const Vec&) { return Vec{0.0, 0.0}; };
    CHECK(verify_identity_ipalr(constant, 200, 99) == 0.0);
}

TEST_CASE("option threshold derivative: far threshold kills the weight") {
    AmericanOptionModel m;
    m.dividends = {2.0};
    m.dates = {0.5, 1.0};
    m.thresholds = {1e5};
    EstimatorConfig cfg;
    cfg.n_reps = 2000;
    const auto est = option_threshold_derivative(m, 1, cfg);
    CHECK(std::abs(est.mean) < 1e-300);  // Gaussian tail at x* ~ 48 sigmas
}

TEST_CASE("option threshold derivative matches both oracles") {
    AmericanOptionModel m;
    m.dividends = {2.0};
    m.dates = {0.5, 1.0};
    m.thresholds = {105.0};

    EstimatorConfig cfg;
    cfg.n_reps = 200000;
    cfg.seed = 777;
    const auto est = option_threshold_derivative(m, 1, cfg);

    const double quad = truth_option_2period(m);
    CHECK(std::abs(est.mean - quad) < 3.0 * est.std_error);

    EstimatorConfig fd_cfg;
    fd_cfg.n_reps = 1000000;
    fd_cfg.fd_delta = 0.25;
    fd_cfg.seed = 778;
    const auto fd = option_fd_estimate(m, 1, fd_cfg);
    CHECK(std::abs(est.mean - fd.mean) < 3.0 * (est.std_error + fd.std_error));
}

TEST_CASE("option branch gap sign follows continuation minus intrinsic") {
    AmericanOptionModel m;
    m.dividends = {2.0};
    m.dates = {0.5, 1.0};
    m.thresholds = {105.0};
    const double s_tilde = m.thresholds[0] - m.dividends[0];
    // nested MC of both conditional expectations on a shared stream
    double cont = 0.0;
    const int n = 200000;
    for (int r = 0; r < n; ++r) {
        RandomStream rng(888, static_cast<std::uint64_t>(r), 0);
        const std::vector<double> x{rng.normal(), rng.normal()};
        OptionBranch b{1, s_tilde, false};
        cont += option_payoff(m, x, &b);
    }
    cont /= n;
    OptionBranch ex{1, s_tilde, true};
    const double intrinsic = option_payoff(m, {0.0, 0.0}, &ex);  // deterministic
    CHECK(cont != intrinsic);
    CHECK(cont - intrinsic > 0.0);  // continuation dominates at these parameters
    // consistency: the derivative sign matches the gap sign through the weight
    EstimatorConfig cfg;
    cfg.n_reps = 50000;
    const auto est = option_threshold_derivative(m, 1, cfg);
    CHECK(est.mean > 0.0);
}

TEST_CASE("dpa: service branches identical and theta-free gives exact zero") {
    GG1Model g;
    g.n_customers = 5;
    g.service_plus = [](double, double x) { return 0.4 + 0.2 * x; };
    g.service_minus = g.service_plus;
    g.dtheta_service_plus = [](double, double) { return 0.0; };
    g.dtheta_service_minus = [](double, double) { return 0.0; };
    g.interarrival = [](RandomStream& rng) { return rng.exponential(1.0); };
    g.perf = GG1Model::Perf::MeanWait;
    EstimatorConfig cfg;
    cfg.n_reps = 2000;
    const auto est = dpa_derivative(g, 0.5, cfg);
    CHECK(est.mean == 0.0);
    CHECK(est.std_error == 0.0);
}

TEST_CASE("dpa: two-customer closed form") {
    // S+ = 1, S- = 1/2, deterministic interarrival 3/4, total waiting time:
    // psi = max(0, S(X_1) - 3/4) so E(psi) = theta/4 and the derivative is 1/4
    GG1Model g;
    g.n_customers = 2;
    g.service_plus = [](double, double) { return 1.0; };
    g.service_minus = [](double, double) { return 0.5; };
    g.dtheta_service_plus = [](double, double) { return 0.0; };
    g.dtheta_service_minus = [](double, double) { return 0.0; };
    g.interarrival = [](RandomStream&) { return 0.75; };
    g.perf = GG1Model::Perf::TotalWait;
    EstimatorConfig cfg;
    cfg.n_reps = 10000;
    const auto est = dpa_derivative(g, 0.5, cfg);

    // exact derivative by quadrature over (X1, X2) split at the admission
    // switch x1 = theta; the Lindley regions are piecewise constant here
    auto psi = [&g](double theta, double x1, double x2) {
        return gg1_performance(g, theta, {x1, x2}, {0.75, 0.75});
    };
    auto epsi = [&](double theta) {
        auto slice = [&](double x1) {
            return integrate_1d([&](double x2) { return psi(theta, x1, x2); }, 0.0, 1.0, 8);
        };
        return integrate_1d(slice, 0.0, theta, 16) + integrate_1d(slice, theta, 1.0, 16);
    };
    const double truth = central_difference(epsi, 0.5, 1e-4);
    CHECK(truth == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(est.mean == doctest::Approx(truth).epsilon(1e-9));
    CHECK(est.std_error == 0.0);
}

TEST_CASE("dpa vs common-random-number FD on the five-customer queue") {
    GG1Model g;
    g.n_customers = 5;
    g.service_plus = [](double th, double x) { return 0.6 + 0.2 * x + 0.2 * th; };
    g.service_minus = [](double th, double x) { return 0.4 + 0.1 * x - 0.1 * th; };
    g.dtheta_service_plus = [](double, double) { return 0.2; };
    g.dtheta_service_minus = [](double, double) { return -0.1; };
    g.interarrival = [](RandomStream& rng) { return rng.exponential(1.0); };
    g.perf = GG1Model::Perf::MeanSystemTime;

    EstimatorConfig cfg;
    cfg.n_reps = 200000;
    cfg.seed = 31337;
    const auto dpa = dpa_derivative(g, 0.5, cfg);

    EstimatorConfig fd_cfg;
    fd_cfg.n_reps = 1000000;
    fd_cfg.fd_delta = 0.01;
    fd_cfg.seed = 31338;
    const auto fd = gg1_fd_estimate(g, 0.5, fd_cfg);
    CHECK(std::abs(dpa.mean - fd.mean) < 3.0 * (dpa.std_error + fd.std_error));
}

TEST_CASE("unstable flag fires for gamma 0.5 and stays clear for gamma 2") {
    EstimatorConfig cfg;
    cfg.n_reps = 4000;
    cfg.surface_reps = 4000;
    const Model hot = model_log_inventory(
        make_joint(make_clayton(1.0), make_gamma(0.5), make_gamma(0.5)), 0.5);
    const Model cold = model_log_inventory(
        make_joint(make_clayton(1.0), make_gamma(2.0), make_gamma(2.0)), 0.5);
    CHECK(leibniz_integral_estimate(hot, 1.0, cfg).unstable);
    CHECK_FALSE(leibniz_integral_estimate(cold, 1.0, cfg).unstable);
}
