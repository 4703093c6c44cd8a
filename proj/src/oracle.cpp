#include "leibniz/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "leibniz/errors.hpp"
#include "leibniz/rng.hpp"
#include "leibniz/special_functions.hpp"

namespace leibniz {

namespace {

// Upper region boundary of the log-shift threshold model in x-space.
double region_upper_x1(double q, double theta) { return std::exp(q) / theta - theta; }
double region_upper_x2(double q, double theta, double x1) {
    return std::exp(q) / (x1 + theta) - theta;
}

struct LogInvIntegrand {
    const JointDensity2* d;
    double q, theta;

    double operator()(double u) const {
        if (u <= 0.0 || u >= 1.0) return 0.0;
        const double x1 = d->m1.quantile(u);
        const double b = region_upper_x2(q, theta, x1);
        if (b <= 0.0) return 0.0;
        const double v = d->m2.cdf(b);
        return d->cop.conditional_cdf(u, v);
    }
};

}  // namespace

double expected_log_inventory(const JointDensity2& d, double q, double theta) {
    const double x1_star = region_upper_x1(q, theta);
    if (x1_star <= 0.0) return 0.0;
    const double u_max = d.m1.cdf(x1_star);
    LogInvIntegrand f{&d, q, theta};
    return integrate_1d_graded([&f](double u) { return f(u); }, 0.0, u_max, 45, 16);
}

double expected_log_inventory_simpson(const JointDensity2& d, double q, double theta) {
    const double x1_star = region_upper_x1(q, theta);
    if (x1_star <= 0.0) return 0.0;
    const double u_max = d.m1.cdf(x1_star);
    LogInvIntegrand f{&d, q, theta};
    // keep strictly inside (0, u_max); the integrand is bounded by one so the
    // trimmed slivers contribute below 1e-13
    const double eps = u_max * 1e-13;
    return adaptive_simpson([&f](double u) { return f(u); }, eps, u_max - eps, 1e-11, 48);
}

OracleReport truth_log_inventory_report(const JointDensity2& d, double q, double theta) {
    OracleReport rep;
    rep.fd_delta = 1e-4;
    if (!(theta - rep.fd_delta > 0.0))
        throw ThetaOutOfRange("truth_log_inventory: theta too close to zero");
    const double gl = expected_log_inventory(d, q, theta);
    const double as = expected_log_inventory_simpson(d, q, theta);
    rep.backend_gap = std::abs(gl - as);
    if (rep.backend_gap > 1e-7)
        throw NonConvergent("truth_log_inventory: quadrature backends disagree by " +
                            std::to_string(rep.backend_gap));
    rep.value_plus = expected_log_inventory(d, q, theta + rep.fd_delta);
    rep.value_minus = expected_log_inventory(d, q, theta - rep.fd_delta);
    rep.derivative = (rep.value_plus - rep.value_minus) / (2.0 * rep.fd_delta);
    return rep;
}

double truth_log_inventory(const JointDensity2& d, double q, double theta) {
    return truth_log_inventory_report(d, q, theta).derivative;
}

double truth_max_threshold(const JointDensity2& d, double theta) {
    const bool uniform = d.m1.kind == MarginalKind::Uniform01 &&
                         d.m2.kind == MarginalKind::Uniform01 &&
                         d.cop.kind == CopulaKind::Independence;
    if (uniform) return 2.0 * theta;
    auto prob = [&](double th) {
        Region2D r;
        r.x1_range = {0.0, th};
        r.x2_lower = [](double) { return 0.0; };
        r.x2_upper = [th](double) { return th; };
        return integrate_region_2d([&](double x1, double x2) { return d.pdf(Vec{x1, x2}); }, r,
                                   16);
    };
    return central_difference(prob, theta, 1e-4);
}

double verify_identity_ipalr(const Model& m, int n_points, std::uint64_t seed) {
    const Transform& t = *m.transform;
    double worst = 0.0;
    RandomStream rng(seed, 0, 0x1D);
    const double lo = std::max(m.theta_range.lo + 0.05, 1.05);
    const double span = std::isfinite(m.theta_range.hi) ? m.theta_range.hi - lo : 2.0;
    for (int i = 0; i < n_points; ++i) {
        const Vec x = m.sample(rng);
        const double theta = lo + span * rng.uniform();
        const Vec y = t.g(x, theta);
        const double phi = m.phi_y(y);
        const Vec score = m.score_x(x);
        const Vec s = s_vector(t, x, theta);
        const double d = d_scalar(t, score, x, theta);
        // grad_x of phi(g(x)) pulled back through the Jacobian
        const SmallMatrix J = t.jacobian(x, theta);
        const Vec grad_phi = m.phi_grad_y(y);
        Vec gradx(t.dim);
        for (int a = 0; a < t.dim; ++a) {
            double g = 0.0;
            for (int b = 0; b < t.dim; ++b) g += J.m[b][a] * grad_phi[b];
            gradx[a] = g;
        }
        double sdot = 0.0;
        for (int a = 0; a < t.dim; ++a) sdot += score[t.coords[static_cast<size_t>(a)]] * s[a];
        const double lhs = phi * d + phi * sdot + phi * t.div_s(x, theta) + gradx.dot(s);
        const double rhs = central_difference(
            [&](double th) { return m.phi_y(t.g(x, th)); }, theta, 1e-5);
        const double denom = std::max(1.0, std::abs(rhs));
        worst = std::max(worst, std::abs(lhs - rhs) / denom);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Two-period option quadrature

namespace {

// integral over x in (a,b) of f(x) * standard normal pdf, Gauss-Legendre
double normal_weighted(const std::function<double(double)>& f, double a, double b, int order) {
    if (!(b > a)) return 0.0;
    return integrate_1d([&](double x) { return f(x) * normal_pdf(x); }, a, b, order);
}

double expected_payoff_2period_at(const AmericanOptionModel& m, int order) {
    const double tail = 8.5;  // below 1e-12 normal tail mass beyond
    const double T = m.dates[1];
    const double t1 = m.dates[0];
    const double dt1 = t1, dt2 = T - t1;
    const double s_thr = m.thresholds[0];
    const double D = m.dividends[0];
    const double disc = std::exp(-m.rate * T);

    // exercise boundary in the first innovation, clamped to the window
    const double x_star =
        std::clamp(gbm_step_inverse(m, s_thr - D, m.s0, dt1), -tail, tail);

    // branch 1: exercised at t1 (x1 > x_star), payoff independent of x2
    auto exercise_leg = [&](double x1) {
        const double s_minus = gbm_step(m, x1, m.s0, dt1) + D;
        return disc * (s_minus - m.strike) * std::exp(m.rate * (T - t1));
    };
    const double leg1 = normal_weighted(exercise_leg, x_star, tail, order);

    // branch 2: continue; inner integral split at the maturity kink
    auto continue_leg = [&](double x1) {
        const double s_tilde1 = gbm_step(m, x1, m.s0, dt1);
        const double x2_star =
            std::clamp(gbm_step_inverse(m, m.strike, s_tilde1, dt2), -tail, tail);
        auto inner = [&](double x2) {
            return disc * (gbm_step(m, x2, s_tilde1, dt2) - m.strike);
        };
        return normal_weighted(inner, x2_star, tail, order);
    };
    const double leg2 = normal_weighted(continue_leg, -tail, x_star, order);
    return leg1 + leg2;
}

}  // namespace

double option_expected_payoff_2period(const AmericanOptionModel& m) {
    m.validate();
    if (m.n_periods() != 2)
        throw NonConvergent("option_expected_payoff_2period: only two periods supported");
    const double v64 = expected_payoff_2period_at(m, 64);
    const double v128 = expected_payoff_2period_at(m, 128);
    if (std::abs(v128 - v64) > 1e-8)
        throw NonConvergent("option_expected_payoff_2period: node doubling moved the value by " +
                            std::to_string(std::abs(v128 - v64)));
    return v128;
}

double truth_option_2period(const AmericanOptionModel& m) {
    const double delta = 1e-3 * m.thresholds[0];
    auto value_at = [&](double s) {
        AmericanOptionModel shifted = m;
        shifted.thresholds[0] = s;
        return option_expected_payoff_2period(shifted);
    };
    return central_difference(value_at, m.thresholds[0], delta);
}

}  // namespace leibniz
