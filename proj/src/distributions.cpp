#include "leibniz/distributions.hpp"

#include <cmath>
#include <limits>

#include "leibniz/errors.hpp"
#include "leibniz/special_functions.hpp"

namespace leibniz {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double Marginal::pdf(double x) const {
    switch (kind) {
        case MarginalKind::Exponential:
            return x < 0 ? 0.0 : p1 * std::exp(-p1 * x);
        case MarginalKind::Gamma:
            if (x < 0) return 0.0;
            if (x == 0.0) return boundary_density(false);
            return std::exp(gamma_log_pdf(x, p1));
        case MarginalKind::LogNormal: {
            if (x <= 0) return 0.0;
            const double z = (std::log(x) - p1) / p2;
            return normal_pdf(z) / (p2 * x);
        }
        case MarginalKind::Uniform01:
            return (x >= 0 && x <= 1) ? 1.0 : 0.0;
        case MarginalKind::Normal:
            return normal_pdf((x - p1) / p2) / p2;
        case MarginalKind::Ramp:
            return (x >= 0 && x <= 1) ? 2.0 * x : 0.0;
    }
    return 0.0;
}

double Marginal::log_pdf(double x) const { return std::log(pdf(x)); }

double Marginal::cdf(double x) const {
    switch (kind) {
        case MarginalKind::Exponential:
            return x <= 0 ? 0.0 : -std::expm1(-p1 * x);
        case MarginalKind::Gamma:
            return gamma_cdf(x, p1);
        case MarginalKind::LogNormal:
            return x <= 0 ? 0.0 : normal_cdf((std::log(x) - p1) / p2);
        case MarginalKind::Uniform01:
            return x <= 0 ? 0.0 : (x >= 1 ? 1.0 : x);
        case MarginalKind::Normal:
            return normal_cdf((x - p1) / p2);
        case MarginalKind::Ramp:
            return x <= 0 ? 0.0 : (x >= 1 ? 1.0 : x * x);
    }
    return 0.0;
}

double Marginal::quantile(double u) const {
    switch (kind) {
        case MarginalKind::Exponential:
            return -std::log1p(-u) / p1;
        case MarginalKind::Gamma:
            return gamma_quantile(u, p1);
        case MarginalKind::LogNormal:
            return std::exp(p1 + p2 * normal_quantile(u));
        case MarginalKind::Uniform01:
            return u;
        case MarginalKind::Normal:
            return p1 + p2 * normal_quantile(u);
        case MarginalKind::Ramp:
            return std::sqrt(u);
    }
    return 0.0;
}

double Marginal::score(double x) const {
    switch (kind) {
        case MarginalKind::Exponential:
            return -p1;
        case MarginalKind::Gamma:
            return (p1 - 1.0) / x - 1.0;
        case MarginalKind::LogNormal: {
            const double z = (std::log(x) - p1) / p2;
            return -(z / p2 + 1.0) / x;
        }
        case MarginalKind::Uniform01:
            return 0.0;
        case MarginalKind::Normal:
            return -(x - p1) / (p2 * p2);
        case MarginalKind::Ramp:
            return 1.0 / x;
    }
    return 0.0;
}

double Marginal::boundary_density(bool upper) const {
    const double ep = upper ? support.hi : support.lo;
    if (!std::isfinite(ep)) return 0.0;
    switch (kind) {
        case MarginalKind::Exponential:
            return upper ? 0.0 : p1;
        case MarginalKind::Gamma:
            if (upper) return 0.0;
            if (p1 > 1.0) return 0.0;
            if (p1 == 1.0) return 1.0;
            return kInf;
        case MarginalKind::LogNormal:
            return 0.0;
        case MarginalKind::Uniform01:
            return 1.0;
        case MarginalKind::Normal:
            return 0.0;  // support is all of R; endpoints infinite
        case MarginalKind::Ramp:
            return upper ? 2.0 : 0.0;
    }
    return 0.0;
}

double sample_gamma_marsaglia_tsang(RandomStream& rng, double shape) {
    if (shape < 1.0) {
        // boost: Gamma(a) = Gamma(a+1) * U^{1/a}
        const double u = rng.uniform();
        return sample_gamma_marsaglia_tsang(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Marginal::sample(RandomStream& rng) const {
    switch (kind) {
        case MarginalKind::Gamma:
            return sample_gamma_marsaglia_tsang(rng, p1);
        case MarginalKind::Normal:
            return p1 + p2 * rng.normal();
        default:
            return quantile(rng.uniform());
    }
}

Marginal make_exponential(double rate) {
    return {MarginalKind::Exponential, rate, 0.0, {0.0, kInf}, "exp(" + std::to_string(rate) + ")"};
}
Marginal make_gamma(double shape) {
    return {MarginalKind::Gamma, shape, 0.0, {0.0, kInf}, "gamma(" + std::to_string(shape) + ",1)"};
}
Marginal make_lognormal(double mu, double sigma) {
    return {MarginalKind::LogNormal, mu, sigma, {0.0, kInf}, "lognormal"};
}
Marginal make_uniform01() { return {MarginalKind::Uniform01, 0.0, 0.0, {0.0, 1.0}, "uniform01"}; }
Marginal make_normal(double mu, double sigma) {
    return {MarginalKind::Normal, mu, sigma, {-kInf, kInf}, "normal"};
}
Marginal make_ramp() { return {MarginalKind::Ramp, 0.0, 0.0, {0.0, 1.0}, "ramp2x"}; }

// ---------------------------------------------------------------------------
// Copulas

double Copula::cdf(double u, double v) const {
    switch (kind) {
        case CopulaKind::Independence:
            return u * v;
        case CopulaKind::Clayton: {
            const double a = param;
            return std::pow(std::pow(u, -a) + std::pow(v, -a) - 1.0, -1.0 / a);
        }
        case CopulaKind::FGM:
            return u * v * (1.0 + param * (1.0 - u) * (1.0 - v));
        case CopulaKind::Gaussian: {
            // 1D quadrature of the conditional cdf; only used in tests.
            if (u <= 0.0 || v <= 0.0) return 0.0;
            if (u >= 1.0) return v;
            if (v >= 1.0) return u;
            auto cc = [&](double t) { return conditional_cdf(t, v); };
            return integrate_1d_graded(cc, 0.0, u, 30, 16);
        }
    }
    return 0.0;
}

double Copula::density(double u, double v) const {
    switch (kind) {
        case CopulaKind::Independence:
            return 1.0;
        case CopulaKind::Clayton: {
            const double a = param;
            const double s = std::pow(u, -a) + std::pow(v, -a) - 1.0;
            return (1.0 + a) * std::pow(u * v, -1.0 - a) * std::pow(s, -2.0 - 1.0 / a);
        }
        case CopulaKind::FGM:
            return 1.0 + param * (1.0 - 2.0 * u) * (1.0 - 2.0 * v);
        case CopulaKind::Gaussian: {
            const double r = param;
            const double z1 = normal_quantile(u), z2 = normal_quantile(v);
            const double q = r * r * (z1 * z1 + z2 * z2) - 2.0 * r * z1 * z2;
            return std::exp(-0.5 * q / (1.0 - r * r)) / std::sqrt(1.0 - r * r);
        }
    }
    return 1.0;
}

double Copula::du_density_over_density(double u, double v) const {
    switch (kind) {
        case CopulaKind::Independence:
            return 0.0;
        case CopulaKind::Clayton: {
            const double a = param;
            const double s = std::pow(u, -a) + std::pow(v, -a) - 1.0;
            return -(1.0 + a) / u + (2.0 * a + 1.0) * std::pow(u, -a - 1.0) / s;
        }
        case CopulaKind::FGM:
            return -2.0 * param * (1.0 - 2.0 * v) / density(u, v);
        case CopulaKind::Gaussian: {
            const double r = param;
            const double z1 = normal_quantile(u), z2 = normal_quantile(v);
            // d/dz1 log c, then dz1/du = 1/phi(z1)
            return -((r * r * z1 - r * z2) / (1.0 - r * r)) / normal_pdf(z1);
        }
    }
    return 0.0;
}

double Copula::conditional_cdf(double u, double v) const {
    if (v <= 0.0) return 0.0;
    if (v >= 1.0) return 1.0;
    switch (kind) {
        case CopulaKind::Independence:
            return v;
        case CopulaKind::Clayton: {
            const double a = param;
            const double s = std::pow(u, -a) + std::pow(v, -a) - 1.0;
            return std::pow(u, -a - 1.0) * std::pow(s, -1.0 / a - 1.0);
        }
        case CopulaKind::FGM:
            return v * (1.0 + param * (1.0 - 2.0 * u) * (1.0 - v));
        case CopulaKind::Gaussian: {
            const double r = param;
            const double z1 = normal_quantile(u), z2 = normal_quantile(v);
            return normal_cdf((z2 - r * z1) / std::sqrt(1.0 - r * r));
        }
    }
    return v;
}

double Copula::conditional_quantile(double u, double w) const {
    switch (kind) {
        case CopulaKind::Independence:
            return w;
        case CopulaKind::Clayton: {
            const double a = param;
            const double t = std::pow(w, -a / (1.0 + a)) - 1.0;
            return std::pow(t * std::pow(u, -a) + 1.0, -1.0 / a);
        }
        case CopulaKind::FGM: {
            // a v^2 + b v - w = 0 with a = alpha(2u-1), b = 1 - a
            const double a = param * (2.0 * u - 1.0);
            const double b = 1.0 - a;
            if (std::abs(a) < 1e-12) return w / b;
            const double disc = b * b + 4.0 * a * w;
            return (-b + std::sqrt(disc)) / (2.0 * a);
        }
        case CopulaKind::Gaussian: {
            const double r = param;
            const double z1 = normal_quantile(u);
            return normal_cdf(r * z1 + std::sqrt(1.0 - r * r) * normal_quantile(w));
        }
    }
    // bisection fallback for anything without a closed form
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (conditional_cdf(u, mid) < w)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12) return 0.5 * (lo + hi);
    }
    throw NumericalInversionFailure("conditional_quantile: bisection did not bracket");
}

Copula make_independence() { return {CopulaKind::Independence, 0.0, "independence"}; }
Copula make_clayton(double alpha) {
    return {CopulaKind::Clayton, alpha, "clayton(" + std::to_string(alpha) + ")"};
}
Copula make_fgm(double alpha) {
    return {CopulaKind::FGM, alpha, "fgm(" + std::to_string(alpha) + ")"};
}
Copula make_gaussian(double rho) {
    return {CopulaKind::Gaussian, rho, "gaussian(" + std::to_string(rho) + ")"};
}

double conditional_cdf_fgm_at_zero(const Marginal& m2, double x2) {
    const double F = m2.cdf(x2);
    return 2.0 * F - F * F;
}

const char* face_kind_name(FaceKind k) {
    switch (k) {
        case FaceKind::Vanishing:
            return "vanishing";
        case FaceKind::PointMass:
            return "point_mass";
        case FaceKind::ReducesToMarginal:
            return "reduces_to_marginal";
        case FaceKind::TransformedCDF:
            return "transformed_cdf";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// JointDensity2

double JointDensity2::pdf(const Vec& x) const {
    const double f1 = m1.pdf(x[0]), f2 = m2.pdf(x[1]);
    if (f1 <= 0.0 || f2 <= 0.0) return 0.0;
    return cop.density(m1.cdf(x[0]), m2.cdf(x[1])) * f1 * f2;
}

double JointDensity2::log_pdf(const Vec& x) const { return std::log(pdf(x)); }

Vec JointDensity2::score_x(const Vec& x) const {
    if (!support(0).contains(x[0]) || !support(1).contains(x[1]))
        throw OutsideSupport("score_x: point not interior to the support");
    const double u = m1.cdf(x[0]), v = m2.cdf(x[1]);
    Vec s(2);
    s[0] = cop.du_density_over_density(u, v) * m1.pdf(x[0]) + m1.score(x[0]);
    s[1] = cop.du_density_over_density(v, u) * m2.pdf(x[1]) + m2.score(x[1]);
    return s;
}

Vec JointDensity2::sample(RandomStream& rng) const {
    const double x1 = m1.sample(rng);
    const double u = m1.cdf(x1);
    const double w = rng.uniform();
    const double v = cop.conditional_quantile(u, w);
    const double x2 = m2.quantile(v);
    return Vec{x1, x2};
}

BoundaryConditional JointDensity2::boundary_conditional(int coord, bool upper) const {
    const Marginal& mi = marginal(coord);
    const Marginal& mo = marginal(1 - coord);
    const double ep = upper ? mi.support.hi : mi.support.lo;
    if (!std::isfinite(ep))
        throw UnsupportedConditional("boundary_conditional: face endpoint is infinite");

    BoundaryConditional bc;
    bc.coord = coord;
    bc.endpoint = ep;
    bc.marginal_density = mi.boundary_density(upper);

    if (bc.marginal_density == 0.0) {
        bc.kind = FaceKind::Vanishing;
        return bc;
    }
    switch (cop.kind) {
        case CopulaKind::Independence:
            bc.kind = FaceKind::ReducesToMarginal;
            bc.sample_other = [mo](RandomStream& rng) { return mo.sample(rng); };
            return bc;
        case CopulaKind::Clayton:
            if (!upper) {
                // strong lower tail dependence: the conditional collapses to 0
                bc.kind = FaceKind::PointMass;
                bc.point_mass_value = mo.support.lo;
                return bc;
            }
            throw UnsupportedConditional("boundary_conditional: Clayton upper face");
        case CopulaKind::FGM: {
            if (!upper) {
                const double a = cop.param;
                bc.kind = FaceKind::TransformedCDF;
                bc.sample_other = [mo, a](RandomStream& rng) {
                    // F(v | U=0) = (1+a)v - a v^2, inverted in closed form
                    const double w = rng.uniform();
                    double v;
                    if (std::abs(a) < 1e-12) {
                        v = w;
                    } else {
                        const double b = 1.0 + a;
                        v = (b - std::sqrt(b * b - 4.0 * a * w)) / (2.0 * a);
                    }
                    return mo.quantile(v);
                };
                return bc;
            }
            throw UnsupportedConditional("boundary_conditional: FGM upper face");
        }
        case CopulaKind::Gaussian:
            // nonvanishing boundary density with a Gaussian copula is outside
            // the built-in catalog (lognormal marginals vanish at 0)
            throw UnsupportedConditional("boundary_conditional: Gaussian copula face");
    }
    throw UnsupportedConditional("boundary_conditional: unsupported combination");
}

JointDensity2 make_joint(Copula cop, Marginal m1, Marginal m2) {
    JointDensity2 d;
    d.id = cop.id + "+" + m1.id + "+" + m2.id;
    d.cop = std::move(cop);
    d.m1 = std::move(m1);
    d.m2 = std::move(m2);
    return d;
}

JointDensity2 make_bivariate_lognormal(double rho) {
    JointDensity2 d = make_joint(make_gaussian(rho), make_lognormal(0.0, 1.0),
                                 make_lognormal(0.0, 1.0));
    d.id = "bivariate_lognormal(rho=" + std::to_string(rho) + ")";
    return d;
}

}  // namespace leibniz
