#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "leibniz/distributions.hpp"
#include "leibniz/errors.hpp"

using namespace leibniz;

namespace {

std::vector<Marginal> catalog() {
    return {make_exponential(1.0), make_gamma(0.5),        make_gamma(1.0),
            make_gamma(2.0),       make_lognormal(0.0, 1.0), make_uniform01(),
            make_normal(0.0, 1.0), make_ramp()};
}

double ks_distance_uniform(std::vector<double> u) {
    std::sort(u.begin(), u.end());
    double worst = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        worst = std::max(worst, std::abs(u[i] - static_cast<double>(i) / u.size()));
        worst = std::max(worst, std::abs(u[i] - static_cast<double>(i + 1) / u.size()));
    }
    return worst;
}

}  // namespace

TEST_CASE("marginal cdf/quantile roundtrip") {
    for (const auto& m : catalog()) {
        for (int i = 1; i < 60; ++i) {
            const double u = i / 60.0;
            const double x = m.quantile(u);
            CHECK(m.quantile(m.cdf(x)) == doctest::Approx(x).epsilon(1e-8));
            CHECK(m.cdf(x) == doctest::Approx(u).epsilon(1e-8));
            CHECK(m.pdf(x) >= 0.0);
        }
    }
}

TEST_CASE("marginal score matches FD of log pdf") {
    for (const auto& m : catalog()) {
        for (int i = 1; i < 60; ++i) {
            const double x = m.quantile(i / 60.0);
            const double h = 1e-6 * std::abs(x) + 1e-12;
            if (m.cdf(x - h) <= 0.0 || m.cdf(x + h) >= 1.0) continue;
            const double fd = (m.log_pdf(x + h) - m.log_pdf(x - h)) / (2.0 * h);
            CHECK(m.score(x) ==
                  doctest::Approx(fd).epsilon(1e-6).scale(std::max(1.0, std::abs(fd))));
        }
    }
}

TEST_CASE("gamma sampler matches the analytic law") {
    for (double shape : {0.5, 1.0, 2.0}) {
        const Marginal g = make_gamma(shape);
        const int n = 20000;
        std::vector<double> u;
        u.reserve(n);
        for (int r = 0; r < n; ++r) {
            RandomStream rng(99, static_cast<std::uint64_t>(r), 0);
            u.push_back(g.cdf(g.sample(rng)));
        }
        CHECK(ks_distance_uniform(std::move(u)) < 0.02);
    }
}

TEST_CASE("copula uniform margins and normalization") {
    for (const auto& cop :
         {make_independence(), make_clayton(1.0), make_clayton(2.0), make_fgm(1.0),
          make_fgm(-0.7), make_gaussian(0.1), make_gaussian(0.9)}) {
        for (int i = 1; i < 25; ++i) {
            const double u = i / 25.0;
            CHECK(std::abs(cop.cdf(u, 1.0) - u) < 1e-10);
            CHECK(std::abs(cop.cdf(1.0, u) - u) < 1e-10);
        }
        const double mass = integrate_1d_graded(
            [&](double u) {
                return integrate_1d_graded([&](double v) { return cop.density(u, v); }, 0.0,
                                           1.0, 30, 12);
            },
            0.0, 1.0, 30, 12);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("conditional cdf is a valid cdf and quantile inverts it") {
    for (const auto& cop :
         {make_independence(), make_clayton(1.0), make_fgm(1.0), make_fgm(-0.5),
          make_gaussian(0.6)}) {
        RandomStream rng(5, 0, 0);
        for (int t = 0; t < 100; ++t) {
            const double u = 0.01 + 0.98 * rng.uniform();
            double prev = -1e-15;
            for (int i = 0; i <= 30; ++i) {
                const double v = i / 30.0;
                const double F = cop.conditional_cdf(u, v);
                CHECK(F >= prev - 1e-12);
                prev = F;
            }
            CHECK(cop.conditional_cdf(u, 0.0) == 0.0);
            CHECK(cop.conditional_cdf(u, 1.0) == 1.0);
            const double w = 0.01 + 0.98 * rng.uniform();
            const double v = cop.conditional_quantile(u, w);
            CHECK(cop.conditional_cdf(u, v) == doctest::Approx(w).epsilon(1e-9));
        }
    }
}

TEST_CASE("sample_joint: independent exponentials have unit means") {
    const auto d = make_joint(make_independence(), make_exponential(1.0), make_exponential(1.0));
    const int n = 10000;
    double m1 = 0.0, m2 = 0.0;
    for (int r = 0; r < n; ++r) {
        RandomStream rng(321, static_cast<std::uint64_t>(r), 0);
        const Vec x = d.sample(rng);
        m1 += x[0];
        m2 += x[1];
    }
    CHECK(m1 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(m2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("sample_joint: FGM keeps exponential marginals") {
    const auto d = make_joint(make_fgm(1.0), make_exponential(1.0), make_exponential(1.0));
    const int n = 10000;
    std::vector<double> u1, u2;
    u1.reserve(n);
    u2.reserve(n);
    for (int r = 0; r < n; ++r) {
        RandomStream rng(17, static_cast<std::uint64_t>(r), 0);
        const Vec x = d.sample(rng);
        u1.push_back(1.0 - std::exp(-x[0]));
        u2.push_back(1.0 - std::exp(-x[1]));
    }
    CHECK(ks_distance_uniform(std::move(u1)) < 0.02);
    CHECK(ks_distance_uniform(std::move(u2)) < 0.02);
}

TEST_CASE("sample_joint: Clayton Kendall tau equals alpha/(alpha+2)") {
    const auto d = make_joint(make_clayton(1.0), make_gamma(2.0), make_gamma(2.0));
    const int n = 10000;
    std::vector<Vec> xs;
    xs.reserve(n);
    for (int r = 0; r < n; ++r) {
        RandomStream rng(55, static_cast<std::uint64_t>(r), 0);
        xs.push_back(d.sample(rng));
    }
    long long concordant = 0, discordant = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double s = (xs[i][0] - xs[j][0]) * (xs[i][1] - xs[j][1]);
            if (s > 0)
                ++concordant;
            else if (s < 0)
                ++discordant;
        }
    const double tau = static_cast<double>(concordant - discordant) /
                       (0.5 * static_cast<double>(n) * (n - 1));
    CHECK(tau == doctest::Approx(1.0 / 3.0).epsilon(0.09));  // 1/3 +- 0.03
}

TEST_CASE("score_x closed forms") {
    const auto indep_exp =
        make_joint(make_independence(), make_exponential(1.0), make_exponential(1.0));
    const Vec s = indep_exp.score_x(Vec{0.7, 2.1});
    CHECK(s[0] == -1.0);
    CHECK(s[1] == -1.0);

    const auto indep_gamma = make_joint(make_independence(), make_gamma(2.0), make_gamma(2.0));
    const Vec sg = indep_gamma.score_x(Vec{1.0, 1.0});
    CHECK(sg[0] == 0.0);
    CHECK(sg[1] == 0.0);

    // frozen by an independent evaluation of the copula score formula
    const auto fgm = make_joint(make_fgm(1.0), make_exponential(1.0), make_exponential(1.0));
    const Vec sf = fgm.score_x(Vec{0.5, 0.5});
    CHECK(sf[0] == doctest::Approx(-1.2472332602985923).epsilon(1e-12));
    CHECK(sf[1] == doctest::Approx(-1.2472332602985923).epsilon(1e-12));

    CHECK_THROWS_AS(indep_exp.score_x(Vec{-0.1, 1.0}), OutsideSupport);
}

TEST_CASE("score_x matches FD of log pdf across the catalog") {
    const std::vector<JointDensity2> joints = {
        make_joint(make_independence(), make_exponential(1.0), make_exponential(1.0)),
        make_joint(make_fgm(1.0), make_exponential(1.0), make_exponential(1.0)),
        make_bivariate_lognormal(0.1),
        make_bivariate_lognormal(0.9),
        make_joint(make_clayton(1.0), make_gamma(0.5), make_gamma(0.5)),
        make_joint(make_clayton(1.0), make_gamma(1.0), make_gamma(1.0)),
        make_joint(make_clayton(1.0), make_gamma(2.0), make_gamma(2.0)),
    };
    for (const auto& d : joints) {
        RandomStream rng(77, 0, 0);
        for (int t = 0; t < 1000; ++t) {
            Vec x(2);
            x[0] = d.m1.quantile(0.02 + 0.96 * rng.uniform());
            x[1] = d.m2.quantile(0.02 + 0.96 * rng.uniform());
            const Vec s = d.score_x(x);
            for (int i = 0; i < 2; ++i) {
                const double h = 1e-6 * std::abs(x[i]);
                Vec xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                const double fd = (d.log_pdf(xp) - d.log_pdf(xm)) / (2.0 * h);
                CHECK(s[i] ==
                      doctest::Approx(fd).epsilon(1e-6).scale(std::max(1.0, std::abs(fd))));
            }
        }
    }
}

TEST_CASE("gamma shape below one: score blows up toward the origin") {
    const auto d = make_joint(make_independence(), make_gamma(0.5), make_gamma(0.5));
    double prev = 0.0;
    for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
        const double mag = std::abs(d.score_x(Vec{eps, 1.0})[0]);
        CHECK(mag > prev);
        prev = mag;
    }
    CHECK(prev > 1e7);
}

TEST_CASE("conditional_cdf_fgm_at_zero") {
    const Marginal m2 = make_exponential(1.0);
    CHECK(conditional_cdf_fgm_at_zero(m2, 0.0) == 0.0);
    CHECK(conditional_cdf_fgm_at_zero(m2, 1e9) == doctest::Approx(1.0).epsilon(1e-12));
    // x2 at the exponential median has F2 = 1/2, so 2F - F^2 = 3/4
    CHECK(conditional_cdf_fgm_at_zero(m2, std::log(2.0)) ==
          doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("boundary_conditional classification") {
    const auto logn = make_bivariate_lognormal(0.9);
    CHECK(logn.boundary_conditional(0, false).kind == FaceKind::Vanishing);

    const auto clay = make_joint(make_clayton(1.0), make_gamma(1.0), make_gamma(1.0));
    const auto bc_clay = clay.boundary_conditional(0, false);
    CHECK(bc_clay.kind == FaceKind::PointMass);
    CHECK(bc_clay.point_mass_value == 0.0);
    CHECK(bc_clay.marginal_density == 1.0);

    // shape 2 vanishes at zero before the copula is even consulted
    const auto clay2 = make_joint(make_clayton(1.0), make_gamma(2.0), make_gamma(2.0));
    CHECK(clay2.boundary_conditional(0, false).kind == FaceKind::Vanishing);

    const auto indep =
        make_joint(make_independence(), make_exponential(1.0), make_exponential(1.0));
    CHECK(indep.boundary_conditional(1, false).kind == FaceKind::ReducesToMarginal);

    const auto fgm = make_joint(make_fgm(1.0), make_exponential(1.0), make_exponential(1.0));
    CHECK(fgm.boundary_conditional(0, false).kind == FaceKind::TransformedCDF);

    CHECK_THROWS_AS(indep.boundary_conditional(0, true), UnsupportedConditional);
}

TEST_CASE("FGM face sampler matches the analytic conditional cdf") {
    const auto fgm = make_joint(make_fgm(1.0), make_exponential(1.0), make_exponential(1.0));
    const auto bc = fgm.boundary_conditional(0, false);
    const int n = 10000;
    std::vector<double> u;
    u.reserve(n);
    for (int r = 0; r < n; ++r) {
        RandomStream rng(31, static_cast<std::uint64_t>(r), 0);
        u.push_back(conditional_cdf_fgm_at_zero(fgm.m2, bc.sample_other(rng)));
    }
    CHECK(ks_distance_uniform(std::move(u)) < 0.02);
}

TEST_CASE("joint pdf integrates to one over the truncated support") {
    const std::vector<JointDensity2> joints = {
        make_joint(make_independence(), make_exponential(1.0), make_exponential(1.0)),
        make_joint(make_fgm(1.0), make_exponential(1.0), make_exponential(1.0)),
        make_bivariate_lognormal(0.9),
        make_joint(make_clayton(1.0), make_gamma(0.5), make_gamma(0.5)),
    };
    for (const auto& d : joints) {
        const double mass = integrate_1d_graded(
            [&](double u) {
                const double x1 = d.m1.quantile(u);
                return integrate_1d_graded(
                    [&](double v) {
                        const double x2 = d.m2.quantile(v);
                        return d.pdf(Vec{x1, x2}) / (d.m1.pdf(x1) * d.m2.pdf(x2));
                    },
                    1e-13, 1.0 - 1e-13, 30, 12);
            },
            1e-13, 1.0 - 1e-13, 30, 12);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("bivariate lognormal sampling agrees with correlated normals") {
    // log coordinates should be jointly normal with the requested correlation
    const double rho = 0.6;
    const auto d = make_bivariate_lognormal(rho);
    const int n = 20000;
    double sz1 = 0, sz2 = 0, sz11 = 0, sz22 = 0, sz12 = 0;
    for (int r = 0; r < n; ++r) {
        RandomStream rng(13, static_cast<std::uint64_t>(r), 0);
        const Vec x = d.sample(rng);
        const double z1 = std::log(x[0]), z2 = std::log(x[1]);
        sz1 += z1;
        sz2 += z2;
        sz11 += z1 * z1;
        sz22 += z2 * z2;
        sz12 += z1 * z2;
    }
    const double m1 = sz1 / n, m2 = sz2 / n;
    const double v1 = sz11 / n - m1 * m1, v2 = sz22 / n - m2 * m2;
    const double c12 = sz12 / n - m1 * m2;
    CHECK(m1 == doctest::Approx(0.0).epsilon(0.03).scale(1.0));
    CHECK(v1 == doctest::Approx(1.0).epsilon(0.05));
    CHECK(v2 == doctest::Approx(1.0).epsilon(0.05));
    CHECK(c12 / std::sqrt(v1 * v2) == doctest::Approx(rho).epsilon(0.05));
}
