#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "leibniz/numerics.hpp"
#include "leibniz/rng.hpp"

using namespace leibniz;

TEST_CASE("invert_small closed forms") {
    SmallMatrix id2 = SmallMatrix::identity(2);
    double det = 0.0;
    SmallMatrix inv = id2.inverse(&det);
    CHECK(det == 1.0);
    CHECK(inv.m[0][0] == 1.0);
    CHECK(inv.m[0][1] == 0.0);

    SmallMatrix diag = SmallMatrix::diagonal(Vec{2.0, 4.0});
    inv = diag.inverse(&det);
    CHECK(det == 8.0);
    CHECK(inv.m[0][0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(inv.m[1][1] == doctest::Approx(0.25).epsilon(1e-15));

    SmallMatrix rank1;
    rank1.n = 2;
    rank1.m[0][0] = rank1.m[0][1] = rank1.m[1][0] = rank1.m[1][1] = 1.0;
    CHECK_THROWS_AS(rank1.inverse(), SingularMatrix);
    CHECK_THROWS_AS(rank1.solve(Vec{1.0, 1.0}), SingularMatrix);
}

TEST_CASE("invert_small randomized identity property") {
    RandomStream rng(42, 0, 0);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const int n = 1 + static_cast<int>(rng.uniform() * 4.0);
        SmallMatrix a;
        a.n = n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                a.m[i][j] = 2.0 * rng.uniform() - 1.0 + (i == j ? n : 0.0);
        const SmallMatrix prod = a.mul(a.inverse());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                worst = std::max(worst, std::abs(prod.m[i][j] - (i == j ? 1.0 : 0.0)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("solve matches inverse-multiply") {
    RandomStream rng(7, 0, 0);
    for (int t = 0; t < 100; ++t) {
        const int n = 2 + static_cast<int>(rng.uniform() * 3.0);
        SmallMatrix a;
        a.n = n;
        Vec b(n);
        for (int i = 0; i < n; ++i) {
            b[i] = rng.uniform();
            for (int j = 0; j < n; ++j)
                a.m[i][j] = rng.uniform() + (i == j ? n : 0.0);
        }
        const Vec x = a.solve(b);
        const Vec back = a.mul(x);
        for (int i = 0; i < n; ++i) CHECK(back[i] == doctest::Approx(b[i]).epsilon(1e-10));
    }
}

TEST_CASE("integrate_region_2d areas") {
    Region2D sq{{0.0, 1.0}, [](double) { return 0.0; }, [](double) { return 1.0; }};
    CHECK(integrate_region_2d([](double, double) { return 1.0; }, sq, 16) ==
          doctest::Approx(1.0).epsilon(1e-12));

    Region2D tri{{0.0, 1.0}, [](double) { return 0.0; }, [](double x) { return 1.0 - x; }};
    CHECK(integrate_region_2d([](double, double) { return 1.0; }, tri, 16) ==
          doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("integrate_region_2d exponential region vs independent oracle") {
    // exp(-x1-x2) over {(x1+1)(x2+1) < e^{1/2}, x_i > 0}; the frozen value was
    // produced by nested adaptive quadrature in an independent tool
    const double kFrozen = 0.1194109812447246;
    const double q = 0.5, th = 1.0;
    Region2D r{{0.0, std::exp(q) / th - th}, [](double) { return 0.0; },
               [q, th](double x1) { return std::exp(q) / (x1 + th) - th; }};
    auto f = [](double x1, double x2) { return std::exp(-x1 - x2); };
    CHECK(integrate_region_2d(f, r, 16) == doctest::Approx(kFrozen).epsilon(1e-9));

    // in-test independent backend: nested adaptive Simpson over the same region
    auto inner = [&](double x1) {
        const double hi = std::exp(q) / (x1 + th) - th;
        if (hi <= 0.0) return 0.0;
        return adaptive_simpson([x1](double x2) { return std::exp(-x1 - x2); }, 0.0, hi, 1e-12,
                                40);
    };
    const double simpson = adaptive_simpson(inner, 0.0, std::exp(q) / th - th, 1e-11, 40);
    CHECK(simpson == doctest::Approx(kFrozen).epsilon(1e-9));
}

TEST_CASE("integrate_region_2d flags non-convergence") {
    Region2D sq{{0.0, 1.0}, [](double) { return 0.0; }, [](double) { return 1.0; }};
    auto wild = [](double x1, double x2) { return std::cos(5.0e4 * x1 * x2); };
    CHECK_THROWS_AS(integrate_region_2d(wild, sq, 8), NonConvergent);
}

TEST_CASE("central_difference") {
    CHECK(central_difference([](double t) { return t * t; }, 1.0, 0.01) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(central_difference([](double) { return 3.5; }, 0.3, 0.2) == 0.0);
    // cubic: exact value 3 t^2 + delta^2
    CHECK(central_difference([](double t) { return t * t * t; }, 1.0, 0.1) ==
          doctest::Approx(3.01).epsilon(1e-12));
}

TEST_CASE("mollify_1d") {
    auto constf = [](double) { return 2.75; };
    CHECK(mollify_1d(constf, 3, 0.4) == doctest::Approx(2.75).epsilon(1e-10));

    auto step = [](double z) { return z > 0.0 ? 1.0 : 0.0; };
    CHECK(mollify_1d(step, 4, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    // kernel support 1/j = 0.1 misses the jump entirely at y = 0.2
    CHECK(mollify_1d(step, 10, 0.2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mollify_1d(step, 10, -0.2) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mollifier uniform convergence off the discontinuity") {
    auto step = [](double z) { return z > 0.0 ? 1.0 : 0.0; };
    for (int j : {2, 5, 20}) {
        double worst = 0.0;
        for (double y = -3.0; y <= 3.0; y += 0.01) {
            if (std::abs(y) < 2.0 / j) continue;
            worst = std::max(worst, std::abs(mollify_1d(step, j, y) - step(y)));
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("leibniz rules: disk derivative is 2 pi theta") {
    const auto cases = builtin_moving_domain_cases();
    const auto& disk = cases[0];
    const LeibnizCheck chk = verify_leibniz_rules(disk, 1.0);
    CHECK(chk.surface_form == doctest::Approx(2.0 * M_PI).epsilon(1e-8));
    CHECK(chk.divergence_form == doctest::Approx(2.0 * M_PI).epsilon(1e-8));
    CHECK(chk.reference == doctest::Approx(2.0 * M_PI).epsilon(1e-7));
}

TEST_CASE("leibniz rules: moving square, constant integrand") {
    const auto cases = builtin_moving_domain_cases();
    const LeibnizCheck chk = verify_leibniz_rules(cases[1], 0.5);
    CHECK(chk.surface_form == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(chk.divergence_form == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("leibniz rules: moving square, linear integrand, FD reference first") {
    const auto cases = builtin_moving_domain_cases();
    const auto& c = cases[2];
    // reference derivative of the plain domain integral comes first, then the
    // two rule forms must reproduce it
    const double reference = central_difference(
        [&](double th) {
            return c.domain_integral([&](const Vec& x) { return c.integrand(x, th); }, th);
        },
        1.0, 1e-4);
    const LeibnizCheck chk = verify_leibniz_rules(c, 1.0);
    CHECK(chk.reference == doctest::Approx(reference).epsilon(1e-12));
    CHECK(std::abs(chk.surface_form - chk.divergence_form) < 1e-6);
    CHECK(std::abs(chk.surface_form - reference) < 1e-5);
    CHECK(reference == doctest::Approx(3.0).epsilon(1e-7));  // d/dtheta theta^3
}

TEST_CASE("moving-domain velocity matches the map derivative") {
    for (const auto& c : builtin_moving_domain_cases()) {
        RandomStream rng(11, 0, 0);
        for (int t = 0; t < 40; ++t) {
            const double th = 0.8 + 0.4 * rng.uniform();
            const Vec u{0.2 + 0.4 * rng.uniform(), 0.2 + 0.4 * rng.uniform()};
            const Vec x = c.phi_map(u, th);
            for (int i = 0; i < 2; ++i) {
                const double fd = central_difference(
                    [&](double t2) { return c.phi_map(c.phi_inverse(x, th), t2)[i]; }, th, 1e-5);
                CHECK(c.velocity(x, th)[i] == doctest::Approx(fd).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("graded quadrature handles endpoint singularities") {
    // integral of x^{-1/2} over (0,1) equals 2
    const double v = integrate_1d_graded([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0,
                                         45, 16);
    CHECK(v == doctest::Approx(2.0).epsilon(1e-9));
}
