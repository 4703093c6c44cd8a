#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "leibniz/models.hpp"
#include "leibniz/transforms.hpp"

using namespace leibniz;

namespace {

Transform scaling_transform() {  // g = x / theta
    Transform t;
    t.dim = 2;
    t.coords = {0, 1};
    t.g = [](const Vec& x, double th) { return Vec{x[0] / th, x[1] / th}; };
    t.jacobian = [](const Vec&, double th) {
        return SmallMatrix::diagonal(Vec{1.0 / th, 1.0 / th});
    };
    t.dtheta_g = [](const Vec& x, double th) {
        return Vec{-x[0] / (th * th), -x[1] / (th * th)};
    };
    t.div_s = [](const Vec&, double th) { return -2.0 / th; };
    return t;
}

Transform shift_transform() {  // g = x - theta * (1,1)
    Transform t;
    t.dim = 2;
    t.coords = {0, 1};
    t.g = [](const Vec& x, double th) { return Vec{x[0] - th, x[1] - th}; };
    t.jacobian = [](const Vec&, double) { return SmallMatrix::identity(2); };
    t.dtheta_g = [](const Vec&, double) { return Vec{-1.0, -1.0}; };
    t.div_s = [](const Vec&, double) { return 0.0; };
    return t;
}

}  // namespace

TEST_CASE("s_vector closed forms") {
    const auto d = make_joint(make_independence(), make_exponential(1.0), make_exponential(1.0));
    const Model inv = model_log_inventory(d, 0.5);
    const Vec s_log = s_vector(*inv.transform, Vec{0.3, 1.7}, 1.2);
    CHECK(s_log[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s_log[1] == doctest::Approx(1.0).epsilon(1e-14));

    const Vec s_scale = s_vector(scaling_transform(), Vec{0.4, 0.9}, 2.0);
    CHECK(s_scale[0] == doctest::Approx(-0.2).epsilon(1e-14));
    CHECK(s_scale[1] == doctest::Approx(-0.45).epsilon(1e-14));

    const Vec s_shift = s_vector(shift_transform(), Vec{5.0, -1.0}, 3.0);
    CHECK(s_shift[0] == -1.0);
    CHECK(s_shift[1] == -1.0);
}

TEST_CASE("d_scalar") {
    const auto d = make_joint(make_independence(), make_exponential(1.0), make_exponential(1.0));
    const Model inv = model_log_inventory(d, 0.5);
    CHECK(d_scalar(*inv.transform, d, Vec{0.2, 0.4}, 1.0) == doctest::Approx(2.0).epsilon(1e-14));

    // any transform with s identically zero gives d = 0
    Transform frozen = shift_transform();
    frozen.dtheta_g = [](const Vec&, double) { return Vec{0.0, 0.0}; };
    CHECK(d_scalar(frozen, d, Vec{0.2, 0.4}, 1.0) == 0.0);

    // FGM case: d = -(score_1 + score_2), the score fixed by the oracle value
    const auto fgm = make_joint(make_fgm(1.0), make_exponential(1.0), make_exponential(1.0));
    const Model invf = model_log_inventory(fgm, 0.5);
    CHECK(d_scalar(*invf.transform, fgm, Vec{0.5, 0.5}, 1.0) ==
          doctest::Approx(2.0 * 1.2472332602985923).epsilon(1e-12));
}

TEST_CASE("inventory chart closed forms") {
    const auto chart = build_inventory_chart({log_shift_map(), log_shift_map()}, {0.0, 0.0}, 0.5);
    const double q = 0.5, th = 1.1;
    const double eq = std::exp(q);

    const Vec v{0.3, 0.8};
    const Vec x = chart.h(v, th);
    const double h1 = (eq / th - th) * v[0];
    CHECK(x[0] == doctest::Approx(h1).epsilon(1e-14));
    const double h2 = (eq / (h1 + th) - th) * v[1];
    CHECK(x[1] == doctest::Approx(h2).epsilon(1e-14));

    // with v = (1,1) the chart touches the constraint with equality
    const Vec edge = chart.h(Vec{1.0, 1.0}, th);
    CHECK(std::log(edge[0] + th) + std::log(edge[1] + th) == doctest::Approx(q).epsilon(1e-10));

    // dtheta h_1 at matching v equals -(e^q + th^2)/(th (e^q - th^2)) x_1
    const Vec D = chart.dtheta_h_at_x(x, th);
    CHECK(D[0] ==
          doctest::Approx(-(eq + th * th) / (th * (eq - th * th)) * x[0]).epsilon(1e-12));

    // and the same value through the (v, theta) route
    CHECK(chart.dtheta_h(v, th)[0] == doctest::Approx(D[0]).epsilon(1e-12));
}

TEST_CASE("inventory chart roundtrip and membership") {
    const auto chart = build_inventory_chart({log_shift_map(), log_shift_map()}, {0.0, 0.0}, 0.5);
    RandomStream rng(3, 0, 0);
    for (int t = 0; t < 10000; ++t) {
        const double th = 0.9 + 0.35 * rng.uniform();
        const Vec x{rng.exponential(1.0), rng.exponential(1.0)};
        const bool direct = std::log(x[0] + th) + std::log(x[1] + th) < 0.5;
        CHECK(chart_contains(chart, x, th) == direct);
        if (!direct) continue;
        const auto v = chart.h_inverse(x, th);
        REQUIRE(v.has_value());
        const Vec back = chart.h(*v, th);
        CHECK((back - x).norm_inf() < 1e-10);
    }
}

TEST_CASE("inventory chart theta derivatives match finite differences") {
    const auto chart = build_inventory_chart({log_shift_map(), log_shift_map()}, {0.0, 0.0}, 0.5);
    RandomStream rng(4, 0, 0);
    int done = 0;
    while (done < 200) {
        const double th = 0.9 + 0.3 * rng.uniform();
        const Vec x{rng.exponential(1.0), rng.exponential(1.0)};
        if (!chart_contains(chart, x, th)) continue;
        ++done;
        const auto v = chart.h_inverse(x, th);
        for (int i = 0; i < 2; ++i) {
            const double fd = central_difference(
                [&](double t2) { return chart.h(*v, t2)[i]; }, th, 1e-5);
            CHECK(chart.dtheta_h(*v, th)[i] ==
                  doctest::Approx(fd).epsilon(1e-5).scale(std::max(1.0, std::abs(fd))));
        }
        // cross partials against FD of the composed field D(x) = dtheta_h(h^{-1}(x))
        double fd_cross = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double h = 1e-6 * std::max(0.05, x[i]);
            Vec xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            fd_cross +=
                (chart.dtheta_h_at_x(xp, th)[i] - chart.dtheta_h_at_x(xm, th)[i]) / (2.0 * h);
        }
        CHECK(chart.cross_partials(x, th) ==
              doctest::Approx(fd_cross).epsilon(1e-4).scale(std::max(1.0, std::abs(fd_cross))));
    }
}

TEST_CASE("inventory chart infeasible theta") {
    const auto chart = build_inventory_chart({log_shift_map(), log_shift_map()}, {0.0, 0.0}, 0.5);
    // 2 log(theta) > q at theta = 2
    CHECK_THROWS_AS(chart.h(Vec{0.5, 0.5}, 2.0), InfeasibleRegion);
    CHECK_FALSE(chart_contains(chart, Vec{0.1, 0.1}, 2.0));
}

TEST_CASE("chart_contains examples") {
    const auto d = make_joint(make_independence(), make_exponential(1.0), make_exponential(1.0));
    const Model inv = model_log_inventory(d, 0.5);
    CHECK(chart_contains(*inv.chart, Vec{0.1, 0.1}, 1.0));       // 1.1*1.1 < e^0.5
    CHECK_FALSE(chart_contains(*inv.chart, Vec{1.0, 1.0}, 1.0));  // 4 > e^0.5
}

TEST_CASE("max-threshold chart is the scaled unit square") {
    const Model m = model_max_threshold(
        make_joint(make_independence(), make_uniform01(), make_uniform01()));
    const DomainChart& c = *m.chart;
    CHECK(chart_contains(c, Vec{0.3, 0.4}, 0.5));
    CHECK_FALSE(chart_contains(c, Vec{0.6, 0.4}, 0.5));
    const Vec D = c.dtheta_h_at_x(Vec{0.3, 0.4}, 0.5);
    CHECK(D[0] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(D[1] == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(c.cross_partials(Vec{0.3, 0.4}, 0.5) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("region membership") {
    RegionU r;
    r.box = {{0.0, 1.0}, {0.0, 1.0}};
    CHECK(r.contains(Vec{0.5, 0.5}));
    CHECK_FALSE(r.contains(Vec{1.5, 0.5}));
    CHECK_FALSE(r.contains(Vec{0.5, -0.1}));
}
