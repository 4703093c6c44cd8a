#include "leibniz/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace leibniz {

SmallMatrix SmallMatrix::identity(int n) {
    SmallMatrix r;
    r.n = n;
    for (int i = 0; i < n; ++i) r.m[i][i] = 1.0;
    return r;
}

SmallMatrix SmallMatrix::diagonal(const Vec& d) {
    SmallMatrix r;
    r.n = d.size();
    for (int i = 0; i < r.n; ++i) r.m[i][i] = d[i];
    return r;
}

double SmallMatrix::det() const {
    switch (n) {
        case 1:
            return m[0][0];
        case 2:
            return m[0][0] * m[1][1] - m[0][1] * m[1][0];
        case 3:
            return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                   m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                   m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        case 4: {
            // LU with partial pivoting
            double a[4][4];
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) a[i][j] = m[i][j];
            double d = 1.0;
            for (int k = 0; k < 4; ++k) {
                int p = k;
                for (int i = k + 1; i < 4; ++i)
                    if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
                if (p != k) {
                    for (int j = 0; j < 4; ++j) std::swap(a[k][j], a[p][j]);
                    d = -d;
                }
                if (a[k][k] == 0.0) return 0.0;
                d *= a[k][k];
                for (int i = k + 1; i < 4; ++i) {
                    const double f = a[i][k] / a[k][k];
                    for (int j = k; j < 4; ++j) a[i][j] -= f * a[k][j];
                }
            }
            return d;
        }
        default:
            throw std::logic_error("SmallMatrix: unsupported dimension");
    }
}

namespace {

// Gaussian elimination solve used for n == 4 (and as a fallback).
Vec solve_lu(const SmallMatrix& A, const Vec& b) {
    const int n = A.n;
    double a[4][5];
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a[i][j] = A.m[i][j];
        a[i][n] = b[i];
    }
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
        if (std::abs(a[p][k]) < kSingularDetThreshold)
            throw SingularMatrix("solve: pivot below threshold");
        if (p != k)
            for (int j = 0; j <= n; ++j) std::swap(a[k][j], a[p][j]);
        for (int i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            for (int j = k; j <= n; ++j) a[i][j] -= f * a[k][j];
        }
    }
    Vec x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = a[i][n];
        for (int j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

}  // namespace

SmallMatrix SmallMatrix::inverse(double* det_out) const {
    const double d = det();
    if (det_out) *det_out = d;
    if (std::abs(d) <= kSingularDetThreshold)
        throw SingularMatrix("inverse: |det| <= 1e-12");
    SmallMatrix r;
    r.n = n;
    switch (n) {
        case 1:
            r.m[0][0] = 1.0 / d;
            break;
        case 2:
            r.m[0][0] = m[1][1] / d;
            r.m[0][1] = -m[0][1] / d;
            r.m[1][0] = -m[1][0] / d;
            r.m[1][1] = m[0][0] / d;
            break;
        case 3:
            r.m[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
            r.m[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
            r.m[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
            r.m[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
            r.m[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
            r.m[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
            r.m[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
            r.m[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
            r.m[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
            break;
        case 4:
            for (int j = 0; j < 4; ++j) {
                Vec e(4);
                e[j] = 1.0;
                Vec col = solve_lu(*this, e);
                for (int i = 0; i < 4; ++i) r.m[i][j] = col[i];
            }
            break;
        default:
            throw std::logic_error("SmallMatrix: unsupported dimension");
    }
    return r;
}

Vec SmallMatrix::solve(const Vec& b) const {
    if (std::abs(det()) <= kSingularDetThreshold)
        throw SingularMatrix("solve: |det| <= 1e-12");
    if (n <= 3) {
        double d;
        return inverse(&d).mul(b);
    }
    return solve_lu(*this, b);
}

Vec SmallMatrix::mul(const Vec& x) const {
    Vec r(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += m[i][j] * x[j];
        r[i] = s;
    }
    return r;
}

SmallMatrix SmallMatrix::mul(const SmallMatrix& o) const {
    SmallMatrix r;
    r.n = n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += m[i][k] * o.m[k][j];
            r.m[i][j] = s;
        }
    return r;
}

const GaussLegendreRule& gauss_legendre(int order) {
    static std::map<int, GaussLegendreRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    GaussLegendreRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Newton iteration on the Legendre polynomial, Chebyshev initial guess.
        double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < order; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = order * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    auto [pos, _] = cache.emplace(order, std::move(rule));
    return pos->second;
}

double integrate_1d(const std::function<double(double)>& f, double a, double b, int order) {
    const auto& rule = gauss_legendre(order);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < order; ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return s * half;
}

double integrate_1d_graded(const std::function<double(double)>& f, double a, double b,
                           int levels, int order) {
    // Dyadic panels from the midpoint toward each endpoint, plus a closing
    // sliver at each end integrated with one rule.
    const double mid = 0.5 * (a + b);
    double total = 0.0;
    double right = mid;  // shrink toward a
    for (int k = 0; k < levels; ++k) {
        const double left = a + (right - a) * 0.5;
        total += integrate_1d(f, left, right, order);
        right = left;
    }
    total += integrate_1d(f, a, right, order);
    double left = mid;  // shrink toward b
    for (int k = 0; k < levels; ++k) {
        const double r2 = b - (b - left) * 0.5;
        total += integrate_1d(f, left, r2, order);
        left = r2;
    }
    total += integrate_1d(f, left, b, order);
    return total;
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) return left + right + delta / 15.0;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

namespace {

double region_2d_fixed(const std::function<double(double, double)>& f, const Region2D& r,
                       int order) {
    const auto& rule = gauss_legendre(order);
    const double mid = 0.5 * (r.x1_range.lo + r.x1_range.hi);
    const double half = 0.5 * (r.x1_range.hi - r.x1_range.lo);
    double total = 0.0;
    for (int i = 0; i < order; ++i) {
        const double x1 = mid + half * rule.nodes[i];
        const double lo2 = r.x2_lower(x1), hi2 = r.x2_upper(x1);
        if (!(hi2 > lo2)) continue;  // empty column
        const double mid2 = 0.5 * (lo2 + hi2), half2 = 0.5 * (hi2 - lo2);
        double col = 0.0;
        for (int j = 0; j < order; ++j)
            col += rule.weights[j] * f(x1, mid2 + half2 * rule.nodes[j]);
        total += rule.weights[i] * col * half2;
    }
    return total * half;
}

}  // namespace

QuadratureReport integrate_region_2d_report(const std::function<double(double, double)>& f,
                                            const Region2D& r, int order) {
    constexpr int kMaxOrder = 2048;
    int o = std::max(order, 8);
    double prev = region_2d_fixed(f, r, o);
    double diff = std::numeric_limits<double>::infinity();
    while (o < kMaxOrder) {
        o *= 2;
        const double cur = region_2d_fixed(f, r, o);
        diff = std::abs(cur - prev);
        prev = cur;
        if (diff < 1e-8) return {cur, diff, o};
    }
    if (diff > 1e-6)
        throw NonConvergent("integrate_region_2d: refinement difference " + std::to_string(diff));
    return {prev, diff, o};
}

double integrate_region_2d(const std::function<double(double, double)>& f, const Region2D& r,
                           int order) {
    return integrate_region_2d_report(f, r, order).value;
}

double central_difference(const std::function<double(double)>& fn, double t, double delta) {
    return (fn(t + delta) - fn(t - delta)) / (2.0 * delta);
}

namespace {

double bump_unnormalized(double z) {
    if (std::abs(z) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - z * z));
}

double bump_mass() {
    // Computed once; composite rule so the constant does not share nodes with
    // the convolution quadrature (keeps the constant-function test honest).
    static const double mass = [] {
        double s = 0.0;
        const int panels = 8;
        for (int p = 0; p < panels; ++p) {
            const double a = -1.0 + 2.0 * p / panels;
            const double b = -1.0 + 2.0 * (p + 1) / panels;
            s += integrate_1d(bump_unnormalized, a, b, 48);
        }
        return s;
    }();
    return mass;
}

}  // namespace

double mollify_1d(const std::function<double(double)>& phi, int j, double y) {
    // (phi * q_j)(y) with q_j(z) = j*phi0(j z); substituting z = t/j collapses
    // the support to t in (-1, 1).
    const double norm = bump_mass();
    const auto& rule = gauss_legendre(64);
    double s = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = rule.nodes[i];
        s += rule.weights[i] * phi(y - t / j) * bump_unnormalized(t);
    }
    return s / norm;
}

LeibnizCheck verify_leibniz_rules(const MovingDomainCase& c, double theta) {
    LeibnizCheck out;

    // Boundary flux of G * (v . n), composite Gauss-Legendre over 256 panels
    // per segment in the arclength parametrization.
    double flux = 0.0;
    const int panels = 256;
    const auto& rule = gauss_legendre(4);
    for (const auto& seg : c.boundary) {
        for (int p = 0; p < panels; ++p) {
            const double a = static_cast<double>(p) / panels;
            const double b = static_cast<double>(p + 1) / panels;
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (size_t i = 0; i < rule.nodes.size(); ++i) {
                const double t = mid + half * rule.nodes[i];
                const Vec x = seg.gamma(t, theta);
                const Vec tang = seg.dgamma_dt(t, theta);
                const Vec n = seg.normal(t, theta);
                const double speed = std::sqrt(tang.dot(tang));
                const double vn = c.velocity(x, theta).dot(n);
                flux += rule.weights[i] * half * c.integrand(x, theta) * vn * speed;
            }
        }
    }
    const double interior_dtheta =
        c.domain_integral([&](const Vec& x) { return c.dtheta_integrand(x, theta); }, theta);
    out.surface_form = flux + interior_dtheta;

    out.divergence_form = c.domain_integral(
        [&](const Vec& x) {
            const Vec v = c.velocity(x, theta);
            const double divGv =
                c.grad_integrand(x, theta).dot(v) + c.integrand(x, theta) * c.div_velocity(x, theta);
            return divGv + c.dtheta_integrand(x, theta);
        },
        theta);

    out.reference = central_difference(
        [&](double th) {
            return c.domain_integral([&](const Vec& x) { return c.integrand(x, th); }, th);
        },
        theta, 1e-4);
    return out;
}

namespace {

MovingDomainCase make_disk_case() {
    MovingDomainCase c;
    c.name = "disk_radius_theta_G1";
    c.integrand = [](const Vec&, double) { return 1.0; };
    c.dtheta_integrand = [](const Vec&, double) { return 0.0; };
    c.grad_integrand = [](const Vec&, double) { return Vec{0.0, 0.0}; };
    c.phi_map = [](const Vec& u, double th) { return Vec{th * u[0], th * u[1]}; };
    c.phi_inverse = [](const Vec& x, double th) { return Vec{x[0] / th, x[1] / th}; };
    c.velocity = [](const Vec& x, double th) { return Vec{x[0] / th, x[1] / th}; };
    c.div_velocity = [](const Vec&, double th) { return 2.0 / th; };
    MovingDomainCase::BoundarySegment seg;
    seg.gamma = [](double t, double th) {
        return Vec{th * std::cos(2.0 * M_PI * t), th * std::sin(2.0 * M_PI * t)};
    };
    seg.dgamma_dt = [](double t, double th) {
        return Vec{-2.0 * M_PI * th * std::sin(2.0 * M_PI * t),
                   2.0 * M_PI * th * std::cos(2.0 * M_PI * t)};
    };
    seg.normal = [](double t, double) {
        return Vec{std::cos(2.0 * M_PI * t), std::sin(2.0 * M_PI * t)};
    };
    c.boundary.push_back(seg);
    c.domain_integral = [](const std::function<double(const Vec&)>& f, double th) {
        // polar coordinates keep the integrand smooth up to the rim
        const auto& rad = gauss_legendre(64);
        const auto& ang = gauss_legendre(128);
        double s = 0.0;
        for (size_t i = 0; i < rad.nodes.size(); ++i) {
            const double r = 0.5 * th * (rad.nodes[i] + 1.0);
            double ring = 0.0;
            for (size_t k = 0; k < ang.nodes.size(); ++k) {
                const double a = M_PI * (ang.nodes[k] + 1.0);
                ring += ang.weights[k] * f(Vec{r * std::cos(a), r * std::sin(a)});
            }
            s += rad.weights[i] * ring * r;
        }
        return s * (0.5 * th) * M_PI;
    };
    return c;
}

MovingDomainCase make_square_case(bool linear_integrand) {
    MovingDomainCase c;
    c.name = linear_integrand ? "square_theta_G_x1px2" : "square_theta_G1";
    if (linear_integrand) {
        c.integrand = [](const Vec& x, double) { return x[0] + x[1]; };
        c.grad_integrand = [](const Vec&, double) { return Vec{1.0, 1.0}; };
    } else {
        c.integrand = [](const Vec&, double) { return 1.0; };
        c.grad_integrand = [](const Vec&, double) { return Vec{0.0, 0.0}; };
    }
    c.dtheta_integrand = [](const Vec&, double) { return 0.0; };
    c.phi_map = [](const Vec& u, double th) { return Vec{th * u[0], th * u[1]}; };
    c.phi_inverse = [](const Vec& x, double th) { return Vec{x[0] / th, x[1] / th}; };
    c.velocity = [](const Vec& x, double th) { return Vec{x[0] / th, x[1] / th}; };
    c.div_velocity = [](const Vec&, double th) { return 2.0 / th; };

    // four edges of (0,theta)^2, outward normals
    auto edge = [](Vec (*g)(double, double), Vec t, Vec n) {
        MovingDomainCase::BoundarySegment seg;
        seg.gamma = g;
        seg.dgamma_dt = [t](double, double th) { return Vec{t[0] * th, t[1] * th}; };
        seg.normal = [n](double, double) { return n; };
        return seg;
    };
    c.boundary.push_back(edge([](double t, double th) { return Vec{th * t, 0.0}; },
                              Vec{1.0, 0.0}, Vec{0.0, -1.0}));
    c.boundary.push_back(edge([](double t, double th) { return Vec{th, th * t}; },
                              Vec{0.0, 1.0}, Vec{1.0, 0.0}));
    c.boundary.push_back(edge([](double t, double th) { return Vec{th * (1.0 - t), th}; },
                              Vec{-1.0, 0.0}, Vec{0.0, 1.0}));
    c.boundary.push_back(edge([](double t, double th) { return Vec{0.0, th * (1.0 - t)}; },
                              Vec{0.0, -1.0}, Vec{-1.0, 0.0}));

    c.domain_integral = [](const std::function<double(const Vec&)>& f, double th) {
        const auto& rule = gauss_legendre(64);
        double s = 0.0;
        for (size_t i = 0; i < rule.nodes.size(); ++i) {
            const double x1 = 0.5 * th * (rule.nodes[i] + 1.0);
            double col = 0.0;
            for (size_t j = 0; j < rule.nodes.size(); ++j) {
                const double x2 = 0.5 * th * (rule.nodes[j] + 1.0);
                col += rule.weights[j] * f(Vec{x1, x2});
            }
            s += rule.weights[i] * col;
        }
        return s * 0.25 * th * th;
    };
    return c;
}

}  // namespace

std::vector<MovingDomainCase> builtin_moving_domain_cases() {
    std::vector<MovingDomainCase> cases;
    cases.push_back(make_disk_case());
    cases.push_back(make_square_case(false));
    cases.push_back(make_square_case(true));
    return cases;
}

}  // namespace leibniz
