#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "leibniz/errors.hpp"

namespace leibniz {

// Small fixed-capacity coordinate vector. Built-in models never exceed
// five coordinates (the SAN has five edges), so no heap allocation.
class Vec {
public:
    static constexpr int kMaxDim = 8;

    Vec() = default;
    explicit Vec(int n, double fill = 0.0) : n_(n) {
        for (int i = 0; i < n_; ++i) a_[i] = fill;
    }
    Vec(std::initializer_list<double> init) : n_(static_cast<int>(init.size())) {
        int i = 0;
        for (double v : init) a_[i++] = v;
    }

    int size() const { return n_; }
    double& operator[](int i) { return a_[i]; }
    double operator[](int i) const { return a_[i]; }

    double dot(const Vec& o) const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += a_[i] * o.a_[i];
        return s;
    }
    double norm_inf() const {
        double m = 0.0;
        for (int i = 0; i < n_; ++i) m = std::max(m, std::abs(a_[i]));
        return m;
    }
    bool all_finite() const {
        for (int i = 0; i < n_; ++i)
            if (!std::isfinite(a_[i])) return false;
        return true;
    }

    const double* begin() const { return a_.data(); }
    const double* end() const { return a_.data() + n_; }

private:
    std::array<double, kMaxDim> a_{};
    int n_ = 0;
};

inline Vec operator+(const Vec& x, const Vec& y) {
    Vec r(x.size());
    for (int i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
    return r;
}
inline Vec operator-(const Vec& x, const Vec& y) {
    Vec r(x.size());
    for (int i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
    return r;
}
inline Vec operator*(double c, const Vec& x) {
    Vec r(x.size());
    for (int i = 0; i < x.size(); ++i) r[i] = c * x[i];
    return r;
}

// Dense n-by-n matrix, n <= 4. Determinants use closed forms up to n = 3
// and partially pivoted elimination at n = 4.
struct SmallMatrix {
    int n = 0;
    double m[4][4] = {};

    static SmallMatrix identity(int n);
    static SmallMatrix diagonal(const Vec& d);

    double det() const;
    // Throws SingularMatrix when |det| <= 1e-12; for Jacobian use this flags a
    // point where the transform is not locally invertible.
    SmallMatrix inverse(double* det_out = nullptr) const;
    Vec solve(const Vec& b) const;
    Vec mul(const Vec& x) const;
    SmallMatrix mul(const SmallMatrix& o) const;
};

constexpr double kSingularDetThreshold = 1e-12;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return x > lo && x < hi; }
};

struct Region2D {
    Interval x1_range;
    std::function<double(double)> x2_lower;
    std::function<double(double)> x2_upper;
};

struct GaussLegendreRule {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;
};

// Cached Gauss-Legendre rules (thread safe).
const GaussLegendreRule& gauss_legendre(int order);

double integrate_1d(const std::function<double(double)>& f, double a, double b, int order);

// Composite rule on dyadically graded panels toward both endpoints; handles
// integrable endpoint singularities that a single global rule cannot.
double integrate_1d_graded(const std::function<double(double)>& f, double a, double b,
                           int levels = 40, int order = 16);

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 40);

struct QuadratureReport {
    double value = 0.0;
    double err_estimate = 0.0;  // last refinement difference
    int final_order = 0;
};

// Tensor Gauss-Legendre over a Region2D with order doubling from `order`
// until the refinement difference drops below 1e-8 (or the order cap).
// Throws NonConvergent when the last difference exceeds 1e-6.
double integrate_region_2d(const std::function<double(double, double)>& f, const Region2D& r,
                           int order);
QuadratureReport integrate_region_2d_report(const std::function<double(double, double)>& f,
                                            const Region2D& r, int order);

double central_difference(const std::function<double(double)>& fn, double t, double delta);

// Convolution of phi with the bump mollifier q_j(z) = j*phi0(j z), where
// phi0 is exp(-1/(1-z^2)) on |z|<1 normalized to unit mass.
double mollify_1d(const std::function<double(double)>& phi, int j, double y);

// A bounded domain D_theta = phi_map(U, theta) moving with theta, together
// with everything needed to evaluate both Leibniz rules on it.
struct MovingDomainCase {
    std::string name;
    std::function<double(const Vec&, double)> integrand;         // G(x, theta)
    std::function<double(const Vec&, double)> dtheta_integrand;  // dG/dtheta
    std::function<Vec(const Vec&, double)> grad_integrand;       // grad_x G
    std::function<Vec(const Vec&, double)> velocity;             // v(x, theta)
    std::function<double(const Vec&, double)> div_velocity;
    std::function<Vec(const Vec&, double)> phi_map;      // u -> x
    std::function<Vec(const Vec&, double)> phi_inverse;  // x -> u

    struct BoundarySegment {
        std::function<Vec(double, double)> gamma;      // t in [0,1] -> boundary point
        std::function<Vec(double, double)> dgamma_dt;  // tangent (arclength weight)
        std::function<Vec(double, double)> normal;     // outward unit normal
    };
    std::vector<BoundarySegment> boundary;

    // Case-adapted interior quadrature of f over D_theta (polar for the disk,
    // cartesian tensor for the squares).
    std::function<double(const std::function<double(const Vec&)>&, double)> domain_integral;
};

struct LeibnizCheck {
    double surface_form = 0.0;     // boundary flux + interior dtheta term
    double divergence_form = 0.0;  // all-volume form
    double reference = 0.0;        // central difference of the domain integral
};

// Evaluates both sides of the Leibniz integral rule and the Leibniz
// divergence rule plus a finite-difference reference (delta = 1e-4).
LeibnizCheck verify_leibniz_rules(const MovingDomainCase& c, double theta);

// Disk of radius theta (G == 1), square (0,theta)^2 with G == 1, and the
// same square with G = x1 + x2.
std::vector<MovingDomainCase> builtin_moving_domain_cases();

}  // namespace leibniz
