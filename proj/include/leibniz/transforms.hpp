#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "leibniz/distributions.hpp"
#include "leibniz/numerics.hpp"

namespace leibniz {

// Change-of-variables record y = g(x, theta). For models where g acts on a
// subset of the coordinates (the SAN conditions on the rest), `coords` names
// the transformed coordinates and the Jacobian is square on them.
struct Transform {
    int dim = 0;                  // dimension of y
    std::vector<int> coords;     // transformed coordinates of x (size dim)
    std::function<Vec(const Vec&, double)> g;
    std::function<SmallMatrix(const Vec&, double)> jacobian;  // dg/dx over coords
    std::function<Vec(const Vec&, double)> dtheta_g;
    std::function<double(const Vec&, double)> div_s;  // analytic divergence of s
    bool image_theta_independent = false;
    std::string image_note;
};

// s = J_g^{-1} dg/dtheta by direct solve; no inverse is formed.
Vec s_vector(const Transform& t, const Vec& x, double theta);

// d = div(-f s)/f computed through the product identity
// d = -(s . grad_x log f + div s); avoids differencing the density.
double d_scalar(const Transform& t, const Vec& score, const Vec& x, double theta);
double d_scalar(const Transform& t, const JointDensity2& d, const Vec& x, double theta);

struct RegionU {
    std::vector<Interval> box;
    bool contains(const Vec& y) const {
        for (size_t i = 0; i < box.size(); ++i)
            if (!(y[static_cast<int>(i)] > box[i].lo && y[static_cast<int>(i)] < box[i].hi))
                return false;
        return true;
    }
};

// Parametrization x = h(v, theta) of the indicator-selected region.
struct DomainChart {
    int dim = 0;
    std::function<Vec(const Vec&, double)> h;
    // Forward-recursive inverse; empty when x is provably outside the image.
    std::function<std::optional<Vec>(const Vec&, double)> h_inverse;
    std::function<bool(const Vec&)> in_v;               // membership in V
    std::function<Vec(const Vec&, double)> dtheta_h;    // at (v, theta)
    std::function<Vec(const Vec&, double)> dtheta_h_at_x;  // D(x) = dtheta_h o h^{-1}
    std::function<double(const Vec&, double)> cross_partials;  // sum_i d/dx_i D_i
};

bool chart_contains(const DomainChart& c, const Vec& x, double theta);

// One coordinate map z_i(x_i, theta) for the recursive inventory chart:
// strictly increasing and invertible in x_i.
struct MonotoneMap {
    std::function<double(double, double)> z;
    std::function<double(double, double)> dx_z;
    std::function<double(double, double)> dtheta_z;
    std::function<double(double, double)> z_inv;         // z^{-1}(c, theta)
    std::function<double(double, double)> dtheta_z_inv;  // partial wrt theta at fixed c
};

// Chart over V = (0,1)^n whose image is the region where every prefix sum
// of z_i(x_i, theta) stays at or below q. h evaluates
//   h_i(v) = (z_i^{-1}(q - sum_{j<i} z_j(h_j) - sum_{j>i} z_j(a_j)) - a_i) v_i + a_i
// and inverts by forward recursion. Throws InfeasibleRegion from h when
// sum_i z_i(a_i, theta) > q.
DomainChart build_inventory_chart(std::vector<MonotoneMap> maps, std::vector<double> a, double q);

MonotoneMap log_shift_map();  // z(x, theta) = log(x + theta)

}  // namespace leibniz
