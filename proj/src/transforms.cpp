#include "leibniz/transforms.hpp"

#include <cmath>
#include <memory>

#include "leibniz/errors.hpp"

namespace leibniz {

Vec s_vector(const Transform& t, const Vec& x, double theta) {
    const SmallMatrix J = t.jacobian(x, theta);
    return J.solve(t.dtheta_g(x, theta));
}

double d_scalar(const Transform& t, const Vec& score, const Vec& x, double theta) {
    const Vec s = s_vector(t, x, theta);
    double sdot = 0.0;
    for (int k = 0; k < t.dim; ++k) sdot += s[k] * score[t.coords[k]];
    return -(sdot + t.div_s(x, theta));
}

double d_scalar(const Transform& t, const JointDensity2& d, const Vec& x, double theta) {
    return d_scalar(t, d.score_x(x), x, theta);
}

bool chart_contains(const DomainChart& c, const Vec& x, double theta) {
    const auto v = c.h_inverse(x, theta);
    return v.has_value() && c.in_v(*v);
}

namespace {

struct ChartWork {
    Vec upper;   // u_i, the feasible upper endpoint of coordinate i
    Vec dtheta;  // D_i = dtheta h_i at the matching v
    bool feasible = true;
};

// Shared forward recursion. Given the first `i` coordinates fixed at x
// (either from h evaluation or from an inversion), computes the feasible
// endpoint u_i and the theta-derivative D_i of coordinate i.
class InventoryChart {
public:
    InventoryChart(std::vector<MonotoneMap> maps, std::vector<double> a, double q)
        : maps_(std::move(maps)), a_(std::move(a)), q_(q), n_(static_cast<int>(a_.size())) {}

    int dim() const { return n_; }

    double tail_at_floor(int i, double theta) const {
        double s = 0.0;
        for (int j = i + 1; j < n_; ++j) s += maps_[j].z(a_[j], theta);
        return s;
    }

    bool feasible(double theta) const {
        double s = 0.0;
        for (int j = 0; j < n_; ++j) s += maps_[j].z(a_[j], theta);
        return s <= q_;
    }

    // Upper endpoint for coordinate i given x_{<i}.
    double upper(int i, const Vec& x, double theta) const {
        double c = q_ - tail_at_floor(i, theta);
        for (int j = 0; j < i; ++j) c -= maps_[j].z(x[j], theta);
        return maps_[i].z_inv(c, theta);
    }

    Vec h(const Vec& v, double theta) const {
        if (!feasible(theta))
            throw InfeasibleRegion("inventory chart: sum z_i(a_i) exceeds q");
        Vec x(n_);
        for (int i = 0; i < n_; ++i) {
            const double u = upper(i, x, theta);
            x[i] = (u - a_[i]) * v[i] + a_[i];
        }
        return x;
    }

    std::optional<Vec> h_inverse(const Vec& x, double theta) const {
        if (!feasible(theta)) return std::nullopt;
        Vec v(n_);
        for (int i = 0; i < n_; ++i) {
            const double u = upper(i, x, theta);
            const double len = u - a_[i];
            if (!(len > 0.0)) return std::nullopt;  // prefix already infeasible
            v[i] = (x[i] - a_[i]) / len;
        }
        return v;
    }

    // D_i(x) = dtheta h_i at v = h^{-1}(x) by the chain rule through the
    // recursion; each D_i depends on x_i only through the factor (x_i - a_i).
    Vec dtheta_at_x(const Vec& x, double theta) const {
        Vec D(n_);
        for (int i = 0; i < n_; ++i) {
            double c = q_ - tail_at_floor(i, theta);
            double dc = 0.0;
            for (int j = i + 1; j < n_; ++j) dc -= maps_[j].dtheta_z(a_[j], theta);
            for (int j = 0; j < i; ++j) {
                c -= maps_[j].z(x[j], theta);
                dc -= maps_[j].dx_z(x[j], theta) * D[j] + maps_[j].dtheta_z(x[j], theta);
            }
            const double u = maps_[i].z_inv(c, theta);
            // d/dtheta of z^{-1}(c(theta), theta)
            const double du = dc / maps_[i].dx_z(u, theta) + maps_[i].dtheta_z_inv(c, theta);
            const double len = u - a_[i];
            D[i] = du * (x[i] - a_[i]) / len;
        }
        return D;
    }

    Vec dtheta_at_v(const Vec& v, double theta) const {
        return dtheta_at_x(h(v, theta), theta);
    }

    double cross_partials(const Vec& x, double theta) const {
        const Vec D = dtheta_at_x(x, theta);
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += D[i] / (x[i] - a_[i]);
        return s;
    }

private:
    std::vector<MonotoneMap> maps_;
    std::vector<double> a_;
    double q_;
    int n_;
};

}  // namespace

DomainChart build_inventory_chart(std::vector<MonotoneMap> maps, std::vector<double> a, double q) {
    auto core = std::make_shared<InventoryChart>(std::move(maps), std::move(a), q);
    DomainChart c;
    c.dim = core->dim();
    c.h = [core](const Vec& v, double th) { return core->h(v, th); };
    c.h_inverse = [core](const Vec& x, double th) { return core->h_inverse(x, th); };
    c.in_v = [n = core->dim()](const Vec& v) {
        for (int i = 0; i < n; ++i)
            if (!(v[i] > 0.0 && v[i] < 1.0)) return false;
        return true;
    };
    c.dtheta_h = [core](const Vec& v, double th) { return core->dtheta_at_v(v, th); };
    c.dtheta_h_at_x = [core](const Vec& x, double th) { return core->dtheta_at_x(x, th); };
    c.cross_partials = [core](const Vec& x, double th) { return core->cross_partials(x, th); };
    return c;
}

MonotoneMap log_shift_map() {
    MonotoneMap m;
    m.z = [](double x, double th) { return std::log(x + th); };
    m.dx_z = [](double x, double th) { return 1.0 / (x + th); };
    m.dtheta_z = [](double x, double th) { return 1.0 / (x + th); };
    m.z_inv = [](double c, double th) { return std::exp(c) - th; };
    m.dtheta_z_inv = [](double, double) { return -1.0; };
    return m;
}

}  // namespace leibniz
