#include "leibniz/models.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "leibniz/errors.hpp"

namespace leibniz {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void wire_joint(Model& m, JointDensity2 d) {
    m.distribution_id = d.id;
    auto jd = std::make_shared<JointDensity2>(std::move(d));
    m.joint = *jd;
    m.sample = [jd](RandomStream& rng) { return jd->sample(rng); };
    m.score_x = [jd](const Vec& x) { return jd->score_x(x); };
}

void default_varphi(Model& m) {
    m.varphi = [](const Vec&, double) { return 1.0; };
    m.dtheta_varphi = [](const Vec&, double) { return 0.0; };
    m.gradx_varphi = [n = m.dim](const Vec&, double) { return Vec(n, 0.0); };
}

void collect_finite_faces(Model& m) {
    m.finite_faces.clear();
    if (!m.transform) return;
    for (int k : m.transform->coords) {
        Interval sup;
        if (m.joint)
            sup = m.joint->support(k);
        else
            sup = m.product_marginals[static_cast<size_t>(k)].support;
        if (std::isfinite(sup.lo)) m.finite_faces.push_back({k, false, sup.lo});
        if (std::isfinite(sup.hi)) m.finite_faces.push_back({k, true, sup.hi});
    }
}

}  // namespace

Model model_max_threshold(JointDensity2 d) {
    Model m;
    m.name = "max_threshold";
    m.dim = 2;
    wire_joint(m, std::move(d));
    default_varphi(m);
    m.theta_range = {0.0, 1.0};

    // g = x/theta with U = [0,1]^2; psi = 1{max(x1,x2) <= theta}
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
    t.image_note = "g((0,1)^2,theta) = (0,1/theta)^2 depends on theta";
    m.transform = t;

    m.indicator_g = t.g;
    m.region.box = {{0.0, 1.0}, {0.0, 1.0}};
    // the upper edge carries the indicator boundary; keep it closed
    m.performance = [](const Vec& x, double th) {
        return (x[0] <= th && x[1] <= th) ? 1.0 : 0.0;
    };
    m.phi_y = [](const Vec& y) { return (y[0] <= 1.0 && y[1] <= 1.0 && y[0] >= 0.0 && y[1] >= 0.0) ? 1.0 : 0.0; };

    DomainChart c;
    c.dim = 2;
    c.h = [](const Vec& v, double th) { return Vec{th * v[0], th * v[1]}; };
    c.h_inverse = [](const Vec& x, double th) {
        return std::optional<Vec>(Vec{x[0] / th, x[1] / th});
    };
    c.in_v = [](const Vec& v) {
        return v[0] > 0.0 && v[0] <= 1.0 && v[1] > 0.0 && v[1] <= 1.0;
    };
    c.dtheta_h = [](const Vec& v, double) { return v; };
    c.dtheta_h_at_x = [](const Vec& x, double th) { return Vec{x[0] / th, x[1] / th}; };
    c.cross_partials = [](const Vec&, double th) { return 2.0 / th; };
    m.chart = c;

    collect_finite_faces(m);
    return m;
}

namespace {

Transform log_shift_transform() {
    Transform t;
    t.dim = 2;
    t.coords = {0, 1};
    t.g = [](const Vec& x, double th) {
        return Vec{std::log(x[0] + th), std::log(x[1] + th)};
    };
    t.jacobian = [](const Vec& x, double th) {
        return SmallMatrix::diagonal(Vec{1.0 / (x[0] + th), 1.0 / (x[1] + th)});
    };
    t.dtheta_g = [](const Vec& x, double th) {
        return Vec{1.0 / (x[0] + th), 1.0 / (x[1] + th)};
    };
    t.div_s = [](const Vec&, double) { return 0.0; };  // s == (1,1)
    t.image_note = "g(R+^2,theta) = (log theta, inf)^2 depends on theta";
    return t;
}

}  // namespace

Model model_log_inventory(JointDensity2 d, double q) {
    Model m;
    m.name = "log_inventory";
    m.dim = 2;
    m.q = q;
    wire_joint(m, std::move(d));
    default_varphi(m);
    // the benchmark price interval starts at 1 but theta = 1 itself is a
    // Table-style evaluation point, so FD needs room just below it
    m.theta_range = {0.0, kInf};

    m.transform = log_shift_transform();
    m.performance = [q](const Vec& x, double th) {
        return (std::log(x[0] + th) + std::log(x[1] + th) < q) ? 1.0 : 0.0;
    };
    m.phi_y = [q](const Vec& y) { return (y[0] + y[1] < q) ? 1.0 : 0.0; };

    // augmented prefix-sum map; its box region matches the chart image
    m.indicator_g = [](const Vec& x, double th) {
        const double g1 = std::log(x[0] + th);
        return Vec{g1, g1 + std::log(x[1] + th)};
    };
    m.region.box = {{-kInf, q}, {-kInf, q}};

    m.chart = build_inventory_chart({log_shift_map(), log_shift_map()}, {0.0, 0.0}, q);

    collect_finite_faces(m);
    return m;
}

Model model_smooth_sum_log(JointDensity2 d) {
    Model m;
    m.name = "smooth_sum_log";
    m.dim = 2;
    wire_joint(m, std::move(d));
    default_varphi(m);
    m.theta_range = {0.0, kInf};

    m.transform = log_shift_transform();
    m.performance = [](const Vec& x, double th) {
        return std::log(x[0] + th) + std::log(x[1] + th);
    };
    m.phi_y = [](const Vec& y) { return y[0] + y[1]; };
    m.phi_smooth = true;
    m.phi_grad_y = [](const Vec&) { return Vec{1.0, 1.0}; };
    m.indicator_g = m.transform->g;
    m.region.box = {{-kInf, kInf}, {-kInf, kInf}};

    collect_finite_faces(m);
    return m;
}

SanSpec san_bridge_default() {
    SanSpec s;
    for (int i = 0; i < 5; ++i) s.edges.push_back(make_exponential(1.0));
    // paths: {1,4}, {2,5}, {1,3,5} over edges 1..5 (bridge edge 3 one-way)
    s.incidence = {{1, 0, 0, 1, 0}, {0, 1, 0, 0, 1}, {1, 0, 1, 0, 1}};
    s.transform_edges = {2, 3, 4};
    return s;
}

Model model_san(const SanSpec& spec) {
    const int n_edges = static_cast<int>(spec.edges.size());
    const int n_paths = static_cast<int>(spec.incidence.size());
    const int mdim = static_cast<int>(spec.transform_edges.size());
    if (mdim != n_paths)
        throw RankDeficientIncidence("model_san: need one transform edge per path");

    // square sub-incidence over the chosen edges
    SmallMatrix A;
    A.n = mdim;
    for (int i = 0; i < mdim; ++i)
        for (int j = 0; j < mdim; ++j)
            A.m[i][j] = spec.incidence[static_cast<size_t>(i)]
                                      [static_cast<size_t>(spec.transform_edges[static_cast<size_t>(j)])];
    if (std::abs(A.det()) <= kSingularDetThreshold)
        throw RankDeficientIncidence("model_san: chosen sub-incidence is singular");

    Model m;
    m.name = "san";
    m.dim = n_edges;
    m.distribution_id = "independent_edges";
    m.product_marginals = spec.edges;
    default_varphi(m);
    m.theta_range = {0.0, kInf};

    auto edges = std::make_shared<std::vector<Marginal>>(spec.edges);
    m.sample = [edges, n_edges](RandomStream& rng) {
        Vec x(n_edges);
        for (int i = 0; i < n_edges; ++i) x[i] = (*edges)[static_cast<size_t>(i)].sample(rng);
        return x;
    };
    m.score_x = [edges, n_edges](const Vec& x) {
        Vec s(n_edges);
        for (int i = 0; i < n_edges; ++i) s[i] = (*edges)[static_cast<size_t>(i)].score(x[i]);
        return s;
    };

    auto inc = std::make_shared<std::vector<std::vector<int>>>(spec.incidence);
    auto path_lengths = [inc, n_paths, n_edges](const Vec& x) {
        Vec p(n_paths);
        for (int i = 0; i < n_paths; ++i) {
            double s = 0.0;
            for (int k = 0; k < n_edges; ++k)
                if ((*inc)[static_cast<size_t>(i)][static_cast<size_t>(k)]) s += x[k];
            p[i] = s;
        }
        return p;
    };

    Transform t;
    t.dim = mdim;
    t.coords = spec.transform_edges;
    t.g = [path_lengths](const Vec& x, double th) {
        Vec p = path_lengths(x);
        for (int i = 0; i < p.size(); ++i) p[i] /= th;
        return p;
    };
    t.jacobian = [A](const Vec&, double th) {
        SmallMatrix J = A;
        for (int i = 0; i < J.n; ++i)
            for (int j = 0; j < J.n; ++j) J.m[i][j] /= th;
        return J;
    };
    t.dtheta_g = [path_lengths](const Vec& x, double th) {
        Vec p = path_lengths(x);
        for (int i = 0; i < p.size(); ++i) p[i] = -p[i] / (th * th);
        return p;
    };
    t.div_s = [mdim](const Vec&, double th) { return -mdim / th; };
    // each g_i spans R+ for every theta; the theta dependence sits in the
    // conditional shift handled by the face terms
    t.image_note = "g_i = p_i(x)/theta over R+^m";
    m.transform = t;

    m.indicator_g = t.g;
    m.region.box.assign(static_cast<size_t>(n_paths), Interval{0.0, 1.0});
    m.performance = [path_lengths, n_paths](const Vec& x, double th) {
        const Vec p = path_lengths(x);
        for (int i = 0; i < n_paths; ++i)
            if (!(p[i] >= 0.0 && p[i] <= th)) return 0.0;
        return 1.0;
    };
    m.phi_y = [n_paths](const Vec& y) {
        for (int i = 0; i < n_paths; ++i)
            if (!(y[i] >= 0.0 && y[i] <= 1.0)) return 0.0;
        return 1.0;
    };

    collect_finite_faces(m);
    return m;
}

// ---------------------------------------------------------------------------
// American option

void AmericanOptionModel::validate() const {
    const int n = n_periods();
    if (n < 2) throw InvalidThresholds("option: need at least two periods");
    if (static_cast<int>(dividends.size()) != n - 1 ||
        static_cast<int>(thresholds.size()) != n - 1)
        throw InvalidThresholds("option: dividends/thresholds must have n-1 entries");
    double prev = 0.0;
    for (double t : dates) {
        if (!(t > prev)) throw InvalidThresholds("option: dates must increase from 0");
        prev = t;
    }
    for (int i = 0; i < n - 1; ++i) {
        if (!(thresholds[static_cast<size_t>(i)] > strike))
            throw InvalidThresholds("option: threshold must exceed the strike");
        if (!(thresholds[static_cast<size_t>(i)] > dividends[static_cast<size_t>(i)]))
            throw InvalidThresholds("option: threshold must exceed the dividend");
    }
}

double gbm_step(const AmericanOptionModel& m, double x, double s, double dt) {
    return s * std::exp((m.rate - 0.5 * m.sigma * m.sigma) * dt + m.sigma * std::sqrt(dt) * x);
}

double gbm_step_inverse(const AmericanOptionModel& m, double y, double s, double dt) {
    return (std::log(y) - std::log(s) - (m.rate - 0.5 * m.sigma * m.sigma) * dt) /
           (m.sigma * std::sqrt(dt));
}

double gbm_step_dx(const AmericanOptionModel& m, double x, double s, double dt) {
    return m.sigma * std::sqrt(dt) * gbm_step(m, x, s, dt);
}

double option_pv_dividends(const AmericanOptionModel& m, int i) {
    // value at t_i of dividends i..n-1 (the one about to be paid plus later)
    double pv = 0.0;
    for (int k = i; k <= static_cast<int>(m.dividends.size()); ++k)
        pv += m.dividends[static_cast<size_t>(k - 1)] *
              std::exp(-m.rate * (m.dates[static_cast<size_t>(k - 1)] -
                                  m.dates[static_cast<size_t>(i - 1)]));
    return pv;
}

double option_payoff(const AmericanOptionModel& m, const std::vector<double>& x,
                     const OptionBranch* branch) {
    const int n = m.n_periods();
    const double T = m.dates.back();
    double s_tilde = m.s0;
    double t_prev = 0.0;
    for (int i = 1; i <= n - 1; ++i) {
        const double dt = m.dates[static_cast<size_t>(i - 1)] - t_prev;
        t_prev = m.dates[static_cast<size_t>(i - 1)];
        if (branch && branch->date == i) {
            if (branch->exercised) {
                const double s_minus = branch->s_tilde + option_pv_dividends(m, i);
                return std::exp(-m.rate * T) * (s_minus - m.strike) *
                       std::exp(m.rate * (T - m.dates[static_cast<size_t>(i - 1)]));
            }
            s_tilde = branch->s_tilde;
            continue;
        }
        s_tilde = gbm_step(m, x[static_cast<size_t>(i - 1)], s_tilde, dt);
        const double s_minus = s_tilde + option_pv_dividends(m, i);
        if (s_minus > m.thresholds[static_cast<size_t>(i - 1)]) {
            return std::exp(-m.rate * T) * (s_minus - m.strike) *
                   std::exp(m.rate * (T - m.dates[static_cast<size_t>(i - 1)]));
        }
        // ex-dividend: the clean trajectory continues from s_tilde
    }
    const double dt = T - t_prev;
    const double s_T = gbm_step(m, x[static_cast<size_t>(n - 1)], s_tilde, dt);
    return std::exp(-m.rate * T) * std::max(s_T - m.strike, 0.0);
}

// ---------------------------------------------------------------------------
// GG/1 queue

double gg1_performance(const GG1Model& m, double theta, const std::vector<double>& x,
                       const std::vector<double>& y, int override_customer,
                       bool override_admit) {
    double w = 0.0;           // waiting time of the current customer
    double total_wait = 0.0;
    double total_system = 0.0;
    for (int i = 0; i < m.n_customers; ++i) {
        double xi = x[static_cast<size_t>(i)];
        bool admit = xi <= theta;
        if (i == override_customer) {
            xi = theta;
            admit = override_admit;
        }
        const double s = admit ? m.service_plus(theta, xi) : m.service_minus(theta, xi);
        total_wait += w;
        total_system += w + s;
        if (i + 1 < m.n_customers)
            w = std::max(0.0, w + s - y[static_cast<size_t>(i)]);
    }
    switch (m.perf) {
        case GG1Model::Perf::MeanWait:
            return total_wait / m.n_customers;
        case GG1Model::Perf::TotalWait:
            return total_wait;
        case GG1Model::Perf::MeanSystemTime:
            return total_system / m.n_customers;
    }
    return 0.0;
}

double gg1_ipa_term(const GG1Model& m, double theta, const std::vector<double>& x,
                    const std::vector<double>& y) {
    double w = 0.0, dw = 0.0;
    double dtotal_wait = 0.0, dtotal_system = 0.0;
    for (int i = 0; i < m.n_customers; ++i) {
        const double xi = x[static_cast<size_t>(i)];
        const bool admit = xi <= theta;
        const double s = admit ? m.service_plus(theta, xi) : m.service_minus(theta, xi);
        const double ds = admit ? m.dtheta_service_plus(theta, xi)
                                : m.dtheta_service_minus(theta, xi);
        dtotal_wait += dw;
        dtotal_system += dw + ds;
        if (i + 1 < m.n_customers) {
            const bool busy = w + s - y[static_cast<size_t>(i)] > 0.0;
            w = std::max(0.0, w + s - y[static_cast<size_t>(i)]);
            dw = busy ? dw + ds : 0.0;
        }
    }
    switch (m.perf) {
        case GG1Model::Perf::MeanWait:
            return dtotal_wait / m.n_customers;
        case GG1Model::Perf::TotalWait:
            return dtotal_wait;
        case GG1Model::Perf::MeanSystemTime:
            return dtotal_system / m.n_customers;
    }
    return 0.0;
}

}  // namespace leibniz
