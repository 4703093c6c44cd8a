#include "leibniz/estimators.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "leibniz/errors.hpp"

namespace leibniz {

namespace {

constexpr double kNonIntegrableThreshold = 1e6;
// salts for substream derivation; replication index is the stream id
constexpr std::uint64_t kSaltRedrawBase = 1000;
constexpr std::uint64_t kSaltFdSecond = 1;
constexpr std::uint64_t kSaltFaceBase = 0x200;

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

// Sequential two-pass reduction keeps the result independent of the worker
// schedule and stable for heavy-tailed samples.
MeanSe reduce(const std::vector<double>& vals) {
    const long n = static_cast<long>(vals.size());
    double sum = 0.0, comp = 0.0;
    for (double v : vals) {  // Neumaier compensation
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    const double mean = (sum + comp) / n;
    double ss = 0.0;
    for (double v : vals) {
        const double d = v - mean;
        ss += d * d;
    }
    const double var = n > 1 ? ss / (n - 1) : 0.0;
    return {mean, std::sqrt(var / n)};
}

int resolve_workers(int workers, long n_reps) {
    int w = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    w = std::max(1, std::min(w, 64));
    return static_cast<int>(std::min<long>(w, std::max<long>(1, n_reps / 64)));
}

template <typename PathFn>
std::vector<double> run_paths(const PathFn& path_fn, long n_reps, int workers) {
    std::vector<double> vals(static_cast<size_t>(n_reps));
    const int w = resolve_workers(workers, n_reps);
    if (w == 1) {
        for (long r = 0; r < n_reps; ++r) vals[static_cast<size_t>(r)] = path_fn(r);
        return vals;
    }
    std::atomic<long> next{0};
    constexpr long kChunk = 256;
    auto work = [&] {
        for (;;) {
            const long start = next.fetch_add(kChunk);
            if (start >= n_reps) return;
            const long end = std::min(n_reps, start + kChunk);
            for (long r = start; r < end; ++r) vals[static_cast<size_t>(r)] = path_fn(r);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(w));
    for (int i = 0; i < w; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return vals;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

DerivativeEstimate replicate(const std::function<double(long, RandomStream&)>& path_fn,
                             long n_reps, std::uint64_t seed, int workers,
                             const std::string& estimator_id) {
    const auto t0 = Clock::now();
    auto vals = run_paths(
        [&](long r) {
            RandomStream rng(seed, static_cast<std::uint64_t>(r), 0);
            return path_fn(r, rng);
        },
        n_reps, workers);
    const MeanSe ms = reduce(vals);
    DerivativeEstimate e;
    e.mean = ms.mean;
    e.std_error = ms.se;
    e.n_reps = n_reps;
    e.estimator_id = estimator_id;
    e.runtime_s = seconds_since(t0);
    return e;
}

// ---------------------------------------------------------------------------
// FD

DerivativeEstimate fd_estimate(const Model& m, double theta, const EstimatorConfig& cfg) {
    const double d = cfg.fd_delta;
    if (!(theta - d > m.theta_range.lo && theta + d < m.theta_range.hi))
        throw ThetaOutOfRange("fd_estimate: theta +- delta leaves the admissible interval");
    auto est = replicate(
        [&](long r, RandomStream& rng) {
            const Vec x_plus = m.sample(rng);
            Vec x_minus = x_plus;
            if (!cfg.crn) {
                RandomStream rng2(cfg.seed, static_cast<std::uint64_t>(r), kSaltFdSecond);
                x_minus = m.sample(rng2);
            }
            return (m.performance(x_plus, theta + d) - m.performance(x_minus, theta - d)) /
                   (2.0 * d);
        },
        cfg.n_reps, cfg.seed, cfg.workers, "fd");
    return est;
}

// ---------------------------------------------------------------------------
// Divergence estimator

double leibniz_divergence_path(const Model& m, const Vec& x, double theta) {
    const DomainChart& c = *m.chart;
    if (!chart_contains(c, x, theta)) return 0.0;
    const Vec D = c.dtheta_h_at_x(x, theta);
    const double cross = c.cross_partials(x, theta);
    const Vec score = m.score_x(x);
    const double phi = m.varphi(x, theta);
    const double l = m.joint ? m.joint->score_theta(x, theta) : 0.0;
    double val = m.dtheta_varphi(x, theta) + phi * l + phi * (score.dot(D) + cross);
    val += m.gradx_varphi(x, theta).dot(D);
    return val;
}

DerivativeEstimate leibniz_divergence_estimate(const Model& m, double theta,
                                               const EstimatorConfig& cfg) {
    if (!m.chart)
        throw ConfigError("leibniz_divergence: model provides no domain chart");
    auto est = replicate(
        [&](long, RandomStream& rng) {
            return leibniz_divergence_path(m, m.sample(rng), theta);
        },
        cfg.n_reps, cfg.seed, cfg.workers, "leibniz_divergence");
    return est;
}

// ---------------------------------------------------------------------------
// Volume + surface (integral estimator)

double leibniz_volume_path(const Model& m, const Vec& x, double theta, bool* nonintegrable) {
    const Transform& t = *m.transform;
    const double phi = m.phi_y(t.g(x, theta));
    if (phi == 0.0) return 0.0;
    const double d = d_scalar(t, m.score_x(x), x, theta);
    if (nonintegrable && std::abs(d) > kNonIntegrableThreshold) *nonintegrable = true;
    const double l = m.joint ? m.joint->score_theta(x, theta) : 0.0;
    return phi * (d + l);
}

namespace {

// Signed integrand of one face evaluated at x with the face coordinate
// pinned to its endpoint: sign * f_i(endpoint) * phi(g(x~)) * (s . e_i).
double face_value_at(const Model& m, const Model::Face& face, double weight, Vec x,
                     double theta) {
    x[face.coord] = face.endpoint;
    const Transform& t = *m.transform;
    const double phi = m.phi_y(t.g(x, theta));
    if (phi == 0.0) return 0.0;
    const Vec s = s_vector(t, x, theta);
    int si = 0;
    for (int k = 0; k < t.dim; ++k)
        if (t.coords[static_cast<size_t>(k)] == face.coord) si = k;
    const double sign = face.upper ? 1.0 : -1.0;
    return sign * weight * phi * s[si];
}

struct FacePlan {
    Model::Face face;
    FaceKind kind;
    double weight = 0.0;  // marginal boundary density at the endpoint
    BoundaryConditional bc;
};

std::vector<FacePlan> plan_faces(const Model& m) {
    std::vector<FacePlan> plans;
    for (const auto& face : m.finite_faces) {
        FacePlan p;
        p.face = face;
        if (m.joint) {
            p.bc = m.joint->boundary_conditional(face.coord, face.upper);
            p.kind = p.bc.kind;
            p.weight = p.bc.marginal_density;
        } else {
            // independent product law (SAN): the conditional is the product of
            // the remaining marginals
            const Marginal& mi = m.product_marginals[static_cast<size_t>(face.coord)];
            p.weight = mi.boundary_density(face.upper);
            p.kind = p.weight == 0.0 ? FaceKind::Vanishing : FaceKind::ReducesToMarginal;
        }
        plans.push_back(std::move(p));
    }
    return plans;
}

}  // namespace

SurfaceResult surface_term(const Model& m, double theta, const EstimatorConfig& cfg) {
    if (!m.transform)
        throw ConfigError("surface_term: model provides no transform");
    SurfaceResult out;
    const long reps = cfg.surface_reps_or_default();

    int face_index = 0;
    for (const auto& p : plan_faces(m)) {
        FaceDetail detail;
        detail.coord = p.face.coord;
        detail.upper = p.face.upper;
        detail.kind = face_kind_name(p.kind);
        switch (p.kind) {
            case FaceKind::Vanishing:
                break;
            case FaceKind::PointMass: {
                Vec x(m.dim);
                for (int i = 0; i < m.dim; ++i) x[i] = p.bc.point_mass_value;
                detail.value = face_value_at(m, p.face, p.weight, x, theta);
                if (!std::isfinite(detail.value)) out.finite = false;
                break;
            }
            case FaceKind::ReducesToMarginal:
            case FaceKind::TransformedCDF: {
                const bool conditional = p.kind == FaceKind::TransformedCDF;
                std::vector<double> vals(static_cast<size_t>(reps));
                for (long r = 0; r < reps; ++r) {
                    RandomStream rng(cfg.seed, static_cast<std::uint64_t>(r),
                                     kSaltFaceBase + static_cast<std::uint64_t>(face_index));
                    Vec x(m.dim);
                    if (m.joint) {
                        const int other = 1 - p.face.coord;
                        x[other] = conditional ? p.bc.sample_other(rng)
                                               : m.joint->marginal(other).sample(rng);
                    } else {
                        for (int i = 0; i < m.dim; ++i)
                            if (i != p.face.coord)
                                x[i] = m.product_marginals[static_cast<size_t>(i)].sample(rng);
                    }
                    vals[static_cast<size_t>(r)] = face_value_at(m, p.face, p.weight, x, theta);
                }
                const MeanSe ms = reduce(vals);
                detail.value = ms.mean;
                detail.se = ms.se;
                if (conditional) detail.draws = reps;
                break;
            }
        }
        out.value += detail.value;
        out.std_error = std::sqrt(out.std_error * out.std_error + detail.se * detail.se);
        out.conditional_draws += detail.draws;
        out.faces.push_back(std::move(detail));
        ++face_index;
    }
    if (!std::isfinite(out.value)) out.finite = false;
    return out;
}

DerivativeEstimate leibniz_integral_estimate(const Model& m, double theta,
                                             const EstimatorConfig& cfg) {
    if (!m.transform)
        throw ConfigError("leibniz_integral: model provides no transform");
    const auto t0 = Clock::now();

    const auto plans = plan_faces(m);
    std::vector<FacePlan> reuse;          // folded into the volume loop
    std::vector<const FacePlan*> sampled; // need conditional draws
    double point_mass_total = 0.0;
    DerivativeEstimate e;
    e.estimator_id = "leibniz_integral";

    for (const auto& p : plans) {
        FaceDetail detail;
        detail.coord = p.face.coord;
        detail.upper = p.face.upper;
        detail.kind = face_kind_name(p.kind);
        switch (p.kind) {
            case FaceKind::Vanishing:
                e.surface_breakdown.push_back(std::move(detail));
                break;
            case FaceKind::PointMass: {
                Vec x(m.dim);
                for (int i = 0; i < m.dim; ++i) x[i] = p.bc.point_mass_value;
                detail.value = face_value_at(m, p.face, p.weight, x, theta);
                if (!std::isfinite(detail.value)) e.unstable = true;
                point_mass_total += detail.value;
                e.surface_breakdown.push_back(std::move(detail));
                break;
            }
            case FaceKind::ReducesToMarginal:
                reuse.push_back(p);
                break;
            case FaceKind::TransformedCDF:
                sampled.push_back(&p);
                break;
        }
    }

    std::atomic<bool> nonintegrable{false};
    std::atomic<long> rejected{0};
    auto vals = run_paths(
        [&](long r) {
            for (std::uint64_t attempt = 0;; ++attempt) {
                RandomStream rng(cfg.seed, static_cast<std::uint64_t>(r),
                                 attempt == 0 ? 0 : kSaltRedrawBase + attempt);
                const Vec x = m.sample(rng);
                try {
                    bool warn = false;
                    double v = leibniz_volume_path(m, x, theta, &warn);
                    if (warn) nonintegrable.store(true, std::memory_order_relaxed);
                    for (const auto& p : reuse) v += face_value_at(m, p.face, p.weight, x, theta);
                    return v;
                } catch (const SingularMatrix&) {
                    // measure-zero set where J_g is not invertible: redraw
                    rejected.fetch_add(1, std::memory_order_relaxed);
                    if (attempt >= 100)
                        throw NonConvergent("leibniz_integral: persistent singular Jacobian");
                }
            }
        },
        cfg.n_reps, cfg.workers);
    const MeanSe vol = reduce(vals);

    double mean = vol.mean + point_mass_total;
    double var = vol.se * vol.se;
    for (const auto& p : reuse) {
        FaceDetail detail;
        detail.coord = p.face.coord;
        detail.upper = p.face.upper;
        detail.kind = face_kind_name(p.kind);
        e.surface_breakdown.push_back(std::move(detail));
    }

    const long reps = cfg.surface_reps_or_default();
    int face_index = 0;
    for (const FacePlan* p : sampled) {
        std::vector<double> fv(static_cast<size_t>(reps));
        for (long r = 0; r < reps; ++r) {
            RandomStream rng(cfg.seed, static_cast<std::uint64_t>(r),
                             kSaltFaceBase + static_cast<std::uint64_t>(face_index));
            Vec x(m.dim);
            const int other = 1 - p->face.coord;
            x[other] = p->bc.sample_other(rng);
            fv[static_cast<size_t>(r)] = face_value_at(m, p->face, p->weight, x, theta);
        }
        const MeanSe ms = reduce(fv);
        FaceDetail detail;
        detail.coord = p->face.coord;
        detail.upper = p->face.upper;
        detail.kind = face_kind_name(p->kind);
        detail.value = ms.mean;
        detail.se = ms.se;
        detail.draws = reps;
        mean += ms.mean;
        var += ms.se * ms.se;
        e.conditional_draws += reps;
        e.surface_breakdown.push_back(std::move(detail));
        ++face_index;
    }

    e.mean = mean;
    e.std_error = std::sqrt(var);
    e.n_reps = cfg.n_reps;
    e.rejected_samples = rejected.load();
    if (nonintegrable.load()) e.unstable = true;
    if (!std::isfinite(e.mean)) e.unstable = true;
    e.runtime_s = seconds_since(t0);
    return e;
}

// ---------------------------------------------------------------------------
// IPA-LR

double ipa_lr_path(const Model& m, const Vec& x, double theta) {
    if (!m.phi_smooth)
        throw NotDifferentiable("ipa_lr: performance is not differentiable in theta");
    const Transform& t = *m.transform;
    const Vec y = t.g(x, theta);
    const double l = m.joint ? m.joint->score_theta(x, theta) : 0.0;
    return m.phi_y(y) * l + m.phi_grad_y(y).dot(t.dtheta_g(x, theta));
}

DerivativeEstimate ipa_lr_estimate(const Model& m, double theta, const EstimatorConfig& cfg) {
    if (!m.phi_smooth)
        throw NotDifferentiable("ipa_lr: performance is not differentiable in theta");
    return replicate(
        [&](long, RandomStream& rng) { return ipa_lr_path(m, m.sample(rng), theta); },
        cfg.n_reps, cfg.seed, cfg.workers, "ipa_lr");
}

// ---------------------------------------------------------------------------
// American option, conditional branching at one date

namespace {

std::vector<double> draw_option_path(const AmericanOptionModel& m, RandomStream& rng) {
    std::vector<double> x(static_cast<size_t>(m.n_periods()));
    for (auto& xi : x) xi = rng.normal();
    return x;
}

// Clean price just before date k (after simulating dates 1..k-1) plus the
// early-exercise gate over those dates.
struct PrefixState {
    double s_tilde_prev = 0.0;
    bool gate = true;
};

PrefixState option_prefix(const AmericanOptionModel& m, const std::vector<double>& x, int k) {
    PrefixState st;
    st.s_tilde_prev = m.s0;
    double t_prev = 0.0;
    for (int i = 1; i < k; ++i) {
        const double dt = m.dates[static_cast<size_t>(i - 1)] - t_prev;
        t_prev = m.dates[static_cast<size_t>(i - 1)];
        st.s_tilde_prev = gbm_step(m, x[static_cast<size_t>(i - 1)], st.s_tilde_prev, dt);
        const double s_minus = st.s_tilde_prev + option_pv_dividends(m, i);
        if (s_minus > m.thresholds[static_cast<size_t>(i - 1)]) {
            st.gate = false;
            return st;
        }
    }
    return st;
}

}  // namespace

DerivativeEstimate option_threshold_derivative(const AmericanOptionModel& m, int k,
                                               const EstimatorConfig& cfg) {
    m.validate();
    if (k < 1 || k > m.n_periods() - 1)
        throw InvalidThresholds("option_threshold_derivative: k out of range");
    const double s_k = m.thresholds[static_cast<size_t>(k - 1)];
    const double pv_k = option_pv_dividends(m, k);
    const double s_tilde_k = s_k - pv_k;
    const double dt_k =
        m.dates[static_cast<size_t>(k - 1)] - (k >= 2 ? m.dates[static_cast<size_t>(k - 2)] : 0.0);

    return replicate(
        [&, k](long, RandomStream& rng) {
            const auto x = draw_option_path(m, rng);
            const PrefixState st = option_prefix(m, x, k);
            if (!st.gate) return 0.0;
            const double x_star = gbm_step_inverse(m, s_tilde_k, st.s_tilde_prev, dt_k);
            const double w = normal_pdf(x_star) / gbm_step_dx(m, x_star, st.s_tilde_prev, dt_k);
            OptionBranch cont{k, s_tilde_k, false};
            OptionBranch exer{k, s_tilde_k, true};
            const double j_minus = option_payoff(m, x, &cont);
            const double j_plus = option_payoff(m, x, &exer);
            return w * (j_minus - j_plus);
        },
        cfg.n_reps, cfg.seed, cfg.workers, "conditional_leibniz");
}

DerivativeEstimate option_fd_estimate(const AmericanOptionModel& m, int k,
                                      const EstimatorConfig& cfg) {
    m.validate();
    const double d = cfg.fd_delta;
    AmericanOptionModel up = m, dn = m;
    up.thresholds[static_cast<size_t>(k - 1)] += d;
    dn.thresholds[static_cast<size_t>(k - 1)] -= d;
    return replicate(
        [&](long, RandomStream& rng) {
            const auto x = draw_option_path(m, rng);
            return (option_payoff(up, x) - option_payoff(dn, x)) / (2.0 * d);
        },
        cfg.n_reps, cfg.seed, cfg.workers, "fd");
}

// ---------------------------------------------------------------------------
// DPA for the admission-controlled queue

DerivativeEstimate dpa_derivative(const GG1Model& m, double theta, const EstimatorConfig& cfg) {
    return replicate(
        [&](long, RandomStream& rng) {
            std::vector<double> x(static_cast<size_t>(m.n_customers));
            std::vector<double> y(static_cast<size_t>(m.n_customers));
            for (auto& xi : x) xi = rng.uniform();
            for (auto& yi : y) yi = m.interarrival(rng);
            double v = gg1_ipa_term(m, theta, x, y);
            for (int i = 0; i < m.n_customers; ++i) {
                // X_i = theta-: admitted with service S+(theta, theta);
                // X_i = theta+: rejected with service S-(theta, theta)
                v += gg1_performance(m, theta, x, y, i, true) -
                     gg1_performance(m, theta, x, y, i, false);
            }
            return v;
        },
        cfg.n_reps, cfg.seed, cfg.workers, "dpa");
}

DerivativeEstimate gg1_fd_estimate(const GG1Model& m, double theta, const EstimatorConfig& cfg) {
    const double d = cfg.fd_delta;
    if (!(theta - d > 0.0 && theta + d < 1.0))
        throw ThetaOutOfRange("gg1_fd: theta +- delta leaves (0,1)");
    return replicate(
        [&](long, RandomStream& rng) {
            std::vector<double> x(static_cast<size_t>(m.n_customers));
            std::vector<double> y(static_cast<size_t>(m.n_customers));
            for (auto& xi : x) xi = rng.uniform();
            for (auto& yi : y) yi = m.interarrival(rng);
            return (gg1_performance(m, theta + d, x, y) - gg1_performance(m, theta - d, x, y)) /
                   (2.0 * d);
        },
        cfg.n_reps, cfg.seed, cfg.workers, "fd");
}

}  // namespace leibniz
