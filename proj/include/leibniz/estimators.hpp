#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "leibniz/models.hpp"

namespace leibniz {

struct EstimatorConfig {
    double fd_delta = 0.02;
    long n_reps = 10000;
    long surface_reps = -1;  // -1: use n_reps
    std::uint64_t seed = 123456789;
    bool crn = true;  // common random numbers for FD
    int workers = 0;  // 0: hardware concurrency

    long surface_reps_or_default() const { return surface_reps > 0 ? surface_reps : n_reps; }
};

struct FaceDetail {
    int coord = 0;
    bool upper = false;
    std::string kind;
    double value = 0.0;
    double se = 0.0;
    long draws = 0;  // conditional draws attributable to this face
};

struct DerivativeEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n_reps = 0;
    std::string estimator_id;
    double runtime_s = 0.0;
    long rejected_samples = 0;   // singular-Jacobian redraws
    long conditional_draws = 0;  // draws from conditional boundary samplers
    bool unstable = false;
    std::vector<FaceDetail> surface_breakdown;
};

// Evaluates path_fn over n_reps streams derived from (seed, index); the
// result is identical for a given seed regardless of worker count.
DerivativeEstimate replicate(const std::function<double(long, RandomStream&)>& path_fn,
                             long n_reps, std::uint64_t seed, int workers,
                             const std::string& estimator_id);

// Central finite difference with one input draw reused at theta +- delta
// (common random numbers) or independent draws when crn is off.
DerivativeEstimate fd_estimate(const Model& m, double theta, const EstimatorConfig& cfg);

// Single-path value of the divergence estimator: zero off the chart, else
// dtheta_varphi + varphi*l + varphi*(score . D + cross_partials) + grad_varphi . D
double leibniz_divergence_path(const Model& m, const Vec& x, double theta);
DerivativeEstimate leibniz_divergence_estimate(const Model& m, double theta,
                                               const EstimatorConfig& cfg);

// Single-path value of the volume part: phi(g(x))*(d + l). Sets *nonintegrable
// when |d| exceeds 1e6 (the Gamma shape < 1 blow-up signature).
double leibniz_volume_path(const Model& m, const Vec& x, double theta,
                           bool* nonintegrable = nullptr);

struct SurfaceResult {
    double value = 0.0;
    double std_error = 0.0;
    long conditional_draws = 0;
    bool finite = true;
    std::vector<FaceDetail> faces;
};

// Standalone surface-term estimator over the finite faces of the support.
SurfaceResult surface_term(const Model& m, double theta, const EstimatorConfig& cfg);

// Volume plus surface; faces whose conditional reduces to independent
// marginals are folded into the main replication loop (single run).
DerivativeEstimate leibniz_integral_estimate(const Model& m, double theta,
                                             const EstimatorConfig& cfg);

// phi(g)*l + grad phi(g) . dtheta_g for smooth-phi models; throws
// NotDifferentiable on indicator models.
double ipa_lr_path(const Model& m, const Vec& x, double theta);
DerivativeEstimate ipa_lr_estimate(const Model& m, double theta, const EstimatorConfig& cfg);

// Threshold sensitivity of the American option at exercise date k (1-based):
// one GBM path branched at k into forced-continue / forced-exercise, the
// payoff gap weighted by f(x*)/h_x(x*).
DerivativeEstimate option_threshold_derivative(const AmericanOptionModel& m, int k,
                                               const EstimatorConfig& cfg);
// CRN central difference in the threshold s_k.
DerivativeEstimate option_fd_estimate(const AmericanOptionModel& m, int k,
                                      const EstimatorConfig& cfg);

// DPA for the admission-controlled queue: branch every customer at theta
// on one path plus the pathwise term.
DerivativeEstimate dpa_derivative(const GG1Model& m, double theta, const EstimatorConfig& cfg);
DerivativeEstimate gg1_fd_estimate(const GG1Model& m, double theta, const EstimatorConfig& cfg);

}  // namespace leibniz
