#pragma once

#include <cstdint>
#include <string>

#include "leibniz/models.hpp"

namespace leibniz {

struct OracleReport {
    double derivative = 0.0;
    double value_plus = 0.0;   // E(psi) at theta + delta
    double value_minus = 0.0;  // E(psi) at theta - delta
    double backend_gap = 0.0;  // |Gauss-Legendre - adaptive Simpson| on E(psi)
    double fd_delta = 0.0;
};

// Expected indicator for the log-shift threshold model, reduced by Fubini to
// a one-dimensional integral of the conditional cdf in copula scale:
//   E(psi) = int_0^{F1(x1*)} dC/du(u, F2(B(x1(u)))) du,
// integrated by graded Gauss-Legendre and cross-checked by adaptive Simpson.
double expected_log_inventory(const JointDensity2& d, double q, double theta);
double expected_log_inventory_simpson(const JointDensity2& d, double q, double theta);

// Ground-truth derivative by central difference (delta 1e-4) of the
// quadrature above. Throws NonConvergent when the backends disagree.
double truth_log_inventory(const JointDensity2& d, double q, double theta);
OracleReport truth_log_inventory_report(const JointDensity2& d, double q, double theta);

// d/dtheta of the rectangle probability P(X1 <= theta, X2 <= theta);
// analytic for Uniform01^2, region quadrature plus central difference else.
double truth_max_threshold(const JointDensity2& d, double theta);

// Max relative gap over random (x, theta) between the pointwise volume-side
// identity and a central difference of phi(g(x, theta)) in theta.
double verify_identity_ipalr(const Model& m, int n_points, std::uint64_t seed);

// Two-period expected payoff by normal-innovation quadrature split at the
// exercise boundary; derivative wrt the single threshold, delta 1e-3 * s.
double truth_option_2period(const AmericanOptionModel& m);
double option_expected_payoff_2period(const AmericanOptionModel& m);

}  // namespace leibniz
