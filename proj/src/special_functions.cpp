#include "leibniz/special_functions.hpp"

#include <cmath>

#include <gsl/gsl_cdf.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_gamma.h>

namespace leibniz {

namespace {
// GSL aborts on domain errors by default; we want NaN/inf propagation instead.
struct GslHandlerGuard {
    GslHandlerGuard() { gsl_set_error_handler_off(); }
};
const GslHandlerGuard gsl_guard;
}  // namespace

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double normal_cdf(double z) { return gsl_cdf_ugaussian_P(z); }

double normal_quantile(double p) { return gsl_cdf_ugaussian_Pinv(p); }

double gamma_cdf(double x, double shape) {
    if (x <= 0.0) return 0.0;
    return gsl_sf_gamma_inc_P(shape, x);
}

double gamma_quantile(double p, double shape) {
    if (p <= 0.0) return 0.0;
    return gsl_cdf_gamma_Pinv(p, shape, 1.0);
}

double gamma_log_pdf(double x, double shape) {
    return (shape - 1.0) * std::log(x) - x - gsl_sf_lngamma(shape);
}

}  // namespace leibniz
