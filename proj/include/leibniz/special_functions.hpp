#pragma once

// Thin wrappers over the GSL special-function layer so the rest of the
// library never touches GSL directly.

namespace leibniz {

double normal_pdf(double z);
double normal_cdf(double z);
double normal_quantile(double p);  // p in (0,1)

// Unit-scale gamma distribution.
double gamma_cdf(double x, double shape);
double gamma_quantile(double p, double shape);
double gamma_log_pdf(double x, double shape);

}  // namespace leibniz
