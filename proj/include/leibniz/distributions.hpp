#pragma once

#include <functional>
#include <string>

#include "leibniz/numerics.hpp"
#include "leibniz/rng.hpp"

namespace leibniz {

enum class MarginalKind { Exponential, Gamma, LogNormal, Uniform01, Normal, Ramp };

// One-dimensional input law with everything the estimators need: density,
// score d/dx log f, cdf/quantile pair, native sampler and the boundary
// densities entering the surface term.
struct Marginal {
    MarginalKind kind;
    double p1 = 0.0;  // rate | shape | mu    | -
    double p2 = 0.0;  //      |       | sigma | -
    Interval support;
    std::string id;

    double pdf(double x) const;
    double log_pdf(double x) const;
    double cdf(double x) const;
    double quantile(double u) const;
    double score(double x) const;
    // Density value at the lower/upper endpoint of the support. May be +inf
    // (Gamma with shape < 1 at zero); infinite endpoints report 0.
    double boundary_density(bool upper) const;
    double sample(RandomStream& rng) const;
};

Marginal make_exponential(double rate);
Marginal make_gamma(double shape);  // unit scale
Marginal make_lognormal(double mu, double sigma);
Marginal make_uniform01();
Marginal make_normal(double mu, double sigma);
Marginal make_ramp();  // pdf 2x on (0,1); the f(x) = 4*x1*x2 benchmark factor

double sample_gamma_marsaglia_tsang(RandomStream& rng, double shape);

enum class CopulaKind { Independence, Clayton, FGM, Gaussian };

struct Copula {
    CopulaKind kind;
    double param = 0.0;  // Clayton alpha > 0, FGM alpha in [-1,1], Gaussian rho in (-1,1)
    std::string id;

    double cdf(double u, double v) const;      // Gaussian falls back to quadrature
    double density(double u, double v) const;  // c(u,v)
    double du_density_over_density(double u, double v) const;  // (d/du c) / c
    double conditional_cdf(double u, double v) const;          // d/du C(u,v)
    // Solves conditional_cdf(u, v) = w for v; closed forms where available,
    // bisection fallback. Throws NumericalInversionFailure.
    double conditional_quantile(double u, double w) const;
};

Copula make_independence();
Copula make_clayton(double alpha);
Copula make_fgm(double alpha);
Copula make_gaussian(double rho);

// Conditional cdf of X2 given X1 = 0 under an FGM(1) copula: 2F - F^2.
double conditional_cdf_fgm_at_zero(const Marginal& m2, double x2);

enum class FaceKind { Vanishing, PointMass, ReducesToMarginal, TransformedCDF };

const char* face_kind_name(FaceKind k);

// Classification of one finite face of the support hyperrectangle, deciding
// how the surface estimator treats it.
struct BoundaryConditional {
    int coord = 0;
    double endpoint = 0.0;
    FaceKind kind = FaceKind::Vanishing;
    double marginal_density = 0.0;  // f_{X_i}(endpoint); may be +inf
    double point_mass_value = 0.0;  // other coordinate, PointMass faces
    // Draw of the off-face coordinate for TransformedCDF faces.
    std::function<double(RandomStream&)> sample_other;
};

// Bivariate input law assembled from two marginals and a copula.
struct JointDensity2 {
    Marginal m1, m2;
    Copula cop;
    std::string id;
    bool theta_dependent = false;

    double pdf(const Vec& x) const;
    double log_pdf(const Vec& x) const;
    Vec score_x(const Vec& x) const;  // throws OutsideSupport off the interior
    double score_theta(const Vec&, double) const { return 0.0; }
    Vec sample(RandomStream& rng) const;
    const Marginal& marginal(int i) const { return i == 0 ? m1 : m2; }
    Interval support(int i) const { return marginal(i).support; }
    // Throws UnsupportedConditional outside the built-in catalog.
    BoundaryConditional boundary_conditional(int coord, bool upper) const;
};

JointDensity2 make_joint(Copula cop, Marginal m1, Marginal m2);
// Log-coordinates jointly normal with correlation rho and standard normal
// marginals; identically a Gaussian copula over LogNormal(0,1) marginals.
JointDensity2 make_bivariate_lognormal(double rho);

}  // namespace leibniz
