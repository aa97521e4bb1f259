#pragma once
// Closed-form objects of the one-dimensional counterexamples: the zeta
// threshold, the u_k family and the strict subsolution construction for the
// fully coupled 2x2 system.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "invcone/field.hpp"
#include "invcone/system.hpp"

namespace invcone {

/// (cosh t - 1) / (sinh t - t). Throws Error{NonPositiveTau} for t <= 0.
double zeta(double tau);

struct ZetaQuery {
    double rho = 1.0;             // interval (0, rho)
    double c = 0.0;               // diagonal zero-order coefficient
    double alpha_over_eps = 0.0;

    void validate() const;        // Error{InvalidParams}
};

/// zeta(rho sqrt c) sqrt c, with the limit 3/rho for c < 1e-12.
double zeta_curve(double rho, double c);

struct ZetaPrediction {
    bool fails = false;   // wMP fails for the system below
    double value = 0.0;   // zeta_curve(rho, c)
    double margin = 0.0;  // value - alpha/eps
};

ZetaPrediction wmp_fails_prediction(const ZetaQuery& q);

/// Smallest c0 >= 0 such that the failure condition holds for every c > c0.
double c_threshold(double rho, double alpha_over_eps);

/// u'' -+ eps v' - c u + alpha v >= 0,  v'' - c_tilde v >= 0  on (0, rho).
/// `minus_sign` selects the -eps orientation.
EllipticSystem prop14_system(double eps, double alpha, double c, double c_tilde, bool minus_sign = true);

/// The pair (u_k, v = -x) solving the first equation with equality and
/// u_k(0) = 0. Throws Error{NonPositiveC} when c <= 0.
AnalyticField u_k_family(const ZetaQuery& q, double eps, double k);

/// Pointwise limit of u_k as k -> infinity, paired with v = -x. Valid for c >= 0.
AnalyticField u0_limit(const ZetaQuery& q, double eps);

struct Prop16Params {
    double eps = 1.0;
    double eps_tilde = 2.0;
    double alpha = -1.0;
    double beta = 3.0;
    double c_tilde = 1.0;

    // derived by prop16_construct
    double x_star = 0.0;
    double chi1_norm = 0.0;     // sup |chi'|
    double chi2_norm = 0.0;     // sup |chi''|
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double sigma = 0.0;
    double c_threshold = 0.0;   // (eps + |alpha|) / sigma
    double delta = 0.0;
};

/// u'' - eps v' - c u + alpha v >= 0,  v'' - eps_tilde u' - c_tilde v + beta u >= 0  on (0, 1).
EllipticSystem prop16_system(const Prop16Params& p, double c);

struct Prop16Checks {
    double min_residual_u = 0.0;  // inf of the first equation (strict when > 0)
    double min_residual_v = 0.0;
    double u_at_0 = 0.0;          // of u + delta x
    double u_at_1 = 0.0;
    double v_at_0 = 0.0;
    double v_at_1 = 0.0;
    double max_interior_u = 0.0;  // sup of u + delta x on the grid
    double argmax_interior_u = 0.0;

    bool passed() const noexcept;
};

struct Prop16Result {
    Prop16Params params;
    double c = 0.0;
    bool reflected = false;       // built for -eps and mirrored x -> 1 - x
    AnalyticField base;           // (sigma chi, x^2 - x), before reflection
    AnalyticField pair;           // (u + delta x, v) in the caller's orientation
    Prop16Checks checks;
};

/// Builds the strict subsolution pair at c = c_factor * c_threshold and picks
/// the largest delta in {2^-j} passing every check on a 10^4-point grid plus
/// 10^3 seeded random points. Throws Error{InvalidParams} for eps == 0,
/// c_tilde <= 0 or non-finite input, and when no delta passes.
Prop16Result prop16_construct(Prop16Params p, double c_factor = 1.01, std::uint64_t seed = 1);

struct Prop16Restricted {
    double lo = 0.0;          // connected component I = (lo, hi) of {u + delta x > 0}
    double hi = 0.0;
    double c = 0.0;
    double min_residual_u = 0.0;
    double min_residual_v = 0.0;
    double max_interior = 0.0;
    double boundary_max = 0.0;  // max of |u + delta x| at lo, hi

    bool violates_wmp() const noexcept;
};

/// Second statement: the pair built for a larger coefficient, restricted to
/// its first positivity component, still violates wMP at coefficient c.
Prop16Restricted prop16_restricted(const Prop16Result& built, double c);

struct CurveSample {
    double c;
    double value;
    double rho;
};

std::vector<CurveSample> figure1_samples(const std::vector<double>& rhos = {0.25, 0.5, 1.0, 2.0},
                                         std::size_t per_curve = 400, double c_lo = 1e-3, double c_hi = 1e4);

/// CSV with header `c,value,rho`, shortest round-trip number formatting.
std::string figure1_csv(const std::vector<CurveSample>& samples);

}  // namespace invcone
