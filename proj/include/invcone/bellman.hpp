#pragma once
// Scalar Bellman operator F[psi] = Lap psi + max_j b^j . grad psi obtained
// from a full cone certificate, with certified bounds on its generalized
// principal eigenvalue.

#include <cstddef>
#include <vector>

#include "invcone/cone.hpp"
#include "invcone/fd.hpp"
#include "invcone/system.hpp"

namespace invcone {

inline constexpr double kEigTol = 1e-8;

struct BellmanProblem {
    std::size_t n = 0;
    std::vector<std::vector<double>> drifts;  // b^j, each of length n
    std::vector<double> lo, hi;               // box domain

    /// Throws Error{InvalidParams} on empty or non-finite drifts or a bad box.
    void validate() const;
};

/// Drifts are the columns of the certificate's diagonal drift table:
/// b^j = (beta^(1)_j, ..., beta^(n)_j). Throws Error{InvalidCertificate}
/// unless k = m and the certificate validates for sys.
BellmanProblem reduce_to_bellman(const EllipticSystem& sys, const ConeCertificate& cert);

/// Centered-difference F at an interior node of a scalar grid field.
/// Throws Error{BoundaryNode} and Error{DimensionMismatch}.
double evaluate_F(const BellmanProblem& p, const DiscreteField& psi, std::size_t node);

struct SupersolutionCheck {
    bool ok = false;
    double max_residual = 0.0;  // max of F[psi] + lambda psi over the nodes
    double min_psi = 0.0;
    std::size_t nodes = 0;
};

struct EigenBound {
    double lower = 0.0;          // certified by psi = 1 - delta exp(gamma x1)
    double upper = 0.0;          // min over drifts of the linear pieces' discrete eigenvalues
    double gamma = 0.0;
    double delta = 0.0;
    std::size_t verification_per_axis = 0;
    SupersolutionCheck check;    // re-validation of the lower bound
};

/// Re-checks F[psi] + lambda psi <= kEigTol and psi >= 1/2 - kEigTol on a
/// `per_axis`-point grid of the box [lo, hi], evaluating F from the
/// analytic gradient and Laplacian of psi.
SupersolutionCheck check_supersolution(const BellmanProblem& p, double gamma, double delta, double lambda,
                                       const std::vector<double>& lo, const std::vector<double>& hi,
                                       std::size_t per_axis);

/// gamma = |min_j b^j_1| + 1, delta = exp(-gamma * x1_max) / 2, lower bound by
/// bisection over a `per_axis` verification grid, upper bound as above.
EigenBound supersolution_lower_bound(const BellmanProblem& p, std::size_t per_axis = 200);

/// Principal Dirichlet eigenvalue of -(psi'' + b psi') on (0, rho) with the
/// centered 3-point scheme, by inverse power iteration. Throws
/// Error{ConvergenceFailure} and Error{InvalidParams}.
double linear_principal_eigenvalue(double b, double rho, double h = 1e-3);

}  // namespace invcone
