#pragma once
// Vector fields given by closed-form expressions with hand-coded exact
// derivatives, and pointwise residuals of a system applied to them.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "invcone/system.hpp"

namespace invcone {

using Point = std::vector<double>;

class AnalyticField {
public:
    using ScalarFn = std::function<double(std::span<const double>)>;
    using GradFn = std::function<std::vector<double>(std::span<const double>)>;

    struct Component {
        ScalarFn value;
        GradFn gradient;
        ScalarFn laplacian;
    };

    AnalyticField() = default;
    AnalyticField(std::string name, std::string domain, std::size_t n, std::vector<Component> components);

    const std::string& name() const noexcept { return name_; }
    const std::string& domain() const noexcept { return domain_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t m() const noexcept { return comps_.size(); }

    double value(std::size_t j, std::span<const double> x) const { return comps_[j].value(x); }
    std::vector<double> gradient(std::size_t j, std::span<const double> x) const { return comps_[j].gradient(x); }
    double laplacian(std::size_t j, std::span<const double> x) const { return comps_[j].laplacian(x); }
    std::vector<double> values(std::span<const double> x) const;

    /// x -> F(lo + hi - x1, x2, ...).
    AnalyticField reflected_x1(double lo, double hi) const;

    /// Componentwise sum with a second field on the same n, m.
    AnalyticField plus(const AnalyticField& other, std::string name) const;

private:
    std::string name_;
    std::string domain_;
    std::size_t n_ = 0;
    std::vector<Component> comps_;
};

/// Lap u_j + sum_i (B^(i) D_i u)_j + (C u)_j at x, for each component j.
std::vector<double> residual_at(const EllipticSystem& sys, const AnalyticField& f, std::span<const double> x);

/// Per-component minimum of residual_at over `points`. Throws
/// Error{DimensionMismatch} when the field does not fit the system.
std::vector<double> residual(const EllipticSystem& sys, const AnalyticField& f, const std::vector<Point>& points);

struct FdConsistency {
    bool ok = false;
    double max_gradient_error = 0.0;   // relative, |fd - exact| / (1 + |exact|)
    double max_laplacian_error = 0.0;
};

/// Compares gradient and Laplacian against centered differences of value().
FdConsistency fd_consistency(const AnalyticField& f, const std::vector<Point>& points, double h = 1e-4,
                             double rel_tol = 1e-5);

}  // namespace invcone
