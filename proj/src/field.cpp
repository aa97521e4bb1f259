#include "invcone/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "invcone/error.hpp"

namespace invcone {

AnalyticField::AnalyticField(std::string name, std::string domain, std::size_t n, std::vector<Component> components)
    : name_(std::move(name)), domain_(std::move(domain)), n_(n), comps_(std::move(components)) {}

std::vector<double> AnalyticField::values(std::span<const double> x) const {
    std::vector<double> out(m());
    for (std::size_t j = 0; j < m(); ++j) out[j] = value(j, x);
    return out;
}

AnalyticField AnalyticField::reflected_x1(double lo, double hi) const {
    std::vector<Component> out;
    out.reserve(m());
    for (const Component& c : comps_) {
        auto mirror = [lo, hi](std::span<const double> x) {
            std::vector<double> y(x.begin(), x.end());
            y[0] = lo + hi - y[0];
            return y;
        };
        out.push_back({
            [c, mirror](std::span<const double> x) { return c.value(mirror(x)); },
            [c, mirror](std::span<const double> x) {
                auto g = c.gradient(mirror(x));
                g[0] = -g[0];
                return g;
            },
            [c, mirror](std::span<const double> x) { return c.laplacian(mirror(x)); },
        });
    }
    return AnalyticField(name_ + " (reflected)", domain_, n_, std::move(out));
}

AnalyticField AnalyticField::plus(const AnalyticField& other, std::string name) const {
    if (other.n() != n_ || other.m() != m())
        throw Error(ErrorCode::DimensionMismatch, "field sum needs equal n and m");
    std::vector<Component> out;
    for (std::size_t j = 0; j < m(); ++j) {
        const Component a = comps_[j];
        const Component b = other.comps_[j];
        out.push_back({
            [a, b](std::span<const double> x) { return a.value(x) + b.value(x); },
            [a, b](std::span<const double> x) {
                auto g = a.gradient(x);
                const auto h = b.gradient(x);
                for (std::size_t i = 0; i < g.size(); ++i) g[i] += h[i];
                return g;
            },
            [a, b](std::span<const double> x) { return a.laplacian(x) + b.laplacian(x); },
        });
    }
    return AnalyticField(std::move(name), domain_, n_, std::move(out));
}

namespace {

void check_fit(const EllipticSystem& sys, const AnalyticField& f) {
    sys.validate();
    if (f.m() != sys.m || f.n() != sys.n)
        throw Error(ErrorCode::DimensionMismatch, "field has n=" + std::to_string(f.n()) + ", m=" +
                                                      std::to_string(f.m()) + " but the system has n=" +
                                                      std::to_string(sys.n) + ", m=" + std::to_string(sys.m));
}

}  // namespace

std::vector<double> residual_at(const EllipticSystem& sys, const AnalyticField& f, std::span<const double> x) {
    check_fit(sys, f);
    const std::size_t m = sys.m;
    std::vector<double> u(m), lap(m);
    std::vector<std::vector<double>> grad(m);
    for (std::size_t k = 0; k < m; ++k) {
        u[k] = f.value(k, x);
        lap[k] = f.laplacian(k, x);
        grad[k] = f.gradient(k, x);
    }
    std::vector<double> r(m);
    for (std::size_t j = 0; j < m; ++j) {
        double s = lap[j];
        for (std::size_t i = 0; i < sys.n; ++i)
            for (std::size_t k = 0; k < m; ++k) s += sys.b[i](j, k) * grad[k][i];
        for (std::size_t k = 0; k < m; ++k) s += sys.c(j, k) * u[k];
        r[j] = s;
    }
    return r;
}

std::vector<double> residual(const EllipticSystem& sys, const AnalyticField& f, const std::vector<Point>& points) {
    check_fit(sys, f);
    std::vector<double> mins(sys.m, std::numeric_limits<double>::infinity());
    for (const Point& p : points) {
        if (p.size() != sys.n) throw Error(ErrorCode::DimensionMismatch, "point dimension differs from n");
        const auto r = residual_at(sys, f, p);
        for (std::size_t j = 0; j < sys.m; ++j) mins[j] = std::min(mins[j], r[j]);
    }
    return mins;
}

FdConsistency fd_consistency(const AnalyticField& f, const std::vector<Point>& points, double h, double rel_tol) {
    FdConsistency out;
    for (const Point& p : points) {
        for (std::size_t j = 0; j < f.m(); ++j) {
            const double u0 = f.value(j, p);
            const auto g = f.gradient(j, p);
            double lap_fd = 0.0;
            Point q = p;
            for (std::size_t i = 0; i < f.n(); ++i) {
                q[i] = p[i] + h;
                const double up = f.value(j, q);
                q[i] = p[i] - h;
                const double um = f.value(j, q);
                q[i] = p[i];
                const double gfd = (up - um) / (2 * h);
                out.max_gradient_error = std::max(out.max_gradient_error, std::fabs(gfd - g[i]) / (1 + std::fabs(g[i])));
                lap_fd += (up - 2 * u0 + um) / (h * h);
            }
            const double lap = f.laplacian(j, p);
            out.max_laplacian_error = std::max(out.max_laplacian_error, std::fabs(lap_fd - lap) / (1 + std::fabs(lap)));
        }
    }
    out.ok = out.max_gradient_error <= rel_tol && out.max_laplacian_error <= rel_tol;
    return out;
}

}  // namespace invcone
