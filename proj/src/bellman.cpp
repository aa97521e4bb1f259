#include "invcone/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "invcone/error.hpp"

namespace invcone {

void BellmanProblem::validate() const {
    if (n == 0 || drifts.empty()) throw Error(ErrorCode::InvalidParams, "Bellman problem needs n >= 1 and a drift");
    for (const auto& b : drifts) {
        if (b.size() != n) throw Error(ErrorCode::InvalidParams, "drift length differs from n");
        for (double v : b)
            if (!std::isfinite(v)) throw Error(ErrorCode::InvalidParams, "non-finite drift");
    }
    if (lo.size() != n || hi.size() != n) throw Error(ErrorCode::InvalidParams, "domain box must have n bounds");
    for (std::size_t a = 0; a < n; ++a)
        if (!std::isfinite(lo[a]) || !std::isfinite(hi[a]) || !(lo[a] < hi[a]))
            throw Error(ErrorCode::InvalidParams, "domain box needs lo < hi");
}

BellmanProblem reduce_to_bellman(const EllipticSystem& sys, const ConeCertificate& cert) {
    sys.validate();
    if (cert.k != sys.m)
        throw Error(ErrorCode::InvalidCertificate, "the reduction needs a full cone (k = m)");
    const auto val = validate_certificate(sys, cert);
    if (!val.ok) throw Error(ErrorCode::InvalidCertificate, "certificate does not validate for this system");
    if (cert.betas.size() != sys.n) throw Error(ErrorCode::InvalidCertificate, "drift table has the wrong shape");
    BellmanProblem p;
    p.n = sys.n;
    p.lo.assign(sys.n, 0.0);
    p.hi.assign(sys.n, 1.0);
    for (std::size_t j = 0; j < sys.m; ++j) {
        std::vector<double> b(sys.n);
        for (std::size_t i = 0; i < sys.n; ++i) {
            if (cert.betas[i].size() != sys.m)
                throw Error(ErrorCode::InvalidCertificate, "drift table has the wrong shape");
            b[i] = cert.betas[i][j];
        }
        p.drifts.push_back(std::move(b));
    }
    return p;
}

double evaluate_F(const BellmanProblem& p, const DiscreteField& psi, std::size_t node) {
    p.validate();
    const GridDomain& g = psi.grid;
    if (psi.m != 1 || g.dim() != p.n) throw Error(ErrorCode::DimensionMismatch, "psi must be a scalar field on an n-dim grid");
    if (node >= g.nodes()) throw Error(ErrorCode::InvalidParams, "node out of range");
    if (g.is_boundary(node)) throw Error(ErrorCode::BoundaryNode, "F is evaluated at interior nodes only");
    double lap = 0.0;
    std::vector<double> grad(p.n);
    std::size_t stride = 1;
    for (std::size_t a = 0; a < p.n; ++a) {
        const double h = g.h(a);
        const double up = psi.values[node + stride], dn = psi.values[node - stride], c = psi.values[node];
        lap += (up - 2 * c + dn) / (h * h);
        grad[a] = (up - dn) / (2 * h);
        stride *= g.resolution[a];
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& b : p.drifts) {
        double s = 0.0;
        for (std::size_t a = 0; a < p.n; ++a) s += b[a] * grad[a];
        best = std::max(best, s);
    }
    return lap + best;
}

namespace {

double min_first_drift(const BellmanProblem& p) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& b : p.drifts) m = std::min(m, b[0]);
    return m;
}

// Visits the per_axis^n points of the closed box.
template <class Fn>
void for_each_point(const std::vector<double>& lo, const std::vector<double>& hi, std::size_t per_axis, Fn&& fn) {
    const std::size_t n = lo.size();
    std::size_t total = 1;
    for (std::size_t a = 0; a < n; ++a) total *= per_axis;
    std::vector<double> x(n);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t r = idx;
        for (std::size_t a = 0; a < n; ++a) {
            const std::size_t i = r % per_axis;
            r /= per_axis;
            x[a] = i + 1 == per_axis ? hi[a] : lo[a] + (hi[a] - lo[a]) * double(i) / double(per_axis - 1);
        }
        fn(x);
    }
}

}  // namespace

SupersolutionCheck check_supersolution(const BellmanProblem& p, double gamma, double delta, double lambda,
                                       const std::vector<double>& lo, const std::vector<double>& hi,
                                       std::size_t per_axis) {
    p.validate();
    if (lo.size() != p.n || hi.size() != p.n || per_axis < 2)
        throw Error(ErrorCode::InvalidParams, "verification box must have n bounds and >= 2 points per axis");
    SupersolutionCheck c;
    c.max_residual = -std::numeric_limits<double>::infinity();
    c.min_psi = std::numeric_limits<double>::infinity();
    for_each_point(lo, hi, per_axis, [&](const std::vector<double>& x) {
        const double e = delta * std::exp(gamma * x[0]);
        const double psi = 1.0 - e;
        // grad psi = (-gamma e, 0, ...), Lap psi = -gamma^2 e
        double drift = -std::numeric_limits<double>::infinity();
        for (const auto& b : p.drifts) drift = std::max(drift, -b[0] * gamma * e);
        const double f = -gamma * gamma * e + drift;
        c.max_residual = std::max(c.max_residual, f + lambda * psi);
        c.min_psi = std::min(c.min_psi, psi);
        ++c.nodes;
    });
    c.ok = c.max_residual <= kEigTol && c.min_psi >= 0.5 - kEigTol;
    return c;
}

EigenBound supersolution_lower_bound(const BellmanProblem& p, std::size_t per_axis) {
    p.validate();
    EigenBound out;
    out.verification_per_axis = per_axis;
    const double bmin = min_first_drift(p);
    out.gamma = std::fabs(bmin) + 1.0;
    out.delta = 0.5 * std::exp(-out.gamma * p.hi[0]);
    const double g = out.gamma, d = out.delta;

    // Closed form: F[psi] = -delta gamma e^{gamma x1} (gamma + min_j b^j_1).
    auto feasible = [&](double lambda) {
        bool ok = true;
        for_each_point(p.lo, p.hi, per_axis, [&](const std::vector<double>& x) {
            const double e = d * std::exp(g * x[0]);
            if (-e * g * (g + bmin) + lambda * (1.0 - e) > 0.0) ok = false;
        });
        return ok;
    };
    double lo = 0.0, hi = 1.0;
    while (feasible(hi)) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 60 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    out.lower = lo;
    out.check = check_supersolution(p, g, d, out.lower, p.lo, p.hi, per_axis);

    out.upper = std::numeric_limits<double>::infinity();
    for (const auto& b : p.drifts) {
        // constant-drift box operator separates into 1D pieces
        double s = 0.0;
        for (std::size_t a = 0; a < p.n; ++a) s += linear_principal_eigenvalue(b[a], p.hi[a] - p.lo[a]);
        out.upper = std::min(out.upper, s);
    }
    return out;
}

double linear_principal_eigenvalue(double b, double rho, double h) {
    if (!std::isfinite(b) || !(rho > 0.0) || !(h > 0.0) || !std::isfinite(rho))
        throw Error(ErrorCode::InvalidParams, "need finite b, rho > 0, h > 0");
    const auto cells = static_cast<std::size_t>(std::llround(rho / h));
    if (cells < 3) throw Error(ErrorCode::InvalidParams, "grid too coarse");
    const std::size_t n = cells - 1;
    const double hh = rho / double(cells);
    const double diag = 2.0 / (hh * hh);
    const double sub = -(1.0 / (hh * hh) - b / (2 * hh));  // coefficient of psi_{i-1}
    const double sup = -(1.0 / (hh * hh) + b / (2 * hh));  // coefficient of psi_{i+1}

    // Thomas factorization of the tridiagonal operator, reused every step.
    std::vector<double> cp(n), dp(n), denom(n);
    denom[0] = diag;
    cp[0] = sup / diag;
    for (std::size_t i = 1; i < n; ++i) {
        denom[i] = diag - sub * cp[i - 1];
        if (denom[i] == 0.0) throw Error(ErrorCode::ConvergenceFailure, "zero pivot in tridiagonal solve");
        cp[i] = sup / denom[i];
    }
    auto solve = [&](std::vector<double>& x) {
        x[0] /= denom[0];
        for (std::size_t i = 1; i < n; ++i) x[i] = (x[i] - sub * x[i - 1]) / denom[i];
        for (std::size_t i = n - 1; i-- > 0;) x[i] -= cp[i] * x[i + 1];
    };

    std::vector<double> x(n, 1.0), y;
    double lambda = 0.0;
    for (int it = 0; it < 1000; ++it) {
        y = x;
        solve(y);
        double sx = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sx += x[i];
            sy += y[i];
        }
        const double next = sx / sy;
        double ymax = 0.0;
        for (double v : y) ymax = std::max(ymax, std::fabs(v));
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ymax;
        if (it > 0 && std::fabs(next - lambda) <= 1e-13 * std::fabs(next)) return next;
        lambda = next;
    }
    throw Error(ErrorCode::ConvergenceFailure, "inverse power iteration did not converge");
}

}  // namespace invcone
