#include "invcone/registry.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "invcone/error.hpp"

namespace invcone {

namespace {

using C = AnalyticField::Component;
using X = std::span<const double>;
using V = std::vector<double>;

RegistryEntry ex11() {
    RegistryEntry e;
    e.id = "ex1.1";
    e.description = "gradient-coupled Laplacians on the unit disk, C = 0";
    e.system = EllipticSystem{2, 2, {Mat{{0, 0}, {1, 0}}, Mat{{0, 1}, {0, 0}}}, Mat(2, 2)};
    e.shape = DomainShape::disk;
    e.lo = {-1, -1};
    e.hi = {1, 1};
    C u1{[](X x) { return 1 - x[0] * x[0] - x[1] * x[1]; }, [](X x) { return V{-2 * x[0], -2 * x[1]}; },
         [](X) { return -4.0; }};
    C u2{[](X x) { return x[0] * x[0] * x[0] / 3 + 4 * x[1] - 20; }, [](X x) { return V{x[0] * x[0], 4.0}; },
         [](X x) { return 2 * x[0]; }};
    e.witness = AnalyticField("(1 - |x|^2, x1^3/3 + 4 x2 - 20)", "unit disk", 2, {u1, u2});
    e.verdict = ExpectedVerdict::wmp_fails;
    return e;
}

RegistryEntry ex18() {
    RegistryEntry e;
    e.id = "ex1.8";
    e.description = "diagonalizable drift in x1, C = -I; cone rows (1, 1/2), (4, 1)";
    e.system = EllipticSystem{2, 2, {Mat{{6, 1}, {-8, 0}}, Mat(2, 2)}, -1.0 * Mat::identity(2)};
    e.lo = {0, 0};
    e.hi = {1, 1};
    e.verdict = ExpectedVerdict::cone_invariant;
    e.cone_p = Mat{{1, 0.5}, {4, 1}};
    e.cone_k = 2;
    return e;
}

RegistryEntry ex110() {
    RegistryEntry e;
    e.id = "ex1.10";
    e.description = "symmetric swap coupling in x1, C = -I; half-space u1 + u2 <= 0";
    e.system = EllipticSystem{2, 2, {Mat{{0, 1}, {1, 0}}, Mat(2, 2)}, -1.0 * Mat::identity(2)};
    e.lo = {0, 0};
    e.hi = {1, 1};
    // u1 = a(x1) b(x2)^3, u2 = p(x1) b(x2) with a = x - x^2, b = x - x^2, p = x^2 + 2x - 4
    C u1{[](X x) {
             const double a = x[0] - x[0] * x[0], b = x[1] - x[1] * x[1];
             return a * b * b * b;
         },
         [](X x) {
             const double a = x[0] - x[0] * x[0], b = x[1] - x[1] * x[1];
             return V{(1 - 2 * x[0]) * b * b * b, 3 * a * b * b * (1 - 2 * x[1])};
         },
         [](X x) {
             const double a = x[0] - x[0] * x[0], b = x[1] - x[1] * x[1], db = 1 - 2 * x[1];
             return -2 * b * b * b + a * (6 * b * db * db - 6 * b * b);
         }};
    C u2{[](X x) { return (x[0] * x[0] + 2 * x[0] - 4) * (x[1] - x[1] * x[1]); },
         [](X x) {
             const double p = x[0] * x[0] + 2 * x[0] - 4, b = x[1] - x[1] * x[1];
             return V{(2 * x[0] + 2) * b, p * (1 - 2 * x[1])};
         },
         [](X x) {
             const double p = x[0] * x[0] + 2 * x[0] - 4, b = x[1] - x[1] * x[1];
             return 2 * b - 2 * p;
         }};
    e.witness = AnalyticField("((x1-x1^2)(x2-x2^2)^3, (x1^2+2x1-4)(x2-x2^2))", "unit square", 2, {u1, u2});
    e.verdict = ExpectedVerdict::cone_invariant;
    e.cone_p = Mat{{0.5, 0.5}, {0.5, -0.5}};
    e.cone_k = 1;
    return e;
}

RegistryEntry remark18() {
    RegistryEntry e;
    e.id = "remark1.8-matrices";
    e.description = "M-matrix Q = [[2,-1],[-1,2]] with cooperative C and cooperative Q^-1 C Q";
    const Mat q{{2, -1}, {-1, 2}};
    const Mat p = (1.0 / 3.0) * Mat{{2, 1}, {1, 2}};
    // drift chosen so that Q diagonalizes it: Q diag(1, 2) Q^-1
    e.system = EllipticSystem{1, 2, {q * Mat::diagonal(std::vector<double>{1, 2}) * p}, Mat{{-3, 2}, {1, -2}}};
    e.lo = {0};
    e.hi = {1};
    e.verdict = ExpectedVerdict::cone_invariant;
    e.cone_p = p;
    e.cone_k = 2;
    e.q_candidate = q;
    return e;
}

}  // namespace

RegistryEntry example_1_3(double eps, double eps_prime) {
    if (!std::isfinite(eps) || !std::isfinite(eps_prime)) throw Error(ErrorCode::InvalidParams, "non-finite coupling");
    RegistryEntry e;
    e.id = "ex1.3";
    e.description = "Lap u - eps d1 v >= 0, Lap v - eps' d1 u >= 0 on the unit square";
    e.system = EllipticSystem{2, 2, {Mat{{0, -eps}, {-eps_prime, 0}}, Mat(2, 2)}, Mat(2, 2)};
    e.lo = {0, 0};
    e.hi = {1, 1};
    if (eps == 0.0 && eps_prime == 0.0) {
        e.verdict = ExpectedVerdict::wmp_holds;
        return e;
    }
    e.verdict = ExpectedVerdict::wmp_fails;
    // The bump goes in the component whose equation carries the nonzero
    // coupling to the exponential.
    const bool swap = eps == 0.0;
    const double drive = swap ? eps_prime : eps;   // couples the bump's equation to the exponential
    const double back = swap ? eps : eps_prime;
    const double sgn = drive > 0 ? 1.0 : -1.0;
    const double delta = 0.1, xb = 0.5;
    const double h = std::numbers::e + 1.0;
    const double k = std::numbers::e * (4.0 / std::fabs(drive) + std::fabs(back)) + 1.0;
    C bump{[=](X x) { return delta - (x[0] - xb) * (x[0] - xb) - (x[1] - xb) * (x[1] - xb); },
           [=](X x) { return V{-2 * (x[0] - xb), -2 * (x[1] - xb)}; }, [](X) { return -4.0; }};
    C expo{[=](X x) { return k * (std::exp(-sgn * x[0]) - h); },
           [=](X x) { return V{-sgn * k * std::exp(-sgn * x[0]), 0.0}; },
           [=](X x) { return k * std::exp(-sgn * x[0]); }};
    std::vector<C> comps = swap ? std::vector<C>{expo, bump} : std::vector<C>{bump, expo};
    e.witness = AnalyticField("(delta - |x - x0|^2, K(exp(-+x1) - H))", "unit square", 2, std::move(comps));
    return e;
}

const std::vector<std::string>& registry_ids() {
    static const std::vector<std::string> ids{"ex1.1", "ex1.3", "ex1.8", "ex1.10", "remark1.8-matrices"};
    return ids;
}

RegistryEntry example_registry(const std::string& id) {
    if (id == "ex1.1") return ex11();
    if (id == "ex1.3") return example_1_3(1.0, 1.0);
    if (id == "ex1.8") return ex18();
    if (id == "ex1.10") return ex110();
    if (id == "remark1.8-matrices") return remark18();
    throw Error(ErrorCode::UnknownId, "no registry entry '" + id + "'");
}

std::vector<Point> interior_points(const RegistryEntry& e, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> pts;
    pts.reserve(count);
    const std::size_t n = e.lo.size();
    while (pts.size() < count) {
        Point p(n);
        if (e.shape == DomainShape::disk) {
            const double r = std::sqrt(u(rng)), th = 2 * std::numbers::pi * u(rng);
            if (r >= 1.0) continue;
            const double cx = 0.5 * (e.lo[0] + e.hi[0]), cy = 0.5 * (e.lo[1] + e.hi[1]);
            const double rad = 0.5 * (e.hi[0] - e.lo[0]);
            p = {cx + rad * r * std::cos(th), cy + rad * r * std::sin(th)};
        } else {
            bool ok = true;
            for (std::size_t i = 0; i < n; ++i) {
                const double t = u(rng);
                ok = ok && t > 0.0;
                p[i] = e.lo[i] + (e.hi[i] - e.lo[i]) * t;
            }
            if (!ok) continue;
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

std::vector<Point> boundary_points(const RegistryEntry& e, std::size_t count) {
    std::vector<Point> pts;
    const std::size_t n = e.lo.size();
    if (n == 1) return {{e.lo[0]}, {e.hi[0]}};
    pts.reserve(count);
    if (e.shape == DomainShape::disk) {
        const double cx = 0.5 * (e.lo[0] + e.hi[0]), cy = 0.5 * (e.lo[1] + e.hi[1]);
        const double rad = 0.5 * (e.hi[0] - e.lo[0]);
        for (std::size_t i = 0; i < count; ++i) {
            const double th = 2 * std::numbers::pi * double(i) / double(count);
            pts.push_back({cx + rad * std::cos(th), cy + rad * std::sin(th)});
        }
        return pts;
    }
    // perimeter of the rectangle, uniform in arc length, corners included
    const double w = e.hi[0] - e.lo[0], h = e.hi[1] - e.lo[1], per = 2 * (w + h);
    for (std::size_t i = 0; i < count; ++i) {
        double s = per * double(i) / double(count);
        if (s < w) pts.push_back({e.lo[0] + s, e.lo[1]});
        else if ((s -= w) < h) pts.push_back({e.hi[0], e.lo[1] + s});
        else if ((s -= h) < w) pts.push_back({e.hi[0] - s, e.hi[1]});
        else pts.push_back({e.lo[0], e.hi[1] - (s - w)});
    }
    return pts;
}

}  // namespace invcone
