#include "invcone/closed_forms.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>

#include "invcone/error.hpp"

namespace invcone {

namespace {

// 3 * N(t) / D(t) with N = sum 2 t^{2j}/(2j+2)!, D = sum 6 t^{2j}/(2j+3)!;
// zeta(t) = that ratio / t. Converges fast for t < 1.
double zeta_series_ratio(double tau) {
    const double t2 = tau * tau;
    double num = 0.0, den = 0.0;
    double fn = 2.0;  // (2j+2)!
    double fd = 6.0;  // (2j+3)!
    double pw = 1.0;
    for (int j = 0; j < 14; ++j) {
        num += 2.0 * pw / fn;
        den += 6.0 * pw / fd;
        pw *= t2;
        fn *= double(2 * j + 3) * double(2 * j + 4);
        fd *= double(2 * j + 4) * double(2 * j + 5);
    }
    return 3.0 * num / den;
}

// sinh r - r without cancellation.
double sinh_minus_id(double r) {
    if (std::fabs(r) >= 0.5) return std::sinh(r) - r;
    const double r2 = r * r;
    double term = r * r2 / 6.0, sum = 0.0;
    for (int j = 1; j < 12; ++j) {
        sum += term;
        term *= r2 / (double(2 * j + 2) * double(2 * j + 3));
    }
    return sum;
}

bool finite_all(std::initializer_list<double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

AnalyticField::Component minus_x() {
    return {[](std::span<const double> x) { return -x[0]; },
            [](std::span<const double>) { return std::vector<double>{-1.0}; },
            [](std::span<const double>) { return 0.0; }};
}

}  // namespace

double zeta(double tau) {
    if (!(tau > 0.0)) throw Error(ErrorCode::NonPositiveTau, "zeta needs tau > 0");
    if (tau < 1.0) return zeta_series_ratio(tau) / tau;
    // both numerator and denominator scaled by 2 e^{-tau}
    const double e = std::exp(-tau);
    return (1.0 - e) * (1.0 - e) / (1.0 - e * e - 2.0 * tau * e);
}

void ZetaQuery::validate() const {
    if (!finite_all({rho, c, alpha_over_eps}) || !(rho > 0.0) || c < 0.0 || alpha_over_eps < 0.0)
        throw Error(ErrorCode::InvalidParams, "need rho > 0, c >= 0, alpha/eps >= 0");
}

double zeta_curve(double rho, double c) {
    if (c < 1e-12) return 3.0 / rho;
    const double sc = std::sqrt(c);
    const double tau = rho * sc;
    if (tau < 1.0) return zeta_series_ratio(tau) / rho;
    return zeta(tau) * sc;
}

ZetaPrediction wmp_fails_prediction(const ZetaQuery& q) {
    q.validate();
    ZetaPrediction out;
    out.value = zeta_curve(q.rho, q.c);
    out.margin = out.value - q.alpha_over_eps;
    out.fails = out.margin > 0.0;
    return out;
}

double c_threshold(double rho, double alpha_over_eps) {
    ZetaQuery{rho, 0.0, alpha_over_eps}.validate();
    const double target = alpha_over_eps;
    if (target <= 3.0 / rho) return 0.0;
    double lo = 0.0, hi = std::max(1.0, target * target);
    while (zeta_curve(rho, hi) <= target) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (zeta_curve(rho, mid) > target ? hi : lo) = mid;
    }
    return hi;
}

EllipticSystem prop14_system(double eps, double alpha, double c, double c_tilde, bool minus_sign) {
    const double e = minus_sign ? -eps : eps;
    return EllipticSystem{1, 2, {Mat{{0, e}, {0, 0}}}, Mat{{-c, alpha}, {0, -c_tilde}}};
}

AnalyticField u_k_family(const ZetaQuery& q, double eps, double k) {
    q.validate();
    if (!(q.c > 0.0)) throw Error(ErrorCode::NonPositiveC, "u_k needs c > 0; use u0_limit for c = 0");
    if (!(eps > 0.0) || !(k > 0.0) || !finite_all({eps, k}))
        throw Error(ErrorCode::InvalidParams, "u_k needs eps > 0 and k > 0");
    const double c = q.c, sc = std::sqrt(c), ae = q.alpha_over_eps;
    const double s = sc / k;
    const double t = std::tanh(0.5 * s);   // B - A in the exponential form
    const double ks = k * std::sinh(s);
    const double pre = -eps / c;

    // u = pre * { cosh r - 1 - t sinh r - ae (sinh r / (k sinh s) - x) },  r = sqrt(c) x
    AnalyticField::Component u{
        [=](std::span<const double> x) {
            const double r = sc * x[0];
            const double sh = std::sinh(0.5 * r);
            return pre * (2.0 * sh * sh - t * std::sinh(r) - ae * (std::sinh(r) / ks - x[0]));
        },
        [=](std::span<const double> x) {
            const double r = sc * x[0];
            return std::vector<double>{pre * (sc * (std::sinh(r) - t * std::cosh(r)) - ae * (sc * std::cosh(r) / ks - 1.0))};
        },
        [=](std::span<const double> x) {
            const double r = sc * x[0];
            return pre * (c * (std::cosh(r) - t * std::sinh(r)) - ae * c * std::sinh(r) / ks);
        }};
    return AnalyticField("u_k (k=" + std::to_string(k) + ")", "(0, " + std::to_string(q.rho) + ")", 1,
                         {u, minus_x()});
}

AnalyticField u0_limit(const ZetaQuery& q, double eps) {
    q.validate();
    if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorCode::InvalidParams, "u0 needs eps > 0");
    const double c = q.c, ae = q.alpha_over_eps;
    AnalyticField::Component u;
    if (c < 1e-12) {
        // limit c -> 0: u = -eps x^2 / 2 + alpha x^3 / 6
        const double a = eps * ae;
        u = {[=](std::span<const double> x) { return -0.5 * eps * x[0] * x[0] + a * x[0] * x[0] * x[0] / 6.0; },
             [=](std::span<const double> x) { return std::vector<double>{-eps * x[0] + 0.5 * a * x[0] * x[0]}; },
             [=](std::span<const double> x) { return -eps + a * x[0]; }};
    } else {
        const double sc = std::sqrt(c), pre = -eps / c;
        u = {[=](std::span<const double> x) {
                 const double r = sc * x[0];
                 const double sh = std::sinh(0.5 * r);
                 return pre * (2.0 * sh * sh - ae * sinh_minus_id(r) / sc);
             },
             [=](std::span<const double> x) {
                 const double r = sc * x[0];
                 const double sh = std::sinh(0.5 * r);
                 return std::vector<double>{pre * (sc * std::sinh(r) - ae * 2.0 * sh * sh)};
             },
             [=](std::span<const double> x) {
                 const double r = sc * x[0];
                 return pre * (c * std::cosh(r) - ae * sc * std::sinh(r));
             }};
    }
    return AnalyticField("u_0", "(0, " + std::to_string(q.rho) + ")", 1, {u, minus_x()});
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kChi1 = 1.875;  // sup |s'| for the quintic smoothstep
const double kChi2 = 10.0 / std::sqrt(3.0);  // sup |s''|

double smooth(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smooth1(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }
double smooth2(double t) { return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t); }

// chi = -s(min(x/x*, 1)), extended by 0 for x < 0.
struct Chi {
    double xs;
    double v(double x) const { return x <= 0 ? 0.0 : x >= xs ? -1.0 : -smooth(x / xs); }
    double d1(double x) const { return x <= 0 || x >= xs ? 0.0 : -smooth1(x / xs) / xs; }
    double d2(double x) const { return x <= 0 || x >= xs ? 0.0 : -smooth2(x / xs) / (xs * xs); }
};

AnalyticField base_pair(double sigma, Chi chi) {
    AnalyticField::Component u{[=](std::span<const double> x) { return sigma * chi.v(x[0]); },
                               [=](std::span<const double> x) { return std::vector<double>{sigma * chi.d1(x[0])}; },
                               [=](std::span<const double> x) { return sigma * chi.d2(x[0]); }};
    AnalyticField::Component v{[](std::span<const double> x) { return x[0] * x[0] - x[0]; },
                               [](std::span<const double> x) { return std::vector<double>{2.0 * x[0] - 1.0}; },
                               [](std::span<const double>) { return 2.0; }};
    return AnalyticField("(sigma chi, x^2 - x)", "(0, 1)", 1, {u, v});
}

AnalyticField linear_u(double delta) {
    AnalyticField::Component u{[=](std::span<const double> x) { return delta * x[0]; },
                               [=](std::span<const double>) { return std::vector<double>{delta}; },
                               [](std::span<const double>) { return 0.0; }};
    AnalyticField::Component zero{[](std::span<const double>) { return 0.0; },
                                  [](std::span<const double>) { return std::vector<double>{0.0}; },
                                  [](std::span<const double>) { return 0.0; }};
    return AnalyticField("delta x", "(0, 1)", 1, {u, zero});
}

constexpr std::size_t kGrid = 10000;
constexpr std::size_t kRandom = 1000;

std::vector<Point> verification_points(std::uint64_t seed) {
    std::vector<Point> pts;
    pts.reserve(kGrid + kRandom);
    for (std::size_t i = 1; i <= kGrid; ++i) pts.push_back({double(i) / double(kGrid + 1)});
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < kRandom; ++i) {
        double x = u(rng);
        while (x <= 0.0) x = u(rng);
        pts.push_back({x});
    }
    return pts;
}

Prop16Checks evaluate_checks(const EllipticSystem& sys, const AnalyticField& pair, const std::vector<Point>& pts) {
    Prop16Checks ch;
    const auto mins = residual(sys, pair, pts);
    ch.min_residual_u = mins[0];
    ch.min_residual_v = mins[1];
    const Point zero{0.0}, one{1.0};
    ch.u_at_0 = pair.value(0, zero);
    ch.u_at_1 = pair.value(0, one);
    ch.v_at_0 = pair.value(1, zero);
    ch.v_at_1 = pair.value(1, one);
    ch.max_interior_u = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kGrid; ++i) {
        const double val = pair.value(0, pts[i]);
        if (val > ch.max_interior_u) {
            ch.max_interior_u = val;
            ch.argmax_interior_u = pts[i][0];
        }
    }
    return ch;
}

}  // namespace

bool Prop16Checks::passed() const noexcept {
    return min_residual_u > 0.0 && min_residual_v > 0.0 && u_at_0 <= 0.0 && u_at_1 <= 0.0 && v_at_0 <= 0.0 &&
           v_at_1 <= 0.0 && max_interior_u > 0.0;
}

EllipticSystem prop16_system(const Prop16Params& p, double c) {
    return EllipticSystem{1, 2, {Mat{{0, -p.eps}, {-p.eps_tilde, 0}}}, Mat{{-c, p.alpha}, {p.beta, -p.c_tilde}}};
}

Prop16Result prop16_construct(Prop16Params p, double c_factor, std::uint64_t seed) {
    if (!finite_all({p.eps, p.eps_tilde, p.alpha, p.beta, p.c_tilde, c_factor}) || p.eps == 0.0 ||
        !(p.c_tilde > 0.0) || !(c_factor > 1.0))
        throw Error(ErrorCode::InvalidParams, "need eps != 0, c_tilde > 0, c_factor > 1");

    Prop16Result out;
    out.reflected = p.eps < 0.0;
    Prop16Params r = p;  // reduced orientation: eps > 0
    if (out.reflected) {
        r.eps = -p.eps;
        r.eps_tilde = -p.eps_tilde;
    }
    r.x_star = std::min(0.25, r.eps / (4.0 * std::fabs(r.alpha) + 1.0));
    r.chi1_norm = kChi1 / r.x_star;
    r.chi2_norm = kChi2 / (r.x_star * r.x_star);
    r.sigma1 = 1.0 / (std::fabs(r.beta) + std::fabs(r.eps_tilde) * r.chi1_norm + 1.0);
    r.sigma2 = r.eps / (8.0 * r.chi2_norm);
    r.sigma = std::min(r.sigma1, r.sigma2);
    r.c_threshold = (r.eps + std::fabs(r.alpha)) / r.sigma;
    const double c = c_factor * r.c_threshold;

    const Chi chi{r.x_star};
    out.base = base_pair(r.sigma, chi);
    const EllipticSystem red = prop16_system(r, c);
    const auto pts = verification_points(seed);

    // residuals of (u + delta x, v) are affine in delta: r1 - c delta x, r2 - eps_tilde delta + beta delta x
    std::vector<double> r1(pts.size()), r2(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto res = residual_at(red, out.base, pts[i]);
        r1[i] = res[0];
        r2[i] = res[1];
    }
    const double u1 = out.base.value(0, Point{1.0});
    double delta = 0.0;
    for (int j = 1; j <= 60 && delta == 0.0; ++j) {
        const double d = std::ldexp(1.0, -j);
        if (u1 + d > 0.0) continue;
        double m1 = std::numeric_limits<double>::infinity(), m2 = m1, mx = -m1;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double x = pts[i][0];
            m1 = std::min(m1, r1[i] - c * d * x);
            m2 = std::min(m2, r2[i] - r.eps_tilde * d + r.beta * d * x);
            if (i < kGrid) mx = std::max(mx, out.base.value(0, pts[i]) + d * x);
        }
        if (m1 > 0.0 && m2 > 0.0 && mx > 0.0) delta = d;
    }
    if (delta == 0.0) throw Error(ErrorCode::InvalidParams, "no delta in {2^-j} passes the checks");
    r.delta = delta;

    AnalyticField pair = out.base.plus(linear_u(delta), "(u + delta x, v)");
    if (out.reflected) pair = pair.reflected_x1(0.0, 1.0);

    // Report in the caller's orientation, re-evaluated from the final field.
    out.params = r;
    out.params.eps = p.eps;
    out.params.eps_tilde = p.eps_tilde;
    out.c = c;
    out.pair = std::move(pair);
    out.checks = evaluate_checks(prop16_system(out.params, c), out.pair, pts);
    return out;
}

bool Prop16Restricted::violates_wmp() const noexcept {
    return hi > lo && min_residual_u > 0.0 && min_residual_v > 0.0 && max_interior > 0.0 && boundary_max <= 1e-12;
}

Prop16Restricted prop16_restricted(const Prop16Result& built, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidParams, "need c > 0");
    const AnalyticField& f = built.pair;
    auto w = [&](double x) { return f.value(0, Point{x}); };

    // component of {w > 0} containing the grid maximum
    const double xm = built.checks.argmax_interior_u;
    auto edge = [&](double inside, double outside) {
        // walk out on a fine grid, then bisect
        const double step = (outside - inside) / 20000.0;
        double a = inside, b = inside;
        while (true) {
            b = a + step;
            if ((step > 0 && b >= outside) || (step < 0 && b <= outside)) {
                b = outside;
                break;
            }
            if (w(b) <= 0.0) break;
            a = b;
        }
        if (w(b) > 0.0) return b;  // reached the domain end
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (a + b);
            (w(mid) > 0.0 ? a : b) = mid;
        }
        return b;
    };
    Prop16Restricted out;
    out.c = c;
    out.lo = edge(xm, 0.0);
    out.hi = edge(xm, 1.0);
    out.boundary_max = std::max(std::fabs(w(out.lo)), std::fabs(w(out.hi)));
    out.boundary_max = std::max({out.boundary_max, f.value(1, Point{out.lo}), f.value(1, Point{out.hi})});

    const EllipticSystem sys = prop16_system(built.params, c);
    std::vector<Point> pts;
    pts.reserve(kGrid);
    for (std::size_t i = 1; i <= kGrid; ++i)
        pts.push_back({out.lo + (out.hi - out.lo) * double(i) / double(kGrid + 1)});
    const auto mins = residual(sys, f, pts);
    out.min_residual_u = mins[0];
    out.min_residual_v = mins[1];
    out.max_interior = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts) out.max_interior = std::max(out.max_interior, w(p[0]));
    return out;
}

std::vector<CurveSample> figure1_samples(const std::vector<double>& rhos, std::size_t per_curve, double c_lo,
                                         double c_hi) {
    if (per_curve < 2 || !(c_lo > 0.0) || !(c_hi > c_lo)) throw Error(ErrorCode::InvalidParams, "bad curve range");
    std::vector<CurveSample> out;
    out.reserve(rhos.size() * per_curve);
    const double lr = std::log(c_hi / c_lo);
    for (double rho : rhos) {
        if (!(rho > 0.0)) throw Error(ErrorCode::InvalidParams, "rho must be positive");
        for (std::size_t i = 0; i < per_curve; ++i) {
            const double c = i + 1 == per_curve ? c_hi : c_lo * std::exp(lr * double(i) / double(per_curve - 1));
            out.push_back({c, zeta_curve(rho, c), rho});
        }
    }
    return out;
}

std::string figure1_csv(const std::vector<CurveSample>& samples) {
    std::string out = "c,value,rho\n";
    char buf[64];
    auto put = [&](double v, char sep) {
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        out.append(buf, res.ptr);
        out.push_back(sep);
    };
    for (const auto& s : samples) {
        put(s.c, ',');
        put(s.value, ',');
        put(s.rho, '\n');
    }
    return out;
}

}  // namespace invcone
