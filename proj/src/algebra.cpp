#include "invcone/algebra.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "invcone/error.hpp"

namespace invcone {

namespace {

void require_square(const Mat& m, const char* what) {
    if (!m.square() || m.rows() == 0) throw Error(ErrorCode::NonSquare, what);
}

double residual_inf(const Mat& m, std::span<const double> v, double lambda) {
    const auto mv = m * v;
    double r = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) r = std::max(r, std::fabs(mv[i] - lambda * v[i]));
    return r;
}

Mat shifted(const Mat& m, double lambda) {
    Mat a = m;
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) -= lambda;
    return a;
}

}  // namespace

bool EigenDecomp::all_real() const noexcept {
    return std::all_of(clusters.begin(), clusters.end(), [](const EigenCluster& c) { return c.real; });
}

bool EigenDecomp::simple() const noexcept {
    return std::all_of(clusters.begin(), clusters.end(),
                       [](const EigenCluster& c) { return c.algebraic_multiplicity == 1; });
}

void normalize_max(std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::fabs(v[i]) > std::fabs(v[best])) best = i;
    if (v.empty() || v[best] == 0.0) return;
    const double s = 1.0 / v[best];  // also fixes the sign
    for (double& x : v) x *= s;
}

std::vector<std::vector<double>> nullspace(const Mat& a, double tol) {
    const std::size_t rows = a.rows();
    const std::size_t cols = a.cols();
    Mat r = a;
    const double thresh = tol * std::max(1.0, a.max_abs());
    std::vector<std::size_t> pivot_cols;
    std::vector<bool> is_pivot(cols, false);
    std::size_t pr = 0;
    for (std::size_t j = 0; j < cols && pr < rows; ++j) {
        std::size_t best = pr;
        for (std::size_t i = pr + 1; i < rows; ++i)
            if (std::fabs(r(i, j)) > std::fabs(r(best, j))) best = i;
        if (std::fabs(r(best, j)) <= thresh) continue;
        if (best != pr)
            for (std::size_t c = 0; c < cols; ++c) std::swap(r(best, c), r(pr, c));
        const double d = 1.0 / r(pr, j);
        for (std::size_t c = 0; c < cols; ++c) r(pr, c) *= d;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == pr) continue;
            const double f = r(i, j);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < cols; ++c) r(i, c) -= f * r(pr, c);
        }
        pivot_cols.push_back(j);
        is_pivot[j] = true;
        ++pr;
    }
    std::vector<std::vector<double>> basis;
    for (std::size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        std::vector<double> v(cols, 0.0);
        v[f] = 1.0;
        for (std::size_t p = 0; p < pivot_cols.size(); ++p) v[pivot_cols[p]] = -r(p, f);
        normalize_max(v);
        basis.push_back(std::move(v));
    }
    return basis;
}

EigenDecomp eigen(const Mat& m) {
    require_square(m, "eigen");
    if (m.rows() > kMaxAlgebraDim) throw Error(ErrorCode::DimensionTooLarge, "eigen supports m <= 16");
    const std::size_t n = m.rows();

    Eigen::MatrixXd em(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) em(i, j) = m(i, j);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(em, false);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "eigenvalue iteration");

    std::vector<std::complex<double>> vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = solver.eigenvalues()[static_cast<Eigen::Index>(i)];
    auto by_re_im = [](const std::complex<double>& a, const std::complex<double>& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    };
    std::sort(vals.begin(), vals.end(), by_re_im);

    const double scale = std::max(1.0, m.max_abs());
    const double imag_tol = 1e-7 * scale;
    const double cluster_tol = 1e-6 * scale;
    const double resid_tol = kAlgTol * scale;

    EigenDecomp out;
    out.eigenvalues = vals;

    std::vector<double> real_vals;
    std::size_t complex_count = 0;
    for (const auto& v : vals) {
        if (std::fabs(v.imag()) <= imag_tol) real_vals.push_back(v.real());
        else ++complex_count;
    }
    std::sort(real_vals.begin(), real_vals.end());

    // Complex pairs: one cluster per distinct value with positive imaginary part.
    for (const auto& v : vals) {
        if (std::fabs(v.imag()) > imag_tol && v.imag() > 0) out.clusters.push_back({v.real(), false, 2, 0});
    }

    std::vector<std::vector<double>> columns;
    std::vector<double> column_values;
    bool residuals_ok = true;

    std::size_t i = 0;
    while (i < real_vals.size()) {
        std::size_t j = i + 1;
        while (j < real_vals.size() && real_vals[j] - real_vals[j - 1] <= cluster_tol) ++j;
        const std::size_t alg = j - i;
        const double mean = std::accumulate(real_vals.begin() + static_cast<std::ptrdiff_t>(i),
                                            real_vals.begin() + static_cast<std::ptrdiff_t>(j), 0.0) /
                            static_cast<double>(alg);

        auto vecs = nullspace(shifted(m, mean));
        std::vector<double> vec_vals(vecs.size(), mean);
        if (vecs.size() != alg && alg > 1) {
            // Nearly coincident but distinct eigenvalues: resolve members one by one.
            std::vector<std::vector<double>> split;
            std::vector<double> split_vals;
            for (std::size_t k = i; k < j; ++k) {
                auto one = nullspace(shifted(m, real_vals[k]));
                if (one.size() != 1) {
                    split.clear();
                    break;
                }
                split.push_back(one.front());
                split_vals.push_back(real_vals[k]);
            }
            if (split.size() == alg && nullspace(Mat::from_columns(split)).empty()) {
                for (std::size_t k = 0; k < alg; ++k) out.clusters.push_back({split_vals[k], true, 1, 1});
                for (std::size_t k = 0; k < alg; ++k) {
                    columns.push_back(split[k]);
                    column_values.push_back(split_vals[k]);
                    residuals_ok = residuals_ok && residual_inf(m, split[k], split_vals[k]) <= resid_tol;
                }
                i = j;
                continue;
            }
        }
        if (vecs.size() > alg) vecs.resize(alg);
        out.clusters.push_back({mean, true, alg, vecs.size()});
        for (std::size_t k = 0; k < vecs.size(); ++k) {
            residuals_ok = residuals_ok && residual_inf(m, vecs[k], vec_vals[k]) <= resid_tol;
            columns.push_back(std::move(vecs[k]));
            column_values.push_back(vec_vals[k]);
        }
        i = j;
    }

    if (complex_count == 0 && columns.size() == n && residuals_ok) {
        Mat basis = Mat::from_columns(columns);
        try {
            out.basis_condition = invert(basis).condition;
            out.real_eigenbasis = std::move(basis);
            out.eigenvalues.assign(column_values.begin(), column_values.end());
        } catch (const Error&) {
            out.basis_condition = 0.0;
        }
    }
    return out;
}

double spectral_radius(const Mat& m) {
    const auto d = eigen(m);
    double r = 0.0;
    for (const auto& v : d.eigenvalues) r = std::max(r, std::abs(v));
    return r;
}

CoopReport is_cooperative(const Mat& c) {
    require_square(c, "is_cooperative");
    const std::size_t n = c.rows();
    CoopReport rep;
    rep.worst_offdiag_margin = std::numeric_limits<double>::infinity();
    rep.worst_rowsum_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        double rowsum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            rowsum += c(j, k);
            if (j != k) rep.worst_offdiag_margin = std::min(rep.worst_offdiag_margin, c(j, k));
        }
        rep.worst_rowsum_margin = std::max(rep.worst_rowsum_margin, rowsum);
    }
    rep.is_cooperative = rep.worst_offdiag_margin >= -kAlgTol && rep.worst_rowsum_margin <= kAlgTol;
    rep.strict_level = std::min(rep.worst_offdiag_margin, -rep.worst_rowsum_margin);
    return rep;
}

MMatrixReport is_m_matrix(const Mat& q) {
    require_square(q, "is_m_matrix");
    const std::size_t n = q.rows();
    MMatrixReport rep;
    rep.offdiag_nonpositive = true;
    rep.s = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        rep.s = std::max(rep.s, q(j, j));
        for (std::size_t k = 0; k < n; ++k)
            if (j != k && q(j, k) > kAlgTol) rep.offdiag_nonpositive = false;
    }
    rep.x = shifted(-1.0 * q, -rep.s);  // s I - Q
    rep.spectral_radius = spectral_radius(rep.x);
    rep.is_m_matrix = rep.offdiag_nonpositive && rep.spectral_radius < rep.s - kAlgTol;
    if (rep.is_m_matrix) {
        const Mat inv = invert(q).inverse;
        rep.inverse_nonnegative = std::all_of(inv.data().begin(), inv.data().end(),
                                              [](double v) { return v >= -kAlgTol; });
    }
    return rep;
}

Mat conjugate(const Mat& c, const Mat& q) {
    require_square(c, "conjugate");
    require_square(q, "conjugate");
    if (c.rows() != q.rows()) throw Error(ErrorCode::DimensionMismatch, "conjugate");
    const Mat p = invert(q, 1e12).inverse;
    return p * c * q;
}

FluxReport flux_condition_orthant(const Mat& c, std::size_t samples, std::uint64_t seed) {
    require_square(c, "flux_condition_orthant");
    const std::size_t n = c.rows();
    FluxReport rep;
    rep.holds = true;
    rep.worst.value = -std::numeric_limits<double>::infinity();

    auto check = [&](const std::vector<double>& u, const std::vector<double>& p, double shift) {
        const auto cu = c * u;
        double v = 0.0;
        for (std::size_t j = 0; j < n; ++j) v += p[j] * cu[j];
        ++rep.samples_checked;
        if (v > rep.worst.value) rep.worst = {u, p, shift, v};
        if (v > kAlgTol) rep.holds = false;
    };

    // Boundary point of s*1 + R^m_- with zero set `zero` (relative to s) and
    // every other coordinate at s - 1; normals: each active axis and their sum.
    auto face = [&](const std::vector<bool>& zero, double shift) {
        std::vector<double> u(n);
        for (std::size_t k = 0; k < n; ++k) u[k] = zero[k] ? shift : shift - 1.0;
        std::vector<double> sum(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (!zero[j]) continue;
            std::vector<double> p(n, 0.0);
            p[j] = 1.0;
            sum[j] = 1.0;
            check(u, p, shift);
        }
        check(u, sum, shift);
    };

    for (double shift : {0.0, 1.0}) {
        if (n <= 8) {
            for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
                std::vector<bool> zero(n);
                for (std::size_t k = 0; k < n; ++k) zero[k] = ((mask >> k) & 1u) != 0;
                face(zero, shift);
            }
        } else {
            for (std::size_t k = 0; k < n; ++k) {
                std::vector<bool> single(n, false), all_but(n, true);
                single[k] = true;
                all_but[k] = false;
                face(single, shift);
                face(all_but, shift);
            }
            face(std::vector<bool>(n, true), shift);
        }
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t s = 0; s < samples; ++s) {
        const double shift = unit(rng) < 0.5 ? 0.0 : unit(rng);
        std::vector<bool> zero(n);
        bool any = false;
        for (std::size_t k = 0; k < n; ++k) any = (zero[k] = unit(rng) < 0.5) || any;
        if (!any) zero[static_cast<std::size_t>(unit(rng) * static_cast<double>(n)) % n] = true;
        std::vector<double> u(n), p(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            u[k] = zero[k] ? shift : shift - 2.0 * unit(rng);
            if (zero[k]) p[k] = unit(rng) + 1e-3;
        }
        check(u, p, shift);
    }
    return rep;
}

}  // namespace invcone
