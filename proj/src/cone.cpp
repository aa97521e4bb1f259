#include "invcone/cone.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "invcone/error.hpp"

namespace invcone {

namespace {

double dotv(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double max_abs_v(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

Mat shifted(const Mat& m, double lambda) {
    Mat a = m;
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) -= lambda;
    return a;
}

/// Orthonormal completion of span(vs) to R^m by Gram-Schmidt over e_1..e_m;
/// returned vectors are rescaled to unit max-norm with a positive lead.
std::vector<std::vector<double>> orthogonal_complement(const std::vector<std::vector<double>>& vs, std::size_t m) {
    std::vector<std::vector<double>> ortho;
    auto project_out = [&](std::vector<double>& w) {
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : ortho) {
                const double a = dotv(q, w);
                for (std::size_t i = 0; i < m; ++i) w[i] -= a * q[i];
            }
    };
    auto push = [&](std::vector<double> w) {
        project_out(w);
        const double nrm = std::sqrt(dotv(w, w));
        if (nrm < 1e-6) return false;
        for (double& x : w) x /= nrm;
        ortho.push_back(std::move(w));
        return true;
    };
    for (const auto& v : vs) push(v);
    const std::size_t base = ortho.size();
    for (std::size_t e = 0; e < m && ortho.size() < m; ++e) {
        std::vector<double> w(m, 0.0);
        w[e] = 1.0;
        push(std::move(w));
    }
    std::vector<std::vector<double>> out(ortho.begin() + static_cast<std::ptrdiff_t>(base), ortho.end());
    for (auto& w : out) normalize_max(w);
    return out;
}

struct Candidate {
    CertificateChecks checks;
    std::optional<ConeCertificate> cert;
};

std::string first_failure(const CertificateChecks& c) {
    if (!c.diagonalized) return "diagonalized";
    if (!c.p_rows_nonneg) return "P_rows_nonneg";
    if (!c.conj_coop) return "conj_coop";
    return "";
}

Candidate evaluate_candidate(const EllipticSystem& sys, const std::vector<std::vector<double>>& columns,
                             std::size_t k) {
    Candidate out;
    const std::size_t m = sys.m;
    Mat q = Mat::from_columns(columns);
    Mat p;
    try {
        p = invert(q).inverse;
    } catch (const Error&) {
        return out;
    }
    const double qp_scale = std::max(1.0, q.max_abs() * p.max_abs());

    bool diag = true;
    std::vector<std::vector<double>> betas(sys.n, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < sys.n; ++i) {
        const Mat j = p * sys.b[i] * q;
        const double tol = kAlgTol * std::max(1.0, sys.b[i].max_abs()) * qp_scale;
        for (std::size_t r = 0; r < k; ++r) {
            betas[i][r] = j(r, r);
            for (std::size_t c = 0; c < m; ++c)
                if (c != r && std::fabs(j(r, c)) > tol) diag = false;
            for (std::size_t rr = 0; rr < m; ++rr)
                if (rr != r && std::fabs(j(rr, r)) > tol) diag = false;
        }
    }
    out.checks.diagonalized = diag;

    bool nonneg = true;
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < m; ++c)
            if (p(r, c) < -kAlgTol) nonneg = false;
    out.checks.p_rows_nonneg = nonneg;

    const Mat chat = p * sys.c * q;
    Mat block(k, k);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c) block(r, c) = chat(r, c);
    bool zero_ok = true;
    const double ztol = kAlgTol * std::max(1.0, sys.c.max_abs()) * qp_scale;
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = k; c < m; ++c)
            if (std::fabs(chat(r, c)) > ztol) zero_ok = false;
    const CoopScaling scaling = cooperative_rescaling(block);
    out.checks.conj_coop = zero_ok && scaling.ok;

    if (out.checks.passed() == 3) {
        if (!scaling.literal) {
            for (std::size_t c = 0; c < k; ++c) {
                for (std::size_t r = 0; r < m; ++r) q(r, c) *= scaling.d[c];
                for (std::size_t r = 0; r < m; ++r) p(c, r) /= scaling.d[c];
            }
        }
        out.cert = ConeCertificate{std::move(q), std::move(p), k, std::move(betas), out.checks};
    }
    return out;
}

struct SearchState {
    SynthesisResult result;
    bool have_best = false;

    void consider(Candidate& cand) {
        ++result.stats.candidates;
        if (cand.cert) {
            result.status = SynthesisStatus::found;
            result.certificate = std::move(cand.cert);
            return;
        }
        if (!have_best || cand.checks.passed() > result.best_checks.passed()) {
            result.best_checks = cand.checks;
            result.failed_condition = first_failure(cand.checks);
            have_best = true;
        }
    }
};

bool search_k(const EllipticSystem& sys, const std::vector<CommonEigenvector>& common, std::size_t k,
              SearchState& state) {
    const std::size_t r = common.size();
    const std::size_t m = sys.m;
    // Lexicographic k-subsets of the common eigenvectors.
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        ++state.result.stats.subsets;
        std::vector<std::vector<double>> chosen;
        std::vector<bool> used(r, false);
        for (std::size_t i : idx) {
            chosen.push_back(common[i].vector);
            used[i] = true;
        }

        std::vector<std::vector<std::vector<double>>> completions;
        if (k < m) {
            std::vector<std::vector<double>> all, rest;
            for (std::size_t i = 0; i < r; ++i) {
                all.push_back(common[i].vector);
                if (!used[i]) rest.push_back(common[i].vector);
            }
            auto with_rest = rest;
            for (auto& w : orthogonal_complement(all, m)) with_rest.push_back(std::move(w));
            completions.push_back(std::move(with_rest));
            auto plain = orthogonal_complement(chosen, m);
            if (plain != completions.front()) completions.push_back(std::move(plain));
        } else {
            completions.emplace_back();
        }

        for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << k); ++pattern) {
            ++state.result.stats.sign_patterns;
            std::vector<std::vector<double>> cols = chosen;
            for (std::size_t j = 0; j < k; ++j)
                if ((pattern >> j) & 1u)
                    for (double& x : cols[j]) x = -x;
            for (const auto& completion : completions) {
                ++state.result.stats.completions;
                auto full = cols;
                full.insert(full.end(), completion.begin(), completion.end());
                if (full.size() != m) continue;
                Candidate cand = evaluate_candidate(sys, full, k);
                state.consider(cand);
                if (state.result.found()) return true;
            }
        }

        std::size_t pos = k;
        while (pos > 0 && idx[pos - 1] == r - k + (pos - 1)) --pos;
        if (pos == 0) break;
        ++idx[pos - 1];
        for (std::size_t i = pos; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
    return false;
}

SynthesisResult run_search(const EllipticSystem& sys, std::uint64_t seed, bool partial) {
    sys.validate();
    SearchState state;
    state.result.stats.seed = seed;
    bool repeated = false, agree = true;
    const auto common = common_eigenvectors(sys, seed, &repeated, &agree);
    state.result.stats.common_eigenvectors = common.size();
    state.result.stats.repeated_eigenspace = repeated;
    if (repeated)
        state.result.note = "repeated eigenvalues: only the computed eigenspace representatives and their sign flips were searched";

    if (!agree || common.empty() || (!partial && common.size() < sys.m)) {
        state.result.status = SynthesisStatus::no_common_basis;
        state.result.failed_condition = "diagonalized";
        if (!agree) state.result.note = "generic combinations disagree on the common eigenvectors";
        else if (common.empty()) state.result.note = "no common real eigenvector";
        else state.result.note = "common real eigenvectors span only " + std::to_string(common.size()) + " of " +
                                 std::to_string(sys.m) + " dimensions";
        return state.result;
    }

    const std::size_t kmax = std::min(common.size(), sys.m);
    const std::size_t kmin = partial ? 1 : sys.m;
    for (std::size_t k = kmax; k >= kmin && k > 0; --k) {
        if (search_k(sys, common, k, state)) break;
    }
    if (!state.result.found()) state.result.status = SynthesisStatus::search_exhausted;
    return state.result;
}

}  // namespace

bool commute_check(const EllipticSystem& sys) {
    sys.validate();
    for (std::size_t i = 0; i < sys.n; ++i)
        for (std::size_t j = i + 1; j < sys.n; ++j) {
            const Mat& a = sys.b[i];
            const Mat& b = sys.b[j];
            const double tol = kAlgTol * (1.0 + a.max_abs() * b.max_abs());
            if (max_abs_diff(a * b, b * a) > tol) return false;
        }
    return true;
}

std::vector<CommonEigenvector> common_eigenvectors(const EllipticSystem& sys, std::uint64_t seed, bool* repeated,
                                                   bool* draws_agree) {
    sys.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.5, 1.5);
    bool rep_any = false;

    auto draw = [&]() {
        Mat t(sys.m, sys.m);
        for (std::size_t i = 0; i < sys.n; ++i) t = t + dist(rng) * sys.b[i];
        const EigenDecomp dec = eigen(t);
        std::vector<CommonEigenvector> found;
        for (const auto& cl : dec.clusters) {
            if (!cl.real) continue;
            auto vecs = nullspace(shifted(t, cl.value));
            if (vecs.size() > 1) rep_any = true;
            for (auto& v : vecs) {
                CommonEigenvector ce{v, {}};
                bool ok = true;
                for (std::size_t i = 0; i < sys.n && ok; ++i) {
                    const auto bv = sys.b[i] * std::span<const double>(v);
                    const double beta = dotv(v, bv) / dotv(v, v);
                    double res = 0.0;
                    for (std::size_t r = 0; r < v.size(); ++r) res = std::max(res, std::fabs(bv[r] - beta * v[r]));
                    ok = res <= kAlgTol * std::max(1.0, sys.b[i].max_abs()) * std::max(1.0, max_abs_v(v));
                    ce.betas.push_back(beta);
                }
                if (ok) found.push_back(std::move(ce));
            }
        }
        std::sort(found.begin(), found.end(), [](const CommonEigenvector& a, const CommonEigenvector& b) {
            if (a.betas != b.betas) return a.betas < b.betas;
            return a.vector > b.vector;
        });
        return found;
    };

    auto first = draw();
    auto second = draw();
    bool agree = first.size() == second.size();
    for (const auto& a : first) {
        if (!agree) break;
        agree = std::any_of(second.begin(), second.end(), [&](const CommonEigenvector& b) {
            double d = 0.0;
            for (std::size_t i = 0; i < a.vector.size(); ++i) d = std::max(d, std::fabs(a.vector[i] - b.vector[i]));
            return d <= 1e-6;
        });
    }
    if (repeated) *repeated = rep_any;
    if (draws_agree) *draws_agree = agree;
    if (!agree) return {};
    return first;
}

CoopScaling cooperative_rescaling(const Mat& k) {
    CoopScaling out;
    const std::size_t n = k.rows();
    if (n == 0) {
        out.ok = out.literal = true;
        return out;
    }
    const CoopReport rep = is_cooperative(k);
    if (rep.is_cooperative) {
        out.ok = out.literal = true;
        out.d.assign(n, 1.0);
        return out;
    }
    if (rep.worst_offdiag_margin < -kAlgTol) return out;

    auto accept = [&](std::vector<double> d) {
        const double dmax = *std::max_element(d.begin(), d.end());
        if (!(dmax > 0.0)) return false;
        for (double& x : d) {
            if (!(x > 1e-12 * dmax)) return false;
            x /= dmax;
        }
        Mat scaled(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) scaled(r, c) = k(r, c) * d[c] / d[r];
        if (!is_cooperative(scaled).is_cooperative) return false;
        out.ok = true;
        out.d = std::move(d);
        return true;
    };

    // -K nonsingular M-matrix: d = (-K)^{-1} 1 > 0 gives K d = -1.
    try {
        const Mat inv = invert(-1.0 * k).inverse;
        std::vector<double> ones(n, 1.0);
        if (accept(inv * std::span<const double>(ones))) return out;
    } catch (const Error&) {
    }
    // Singular case: Perron vector of the Metzler matrix K.
    const EigenDecomp dec = eigen(k);
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& cl : dec.clusters)
        if (cl.real) top = std::max(top, cl.value);
    if (top <= kAlgTol) {
        for (auto& v : nullspace(shifted(k, top)))
            if (accept(v)) return out;
    }
    return out;
}

CertificateValidation validate_certificate(const EllipticSystem& sys, const ConeCertificate& cert) {
    sys.validate();
    CertificateValidation v;
    const std::size_t m = sys.m;
    const std::size_t k = cert.k;
    if (cert.q.rows() != m || cert.q.cols() != m || cert.p.rows() != m || cert.p.cols() != m || k == 0 || k > m) {
        v.failures.push_back("shape");
        return v;
    }
    const double qp_scale = std::max(1.0, cert.q.max_abs() * cert.p.max_abs());

    v.inverse_residual = max_abs_diff(cert.q * cert.p, Mat::identity(m));
    if (v.inverse_residual > kAlgTol * qp_scale * static_cast<double>(m)) v.failures.push_back("QP=I");

    if (cert.betas.size() != sys.n) v.failures.push_back("betas shape");
    for (std::size_t i = 0; i < sys.n && i < cert.betas.size(); ++i) {
        if (cert.betas[i].size() != k) {
            v.failures.push_back("betas shape");
            break;
        }
        const Mat& b = sys.b[i];
        for (std::size_t j = 0; j < k; ++j) {
            const auto qj = cert.q.column(j);
            const auto bq = b * std::span<const double>(qj);
            double res = 0.0;
            for (std::size_t r = 0; r < m; ++r) res = std::max(res, std::fabs(bq[r] - cert.betas[i][j] * qj[r]));
            v.eigen_residual = std::max(v.eigen_residual, res / std::max(1.0, max_abs_v(qj)));
        }
        const Mat jm = cert.p * b * cert.q;
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < m; ++c) {
                const double want = c == r ? cert.betas[i][r] : 0.0;
                v.row_residual = std::max(v.row_residual, std::fabs(jm(r, c) - want) / qp_scale);
            }
        const double tol = kAlgTol * std::max(1.0, b.max_abs());
        if (v.eigen_residual > tol) v.failures.push_back("eigen residual");
        if (v.row_residual > tol) v.failures.push_back("row decoupling");
    }

    v.min_p_entry = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < m; ++c) v.min_p_entry = std::min(v.min_p_entry, cert.p(r, c));
    if (v.min_p_entry < -kAlgTol) v.failures.push_back("P rows nonnegative");

    const Mat chat = conjugate(sys.c, cert.q);
    Mat block(k, k);
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) block(r, c) = chat(r, c);
        for (std::size_t c = k; c < m; ++c) v.zero_block = std::max(v.zero_block, std::fabs(chat(r, c)));
    }
    if (v.zero_block > kAlgTol * std::max(1.0, sys.c.max_abs()) * qp_scale) v.failures.push_back("zero block");
    v.coop = cooperative_rescaling(block);
    if (!v.coop.ok) v.failures.push_back("conjugated C cooperative");

    std::sort(v.failures.begin(), v.failures.end());
    v.failures.erase(std::unique(v.failures.begin(), v.failures.end()), v.failures.end());
    v.ok = v.failures.empty();
    return v;
}

ConeCertificate certificate_from_cone(const EllipticSystem& sys, const Mat& p, std::size_t k) {
    sys.validate();
    if (p.rows() != sys.m || p.cols() != sys.m) throw Error(ErrorCode::DimensionMismatch, "cone matrix P");
    if (k == 0 || k > sys.m) throw Error(ErrorCode::InvalidCertificate, "cone row count k out of range");
    ConeCertificate cert;
    cert.p = p;
    cert.q = invert(p).inverse;
    cert.k = k;
    cert.betas.assign(sys.n, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < sys.n; ++i) {
        const Mat j = p * sys.b[i] * cert.q;
        for (std::size_t r = 0; r < k; ++r) cert.betas[i][r] = j(r, r);
    }
    const auto v = validate_certificate(sys, cert);
    auto failed = [&](const char* what) {
        return std::find(v.failures.begin(), v.failures.end(), what) != v.failures.end();
    };
    cert.checks.diagonalized = !failed("eigen residual") && !failed("row decoupling");
    cert.checks.p_rows_nonneg = !failed("P rows nonnegative");
    cert.checks.conj_coop = !failed("conjugated C cooperative") && !failed("zero block");
    return cert;
}

SynthesisResult synthesize_full_cone(const EllipticSystem& sys, std::uint64_t seed) {
    return run_search(sys, seed, false);
}

SynthesisResult synthesize_partial_cone(const EllipticSystem& sys, std::uint64_t seed) {
    return run_search(sys, seed, true);
}

std::string to_string(SynthesisStatus s) {
    switch (s) {
        case SynthesisStatus::found: return "found";
        case SynthesisStatus::no_common_basis: return "no_common_basis";
        case SynthesisStatus::search_exhausted: return "search_exhausted";
    }
    return "unknown";
}

}  // namespace invcone
