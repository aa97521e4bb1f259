#pragma once
// Search for a change of unknowns u = Q v that diagonalizes the first-order
// couplings, keeps the rows of P = Q^{-1} nonnegative and makes P C Q
// cooperative. The resulting cone {u : (P u)_j <= 0, j < k} is invariant.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "invcone/algebra.hpp"
#include "invcone/mat.hpp"
#include "invcone/system.hpp"

namespace invcone {

inline constexpr std::uint64_t kDefaultSeed = 20240601;

/// ||B^(i) B^(j) - B^(j) B^(i)||_max <= tol * (1 + ||B^(i)|| ||B^(j)||) for all pairs.
bool commute_check(const EllipticSystem& sys);

struct CertificateChecks {
    bool diagonalized = false;
    bool p_rows_nonneg = false;
    bool conj_coop = false;

    int passed() const noexcept { return int(diagonalized) + int(p_rows_nonneg) + int(conj_coop); }
};

struct ConeCertificate {
    Mat q;
    Mat p;
    std::size_t k = 0;                        // active rows of P
    std::vector<std::vector<double>> betas;   // betas[i][j], i < n, j < k
    CertificateChecks checks;
};

struct CommonEigenvector {
    std::vector<double> vector;  // unit max-norm, positive leading entry
    std::vector<double> betas;   // eigenvalue for each B^(i)
};

enum class SynthesisStatus { found, no_common_basis, search_exhausted };

struct SearchStats {
    std::size_t common_eigenvectors = 0;
    std::size_t candidates = 0;
    std::size_t subsets = 0;
    std::size_t sign_patterns = 0;
    std::size_t completions = 0;
    bool repeated_eigenspace = false;   // only RREF representatives were searched
    std::uint64_t seed = kDefaultSeed;
};

struct SynthesisResult {
    SynthesisStatus status = SynthesisStatus::search_exhausted;
    std::optional<ConeCertificate> certificate;
    CertificateChecks best_checks;      // of the best rejected candidate
    std::string failed_condition;       // first failing check of that candidate
    std::string note;
    SearchStats stats;

    bool found() const noexcept { return status == SynthesisStatus::found; }
};

/// Common real eigenvectors of all B^(i), read off a generic combination
/// sum_i t_i B^(i) for two seeded draws of t. Empty when the draws disagree.
/// Sorted lexicographically by (beta^(1), ..., beta^(n)).
std::vector<CommonEigenvector> common_eigenvectors(const EllipticSystem& sys, std::uint64_t seed,
                                                   bool* repeated = nullptr, bool* draws_agree = nullptr);

/// Full cone (k = m).
SynthesisResult synthesize_full_cone(const EllipticSystem& sys, std::uint64_t seed = kDefaultSeed);

/// Largest k (from m down to 1) for which the first-k-row conditions hold;
/// k = m reproduces synthesize_full_cone.
SynthesisResult synthesize_partial_cone(const EllipticSystem& sys, std::uint64_t seed = kDefaultSeed);

struct CoopScaling {
    bool ok = false;
    bool literal = false;        // cooperative without rescaling
    std::vector<double> d;       // positive; D^{-1} K D is cooperative
};

/// Positive diagonal D with D^{-1} K D cooperative, if one is found.
/// Off-diagonal signs are rescaling invariant; the row sums need K d <= 0.
CoopScaling cooperative_rescaling(const Mat& k);

struct CertificateValidation {
    bool ok = false;
    double inverse_residual = 0.0;   // ||Q P - I||_max
    double eigen_residual = 0.0;     // max_{i, j<k} ||B q_j - beta q_j||_inf
    double row_residual = 0.0;       // first k rows of P B Q vs [diag | 0]
    double min_p_entry = 0.0;        // over the first k rows
    double zero_block = 0.0;         // max |entry| of the k x (m-k) block of P C Q
    CoopScaling coop;
    std::vector<std::string> failures;
};

/// Independent re-check of every certificate invariant. The cooperativity
/// test accepts Q D for any positive diagonal D (same cone).
CertificateValidation validate_certificate(const EllipticSystem& sys, const ConeCertificate& cert);

/// Builds a certificate record from a user-supplied cone (P, k) with Q = P^{-1}.
/// Checks are filled in by validation, and betas from the diagonal of P B Q.
ConeCertificate certificate_from_cone(const EllipticSystem& sys, const Mat& p, std::size_t k);

std::string to_string(SynthesisStatus s);

}  // namespace invcone
